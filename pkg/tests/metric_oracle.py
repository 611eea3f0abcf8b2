"""Independent reference implementation of the ranking metrics, written from
the definitions with 1-based positions so index bugs in the library would not
be mirrored here."""

import math


def oracle_metrics(ranking, relevant, k):
    """(precision, recall, f1, ndcg) of the top min(k, len) of `ranking`."""
    if k < 1:
        raise ValueError("k must be positive")
    top = list(ranking)[:k]
    hits = sum(1 for item in top if item in relevant)
    precision = hits / len(top) if top else 0.0
    recall = hits / len(relevant) if relevant else 0.0
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    dcg = 0.0
    for position, item in enumerate(top, start=1):
        if item in relevant:
            dcg += 1.0 / math.log2(position + 1)
    ideal = min(k, len(relevant))
    idcg = sum(1.0 / math.log2(position + 1) for position in range(1, ideal + 1))
    ndcg = dcg / idcg if idcg > 0 else 0.0
    return precision, recall, f1, ndcg
