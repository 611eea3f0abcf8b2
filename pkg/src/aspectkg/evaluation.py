"""Ranking evaluation: k-fold cross-validation, precision/recall/F1/nDCG at
cutoffs, non-personalized baselines, and Bonferroni-corrected paired t-tests.

A method is evaluated per user on that user's test-fold items only: the
scorer orders the user's held-out items and the top-k is compared against the
relevant ones (test rating > 3, the same Likert cut used for graph building).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy import stats as scipy_stats

from . import embedding, recommend
from .graph import (
    AspectOpinionRecord,
    GraphVariant,
    KnowledgeGraph,
    NodeId,
    NodeKind,
    RatingRecord,
    build_graph,
)

RELEVANCE_THRESHOLD = 3.0
DEFAULT_KS = (10, 20, 30)
BASELINE_MODELS = ("rdm", "pop")
VARIANT_MODELS = {"ger": GraphVariant.GER, "gea": GraphVariant.GEA, "gera": GraphVariant.GERA}


@dataclass
class FoldPlan:
    fold_count: int
    assignment: np.ndarray  # fold index per rating record index
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def kfold_split(ratings: Sequence[RatingRecord], fold_count: int, seed: int) -> FoldPlan:
    """Per-user stratified assignment: each user's record indices are shuffled
    with the seed, then dealt round-robin across folds starting at fold 0."""
    if fold_count < 2:
        raise ValueError("fold_count must be at least 2")
    rng = np.random.default_rng(seed)
    per_user: dict[str, list[int]] = {}
    for idx, rec in enumerate(ratings):
        per_user.setdefault(rec.user, []).append(idx)
    assignment = np.empty(len(ratings), dtype=np.int64)
    for user in per_user:
        indices = np.array(per_user[user], dtype=np.int64)
        rng.shuffle(indices)
        for slot, idx in enumerate(indices):
            assignment[idx] = slot % fold_count
    return FoldPlan(fold_count, assignment, seed)


def relevance_labels(test_records: Sequence[RatingRecord]) -> set[str]:
    """Items whose test rating exceeds the Likert cut; duplicates keep the
    last occurrence, matching graph construction."""
    last: dict[str, float] = {}
    for rec in test_records:
        last[rec.item] = rec.rating
    return {item for item, rating in last.items() if rating > RELEVANCE_THRESHOLD}


# --- scorers ------------------------------------------------------------------


class Scorer(Protocol):
    def score(self, user: str, items: Sequence[str]) -> np.ndarray: ...


def _stable_unit_float(*parts) -> float:
    """Uniform in [0, 1) from a stable hash; reproducible across runs and
    independent of evaluation order."""
    digest = hashlib.blake2b(
        "\x1f".join(str(p) for p in parts).encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little") / 2.0**64


class RandomScorer:
    """Seeded uniform score per (user, item) pair."""

    def __init__(self, seed: int):
        self.seed = seed

    def score(self, user: str, items: Sequence[str]) -> np.ndarray:
        return np.array([_stable_unit_float(self.seed, user, item) for item in items])


class PopularityScorer:
    """Constant per-item score: the item's rating count in the training split."""

    def __init__(self, train_ratings: Sequence[RatingRecord]):
        self.counts: dict[str, int] = {}
        for rec in train_ratings:
            self.counts[rec.item] = self.counts.get(rec.item, 0) + 1

    def score(self, user: str, items: Sequence[str]) -> np.ndarray:
        return np.array([float(self.counts.get(item, 0)) for item in items])


class EmbeddingScorer:
    """Cosine between the user's and each item's flattened embedding; entities
    missing from the fold's training graph score 0 (cold), counted in
    diagnostics."""

    def __init__(self, model: embedding.EmbeddingModel, graph: KnowledgeGraph):
        self.model = model
        self.graph = graph
        self.cold_items = 0
        self.cold_users = 0

    def score(self, user: str, items: Sequence[str]) -> np.ndarray:
        scores = np.zeros(len(items))
        user_ord = self.graph.users.get(user)
        if user_ord is None:
            self.cold_users += 1
            return scores
        user_vec = recommend.flatten(self.model.entity_vector(NodeKind.USER, user_ord))
        for pos, item in enumerate(items):
            item_ord = self.graph.items.get(item)
            if item_ord is None:
                self.cold_items += 1
                continue
            item_vec = recommend.flatten(self.model.entity_vector(NodeKind.ITEM, item_ord))
            scores[pos] = recommend.cosine(user_vec, item_vec)
        return scores


def rank_test_items(
    scorer: Scorer, user: str, test_items: Sequence[str], item_order: dict[str, int]
) -> recommend.RankedList:
    """Order the user's test items by descending score; ties break by the
    item's canonical ordinal (first appearance in the full record list)."""
    if not test_items:
        raise ValueError("test_items must be non-empty")
    scores = np.asarray(scorer.score(user, test_items), dtype=np.float64)
    order = sorted(range(len(test_items)), key=lambda i: (-scores[i], item_order[test_items[i]]))
    entries = [
        (NodeId(NodeKind.ITEM, test_items[i], item_order[test_items[i]]), float(scores[i]))
        for i in order
    ]
    return recommend.RankedList(
        subject=NodeId(NodeKind.USER, user, -1), cutoff=len(test_items), entries=entries
    )


# --- metrics ------------------------------------------------------------------


def metrics_at_k(
    ranked, relevant: set[str], k: int
) -> tuple[float, float, float, float]:
    """(precision, recall, f1, ndcg) of the top min(k, len(ranked)) entries,
    with binary gains and log2(rank+1) discounts. `ranked` is a RankedList
    or a plain sequence of item keys."""
    if k < 1:
        raise ValueError("k must be positive")
    keys = ranked.keys() if isinstance(ranked, recommend.RankedList) else list(ranked)
    depth = min(k, len(keys))
    top = keys[:depth]
    hits = sum(1 for item in top if item in relevant)
    precision = hits / depth if depth else 0.0
    recall = hits / len(relevant) if relevant else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    dcg = sum(1.0 / math.log2(pos + 2) for pos, item in enumerate(top) if item in relevant)
    ideal_depth = min(k, len(relevant))
    idcg = sum(1.0 / math.log2(pos + 2) for pos in range(ideal_depth))
    ndcg = dcg / idcg if idcg > 0 else 0.0
    return precision, recall, f1, ndcg


# --- significance -------------------------------------------------------------


@dataclass
class PairedTestResult:
    t_statistic: float
    p_value: float
    adjusted_p: float
    significant: bool
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "t": self.t_statistic,
            "p": self.p_value,
            "adjustedP": self.adjusted_p,
            "significant": self.significant,
            "degenerate": self.degenerate,
        }


def paired_bonferroni(
    per_user_a: Sequence[float], per_user_b: Sequence[float], comparisons: int
) -> PairedTestResult:
    """Two-sided paired t-test with Bonferroni adjustment over `comparisons`
    family members; significant iff adjusted p < 0.05."""
    a = np.asarray(per_user_a, dtype=np.float64)
    b = np.asarray(per_user_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 paired samples")
    diff = a - b
    sd = diff.std(ddof=1)
    if sd == 0.0:
        if diff.mean() == 0.0:
            return PairedTestResult(0.0, 1.0, 1.0, False)
        t_stat = math.inf if diff.mean() > 0 else -math.inf
        return PairedTestResult(t_stat, 0.0, 0.0, True, degenerate=True)
    t_stat = diff.mean() / (sd / math.sqrt(n))
    p = 2.0 * scipy_stats.t.sf(abs(t_stat), df=n - 1)
    adjusted = min(1.0, comparisons * p)
    return PairedTestResult(float(t_stat), float(p), float(adjusted), adjusted < 0.05)


# --- the full protocol ---------------------------------------------------------


@dataclass
class FoldMetrics:
    fold: int
    evaluated_users: int
    means: Optional[dict[int, dict[str, float]]]  # None when no evaluable user


@dataclass
class ModelReport:
    name: str
    folds: list[FoldMetrics] = field(default_factory=list)
    per_user_f1: dict[int, list[float]] = field(default_factory=dict)
    per_user_metrics: dict[int, list[tuple[float, float, float, float]]] = field(
        default_factory=dict
    )
    cold_items: int = 0
    cold_users: int = 0

    def overall(self) -> dict[int, dict[str, float]]:
        """Means pooled over every evaluated (fold, user) sample."""
        out = {}
        for k, samples in self.per_user_metrics.items():
            if not samples:
                continue
            arr = np.asarray(samples)
            out[k] = {
                "precision": float(arr[:, 0].mean()),
                "recall": float(arr[:, 1].mean()),
                "f1": float(arr[:, 2].mean()),
                "ndcg": float(arr[:, 3].mean()),
            }
        return out


@dataclass
class MetricReport:
    ks: list[int]
    fold_count: int
    seed: int
    models: dict[str, ModelReport]
    significance: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ks": self.ks,
            "folds": self.fold_count,
            "seed": self.seed,
            "models": {
                name: {
                    "folds": [
                        {"fold": fm.fold, "evaluatedUsers": fm.evaluated_users, "means": fm.means}
                        for fm in report.folds
                    ],
                    "overall": report.overall(),
                    "coldItems": report.cold_items,
                    "coldUsers": report.cold_users,
                }
                for name, report in self.models.items()
            },
            "significance": self.significance,
        }


def _canonical_item_order(
    ratings: Sequence[RatingRecord], opinions: Sequence[AspectOpinionRecord]
) -> dict[str, int]:
    order: dict[str, int] = {}
    for rec in ratings:
        if rec.item not in order:
            order[rec.item] = len(order)
    for rec in opinions:
        if rec.item not in order:
            order[rec.item] = len(order)
    return order


def _fold_seed(seed: int, fold: int) -> int:
    return (seed * 1_000_003 + fold) & 0x7FFFFFFF


def _fold_training_records(
    ratings: Sequence[RatingRecord],
    opinions: Sequence[AspectOpinionRecord],
    test_idx: set[int],
):
    """Split one fold: training ratings, held-out test ratings, and training
    opinions with every (user, item) pair that appears in the test fold
    removed, so aspect opinions never leak the held-out interactions."""
    train_ratings = [rec for i, rec in enumerate(ratings) if i not in test_idx]
    test_records = [rec for i, rec in enumerate(ratings) if i in test_idx]
    test_pairs = {(rec.user, rec.item) for rec in test_records}
    train_opinions = [rec for rec in opinions if (rec.user, rec.item) not in test_pairs]
    return train_ratings, test_records, train_opinions


def evaluate(
    ratings: Sequence[RatingRecord],
    opinions: Sequence[AspectOpinionRecord],
    fold_plan: FoldPlan,
    ks: Sequence[int] = DEFAULT_KS,
    model_names: Sequence[str] = ("rdm", "pop", "gera"),
    training_config: Optional[embedding.TrainingConfig] = None,
    skip_users_without_relevant: bool = False,
) -> MetricReport:
    """Run the protocol: per fold, train each embedding variant on the train
    split (test-pair opinions removed to prevent leakage), rank every test
    user's held-out items with each scorer, and average metrics per user.

    Users whose test fold has no relevant item score 0 unless
    `skip_users_without_relevant` is set.
    """
    ratings = list(ratings)
    opinions = list(opinions)
    for name in model_names:
        if name not in BASELINE_MODELS and name not in VARIANT_MODELS:
            raise ValueError(f"unknown model name: {name}")
    if training_config is None:
        training_config = embedding.TrainingConfig()
    item_order = _canonical_item_order(ratings, opinions)
    ks = sorted(ks)

    reports = {name: ModelReport(name=name, per_user_f1={k: [] for k in ks},
                                 per_user_metrics={k: [] for k in ks})
               for name in model_names}

    for fold in range(fold_plan.fold_count):
        test_idx = set(fold_plan.test_indices(fold).tolist())
        train_ratings, test_records, train_opinions = _fold_training_records(
            ratings, opinions, test_idx
        )

        per_user_test: dict[str, list[RatingRecord]] = {}
        user_order: list[str] = []
        for rec in test_records:
            if rec.user not in per_user_test:
                per_user_test[rec.user] = []
                user_order.append(rec.user)
            per_user_test[rec.user].append(rec)

        scorers: dict[str, Scorer] = {}
        for name in model_names:
            if name == "rdm":
                scorers[name] = RandomScorer(_fold_seed(fold_plan.seed, fold))
            elif name == "pop":
                scorers[name] = PopularityScorer(train_ratings)
            else:
                variant = VARIANT_MODELS[name]
                graph = build_graph(train_ratings, train_opinions, variant)
                config = replace(training_config, seed=_fold_seed(training_config.seed, fold))
                model = embedding.train(graph, config)
                scorers[name] = EmbeddingScorer(model, graph)

        for name in model_names:
            scorer = scorers[name]
            report = reports[name]
            fold_samples: dict[int, list[tuple[float, float, float, float]]] = {
                k: [] for k in ks
            }
            evaluated = 0
            for user in user_order:
                records = per_user_test[user]
                items = sorted({rec.item for rec in records}, key=item_order.__getitem__)
                relevant = relevance_labels(records)
                if not relevant and skip_users_without_relevant:
                    continue
                ranked = rank_test_items(scorer, user, items, item_order)
                evaluated += 1
                for k in ks:
                    sample = metrics_at_k(ranked, relevant, k)
                    fold_samples[k].append(sample)
                    report.per_user_metrics[k].append(sample)
                    report.per_user_f1[k].append(sample[2])
            if evaluated:
                means = {
                    k: {
                        "precision": float(np.mean([s[0] for s in fold_samples[k]])),
                        "recall": float(np.mean([s[1] for s in fold_samples[k]])),
                        "f1": float(np.mean([s[2] for s in fold_samples[k]])),
                        "ndcg": float(np.mean([s[3] for s in fold_samples[k]])),
                    }
                    for k in ks
                }
            else:
                means = None
            report.folds.append(FoldMetrics(fold, evaluated, means))
            if isinstance(scorer, EmbeddingScorer):
                report.cold_items += scorer.cold_items
                report.cold_users += scorer.cold_users

    report = MetricReport(list(ks), fold_plan.fold_count, fold_plan.seed, reports)
    report.significance = _significance_verdicts(reports, ks)
    return report


def _significance_verdicts(reports: dict[str, ModelReport], ks: Sequence[int]) -> dict:
    """For each cutoff, paired-test the best-mean model against every other,
    Bonferroni-corrected for the number of comparisons at that cutoff."""
    out: dict[str, dict] = {}
    names = list(reports)
    if len(names) < 2:
        return out
    for k in ks:
        means = {}
        for name in names:
            f1s = reports[name].per_user_f1[k]
            if f1s:
                means[name] = float(np.mean(f1s))
        if len(means) < 2:
            continue
        best = max(means, key=means.get)
        comparisons = len(means) - 1
        entry = {"best": best, "meanF1": means, "tests": {}}
        for name in names:
            if name == best or name not in means:
                continue
            a = reports[best].per_user_f1[k]
            b = reports[name].per_user_f1[k]
            if len(a) != len(b) or len(a) < 2:
                continue
            entry["tests"][name] = paired_bonferroni(a, b, comparisons).to_dict()
        out[str(k)] = entry
    return out
