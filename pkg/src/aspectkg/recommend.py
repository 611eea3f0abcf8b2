"""Top-N recommendation and user neighborhoods by cosine similarity.

Complex embeddings are flattened to real vectors [re..., im...] so cosine is
real-valued and norm-consistent. Ties break by ascending node ordinal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingModel
from .graph import KnowledgeGraph, NodeId, NodeKind


@dataclass
class RankedList:
    subject: NodeId
    cutoff: int
    entries: list[tuple[NodeId, float]]  # scores non-increasing

    def __len__(self) -> int:
        return len(self.entries)

    def keys(self) -> list[str]:
        return [node.key for node, _ in self.entries]


def flatten(vector: np.ndarray) -> np.ndarray:
    """[re..., im...] concatenation; preserves the Euclidean norm."""
    return np.concatenate([np.asarray(vector).real, np.asarray(vector).imag])


def flatten_table(table: np.ndarray) -> np.ndarray:
    return np.concatenate([table.real, table.imag], axis=-1)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _cosine_to_all(query: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Cosine of one flattened query against every row; zero-norm rows get 0."""
    qn = np.linalg.norm(query)
    norms = np.linalg.norm(table, axis=1)
    scores = np.zeros(table.shape[0], dtype=np.float64)
    if qn == 0.0:
        return scores
    ok = norms > 0.0
    scores[ok] = (table[ok] @ query) / (norms[ok] * qn)
    return scores


def _ranked_order(scores: np.ndarray) -> np.ndarray:
    """Indices sorted by descending score, ties by ascending index."""
    return np.lexsort((np.arange(len(scores)), -scores))


def recommend_top_n(
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    user: NodeId,
    n: int,
    exclude_seen: bool = True,
) -> RankedList:
    """Rank item nodes by cosine to the user's embedding; with exclude_seen,
    items the user has any training rating edge to are dropped first."""
    if n < 1:
        raise ValueError("n must be positive")
    user_vec = flatten(model.entity_vector(NodeKind.USER, user.ordinal))
    item_table = flatten_table(model.kind_table(NodeKind.ITEM)).astype(np.float64)
    scores = _cosine_to_all(user_vec.astype(np.float64), item_table)

    candidates = np.arange(len(scores))
    if exclude_seen:
        seen = graph.rated_item_ordinals(user.ordinal)
        if seen:
            keep = np.array([o not in seen for o in candidates])
            candidates = candidates[keep]
    order = candidates[_ranked_order(scores[candidates])][:n]
    entries = [(graph.items.node_at(int(o)), float(scores[o])) for o in order]
    return RankedList(subject=user, cutoff=n, entries=entries)


def nearest_users(
    model: EmbeddingModel, graph: KnowledgeGraph, user: NodeId, k: int
) -> list[tuple[NodeId, float]]:
    """Top-k other users by cosine over flattened embeddings; the subject
    itself is excluded."""
    if k < 1:
        raise ValueError("k must be positive")
    user_vec = flatten(model.entity_vector(NodeKind.USER, user.ordinal))
    table = flatten_table(model.kind_table(NodeKind.USER)).astype(np.float64)
    scores = _cosine_to_all(user_vec.astype(np.float64), table)
    candidates = np.array([o for o in range(len(scores)) if o != user.ordinal])
    if len(candidates) == 0:
        return []
    order = candidates[_ranked_order(scores[candidates])][:k]
    return [(graph.users.node_at(int(o)), float(scores[o])) for o in order]
