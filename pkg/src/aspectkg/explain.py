"""Aspect-level explanations: neighbor opinion gathering over recommended
items, summary statistics, review-text aspect highlighting, and 2D projection
of user embeddings for display.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import recommend
from .embedding import EmbeddingModel
from .graph import KnowledgeGraph, NodeId, NodeKind, RelationType

POLARITY_SIGN = {
    RelationType.LIKE: "positive",
    RelationType.DISLIKE: "negative",
    RelationType.DOES_NOT_CARE: "neutral",
}

DEFAULT_CUTOFF = 30
DEFAULT_NEIGHBOR_K = 20


class ExplanationError(ValueError):
    pass


@dataclass
class ExplanationBundle:
    """Opinions of similar users about aspects of the subject's recommended
    items, grouped per recommended item."""

    subject: NodeId
    cutoff: int
    neighbors: list[tuple[NodeId, float]]
    recommended: list[NodeId]
    per_item: dict[str, list[tuple[str, str, RelationType]]]  # item key -> (user, aspect, rel)
    subject_profile: dict[str, dict[str, int]]  # {"liked": {...}, "disliked": {...}}

    @property
    def covered(self) -> int:
        return len(self.per_item)

    def opinion_relations(self) -> list[RelationType]:
        return [rel for edges in self.per_item.values() for _, _, rel in edges]

    def distinct_aspects(self) -> set[str]:
        return {aspect for edges in self.per_item.values() for _, aspect, _ in edges}

    def to_dict(self) -> dict:
        return {
            "subject": self.subject.key,
            "cutoff": self.cutoff,
            "neighbors": [{"user": n.key, "score": s} for n, s in self.neighbors],
            "recommended": [n.key for n in self.recommended],
            "perItem": {
                item: [
                    {"user": u, "aspect": a, "relation": rel.value}
                    for u, a, rel in edges
                ]
                for item, edges in self.per_item.items()
            },
            "subjectAspectProfile": self.subject_profile,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExplanationBundle":
        return cls(
            subject=NodeId(NodeKind.USER, payload["subject"], -1),
            cutoff=payload["cutoff"],
            neighbors=[
                (NodeId(NodeKind.USER, e["user"], -1), e["score"])
                for e in payload["neighbors"]
            ],
            recommended=[NodeId(NodeKind.ITEM, k, -1) for k in payload["recommended"]],
            per_item={
                item: [
                    (e["user"], e["aspect"], RelationType(e["relation"]))
                    for e in edges
                ]
                for item, edges in payload["perItem"].items()
            },
            subject_profile=payload["subjectAspectProfile"],
        )


def _aspect_profile(graph: KnowledgeGraph, user_ordinal: int) -> dict[str, dict[str, int]]:
    liked: dict[str, int] = {}
    disliked: dict[str, int] = {}
    for rel, aspect_ord in graph.opinion_edges_of_user(user_ordinal):
        key = graph.aspects.node_at(aspect_ord).key
        if rel is RelationType.LIKE:
            liked[key] = liked.get(key, 0) + 1
        elif rel is RelationType.DISLIKE:
            disliked[key] = disliked.get(key, 0) + 1
    return {"liked": liked, "disliked": disliked}


def build_explanation(
    model: EmbeddingModel,
    graph: KnowledgeGraph,
    user: str,
    cutoff: int = DEFAULT_CUTOFF,
    neighbor_k: int = DEFAULT_NEIGHBOR_K,
    neighbors: Optional[Sequence[str]] = None,
) -> ExplanationBundle:
    """Recommend the top-cutoff items, pick the nearest `neighbor_k` users
    (or an explicit `neighbors` list of user keys), and gather every opinion
    edge a neighbor holds on an aspect that belongs to a recommended item.
    """
    if cutoff < 1:
        raise ExplanationError("cutoff must be at least 1")
    subject_ord = graph.users.ordinal_of(user)  # raises on unknown user
    subject = graph.users.node_at(subject_ord)

    ranked = recommend.recommend_top_n(model, graph, subject, cutoff)
    recommended = [node for node, _ in ranked.entries]

    if neighbors is not None:
        picked = []
        subject_vec = recommend.flatten(model.entity_vector(NodeKind.USER, subject_ord))
        for key in neighbors:
            ordinal = graph.users.ordinal_of(key)
            vec = recommend.flatten(model.entity_vector(NodeKind.USER, ordinal))
            picked.append((graph.users.node_at(ordinal), recommend.cosine(subject_vec, vec)))
    else:
        picked = recommend.nearest_users(model, graph, subject, neighbor_k)

    aspect_to_items: dict[int, list[str]] = {}
    for node in recommended:
        for aspect_ord in graph.aspects_of_item(node.ordinal):
            aspect_to_items.setdefault(aspect_ord, []).append(node.key)

    per_item: dict[str, list[tuple[str, str, RelationType]]] = {}
    for neighbor, _ in picked:
        for rel, aspect_ord in graph.opinion_edges_of_user(neighbor.ordinal):
            items = aspect_to_items.get(aspect_ord)
            if not items:
                continue
            aspect_key = graph.aspects.node_at(aspect_ord).key
            for item_key in items:
                per_item.setdefault(item_key, []).append((neighbor.key, aspect_key, rel))

    return ExplanationBundle(
        subject=subject,
        cutoff=cutoff,
        neighbors=picked,
        recommended=recommended,
        per_item=per_item,
        subject_profile=_aspect_profile(graph, subject_ord),
    )


@dataclass
class ExplanationStats:
    coverage: float
    like_over_other: float
    unique_aspects: float
    aspects_per_item: float
    bundles: int
    like_ratio_degenerate: bool = False
    pooled: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "likeOverOther": self.like_over_other,
            "uniqueAspects": self.unique_aspects,
            "aspectsPerItem": self.aspects_per_item,
            "bundles": self.bundles,
            "likeRatioDegenerate": self.like_ratio_degenerate,
            "pooled": self.pooled,
        }


def explanation_stats(bundles: Sequence[ExplanationBundle]) -> ExplanationStats:
    """Aggregate summary statistics over bundles sharing one cutoff.

    coverage is the mean per-bundle covered fraction; likeOverOther pools
    opinion counts across all bundles (0 and flagged when no non-like
    opinions exist); aspectsPerItem averages distinct aspects over every
    covered item.
    """
    if not bundles:
        raise ExplanationError("at least one bundle is required")
    cutoffs = {b.cutoff for b in bundles}
    if len(cutoffs) != 1:
        raise ExplanationError(f"bundles mix cutoffs: {sorted(cutoffs)}")
    cutoff = cutoffs.pop()

    coverage = float(np.mean([b.covered / cutoff for b in bundles]))
    likes = others = 0
    for b in bundles:
        for rel in b.opinion_relations():
            if rel is RelationType.LIKE:
                likes += 1
            else:
                others += 1
    degenerate = others == 0
    like_over_other = 0.0 if degenerate else likes / others

    unique_aspects = float(np.mean([len(b.distinct_aspects()) for b in bundles]))
    per_item_counts = [
        len({aspect for _, aspect, _ in edges})
        for b in bundles
        for edges in b.per_item.values()
    ]
    aspects_per_item = float(np.mean(per_item_counts)) if per_item_counts else 0.0

    pooled_aspects = set()
    for b in bundles:
        pooled_aspects |= b.distinct_aspects()
    pooled = {
        "likes": likes,
        "others": others,
        "distinctAspects": len(pooled_aspects),
        "coveredItems": sum(b.covered for b in bundles),
    }
    return ExplanationStats(
        coverage=coverage,
        like_over_other=like_over_other,
        unique_aspects=unique_aspects,
        aspects_per_item=aspects_per_item,
        bundles=len(bundles),
        like_ratio_degenerate=degenerate,
        pooled=pooled,
    )


# --- review highlighting --------------------------------------------------------


@dataclass
class HighlightedReview:
    text: str
    spans: list[tuple[int, int, str, str]]  # (start, end, matched key, sign)

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "spans": [
                {"start": s, "end": e, "aspect": a, "sign": sign}
                for s, e, a, sign in self.spans
            ],
        }


def _word_matches(text: str, phrase: str) -> list[tuple[int, int]]:
    pattern = r"(?<!\w)" + re.escape(phrase) + r"(?!\w)"
    return [(m.start(), m.end()) for m in re.finditer(pattern, text, re.IGNORECASE)]


def highlight_aspects(
    text: str,
    opinions: Sequence[tuple[str, RelationType]],
    synonyms: Optional[dict[str, str]] = None,
) -> HighlightedReview:
    """Mark whole-word, case-insensitive occurrences of opinion aspects in a
    review. Overlaps resolve longest-match-first, then earliest. A synonym
    lexicon (variant -> canonical aspect) extends the searchable surface
    forms; the span records the surface form that matched, its sign comes
    from the canonical aspect's opinion.
    """
    sign_of: dict[str, str] = {}
    for aspect, rel in opinions:
        sign_of.setdefault(aspect.lower(), POLARITY_SIGN[rel])

    surface_forms: dict[str, str] = {a: a for a in sign_of}
    for variant, canonical in (synonyms or {}).items():
        canonical = canonical.lower()
        if canonical in sign_of:
            surface_forms.setdefault(variant.lower(), canonical)

    candidates: list[tuple[int, int, str, str]] = []
    for form, canonical in surface_forms.items():
        for start, end in _word_matches(text, form):
            candidates.append((start, end, text[start:end], sign_of[canonical]))

    candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0]))
    accepted: list[tuple[int, int, str, str]] = []
    for cand in candidates:
        if all(cand[1] <= a[0] or cand[0] >= a[1] for a in accepted):
            accepted.append(cand)
    accepted.sort(key=lambda c: c[0])
    return HighlightedReview(text=text, spans=accepted)


# --- 2D projection ---------------------------------------------------------------


@dataclass
class Projection2D:
    coords: dict[str, tuple[float, float]]
    method: str
    fit_metadata: str

    def to_dict(self) -> dict:
        return {
            "coords": {k: [x, y] for k, (x, y) in self.coords.items()},
            "method": self.method,
            "fitMetadata": self.fit_metadata,
        }


def _fit_pca(table: np.ndarray, seed: int) -> tuple[np.ndarray, dict]:
    """Center and project onto the top-2 principal directions. Sign
    convention: each component's first nonzero loading is made positive, so
    the fit is reproducible bit-for-bit."""
    mean = table.mean(axis=0)
    centered = table - mean
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    if components.shape[0] < 2:  # fewer samples than 2: pad a zero direction
        pad = np.zeros((2 - components.shape[0], table.shape[1]))
        components = np.vstack([components, pad])
    for row in components:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    coords = centered @ components.T
    metadata = {
        "mean": mean.tolist(),
        "components": components.tolist(),
        "seed": seed,
    }
    return coords, metadata


_PROJECTORS: dict[str, Callable[[np.ndarray, int], tuple[np.ndarray, dict]]] = {
    "pca": _fit_pca,
}


def register_projector(
    name: str, fit: Callable[[np.ndarray, int], tuple[np.ndarray, dict]]
) -> None:
    """Install an alternative projector under the same contract: rows of
    flattened user embeddings in, (n, 2) coordinates plus metadata out."""
    _PROJECTORS[name] = fit


def project_users_2d(
    model: EmbeddingModel,
    users: Sequence[NodeId],
    seed: int = 0,
    method: str = "pca",
) -> Projection2D:
    """Project the given users' embeddings to the plane for display."""
    if len(users) < 2:
        raise ExplanationError("projection needs at least 2 users")
    if method not in _PROJECTORS:
        raise ExplanationError(f"unknown projector: {method}")
    table = np.stack(
        [
            recommend.flatten(model.entity_vector(NodeKind.USER, u.ordinal)).astype(
                np.float64
            )
            for u in users
        ]
    )
    coords, metadata = _PROJECTORS[method](table, seed)
    if not np.all(np.isfinite(coords)):
        raise ExplanationError("projection produced non-finite coordinates")
    return Projection2D(
        coords={u.key: (float(x), float(y)) for u, (x, y) in zip(users, coords)},
        method=method,
        fit_metadata=json.dumps(metadata, sort_keys=True),
    )
