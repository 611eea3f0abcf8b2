"""Knowledge graph of ratings and aspect-based opinions.

Nodes are users, items and item aspects. Six directed relation types connect
them: like / dislike / doesNotCare (user -> aspect), belongsTo (aspect -> item)
and highRating / lowRating (user -> item). A rating record becomes one rating
edge; an aspect-opinion record becomes one user->aspect edge plus one
(deduplicated) aspect->item belongsTo edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, TextIO

import numpy as np

GRAPH_FORMAT_NAME = "aspectkg-graph"
GRAPH_FORMAT_VERSION = 1


class NodeKind(Enum):
    USER = "user"
    ITEM = "item"
    ASPECT = "aspect"


class RelationType(Enum):
    LIKE = "like"
    DISLIKE = "dislike"
    DOES_NOT_CARE = "doesNotCare"
    BELONGS_TO = "belongsTo"
    HIGH_RATING = "highRating"
    LOW_RATING = "lowRating"


# (source kind, destination kind) legal for each relation.
RELATION_SIGNATURE = {
    RelationType.LIKE: (NodeKind.USER, NodeKind.ASPECT),
    RelationType.DISLIKE: (NodeKind.USER, NodeKind.ASPECT),
    RelationType.DOES_NOT_CARE: (NodeKind.USER, NodeKind.ASPECT),
    RelationType.BELONGS_TO: (NodeKind.ASPECT, NodeKind.ITEM),
    RelationType.HIGH_RATING: (NodeKind.USER, NodeKind.ITEM),
    RelationType.LOW_RATING: (NodeKind.USER, NodeKind.ITEM),
}

RATING_RELATIONS = (RelationType.HIGH_RATING, RelationType.LOW_RATING)
OPINION_RELATIONS = (RelationType.LIKE, RelationType.DISLIKE, RelationType.DOES_NOT_CARE)


class GraphVariant(Enum):
    """Which relation families the graph admits."""

    GER = "ger"    # ratings only
    GEA = "gea"    # aspect opinions (+ belongsTo) only
    GERA = "gera"  # both

    @property
    def admitted_relations(self) -> tuple[RelationType, ...]:
        if self is GraphVariant.GER:
            return RATING_RELATIONS
        if self is GraphVariant.GEA:
            return OPINION_RELATIONS + (RelationType.BELONGS_TO,)
        return tuple(RelationType)


@dataclass(frozen=True)
class NodeId:
    kind: NodeKind
    key: str
    ordinal: int


@dataclass(frozen=True)
class Triple:
    source: NodeId
    relation: RelationType
    destination: NodeId

    def __post_init__(self):
        want = RELATION_SIGNATURE[self.relation]
        got = (self.source.kind, self.destination.kind)
        if got != want:
            raise ValueError(
                f"illegal triple: {got[0].value}-{self.relation.value}->{got[1].value}"
            )


@dataclass(frozen=True)
class RatingRecord:
    user: str
    item: str
    rating: float


@dataclass(frozen=True)
class AspectOpinionRecord:
    user: str
    item: str
    aspect: str
    polarity: float


@dataclass(frozen=True)
class RejectedRecord:
    index: int
    reason: str
    value: float


class GraphError(Exception):
    pass


def map_rating_to_relation(rating: float) -> RelationType:
    """Rating <= 3 on the 5-point scale is lowRating, otherwise highRating."""
    if not np.isfinite(rating) or rating < 1 or rating > 5:
        raise ValueError(f"rating out of [1, 5] range: {rating!r}")
    return RelationType.LOW_RATING if rating <= 3 else RelationType.HIGH_RATING


def map_polarity_to_relation(polarity: float) -> RelationType:
    """Zero polarity means doesNotCare, positive like, negative dislike."""
    if not np.isfinite(polarity):
        raise ValueError(f"non-finite opinion polarity: {polarity!r}")
    if polarity == 0:
        return RelationType.DOES_NOT_CARE
    return RelationType.LIKE if polarity > 0 else RelationType.DISLIKE


def normalize_aspect(aspect: str) -> str:
    """Aspect node identity: lowercased, whitespace-trimmed, shared across items."""
    return aspect.strip().lower()


class NodeRegistry:
    """Dense ordinal assignment for one node kind, in first-reference order."""

    def __init__(self, kind: NodeKind):
        self.kind = kind
        self.keys: list[str] = []
        self._ordinals: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self._ordinals

    def intern(self, key: str) -> int:
        ordinal = self._ordinals.get(key)
        if ordinal is None:
            ordinal = len(self.keys)
            self._ordinals[key] = ordinal
            self.keys.append(key)
        return ordinal

    def ordinal_of(self, key: str) -> int:
        try:
            return self._ordinals[key]
        except KeyError:
            raise GraphError(f"unknown {self.kind.value} key: {key!r}") from None

    def get(self, key: str) -> Optional[int]:
        return self._ordinals.get(key)

    def node(self, key: str) -> NodeId:
        return NodeId(self.kind, key, self.ordinal_of(key))

    def node_at(self, ordinal: int) -> NodeId:
        return NodeId(self.kind, self.keys[ordinal], ordinal)


class EdgeGroup:
    """Edges of one relation: parallel lists of source/destination ordinals,
    provenance record indices, and (for rating relations) rating values."""

    def __init__(self, relation: RelationType, with_values: bool):
        self.relation = relation
        self.src: list[int] = []
        self.dst: list[int] = []
        self.provenance: list[int] = []
        self.values: Optional[list[float]] = [] if with_values else None

    def __len__(self) -> int:
        return len(self.src)

    def append(self, src: int, dst: int, provenance: int, value: Optional[float] = None):
        self.src.append(src)
        self.dst.append(dst)
        self.provenance.append(provenance)
        if self.values is not None:
            self.values.append(float(value))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.src, dtype=np.int64), np.asarray(self.dst, dtype=np.int64)


class KnowledgeGraph:
    def __init__(self, variant: GraphVariant):
        self.variant = variant
        self.registries = {kind: NodeRegistry(kind) for kind in NodeKind}
        self.edges = {
            rel: EdgeGroup(rel, with_values=rel in RATING_RELATIONS)
            for rel in variant.admitted_relations
        }
        self.rejected_ratings: list[RejectedRecord] = []
        self.rejected_opinions: list[RejectedRecord] = []

    @property
    def users(self) -> NodeRegistry:
        return self.registries[NodeKind.USER]

    @property
    def items(self) -> NodeRegistry:
        return self.registries[NodeKind.ITEM]

    @property
    def aspects(self) -> NodeRegistry:
        return self.registries[NodeKind.ASPECT]

    def num_edges(self) -> int:
        return sum(len(group) for group in self.edges.values())

    def triples(self) -> Iterator[Triple]:
        for rel, group in self.edges.items():
            src_kind, dst_kind = RELATION_SIGNATURE[rel]
            src_reg, dst_reg = self.registries[src_kind], self.registries[dst_kind]
            for s, d in zip(group.src, group.dst):
                yield Triple(src_reg.node_at(s), rel, dst_reg.node_at(d))

    def edge_multiset(self) -> dict[tuple, int]:
        """Edge identities as (relation, src key, dst key) with multiplicity,
        for comparisons across variants whose ordinals differ."""
        counts: dict[tuple, int] = {}
        for rel, group in self.edges.items():
            src_kind, dst_kind = RELATION_SIGNATURE[rel]
            src_keys = self.registries[src_kind].keys
            dst_keys = self.registries[dst_kind].keys
            for s, d in zip(group.src, group.dst):
                key = (rel.value, src_keys[s], dst_keys[d])
                counts[key] = counts.get(key, 0) + 1
        return counts

    # --- per-node adjacency helpers used by recommender / explainer / service ---

    def rated_item_ordinals(self, user_ordinal: int) -> set[int]:
        seen = set()
        for rel in RATING_RELATIONS:
            group = self.edges.get(rel)
            if group is None:
                continue
            for s, d in zip(group.src, group.dst):
                if s == user_ordinal:
                    seen.add(d)
        return seen

    def rater_ordinals(self, item_ordinal: int) -> list[int]:
        """Users with a rating edge to the item, in first-edge order, deduplicated."""
        out: list[int] = []
        seen = set()
        for rel in RATING_RELATIONS:
            group = self.edges.get(rel)
            if group is None:
                continue
            for s, d in zip(group.src, group.dst):
                if d == item_ordinal and s not in seen:
                    seen.add(s)
                    out.append(s)
        return sorted(out)

    def ratings_of_item(self, item_ordinal: int) -> list[tuple[int, float]]:
        """(user ordinal, rating value) pairs for every rating edge to the item."""
        out = []
        for rel in RATING_RELATIONS:
            group = self.edges.get(rel)
            if group is None or group.values is None:
                continue
            for s, d, v in zip(group.src, group.dst, group.values):
                if d == item_ordinal:
                    out.append((s, v))
        return out

    def opinion_edges_of_user(self, user_ordinal: int) -> list[tuple[RelationType, int]]:
        """(relation, aspect ordinal) for every opinion edge of the user."""
        out = []
        for rel in OPINION_RELATIONS:
            group = self.edges.get(rel)
            if group is None:
                continue
            for s, d in zip(group.src, group.dst):
                if s == user_ordinal:
                    out.append((rel, d))
        return out

    def aspects_of_item(self, item_ordinal: int) -> set[int]:
        group = self.edges.get(RelationType.BELONGS_TO)
        if group is None:
            return set()
        return {s for s, d in zip(group.src, group.dst) if d == item_ordinal}

    def items_of_aspect(self, aspect_ordinal: int) -> set[int]:
        group = self.edges.get(RelationType.BELONGS_TO)
        if group is None:
            return set()
        return {d for s, d in zip(group.src, group.dst) if s == aspect_ordinal}


def build_graph(
    ratings: Iterable[RatingRecord],
    opinions: Iterable[AspectOpinionRecord],
    variant: GraphVariant = GraphVariant.GERA,
) -> KnowledgeGraph:
    """Construct the knowledge graph admitted by `variant`.

    Duplicate (user, item) ratings keep the last occurrence. Exactly duplicated
    opinion tuples collapse to one edge; same (user, item, aspect) with a
    different polarity stays a separate edge. belongsTo edges are deduplicated
    per (aspect, item) pair. Invalid records are collected, not fatal.
    """
    ratings = list(ratings)
    opinions = list(opinions)
    graph = KnowledgeGraph(variant)

    if variant in (GraphVariant.GER, GraphVariant.GERA):
        last_occurrence: dict[tuple[str, str], int] = {}
        for idx, rec in enumerate(ratings):
            last_occurrence[(rec.user, rec.item)] = idx
        for idx, rec in enumerate(ratings):
            if last_occurrence[(rec.user, rec.item)] != idx:
                continue
            try:
                rel = map_rating_to_relation(rec.rating)
            except ValueError as exc:
                graph.rejected_ratings.append(RejectedRecord(idx, str(exc), rec.rating))
                continue
            u = graph.users.intern(rec.user)
            i = graph.items.intern(rec.item)
            graph.edges[rel].append(u, i, idx, rec.rating)

    if variant in (GraphVariant.GEA, GraphVariant.GERA):
        seen_tuples: set[tuple[str, str, str, float]] = set()
        seen_belongs: set[tuple[int, int]] = set()
        for idx, rec in enumerate(opinions):
            aspect_key = normalize_aspect(rec.aspect)
            if not aspect_key:
                graph.rejected_opinions.append(
                    RejectedRecord(idx, "empty aspect key", rec.polarity)
                )
                continue
            try:
                rel = map_polarity_to_relation(rec.polarity)
            except ValueError as exc:
                graph.rejected_opinions.append(RejectedRecord(idx, str(exc), rec.polarity))
                continue
            tup = (rec.user, rec.item, aspect_key, rec.polarity)
            if tup in seen_tuples:
                continue
            seen_tuples.add(tup)
            u = graph.users.intern(rec.user)
            a = graph.aspects.intern(aspect_key)
            i = graph.items.intern(rec.item)
            graph.edges[rel].append(u, a, idx)
            if (a, i) not in seen_belongs:
                seen_belongs.add((a, i))
                graph.edges[RelationType.BELONGS_TO].append(a, i, idx)

    return graph


@dataclass
class GraphStats:
    user_count: int
    item_count: int
    rating_count: int
    aspect_opinion_count: int

    @property
    def rating_sparsity(self) -> float:
        denom = self.user_count * self.item_count
        return self.rating_count / denom if denom else 0.0

    def to_dict(self) -> dict:
        return {
            "users": self.user_count,
            "items": self.item_count,
            "ratings": self.rating_count,
            "aspectOpinions": self.aspect_opinion_count,
            "ratingSparsity": self.rating_sparsity,
        }


def graph_stats(
    ratings: Iterable[RatingRecord], opinions: Iterable[AspectOpinionRecord]
) -> GraphStats:
    """Dataset-level counts: distinct users/items across both record lists,
    total ratings and total opinions, plus rating sparsity."""
    users: set[str] = set()
    items: set[str] = set()
    n_ratings = 0
    n_opinions = 0
    for rec in ratings:
        users.add(rec.user)
        items.add(rec.item)
        n_ratings += 1
    for rec in opinions:
        users.add(rec.user)
        items.add(rec.item)
        n_opinions += 1
    return GraphStats(len(users), len(items), n_ratings, n_opinions)


# --- serialization -----------------------------------------------------------
#
# Line-oriented UTF-8 format, version-headed, exact round-trip:
#
#   aspectkg-graph <version> <variant>
#   nodes <kind> <count>         (then one key per line)
#   edges <relation> <count>     (then "src dst provenance [rating]" per line)
#
# Node keys cannot contain tab or newline (they come from tab-separated files).
# Rating values are serialized with repr() so floats round-trip bit-exactly.


def save_graph(graph: KnowledgeGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _write_graph(graph, fh)


def _write_graph(graph: KnowledgeGraph, fh: TextIO) -> None:
    fh.write(f"{GRAPH_FORMAT_NAME} {GRAPH_FORMAT_VERSION} {graph.variant.value}\n")
    for kind in NodeKind:
        registry = graph.registries[kind]
        fh.write(f"nodes {kind.value} {len(registry)}\n")
        for key in registry.keys:
            fh.write(key + "\n")
    for rel in graph.variant.admitted_relations:
        group = graph.edges[rel]
        fh.write(f"edges {rel.value} {len(group)}\n")
        if group.values is not None:
            for s, d, p, v in zip(group.src, group.dst, group.provenance, group.values):
                fh.write(f"{s}\t{d}\t{p}\t{v!r}\n")
        else:
            for s, d, p in zip(group.src, group.dst, group.provenance):
                fh.write(f"{s}\t{d}\t{p}\n")


def load_graph(path) -> KnowledgeGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return _read_graph(fh)


def _read_graph(fh: TextIO) -> KnowledgeGraph:
    header = fh.readline().rstrip("\n").split(" ")
    if len(header) != 3 or header[0] != GRAPH_FORMAT_NAME:
        raise GraphError("not an aspectkg graph file")
    if header[1] != str(GRAPH_FORMAT_VERSION):
        raise GraphError(f"unsupported graph format version {header[1]}")
    graph = KnowledgeGraph(GraphVariant(header[2]))

    for kind in NodeKind:
        tag, kind_name, count = _read_section(fh, "nodes")
        if kind_name != kind.value:
            raise GraphError(f"expected nodes {kind.value}, found {kind_name}")
        registry = graph.registries[kind]
        for _ in range(count):
            line = fh.readline()
            if not line:
                raise GraphError("truncated graph file in node section")
            registry.intern(line.rstrip("\n"))

    for rel in graph.variant.admitted_relations:
        tag, rel_name, count = _read_section(fh, "edges")
        if rel_name != rel.value:
            raise GraphError(f"expected edges {rel.value}, found {rel_name}")
        group = graph.edges[rel]
        for _ in range(count):
            line = fh.readline()
            if not line:
                raise GraphError("truncated graph file in edge section")
            parts = line.rstrip("\n").split("\t")
            try:
                if group.values is not None:
                    s, d, p, v = parts
                    group.append(int(s), int(d), int(p), float(v))
                else:
                    s, d, p = parts
                    group.append(int(s), int(d), int(p))
            except ValueError as exc:
                raise GraphError(f"malformed edge line: {line.rstrip()!r}") from exc
    return graph


def _read_section(fh: TextIO, expected_tag: str) -> tuple[str, str, int]:
    line = fh.readline()
    if not line:
        raise GraphError("truncated graph file: missing section header")
    parts = line.rstrip("\n").split(" ")
    if len(parts) != 3 or parts[0] != expected_tag:
        raise GraphError(f"malformed section header: {line.rstrip()!r}")
    try:
        count = int(parts[2])
    except ValueError as exc:
        raise GraphError(f"malformed section count: {line.rstrip()!r}") from exc
    return parts[0], parts[1], count
