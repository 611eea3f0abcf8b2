"""Complex-valued embeddings for graph nodes and relation types.

Every node and every admitted relation type gets a complex vector of dimension
D, all in one latent space. A triple <s, r, d> is scored by transforming both
endpoint vectors with the relation (element-wise complex product) and taking
the real part of the Hermitian inner product of the transformed pair:

    score(s, r, d) = Re(< s*r , conj(d*r) >) = sum_k Re(s_k conj(d_k)) |r_k|^2

Training minimizes a margin ranking loss against sampled negatives,

    sum_j max(margin - score(pos) + score(neg_j), 0)

by plain stochastic gradient descent over mini-batches of edges. Half of each
positive's negatives corrupt one endpoint of the true edge (fair coin per
sample), the other half draw both endpoints at random among kind-legal nodes;
collisions with true edges are not filtered.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

from .graph import (
    RELATION_SIGNATURE,
    GraphError,
    KnowledgeGraph,
    NodeKind,
    RelationType,
    Triple,
)
from .partitioning import BucketSchedule, partition_schedule

KIND_ORDER = (NodeKind.USER, NodeKind.ITEM, NodeKind.ASPECT)
KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}


class EmbeddingError(Exception):
    pass


class SamplingError(EmbeddingError):
    pass


class TrainingDiverged(EmbeddingError):
    pass


class BatchOrder(Enum):
    SHUFFLED = "shuffled"
    FILE_ORDER = "file_order"


@dataclass
class TrainingConfig:
    dimension: int = 400
    learning_rate: float = 0.01
    epochs: int = 5
    margin: float = 0.1
    negatives_per_positive: int = 10
    seed: int = 0
    partitions: int = 1
    batch_order: BatchOrder = BatchOrder.SHUFFLED

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        n = self.negatives_per_positive
        if n < 2 or n % 2 != 0:
            raise ValueError("negatives_per_positive must be a positive even integer")
        if self.partitions < 1:
            raise ValueError("partitions must be positive")

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "margin": self.margin,
            "negatives_per_positive": self.negatives_per_positive,
            "seed": self.seed,
            "partitions": self.partitions,
            "batch_order": self.batch_order.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        data = dict(data)
        data["batch_order"] = BatchOrder(data["batch_order"])
        return cls(**data)


class EmbeddingModel:
    """Entity vectors stacked into one complex64 table (users, then items, then
    aspects) plus one row per admitted relation type."""

    def __init__(
        self,
        dimension: int,
        kind_counts: dict[NodeKind, int],
        relations: Sequence[RelationType],
        entity_table: np.ndarray,
        relation_table: np.ndarray,
        config: TrainingConfig,
        loss_history: Optional[list[float]] = None,
    ):
        self.dimension = dimension
        self.kind_counts = dict(kind_counts)
        self.kind_offsets: dict[NodeKind, int] = {}
        offset = 0
        for kind in KIND_ORDER:
            self.kind_offsets[kind] = offset
            offset += self.kind_counts.get(kind, 0)
        self.relations = list(relations)
        self.relation_rows = {rel: i for i, rel in enumerate(self.relations)}
        self.entity_table = entity_table
        self.relation_table = relation_table
        self.config = config
        self.loss_history = loss_history or []

    @property
    def total_entities(self) -> int:
        return self.entity_table.shape[0]

    def global_index(self, kind: NodeKind, ordinal: int) -> int:
        count = self.kind_counts.get(kind, 0)
        if not 0 <= ordinal < count:
            raise EmbeddingError(
                f"no embedding for {kind.value} ordinal {ordinal} (have {count})"
            )
        return self.kind_offsets[kind] + ordinal

    def entity_vector(self, kind: NodeKind, ordinal: int) -> np.ndarray:
        return self.entity_table[self.global_index(kind, ordinal)]

    def kind_table(self, kind: NodeKind) -> np.ndarray:
        offset = self.kind_offsets[kind]
        return self.entity_table[offset : offset + self.kind_counts.get(kind, 0)]

    def relation_vector(self, relation: RelationType) -> np.ndarray:
        row = self.relation_rows.get(relation)
        if row is None:
            raise EmbeddingError(f"model has no vector for relation {relation.value}")
        return self.relation_table[row]

    def equal_tables(self, other: "EmbeddingModel") -> bool:
        return (
            self.dimension == other.dimension
            and self.kind_counts == other.kind_counts
            and self.relations == other.relations
            and np.array_equal(self.entity_table, other.entity_table)
            and np.array_equal(self.relation_table, other.relation_table)
        )


# --- scoring primitives ------------------------------------------------------


def _check_same_dimension(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")


def transform(entity: np.ndarray, relation: np.ndarray) -> np.ndarray:
    """Element-wise complex product of an entity vector with a relation vector."""
    _check_same_dimension(entity, relation)
    return entity * relation


def complex_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Re(<a, conj(b)>) = sum_k (a.re b.re + a.im b.im)."""
    _check_same_dimension(a, b)
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def score_vectors(theta_s: np.ndarray, theta_r: np.ndarray, theta_d: np.ndarray) -> float:
    """Triple fitness: similarity of the relation-transformed endpoint vectors."""
    return complex_similarity(transform(theta_s, theta_r), transform(theta_d, theta_r))


def score_triple(model: EmbeddingModel, triple: Triple) -> float:
    theta_s = model.entity_vector(triple.source.kind, triple.source.ordinal)
    theta_d = model.entity_vector(triple.destination.kind, triple.destination.ordinal)
    theta_r = model.relation_vector(triple.relation)
    return score_vectors(theta_s, theta_r, theta_d)


def margin_loss(pos_score: float, neg_scores, margin: float) -> float:
    """Hinge loss: zero exactly when the positive beats every negative by
    at least the margin."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    neg = np.asarray(neg_scores, dtype=float)
    return float(np.sum(np.maximum(margin - pos_score + neg, 0.0)))


def hinge_gradients(
    theta_s: np.ndarray,
    theta_r: np.ndarray,
    theta_d: np.ndarray,
    negatives: Sequence[tuple[np.ndarray, np.ndarray]],
    margin: float,
):
    """Loss and analytic gradients of the margin ranking loss at one positive.

    `negatives` holds (source, destination) vector pairs scored with the same
    relation vector. Every vector is treated as an independent parameter (the
    trainer accumulates by table row, which also covers negatives aliasing the
    positive's endpoints). Complex gradient convention: d/d(re) + i d/d(im).
    Subgradient 0 at the hinge kink.

    Returns (loss, grad_s, grad_r, grad_d, [(grad_neg_s, grad_neg_d), ...]).
    """
    weight = theta_r.real**2 + theta_r.imag**2
    f_pos = float(np.sum((theta_s.real * theta_d.real + theta_s.imag * theta_d.imag) * weight))

    grad_s = np.zeros_like(theta_s)
    grad_d = np.zeros_like(theta_d)
    grad_r = np.zeros_like(theta_r)
    neg_grads = []
    loss = 0.0
    c_pos = theta_s.real * theta_d.real + theta_s.imag * theta_d.imag
    for neg_s, neg_d in negatives:
        c_neg = neg_s.real * neg_d.real + neg_s.imag * neg_d.imag
        f_neg = float(np.sum(c_neg * weight))
        term = margin - f_pos + f_neg
        if term <= 0:
            neg_grads.append((np.zeros_like(neg_s), np.zeros_like(neg_d)))
            continue
        loss += term
        grad_s -= theta_d * weight
        grad_d -= theta_s * weight
        grad_r += 2.0 * theta_r * (c_neg - c_pos)
        neg_grads.append((neg_d * weight, neg_s * weight))
    return loss, grad_s, grad_r, grad_d, neg_grads


def gradient_step(
    theta_s: np.ndarray,
    theta_r: np.ndarray,
    theta_d: np.ndarray,
    negatives: Sequence[tuple[np.ndarray, np.ndarray]],
    margin: float,
    learning_rate: float,
):
    """One SGD step on the hinge loss; returns updated copies of every vector."""
    _, grad_s, grad_r, grad_d, neg_grads = hinge_gradients(
        theta_s, theta_r, theta_d, negatives, margin
    )
    new_negs = [
        (ns - learning_rate * gs, nd - learning_rate * gd)
        for (ns, nd), (gs, gd) in zip(negatives, neg_grads)
    ]
    return (
        theta_s - learning_rate * grad_s,
        theta_r - learning_rate * grad_r,
        theta_d - learning_rate * grad_d,
        new_negs,
    )


# --- negative sampling -------------------------------------------------------


def sample_negatives(
    positive: Triple, graph: KnowledgeGraph, n: int, rng: np.random.Generator
) -> list[Triple]:
    """n negatives for one positive, keeping its relation type: n/2 corrupt one
    endpoint (fair coin per sample), n/2 redraw both endpoints, all uniform
    among kind-legal nodes. Collisions with existing edges are kept."""
    if n < 2 or n % 2 != 0:
        raise ValueError("negative count must be a positive even integer")
    src_kind, dst_kind = RELATION_SIGNATURE[positive.relation]
    src_reg = graph.registries[src_kind]
    dst_reg = graph.registries[dst_kind]
    if len(src_reg) == 0 or len(dst_reg) == 0:
        raise SamplingError(
            f"cannot sample negatives for {positive.relation.value}: "
            f"empty {src_kind.value if len(src_reg) == 0 else dst_kind.value} registry"
        )

    out: list[Triple] = []
    for _ in range(n // 2):
        if rng.random() < 0.5:
            ordinal = int(rng.random() * len(src_reg))
            out.append(Triple(src_reg.node_at(ordinal), positive.relation, positive.destination))
        else:
            ordinal = int(rng.random() * len(dst_reg))
            out.append(Triple(positive.source, positive.relation, dst_reg.node_at(ordinal)))
    for _ in range(n // 2):
        s = int(rng.random() * len(src_reg))
        d = int(rng.random() * len(dst_reg))
        out.append(Triple(src_reg.node_at(s), positive.relation, dst_reg.node_at(d)))
    return out


# --- training ----------------------------------------------------------------


def initialize_model(
    graph: KnowledgeGraph, config: TrainingConfig, rng: np.random.Generator
) -> EmbeddingModel:
    """Fresh model with every real/imaginary entry uniform on
    [-1/sqrt(2D), +1/sqrt(2D)], which keeps initial scores O(1)."""
    dim = config.dimension
    bound = 1.0 / np.sqrt(2.0 * dim)
    kind_counts = {kind: len(graph.registries[kind]) for kind in KIND_ORDER}
    total = sum(kind_counts.values())
    relations = list(graph.variant.admitted_relations)

    re = rng.uniform(-bound, bound, size=(total, dim)).astype(np.float32)
    im = rng.uniform(-bound, bound, size=(total, dim)).astype(np.float32)
    entity = (re + 1j * im).astype(np.complex64)
    re = rng.uniform(-bound, bound, size=(len(relations), dim)).astype(np.float32)
    im = rng.uniform(-bound, bound, size=(len(relations), dim)).astype(np.float32)
    relation = (re + 1j * im).astype(np.complex64)
    return EmbeddingModel(dim, kind_counts, relations, entity, relation, config)


class _Sampler:
    """Uniform node draws per slot kind, optionally restricted to one partition
    (bucket training only writes rows of its own partitions)."""

    def __init__(self, model: EmbeddingModel, schedule: Optional[BucketSchedule]):
        self.offsets = np.array([model.kind_offsets[k] for k in KIND_ORDER], dtype=np.int64)
        self.counts = np.array([model.kind_counts[k] for k in KIND_ORDER], dtype=np.int64)
        self.counts_f = self.counts.astype(np.float64)
        self.part_nodes: Optional[list[list[np.ndarray]]] = None
        if schedule is not None:
            self.part_nodes = []
            for kind in KIND_ORDER:
                parts = schedule.partition_of[kind]
                per_part = [
                    self.offsets[KIND_INDEX[kind]]
                    + np.flatnonzero(parts == p).astype(np.int64)
                    for p in range(schedule.partition_count)
                ]
                self.part_nodes.append(per_part)

    def draw(self, kind_ids: np.ndarray, u: np.ndarray, partition: Optional[int]) -> np.ndarray:
        """Map uniforms u in [0,1) to global entity indices of the given kinds."""
        if partition is None:
            return (self.offsets[kind_ids] + (u * self.counts_f[kind_ids]).astype(np.int64)).astype(
                np.int32
            )
        out = np.empty(u.shape, dtype=np.int32)
        for k in range(len(KIND_ORDER)):
            mask = kind_ids == k
            if not mask.any():
                continue
            cand = self.part_nodes[k][partition]
            out[mask] = cand[(u[mask] * len(cand)).astype(np.int64)].astype(np.int32)
        return out


def _scatter_add(table: np.ndarray, idx: np.ndarray, delta: np.ndarray) -> None:
    """table[idx] += delta with repeated indices accumulated (np.add.at
    semantics, but sort plus reduceat which is faster on row vectors)."""
    if idx.size == 0:
        return
    order = np.argsort(idx, kind="stable")
    idx_sorted = idx[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(idx_sorted)) + 1])
    table[idx_sorted[starts]] += np.add.reduceat(delta[order], starts, axis=0)


def _epoch_negatives(
    rng: np.random.Generator,
    sampler: _Sampler,
    src: np.ndarray,
    dst: np.ndarray,
    src_kinds: np.ndarray,
    dst_kinds: np.ndarray,
    half: int,
    partitions: Optional[tuple[int, int]],
) -> tuple[np.ndarray, np.ndarray]:
    """Draw every negative endpoint for one pass over the given positives.
    Half the columns corrupt one endpoint of the positive (fair coin picks
    which side), half are fully random; all draws are kind-legal. The rng
    draw order (coin, corruption, random source, random destination) is
    fixed so runs reproduce."""
    m = len(src)
    src_part = partitions[0] if partitions else None
    dst_part = partitions[1] if partitions else None
    coin = rng.random((m, half)) < 0.5  # True: corrupt the source slot
    u_corrupt = rng.random((m, half))
    u_rand_s = rng.random((m, half))
    u_rand_d = rng.random((m, half))
    kinds_s = np.broadcast_to(src_kinds[:, None], (m, half))
    kinds_d = np.broadcast_to(dst_kinds[:, None], (m, half))
    corrupt_s = np.where(coin, sampler.draw(kinds_s, u_corrupt, src_part), src[:, None])
    corrupt_d = np.where(coin, dst[:, None], sampler.draw(kinds_d, u_corrupt, dst_part))
    rand_s = sampler.draw(kinds_s, u_rand_s, src_part)
    rand_d = sampler.draw(kinds_d, u_rand_d, dst_part)
    neg_s = np.concatenate([corrupt_s, rand_s], axis=1)  # (m, n)
    neg_d = np.concatenate([corrupt_d, rand_d], axis=1)
    return neg_s, neg_d


@njit(cache=True, nogil=True)
def _sgd_epoch_kernel(entity_f, rel_f, rel_ids, src, dst, neg_s, neg_d, margin, lr):
    """One SGD pass over the given positives with per-edge updates.

    Tables are the float32 views of the complex64 tables (row layout
    re0, im0, re1, im1, ...), in which Re(a conj(b)) and complex-times-real
    products are plain elementwise arithmetic. For each edge, the hinge
    gradient of its full loss term (all sampled negatives) is evaluated at
    the pre-update values and then applied; aliased rows accumulate.
    Returns the summed hinge loss (NaN signals divergence to the caller)."""
    m, n = neg_s.shape
    dim2 = entity_f.shape[1]
    dim = dim2 // 2
    w = np.empty(dim, dtype=np.float32)
    c_pos = np.empty(dim, dtype=np.float32)
    bal = np.empty(dim, dtype=np.float32)
    active = np.empty(n, dtype=np.bool_)
    d_idx = np.empty(2 + 2 * n, dtype=np.int64)
    d_val = np.empty((2 + 2 * n, dim2), dtype=np.float32)
    total = 0.0
    for e in range(m):
        s_row = entity_f[src[e]]
        d_row = entity_f[dst[e]]
        r_row = rel_f[rel_ids[e]]
        f_pos = np.float32(0.0)
        for k in range(dim):
            re = r_row[2 * k]
            im = r_row[2 * k + 1]
            w[k] = re * re + im * im
            c = s_row[2 * k] * d_row[2 * k] + s_row[2 * k + 1] * d_row[2 * k + 1]
            c_pos[k] = c
            f_pos += w[k] * c
            bal[k] = np.float32(0.0)

        n_active = np.float32(0.0)
        for j in range(n):
            ns_row = entity_f[neg_s[e, j]]
            nd_row = entity_f[neg_d[e, j]]
            f_neg = np.float32(0.0)
            for k in range(dim):
                f_neg += w[k] * (
                    ns_row[2 * k] * nd_row[2 * k] + ns_row[2 * k + 1] * nd_row[2 * k + 1]
                )
            term = margin - f_pos + f_neg
            active[j] = term > np.float32(0.0)
            if active[j]:
                total += term
                n_active += np.float32(1.0)
        if n_active == np.float32(0.0):
            if not np.isfinite(total):
                return np.nan
            continue

        # buffer every delta at the edge's pre-update values, then apply, so
        # rows drawn more than once accumulate their contributions
        cnt = 0
        d_idx[cnt] = src[e]
        d_idx[cnt + 1] = dst[e]
        for k in range(dim):
            scale = lr * n_active * w[k]
            d_val[cnt, 2 * k] = scale * d_row[2 * k]
            d_val[cnt, 2 * k + 1] = scale * d_row[2 * k + 1]
            d_val[cnt + 1, 2 * k] = scale * s_row[2 * k]
            d_val[cnt + 1, 2 * k + 1] = scale * s_row[2 * k + 1]
        cnt += 2
        for j in range(n):
            if not active[j]:
                continue
            ns_row = entity_f[neg_s[e, j]]
            nd_row = entity_f[neg_d[e, j]]
            d_idx[cnt] = neg_s[e, j]
            d_idx[cnt + 1] = neg_d[e, j]
            for k in range(dim):
                bal[k] += (
                    ns_row[2 * k] * nd_row[2 * k]
                    + ns_row[2 * k + 1] * nd_row[2 * k + 1]
                )
                scale = lr * w[k]
                d_val[cnt, 2 * k] = -scale * nd_row[2 * k]
                d_val[cnt, 2 * k + 1] = -scale * nd_row[2 * k + 1]
                d_val[cnt + 1, 2 * k] = -scale * ns_row[2 * k]
                d_val[cnt + 1, 2 * k + 1] = -scale * ns_row[2 * k + 1]
            cnt += 2
        for k in range(dim):
            r_scale = np.float32(-2.0) * lr * (bal[k] - n_active * c_pos[k])
            r_row[2 * k] += r_scale * r_row[2 * k]
            r_row[2 * k + 1] += r_scale * r_row[2 * k + 1]
        for t in range(cnt):
            row = entity_f[d_idx[t]]
            for k2 in range(dim2):
                row[k2] += d_val[t, k2]
        if not np.isfinite(total):
            return np.nan
    return total


def _run_edge_stream(model, edges, order, sampler, rng, config, partitions, rel_table=None) -> float:
    rel_ids, src, dst, src_kinds, dst_kinds = edges
    rel_o = rel_ids[order]
    src_o = src[order]
    dst_o = dst[order]
    neg_s, neg_d = _epoch_negatives(
        rng,
        sampler,
        src_o,
        dst_o,
        src_kinds[order],
        dst_kinds[order],
        config.negatives_per_positive // 2,
        partitions,
    )
    if rel_table is None:
        rel_table = model.relation_table
    entity_f = model.entity_table.view(np.float32).reshape(len(model.entity_table), -1)
    rel_f = rel_table.view(np.float32).reshape(len(rel_table), -1)
    total = _sgd_epoch_kernel(
        entity_f,
        rel_f,
        rel_o,
        src_o,
        dst_o,
        neg_s,
        neg_d,
        np.float32(config.margin),
        np.float32(config.learning_rate),
    )
    if not np.isfinite(total):
        raise TrainingDiverged("non-finite loss during epoch")
    return float(total)


def _edge_tensors(graph: KnowledgeGraph, model: EmbeddingModel):
    """Flatten the graph's edge groups (relation enum order, construction order
    within each) into parallel arrays of relation rows, global endpoint indices
    and slot kind ids."""
    rel_ids, srcs, dsts, sk, dk = [], [], [], [], []
    for rel in graph.variant.admitted_relations:
        group = graph.edges[rel]
        if len(group) == 0:
            continue
        src_kind, dst_kind = RELATION_SIGNATURE[rel]
        s, d = group.as_arrays()
        rel_ids.append(np.full(len(group), model.relation_rows[rel], dtype=np.int32))
        srcs.append((s + model.kind_offsets[src_kind]).astype(np.int32))
        dsts.append((d + model.kind_offsets[dst_kind]).astype(np.int32))
        sk.append(np.full(len(group), KIND_INDEX[src_kind], dtype=np.int64))
        dk.append(np.full(len(group), KIND_INDEX[dst_kind], dtype=np.int64))
    return (
        np.concatenate(rel_ids),
        np.concatenate(srcs),
        np.concatenate(dsts),
        np.concatenate(sk),
        np.concatenate(dk),
    )


def train(
    graph: KnowledgeGraph,
    config: TrainingConfig,
    epoch_callback: Optional[Callable[[int, float, float], None]] = None,
) -> EmbeddingModel:
    """Train embeddings on the graph; returns the model with per-epoch mean
    loss history. Single-partition runs are bit-reproducible for a fixed seed.
    With partitions > 1, partition-disjoint buckets run concurrently; each
    bucket trains against its own copy of the relation table and the copies
    are merged by averaging after every wave (entity rows never collide, so
    those are written in place)."""
    if graph.num_edges() == 0:
        raise EmbeddingError("cannot train on a graph with no edges")
    rng = np.random.default_rng(config.seed)
    model = initialize_model(graph, config, rng)
    edges = _edge_tensors(graph, model)
    n_edges = len(edges[0])

    schedule = None
    if config.partitions > 1:
        schedule = partition_schedule(graph, config.partitions, config.seed)
    sampler = _Sampler(model, schedule)

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        if schedule is None:
            if config.batch_order is BatchOrder.SHUFFLED:
                order = rng.permutation(n_edges)
            else:
                order = np.arange(n_edges)
            epoch_loss = _run_edge_stream(model, edges, order, sampler, rng, config, None)
        else:
            epoch_loss = _run_partitioned_epoch(
                model, edges, sampler, schedule, config, epoch
            )
        if not np.isfinite(model.entity_table).all() or not np.isfinite(model.relation_table).all():
            raise TrainingDiverged(f"non-finite embedding entries after epoch {epoch}")
        mean_loss = epoch_loss / n_edges
        model.loss_history.append(mean_loss)
        if epoch_callback is not None:
            epoch_callback(epoch, mean_loss, (time.perf_counter() - started) * 1000.0)
    return model


def _run_partitioned_epoch(model, edges, sampler, schedule, config, epoch) -> float:
    loss_total = 0.0

    def run_bucket(bucket_idx: int):
        bucket = schedule.buckets[bucket_idx]
        # per-bucket stream independent of thread timing
        brng = np.random.default_rng((config.seed, epoch, bucket_idx))
        if config.batch_order is BatchOrder.SHUFFLED:
            order = bucket.edge_indices[brng.permutation(len(bucket.edge_indices))]
        else:
            order = bucket.edge_indices
        rel_copy = model.relation_table.copy()
        loss = _run_edge_stream(
            model,
            edges,
            order,
            sampler,
            brng,
            config,
            (bucket.source_partition, bucket.destination_partition),
            rel_table=rel_copy,
        )
        return loss, rel_copy

    workers = min(config.partitions, 8)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for wave in schedule.waves:
            results = list(pool.map(run_bucket, wave))
            loss_total += sum(loss for loss, _ in results)
            # buckets in a wave share relations; merge their copies by
            # averaging (in float64, cast back) so the result is order-free
            acc = np.zeros(model.relation_table.shape, dtype=np.complex128)
            for _, rel_copy in results:
                acc += rel_copy
            model.relation_table[...] = (acc / len(results)).astype(
                model.relation_table.dtype
            )
    return loss_total
