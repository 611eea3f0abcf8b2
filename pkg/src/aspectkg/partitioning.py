"""Node partitioning and bucket schedules for parallel training.

Nodes are assigned to P partitions by a deterministic hash of
(kind, ordinal, seed). Edges fall into (source partition, destination
partition) buckets; buckets sharing no partition may train concurrently, so
the schedule groups them into waves of pairwise partition-disjoint buckets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import RELATION_SIGNATURE, KnowledgeGraph, NodeKind

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """Deterministic 64-bit mix (Python's hash() is salted, so unusable here)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def node_partition(kind_index: int, ordinal: int, seed: int, partitions: int) -> int:
    h = _splitmix64(_splitmix64(seed & _MASK64) ^ _splitmix64((kind_index << 48) | ordinal))
    return h % partitions


@dataclass
class Bucket:
    source_partition: int
    destination_partition: int
    edge_indices: np.ndarray  # indices into the graph's flattened edge order


@dataclass
class BucketSchedule:
    partition_count: int
    partition_of: dict[NodeKind, np.ndarray]
    buckets: list[Bucket]
    waves: list[list[int]]  # bucket indices; each wave is partition-disjoint


def partition_schedule(graph: KnowledgeGraph, partitions: int, seed: int) -> BucketSchedule:
    """Assign nodes to partitions and group edges into scheduled buckets.

    Edge indices refer to the flattened edge order: relation types in enum
    order, construction order within each. Only non-empty buckets appear.
    """
    if partitions < 1:
        raise ValueError("partition count must be positive")
    kinds = list(NodeKind)
    partition_of = {}
    for kind_index, kind in enumerate(kinds):
        count = len(graph.registries[kind])
        partition_of[kind] = np.array(
            [node_partition(kind_index, o, seed, partitions) for o in range(count)],
            dtype=np.int64,
        )

    by_pair: dict[tuple[int, int], list[int]] = {}
    edge_index = 0
    for rel in graph.variant.admitted_relations:
        group = graph.edges[rel]
        src_kind, dst_kind = RELATION_SIGNATURE[rel]
        src_parts = partition_of[src_kind]
        dst_parts = partition_of[dst_kind]
        for s, d in zip(group.src, group.dst):
            pair = (int(src_parts[s]), int(dst_parts[d]))
            by_pair.setdefault(pair, []).append(edge_index)
            edge_index += 1

    buckets = [
        Bucket(pair[0], pair[1], np.array(indices, dtype=np.int64))
        for pair, indices in sorted(by_pair.items())
    ]

    # greedy wave assignment: first wave whose partitions don't collide
    waves: list[list[int]] = []
    wave_partitions: list[set[int]] = []
    for idx, bucket in enumerate(buckets):
        needed = {bucket.source_partition, bucket.destination_partition}
        for wave, used in zip(waves, wave_partitions):
            if not (needed & used):
                wave.append(idx)
                used |= needed
                break
        else:
            waves.append([idx])
            wave_partitions.append(set(needed))
    return BucketSchedule(partitions, partition_of, buckets, waves)
