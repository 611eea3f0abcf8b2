"""Acceptance gate: one test per shipped guarantee, each printing a verdict line.

Every check drives the public API end to end at its stated tolerance and
runtime budget. The verdict lines bypass pytest capture so a plain run shows
them; the two slow statistical checks share one planted-recovery sweep.
"""

from __future__ import annotations

import itertools
import sys
import time

import numpy as np
import pytest

from conftest import TOY_OPINIONS, TOY_RATINGS, random_records
from metric_oracle import oracle_metrics
from test_embedding import finite_difference_check
from test_partitioning import _check_schedule_laws

from aspectkg import cli, evaluation, synthetic
from aspectkg.data import save_opinions, save_ratings
from aspectkg.embedding import EmbeddingModel, TrainingConfig, score_triple, train
from aspectkg.evaluation import kfold_split, metrics_at_k
from aspectkg.explain import build_explanation, explanation_stats
from aspectkg.graph import (
    RELATION_SIGNATURE,
    AspectOpinionRecord,
    GraphVariant,
    NodeId,
    NodeKind,
    RatingRecord,
    RelationType,
    Triple,
    build_graph,
    normalize_aspect,
)


def _verdict(name: str, ok: bool, detail: str) -> None:
    line = f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


@pytest.fixture(scope="module", autouse=True)
def _warm_kernel():
    """Compile the numba kernel (plain and partitioned paths) before any
    budgeted region is timed."""
    ratings = [RatingRecord("wu", "wi", 5.0), RatingRecord("wv", "wi", 1.0)]
    opinions = [AspectOpinionRecord("wu", "wi", "warm", 1.0)]
    graph = build_graph(ratings, opinions, GraphVariant.GERA)
    train(graph, TrainingConfig(dimension=4, epochs=1, seed=0))
    train(graph, TrainingConfig(dimension=4, epochs=1, seed=0, partitions=2))


@pytest.fixture(scope="module")
def planted_results():
    """Ten planted-recovery runs (P=1): per-seed pooled F1@10 of gera/rdm/pop,
    plus the wall time of the whole sweep."""
    results = {}
    started = time.perf_counter()
    for seed in range(10):
        ds = synthetic.planted_clusters(seed=seed)
        plan = kfold_split(ds.ratings, fold_count=5, seed=seed)
        config = TrainingConfig(dimension=32, epochs=20, seed=seed)
        report = evaluation.evaluate(
            ds.ratings,
            ds.opinions,
            plan,
            ks=(10,),
            model_names=("rdm", "pop", "gera"),
            training_config=config,
        )
        results[seed] = {n: rep.overall()[10]["f1"] for n, rep in report.models.items()}
    return results, time.perf_counter() - started


def _scalar_score(s_row, r_row, d_row) -> float:
    total = 0.0
    for sk, rk, dk in zip(s_row, r_row, d_row):
        a = complex(sk) * complex(rk)
        b = complex(dk) * complex(rk)
        total += a.real * b.real + a.imag * b.imag
    return total


def test_scorer_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(3)
    kind_counts = {NodeKind.USER: 1, NodeKind.ITEM: 1, NodeKind.ASPECT: 1}
    relations = list(RelationType)
    worst = 0.0
    for case in range(1000):
        dim = int(rng.integers(1, 17))
        rel = relations[case % len(relations)]
        src_kind, dst_kind = RELATION_SIGNATURE[rel]
        if case % 2:
            # production storage dtype; a coarse dyadic grid keeps every
            # float32 product and sum exact, so the float64 oracle must agree
            dtype = np.complex64
            ent = rng.integers(-8, 9, size=(3, 2 * dim)) / 8.0
            rl = rng.integers(-8, 9, size=(len(relations), 2 * dim)) / 8.0
        else:
            dtype = np.complex128
            ent = rng.uniform(-2.0, 2.0, size=(3, 2 * dim))
            rl = rng.uniform(-2.0, 2.0, size=(len(relations), 2 * dim))
        entity_table = (ent[:, :dim] + 1j * ent[:, dim:]).astype(dtype)
        relation_table = (rl[:, :dim] + 1j * rl[:, dim:]).astype(dtype)
        model = EmbeddingModel(
            dim, kind_counts, relations, entity_table, relation_table,
            TrainingConfig(dimension=dim),
        )
        triple = Triple(NodeId(src_kind, "s", 0), rel, NodeId(dst_kind, "d", 0))
        got = score_triple(model, triple)
        want = _scalar_score(
            entity_table[model.global_index(src_kind, 0)],
            relation_table[model.relation_rows[rel]],
            entity_table[model.global_index(dst_kind, 0)],
        )
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-10 and elapsed < 1.0
    _verdict("scorer oracle", ok, f"1000 instances D<=16, max |diff| {worst:.2e}, {elapsed:.2f}s")


def test_gradient_check():
    started = time.perf_counter()
    worst = 0.0
    for seed in (23, 101, 7):
        max_err, loss = finite_difference_check(
            seed=seed, dim=4, n_negs=3, margin=0.5, h=1e-5
        )
        assert loss > 0.0
        worst = max(worst, max_err)
    elapsed = time.perf_counter() - started
    ok = worst < 1e-4 and elapsed < 1.0
    _verdict("gradient check", ok, f"max relative error {worst:.2e} at h=1e-5, {elapsed:.2f}s")


def test_graph_construction_laws():
    started = time.perf_counter()
    rng = np.random.default_rng(11)
    for _ in range(100):
        ratings, opinions = random_records(rng)
        ger = build_graph(ratings, opinions, GraphVariant.GER)
        gea = build_graph(ratings, opinions, GraphVariant.GEA)
        gera = build_graph(ratings, opinions, GraphVariant.GERA)

        union = dict(ger.edge_multiset())
        for key, count in gea.edge_multiset().items():
            union[key] = union.get(key, 0) + count
        assert union == gera.edge_multiset()

        belongs = gera.edges[RelationType.BELONGS_TO]
        expected_pairs = {(normalize_aspect(o.aspect), o.item) for o in opinions}
        got_pairs = [
            (gera.aspects.keys[s], gera.items.keys[d])
            for s, d in zip(belongs.src, belongs.dst)
        ]
        assert len(got_pairs) == len(set(got_pairs)) == len(expected_pairs)
        assert set(got_pairs) == expected_pairs

        for graph in (ger, gea, gera):
            admitted = set(graph.variant.admitted_relations)
            for triple in graph.triples():
                assert triple.relation in admitted
                want_kinds = RELATION_SIGNATURE[triple.relation]
                assert (triple.source.kind, triple.destination.kind) == want_kinds
    elapsed = time.perf_counter() - started
    ok = elapsed < 5.0
    _verdict(
        "graph construction laws", ok,
        f"100 record sets: GER+GEA=GERA, belongsTo dedup, kind safety, {elapsed:.1f}s",
    )


def test_planted_structure_recovery(planted_results):
    scores, elapsed = planted_results
    gaps = {s: f1["gera"] - max(f1["rdm"], f1["pop"]) for s, f1 in scores.items()}
    passes = sum(g >= 0.15 for g in gaps.values())
    ok = passes >= 9 and elapsed < 120.0
    _verdict(
        "planted-structure recovery", ok,
        f"{passes}/10 seeds with F1@10 gap >= 0.15, min gap {min(gaps.values()):.3f}, "
        f"{elapsed:.1f}s",
    )


def test_complementary_signal_property():
    started = time.perf_counter()
    margins = {}
    for seed in range(10):
        ds = synthetic.complementary_signal(seed=seed)
        plan = kfold_split(ds.ratings, fold_count=5, seed=seed)
        config = TrainingConfig(
            dimension=32, learning_rate=0.005, epochs=30, seed=seed
        )
        report = evaluation.evaluate(
            ds.ratings,
            ds.opinions,
            plan,
            ks=(10,),
            model_names=("ger", "gea", "gera"),
            training_config=config,
        )
        f1 = {n: rep.overall()[10]["f1"] for n, rep in report.models.items()}
        margins[seed] = f1["gera"] - max(f1["ger"], f1["gea"])
    elapsed = time.perf_counter() - started
    passes = sum(m >= -0.01 for m in margins.values())
    ok = passes >= 8 and elapsed < 180.0
    _verdict(
        "complementary-signal property", ok,
        f"{passes}/10 seeds with GERA >= max(GER, GEA) - 0.01, "
        f"min margin {min(margins.values()):+.3f}, {elapsed:.1f}s",
    )


def test_metric_oracle():
    started = time.perf_counter()
    items = ["a", "b", "c", "d", "e", "f"]
    cases = 0
    for perm in itertools.permutations(items):
        for bits in range(64):
            relevant = {items[j] for j in range(6) if bits >> j & 1}
            for k in range(1, 7):
                got = metrics_at_k(perm, relevant, k)
                want = oracle_metrics(perm, relevant, k)
                for g, w in zip(got, want):
                    assert abs(g - w) <= 1e-12
            cases += 1
    elapsed = time.perf_counter() - started
    ok = cases == 46080 and elapsed < 10.0
    _verdict("metric oracle", ok, f"{cases} ranking x relevance cases, k in 1..6, {elapsed:.1f}s")


def test_explanation_stats_fixture():
    # 30 recommendable items; the neighbor holds a Like on one aspect of each
    # of i1..i27 while i28..i30 exist only through ratings, so exactly 27 of
    # the 30 recommended items gather opinions
    ratings = [RatingRecord("c", f"i{j}", 4.0) for j in (28, 29, 30)]
    opinions = [
        AspectOpinionRecord("n", f"i{j}", f"a{j}", 1.0) for j in range(1, 28)
    ]
    opinions.append(AspectOpinionRecord("s", "i1", "a0", 0.0))
    graph = build_graph(ratings, opinions, GraphVariant.GERA)
    model = train(graph, TrainingConfig(dimension=4, epochs=1, seed=0))
    bundle = build_explanation(model, graph, "s", cutoff=30, neighbors=["n"])
    assert len(bundle.recommended) == 30
    coverage = explanation_stats([bundle]).coverage

    ratings = [RatingRecord("s", "i0", 5.0)] + [
        RatingRecord("c", f"i{j}", 4.0) for j in (1, 2, 3)
    ]
    opinions = (
        [AspectOpinionRecord("n", "i1", f"like{j}", 1.0) for j in range(4)]
        + [AspectOpinionRecord("n", "i2", f"dis{j}", -1.0) for j in range(3)]
        + [AspectOpinionRecord("n", "i3", f"dnc{j}", 0.0) for j in range(2)]
    )
    graph = build_graph(ratings, opinions, GraphVariant.GERA)
    model = train(graph, TrainingConfig(dimension=4, epochs=1, seed=0))
    bundle = build_explanation(model, graph, "s", cutoff=3, neighbors=["n"])
    stats = explanation_stats([bundle])
    assert stats.pooled == {
        "likes": 4, "others": 5, "distinctAspects": 9, "coveredItems": 3
    }
    ok = coverage == 0.9 and stats.like_over_other == 0.8
    _verdict(
        "explanation stats fixture", ok,
        f"coverage {coverage} on the 27-of-30 graph, "
        f"likeOverOther {stats.like_over_other} on 4 Like / 3 Dislike / 2 DoesNotCare",
    )


def test_determinism(tmp_path, capsys):
    save_ratings(TOY_RATINGS, tmp_path / "ratings.tsv")
    save_opinions(TOY_OPINIONS, tmp_path / "opinions.tsv")
    graph_path = tmp_path / "graph.tsv"
    assert cli.main([
        "ingest",
        "--ratings", str(tmp_path / "ratings.tsv"),
        "--opinions", str(tmp_path / "opinions.tsv"),
        "--out", str(graph_path),
    ]) == 0
    capsys.readouterr()

    blobs, outputs = [], []
    for name in ("first.akg", "second.akg"):
        model_path = tmp_path / name
        assert cli.main([
            "train", "--graph", str(graph_path), "--dim", "16",
            "--epochs", "4", "--seed", "3", "--out", str(model_path),
        ]) == 0
        capsys.readouterr()
        assert cli.main([
            "recommend", "--model", str(model_path),
            "--graph", str(graph_path), "--user", "u1", "--n", "5",
        ]) == 0
        outputs.append(capsys.readouterr().out)
        blobs.append(model_path.read_bytes())
    same_bytes = blobs[0] == blobs[1]
    same_output = outputs[0] == outputs[1] and outputs[0]
    ok = bool(same_bytes and same_output)
    _verdict(
        "determinism", ok,
        f"checkpoints byte-identical: {same_bytes}, recommend output identical: "
        f"{outputs[0] == outputs[1]}",
    )


def test_partition_soundness(planted_results):
    rng = np.random.default_rng(77)
    for _ in range(12):
        ratings, opinions = random_records(rng)
        graph = build_graph(ratings, opinions, GraphVariant.GERA)
        for partitions in (1, 2, 4):
            _check_schedule_laws(graph, partitions, seed=5)

    scores, _ = planted_results
    p1_mean = float(np.mean([f1["gera"] for f1 in scores.values()]))
    ds = synthetic.planted_clusters(seed=0)
    plan = kfold_split(ds.ratings, fold_count=5, seed=0)
    config = TrainingConfig(dimension=32, epochs=20, seed=0, partitions=4)
    report = evaluation.evaluate(
        ds.ratings, ds.opinions, plan, ks=(10,),
        model_names=("gera",), training_config=config,
    )
    p4 = report.models["gera"].overall()[10]["f1"]
    delta = abs(p4 - p1_mean)
    ok = delta <= 0.05
    _verdict(
        "partition soundness", ok,
        f"schedule laws hold for P in 1/2/4 on 12 random graphs; "
        f"P=4 F1@10 {p4:.4f} vs P=1 mean {p1_mean:.4f}, |delta| {delta:.4f}",
    )
