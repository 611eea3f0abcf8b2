"""Evaluation protocol: fold assignment laws, leakage filtering, metric hand
values and oracle agreement, significance testing, and baseline sanity on
synthetic data."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as scipy_stats

from aspectkg import synthetic
from aspectkg.embedding import TrainingConfig
from aspectkg.evaluation import (
    EmbeddingScorer,
    FoldPlan,
    PopularityScorer,
    RandomScorer,
    _fold_training_records,
    _stable_unit_float,
    evaluate,
    kfold_split,
    metrics_at_k,
    paired_bonferroni,
    rank_test_items,
    relevance_labels,
)
from aspectkg.graph import (
    AspectOpinionRecord,
    GraphVariant,
    RatingRecord,
    build_graph,
)
from aspectkg.embedding import initialize_model

from conftest import TOY_OPINIONS, TOY_RATINGS
from metric_oracle import oracle_metrics


# --- fold assignment ---------------------------------------------------------


def _ratings_for_users(sizes: dict[str, int]) -> list[RatingRecord]:
    out = []
    for user, n in sizes.items():
        out.extend(RatingRecord(user, f"{user}_i{j}", 4.0) for j in range(n))
    return out


def test_kfold_rejects_single_fold():
    with pytest.raises(ValueError):
        kfold_split(_ratings_for_users({"a": 4}), 1, seed=0)


@given(
    st.dictionaries(
        st.sampled_from(["a", "b", "c", "d"]), st.integers(1, 11), min_size=1
    ),
    st.sampled_from([2, 3, 5]),
    st.integers(0, 100),
)
def test_kfold_per_user_balance(sizes, fold_count, seed):
    ratings = _ratings_for_users(sizes)
    plan = kfold_split(ratings, fold_count, seed)
    assert len(plan.assignment) == len(ratings)
    assert set(plan.assignment.tolist()) <= set(range(fold_count))
    for user, n in sizes.items():
        folds = [plan.assignment[i] for i, rec in enumerate(ratings) if rec.user == user]
        counts = np.bincount(folds, minlength=fold_count)
        assert counts.sum() == n
        # round-robin after a shuffle: fold loads differ by at most one
        assert counts.max() - counts.min() <= 1
        assert counts.max() == math.ceil(n / fold_count)


def test_kfold_folds_partition_indices():
    ratings = _ratings_for_users({"a": 7, "b": 3})
    plan = kfold_split(ratings, 3, seed=1)
    seen = np.concatenate([plan.test_indices(f) for f in range(3)])
    assert sorted(seen.tolist()) == list(range(10))
    for f in range(3):
        train = set(plan.train_indices(f).tolist())
        test = set(plan.test_indices(f).tolist())
        assert train | test == set(range(10))
        assert not (train & test)


def test_kfold_deterministic_and_seed_sensitive():
    ratings = _ratings_for_users({"a": 9, "b": 9, "c": 9})
    a = kfold_split(ratings, 3, seed=4).assignment
    b = kfold_split(ratings, 3, seed=4).assignment
    c = kfold_split(ratings, 3, seed=5).assignment
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# --- leakage filtering ---------------------------------------------------------


def test_fold_training_records_removes_test_pair_opinions():
    ratings = [
        RatingRecord("u1", "i1", 5.0),
        RatingRecord("u1", "i2", 2.0),
        RatingRecord("u2", "i1", 4.0),
    ]
    opinions = [
        AspectOpinionRecord("u1", "i1", "battery", 1.0),  # test pair: dropped
        AspectOpinionRecord("u1", "i2", "battery", 1.0),  # train pair: kept
        AspectOpinionRecord("u2", "i1", "screen", -1.0),  # train pair: kept
        AspectOpinionRecord("u2", "i2", "screen", 1.0),  # no rating at all: kept
    ]
    train_ratings, test_records, train_opinions = _fold_training_records(
        ratings, opinions, test_idx={0}
    )
    assert [r.item for r in train_ratings] == ["i2", "i1"]
    assert [r.item for r in test_records] == ["i1"]
    assert [(o.user, o.item) for o in train_opinions] == [
        ("u1", "i2"),
        ("u2", "i1"),
        ("u2", "i2"),
    ]


def test_fold_training_records_empty_test():
    ratings = [RatingRecord("u1", "i1", 5.0)]
    opinions = [AspectOpinionRecord("u1", "i1", "a", 1.0)]
    train_ratings, test_records, train_opinions = _fold_training_records(
        ratings, opinions, set()
    )
    assert train_ratings == ratings
    assert test_records == []
    assert train_opinions == opinions


# --- relevance --------------------------------------------------------------


def test_relevance_threshold_is_strict():
    records = [RatingRecord("u", "a", 3.0), RatingRecord("u", "b", 3.5)]
    assert relevance_labels(records) == {"b"}


def test_relevance_keeps_last_occurrence():
    records = [RatingRecord("u", "a", 5.0), RatingRecord("u", "a", 2.0)]
    assert relevance_labels(records) == set()
    assert relevance_labels(records[::-1]) == {"a"}


# --- scorers ----------------------------------------------------------------


def test_stable_unit_float_range_and_determinism():
    values = {_stable_unit_float(7, "u", f"i{j}") for j in range(200)}
    assert len(values) == 200
    assert all(0.0 <= v < 1.0 for v in values)
    assert _stable_unit_float(7, "u", "i0") == _stable_unit_float(7, "u", "i0")
    assert _stable_unit_float(7, "u", "i0") != _stable_unit_float(8, "u", "i0")


def test_random_scorer_is_order_independent():
    scorer = RandomScorer(3)
    ab = scorer.score("u", ["a", "b"])
    ba = scorer.score("u", ["b", "a"])
    assert ab[0] == ba[1] and ab[1] == ba[0]


def test_popularity_scorer_counts():
    train = [
        RatingRecord("u1", "a", 5.0),
        RatingRecord("u2", "a", 1.0),
        RatingRecord("u3", "b", 3.0),
    ]
    scorer = PopularityScorer(train)
    assert scorer.score("anyone", ["a", "b", "unseen"]).tolist() == [2.0, 1.0, 0.0]


def test_embedding_scorer_cold_entities():
    graph = build_graph([RatingRecord("u1", "i1", 5.0)], [], GraphVariant.GER)
    model = initialize_model(graph, TrainingConfig(dimension=4), np.random.default_rng(0))
    scorer = EmbeddingScorer(model, graph)
    assert scorer.score("ghost", ["i1"]).tolist() == [0.0]
    assert scorer.cold_users == 1
    scores = scorer.score("u1", ["i1", "ghost_item"])
    assert scores[1] == 0.0
    assert scores[0] != 0.0
    assert scorer.cold_items == 1


def test_rank_test_items_orders_and_breaks_ties():
    class Fixed:
        def score(self, user, items):
            return np.array([{"a": 0.5, "b": 0.9, "c": 0.5}[i] for i in items])

    order = {"c": 0, "a": 1, "b": 2}
    ranked = rank_test_items(Fixed(), "u", ["a", "b", "c"], order)
    assert ranked.keys() == ["b", "c", "a"]  # tie at 0.5 broken by ordinal
    with pytest.raises(ValueError):
        rank_test_items(Fixed(), "u", [], order)


# --- metrics ------------------------------------------------------------------


def test_metrics_hand_case():
    p, r, f1, ndcg = metrics_at_k(["i1", "i2", "i3"], {"i2"}, 2)
    assert p == pytest.approx(0.5)
    assert r == pytest.approx(1.0)
    assert f1 == pytest.approx(2 / 3)
    assert ndcg == pytest.approx(1.0 / math.log2(3))


def test_metrics_perfect_and_empty():
    assert metrics_at_k(["a", "b"], {"a", "b"}, 2) == (1.0, 1.0, 1.0, 1.0)
    assert metrics_at_k(["a", "b"], set(), 2) == (0.0, 0.0, 0.0, 0.0)
    assert metrics_at_k([], {"a"}, 3) == (0.0, 0.0, 0.0, 0.0)


def test_metrics_k_larger_than_list():
    p, r, f1, ndcg = metrics_at_k(["a", "b"], {"b"}, 10)
    assert p == pytest.approx(0.5)  # denominator is min(k, len) = 2
    assert r == pytest.approx(1.0)


def test_metrics_rejects_bad_k():
    with pytest.raises(ValueError):
        metrics_at_k(["a"], {"a"}, 0)


def test_metrics_match_oracle_exhaustively_small():
    """All rankings of 4 items, all relevance subsets, all cutoffs."""
    items = ["a", "b", "c", "d"]
    for perm in itertools.permutations(items):
        for mask in range(16):
            relevant = {items[j] for j in range(4) if mask >> j & 1}
            for k in range(1, 5):
                got = metrics_at_k(list(perm), relevant, k)
                want = oracle_metrics(perm, relevant, k)
                assert got == pytest.approx(want, abs=1e-12)


# --- paired significance ---------------------------------------------------------


def test_paired_identical_samples_are_trivially_insignificant():
    result = paired_bonferroni([0.5, 0.5, 0.5], [0.5, 0.5, 0.5], comparisons=2)
    assert (result.t_statistic, result.p_value, result.adjusted_p) == (0.0, 1.0, 1.0)
    assert not result.significant
    assert not result.degenerate


def test_paired_constant_shift_is_degenerate():
    # dyadic values so the paired differences are exactly constant
    result = paired_bonferroni([0.5, 0.75, 1.0], [0.25, 0.5, 0.75], comparisons=2)
    assert result.t_statistic == math.inf
    assert result.p_value == 0.0
    assert result.adjusted_p == 0.0
    assert result.significant
    assert result.degenerate
    flipped = paired_bonferroni([0.5, 0.625], [0.75, 0.875], comparisons=1)
    assert flipped.t_statistic == -math.inf


def test_paired_matches_scipy():
    rng = np.random.default_rng(8)
    a = rng.random(30)
    b = a + rng.normal(0.05, 0.1, size=30)
    result = paired_bonferroni(a, b, comparisons=3)
    want = scipy_stats.ttest_rel(a, b)
    assert result.t_statistic == pytest.approx(want.statistic, abs=1e-9)
    assert result.p_value == pytest.approx(want.pvalue, abs=1e-9)
    assert result.adjusted_p == pytest.approx(min(1.0, 3 * want.pvalue), abs=1e-9)
    assert result.significant == (result.adjusted_p < 0.05)


def test_paired_input_validation():
    with pytest.raises(ValueError):
        paired_bonferroni([1.0, 2.0], [1.0], comparisons=1)
    with pytest.raises(ValueError):
        paired_bonferroni([1.0], [1.0], comparisons=1)


def test_bonferroni_caps_at_one():
    rng = np.random.default_rng(9)
    a = rng.random(10)
    b = a + rng.normal(0, 0.2, size=10)
    result = paired_bonferroni(a, b, comparisons=50)
    assert result.adjusted_p <= 1.0


# --- the full protocol -------------------------------------------------------------


def test_evaluate_rejects_unknown_model():
    plan = kfold_split(TOY_RATINGS, 2, seed=0)
    with pytest.raises(ValueError, match="unknown model"):
        evaluate(TOY_RATINGS, TOY_OPINIONS, plan, ks=(2,), model_names=("svd",))


def test_evaluate_baselines_structure():
    plan = kfold_split(TOY_RATINGS, 2, seed=0)
    report = evaluate(
        TOY_RATINGS, TOY_OPINIONS, plan, ks=(2, 3), model_names=("rdm", "pop")
    )
    assert set(report.models) == {"rdm", "pop"}
    payload = report.to_dict()
    assert payload["ks"] == [2, 3]
    assert payload["folds"] == 2
    for name in ("rdm", "pop"):
        model = payload["models"][name]
        assert len(model["folds"]) == 2
        for k, means in model["overall"].items():
            assert set(means) == {"precision", "recall", "f1", "ndcg"}
            assert all(0.0 <= v <= 1.0 for v in means.values())
    assert set(payload["significance"]) == {"2", "3"}
    entry = payload["significance"]["2"]
    assert entry["best"] in {"rdm", "pop"}
    assert set(entry["tests"]) == {"rdm", "pop"} - {entry["best"]}


def test_evaluate_is_deterministic():
    plan = kfold_split(TOY_RATINGS, 2, seed=3)
    config = TrainingConfig(dimension=8, epochs=2)
    a = evaluate(TOY_RATINGS, TOY_OPINIONS, plan, ks=(2,),
                 model_names=("rdm", "gera"), training_config=config)
    b = evaluate(TOY_RATINGS, TOY_OPINIONS, plan, ks=(2,),
                 model_names=("rdm", "gera"), training_config=config)
    assert a.to_dict() == b.to_dict()


def test_evaluate_skip_users_without_relevant():
    ratings = [
        RatingRecord("happy", "a", 5.0),
        RatingRecord("happy", "b", 5.0),
        RatingRecord("grump", "c", 1.0),
        RatingRecord("grump", "d", 1.0),
    ]
    plan = kfold_split(ratings, 2, seed=0)
    keep = evaluate(ratings, [], plan, ks=(1,), model_names=("pop",))
    skip = evaluate(ratings, [], plan, ks=(1,), model_names=("pop",),
                    skip_users_without_relevant=True)
    keep_users = sum(f.evaluated_users for f in keep.models["pop"].folds)
    skip_users = sum(f.evaluated_users for f in skip.models["pop"].folds)
    assert keep_users == 4  # both users in both folds
    assert skip_users == 2  # grump never has a relevant test item


def test_equal_scores_fall_back_to_canonical_order():
    """PopularityScorer ties rank test items by first appearance in the
    record stream."""
    ratings = [
        RatingRecord("other", "late", 4.0),
        RatingRecord("other", "early", 4.0),
        RatingRecord("u", "zz_first", 5.0),
        RatingRecord("u", "aa_second", 5.0),
    ]
    plan = FoldPlan(2, np.array([1, 1, 0, 0]), seed=0)
    report = evaluate(ratings, [], plan, ks=(1,), model_names=("pop",))
    # fold 0 tests user u on both items; popularity of each is 0 in training
    assert report.models["pop"].folds[0].evaluated_users == 1


def test_random_baseline_near_half_on_balanced_data():
    """Every user has half relevant test items, so a uniform scorer's mean
    precision sits near 0.5."""
    ratings = []
    for u in range(40):
        for j in range(10):
            value = 5.0 if j % 2 == 0 else 1.0
            ratings.append(RatingRecord(f"u{u}", f"i{u}_{j}", value))
    plan = kfold_split(ratings, 2, seed=1)
    report = evaluate(ratings, [], plan, ks=(5,), model_names=("rdm",))
    precision = report.models["rdm"].overall()[5]["precision"]
    assert abs(precision - 0.5) < 0.07


def test_popularity_beats_random_on_skewed_data():
    """Cutoff below the per-user test size, so ranking order matters."""
    wins = 0
    for seed in range(10):
        ds = synthetic.popularity_skewed(seed=seed)
        plan = kfold_split(ds.ratings, 2, seed=seed)
        report = evaluate(ds.ratings, [], plan, ks=(3,), model_names=("rdm", "pop"))
        pop = report.models["pop"].overall()[3]["f1"]
        rdm = report.models["rdm"].overall()[3]["f1"]
        if pop > rdm:
            wins += 1
    assert wins >= 9
