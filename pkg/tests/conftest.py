"""Shared fixtures: a small deterministic dataset, a trained toy model, and
generators for random record sets used by the graph-law and partition tests."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from aspectkg.embedding import TrainingConfig, train
from aspectkg.graph import AspectOpinionRecord, GraphVariant, RatingRecord, build_graph

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

RATING_VALUES = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
POLARITY_VALUES = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
ASPECT_POOL = ["battery", "screen", "price", "zoom lens", "Weight"]


def random_records(rng: np.random.Generator, max_users=8, max_items=8,
                   max_ratings=40, max_opinions=40):
    """One random record set; shapes and collisions vary with the rng."""
    users = [f"u{i}" for i in range(1 + int(rng.integers(max_users)))]
    items = [f"i{i}" for i in range(1 + int(rng.integers(max_items)))]
    ratings = [
        RatingRecord(
            user=users[rng.integers(len(users))],
            item=items[rng.integers(len(items))],
            rating=RATING_VALUES[rng.integers(len(RATING_VALUES))],
        )
        for _ in range(int(rng.integers(max_ratings + 1)))
    ]
    opinions = [
        AspectOpinionRecord(
            user=users[rng.integers(len(users))],
            item=items[rng.integers(len(items))],
            aspect=ASPECT_POOL[rng.integers(len(ASPECT_POOL))],
            polarity=POLARITY_VALUES[rng.integers(len(POLARITY_VALUES))],
        )
        for _ in range(int(rng.integers(max_opinions + 1)))
    ]
    return ratings, opinions


@st.composite
def record_sets(draw, max_ratings=25, max_opinions=25):
    n_users = draw(st.integers(1, 6))
    n_items = draw(st.integers(1, 6))
    user_keys = st.sampled_from([f"u{i}" for i in range(n_users)])
    item_keys = st.sampled_from([f"i{i}" for i in range(n_items)])
    ratings = draw(
        st.lists(
            st.builds(
                RatingRecord,
                user=user_keys,
                item=item_keys,
                rating=st.sampled_from(RATING_VALUES),
            ),
            max_size=max_ratings,
        )
    )
    opinions = draw(
        st.lists(
            st.builds(
                AspectOpinionRecord,
                user=user_keys,
                item=item_keys,
                aspect=st.sampled_from(ASPECT_POOL),
                polarity=st.sampled_from(POLARITY_VALUES),
            ),
            max_size=max_opinions,
        )
    )
    return ratings, opinions


TOY_RATINGS = [
    RatingRecord("u1", "i1", 5.0),
    RatingRecord("u1", "i2", 4.0),
    RatingRecord("u1", "i3", 2.0),
    RatingRecord("u2", "i1", 4.0),
    RatingRecord("u2", "i2", 5.0),
    RatingRecord("u2", "i4", 1.0),
    RatingRecord("u3", "i2", 3.0),
    RatingRecord("u3", "i3", 5.0),
    RatingRecord("u3", "i4", 4.0),
    RatingRecord("u4", "i1", 2.0),
    RatingRecord("u4", "i3", 4.0),
    RatingRecord("u4", "i5", 5.0),
    RatingRecord("u5", "i4", 5.0),
    RatingRecord("u5", "i5", 4.0),
    RatingRecord("u5", "i1", 3.0),
    RatingRecord("u6", "i5", 2.0),
    RatingRecord("u6", "i2", 1.0),
]

TOY_OPINIONS = [
    AspectOpinionRecord("u1", "i1", "battery", 1.0),
    AspectOpinionRecord("u1", "i3", "price", -1.0),
    AspectOpinionRecord("u2", "i1", "battery", 2.0),
    AspectOpinionRecord("u2", "i2", "screen", 1.0),
    AspectOpinionRecord("u3", "i3", "zoom", 0.0),
    AspectOpinionRecord("u4", "i3", "screen", -1.0),
    AspectOpinionRecord("u5", "i4", "zoom", 1.5),
    AspectOpinionRecord("u5", "i5", "price", 0.0),
]

TOY_REVIEWS = {
    ("u1", "i1"): "The battery is great, the Screen acceptable.",
    ("u2", "i1"): "battery life rocks",
    ("u5", "i4"): "zoom zoom zoom",
    ("u4", "i3"): "screen is dim and the price too high",
}


@pytest.fixture
def toy_records():
    return list(TOY_RATINGS), list(TOY_OPINIONS)


@pytest.fixture(scope="session")
def toy_graph():
    return build_graph(TOY_RATINGS, TOY_OPINIONS, GraphVariant.GERA)


@pytest.fixture(scope="session")
def toy_model(toy_graph):
    config = TrainingConfig(dimension=8, epochs=4, seed=1)
    return train(toy_graph, config)
