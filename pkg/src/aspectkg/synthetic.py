"""Synthetic datasets with planted structure for end-to-end checks.

Three generators: two-cluster taste data where ratings and opinions agree,
a complementary split where half the items carry preference signal in ratings
only and the other half mostly in aspect opinions, and a popularity-skewed
set where item frequency predicts relevance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import AspectOpinionRecord, RatingRecord


@dataclass
class SyntheticDataset:
    ratings: list[RatingRecord]
    opinions: list[AspectOpinionRecord]
    user_cluster: dict[str, int]
    item_cluster: dict[str, int]


def _user_key(i: int) -> str:
    return f"u{i:04d}"


def _item_key(i: int) -> str:
    return f"i{i:04d}"


def _aspect_key(cluster: int, j: int) -> str:
    return f"asp{cluster}_{j}"


def planted_clusters(
    users: int = 200,
    items: int = 100,
    seed: int = 0,
    within_per_user: int = 50,
    cross_per_user: int = 20,
    aspects_per_cluster: int = 2,
    opinion_items_per_user: int = 44,
    dislike_items_per_user: int = 0,
) -> SyntheticDataset:
    """Two user clusters and two item clusters. Users rate a within-cluster
    draw at 5.0 and a cross-cluster draw at 1.0 (values are deterministic so
    the only dataset randomness is which items each user touches), like their
    own cluster's aspects on a fixed per-cluster slice of the catalog, and
    optionally dislike the other cluster's aspects on a few cross-cluster
    items. Aspect opinions therefore agree with the rating structure.
    """
    if users % 2 or items % 2:
        raise ValueError("users and items must be even for two balanced clusters")
    half_items = items // 2
    if within_per_user > half_items or cross_per_user > half_items:
        raise ValueError("per-user rating counts exceed the cluster item pool")
    if opinion_items_per_user > half_items:
        raise ValueError("opinion item count exceeds the cluster item pool")
    rng = np.random.default_rng(seed)

    user_cluster = {_user_key(i): i % 2 for i in range(users)}
    item_cluster = {_item_key(i): i % 2 for i in range(items)}
    cluster_items = {
        c: [k for k, cc in item_cluster.items() if cc == c] for c in (0, 1)
    }

    ratings: list[RatingRecord] = []
    opinions: list[AspectOpinionRecord] = []
    for u_key, c in user_cluster.items():
        own = rng.choice(cluster_items[c], size=within_per_user, replace=False)
        other = rng.choice(cluster_items[1 - c], size=cross_per_user, replace=False)
        for item in own:
            ratings.append(RatingRecord(u_key, str(item), 5.0))
        for item in other:
            ratings.append(RatingRecord(u_key, str(item), 1.0))
        for item in cluster_items[c][:opinion_items_per_user]:
            for j in range(aspects_per_cluster):
                opinions.append(
                    AspectOpinionRecord(u_key, str(item), _aspect_key(c, j), 1.0)
                )
        for item in other[:dislike_items_per_user]:
            for j in range(aspects_per_cluster):
                opinions.append(
                    AspectOpinionRecord(u_key, str(item), _aspect_key(1 - c, j), -1.0)
                )
    return SyntheticDataset(ratings, opinions, user_cluster, item_cluster)


def complementary_signal(
    users: int = 100,
    rating_items: int = 100,
    aspect_items: int = 2000,
    seed: int = 0,
    rating_within: int = 35,
    rating_cross: int = 25,
    raters_per_aspect_item: int = 3,
    aspects_per_cluster: int = 2,
) -> SyntheticDataset:
    """Half the catalog ("R items") carries taste signal in dense ratings and
    has no aspects at all; the other half ("A items") is rated by only a few
    users each, so ratings barely constrain those embeddings, but every
    within-cluster rater tags the item's cluster aspects. Ratings stay the
    ground truth for relevance on both halves.
    """
    if users % 2 or rating_items % 2 or aspect_items % 2:
        raise ValueError("population sizes must be even for two balanced clusters")
    if (raters_per_aspect_item * aspect_items) % users:
        raise ValueError("aspect-item rating slots must divide evenly among users")
    rng = np.random.default_rng(seed)

    user_cluster = {_user_key(i): i % 2 for i in range(users)}
    item_cluster: dict[str, int] = {}
    r_items: dict[int, list[str]] = {0: [], 1: []}
    for i in range(rating_items):
        key = _item_key(i)
        item_cluster[key] = i % 2
        r_items[i % 2].append(key)
    a_offset = rating_items
    a_keys: list[str] = []
    for i in range(aspect_items):
        key = _item_key(a_offset + i)
        item_cluster[key] = i % 2
        a_keys.append(key)

    ratings: list[RatingRecord] = []
    opinions: list[AspectOpinionRecord] = []
    user_keys = list(user_cluster)

    for u_key, c in user_cluster.items():
        own = rng.choice(r_items[c], size=rating_within, replace=False)
        other = rng.choice(r_items[1 - c], size=rating_cross, replace=False)
        for item in own:
            ratings.append(RatingRecord(u_key, str(item), float(rng.choice([4.0, 5.0]))))
        for item in other:
            ratings.append(RatingRecord(u_key, str(item), float(rng.choice([1.0, 2.0]))))

    # deal each A item to exactly `raters_per_aspect_item` users
    slots = np.repeat(np.arange(aspect_items), raters_per_aspect_item)
    rng.shuffle(slots)
    per_user = len(slots) // users
    for u_idx, u_key in enumerate(user_keys):
        c = user_cluster[u_key]
        chunk = slots[u_idx * per_user : (u_idx + 1) * per_user]
        for a_idx in np.unique(chunk):  # a user rates an item at most once
            item = a_keys[int(a_idx)]
            ic = item_cluster[item]
            if ic == c:
                ratings.append(RatingRecord(u_key, item, float(rng.choice([4.0, 5.0]))))
                for j in range(aspects_per_cluster):
                    opinions.append(
                        AspectOpinionRecord(u_key, item, _aspect_key(ic, j), 1.0)
                    )
            else:
                ratings.append(RatingRecord(u_key, item, float(rng.choice([1.0, 2.0]))))
    return SyntheticDataset(ratings, opinions, user_cluster, item_cluster)


def popularity_skewed(
    users: int = 60,
    items: int = 40,
    ratings_per_user: int = 20,
    seed: int = 0,
) -> SyntheticDataset:
    """Items are sampled with a steep frequency skew and the frequently seen
    items are also the well-liked ones, so rating counts predict relevance."""
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, items + 1)
    weights /= weights.sum()
    item_keys = [_item_key(i) for i in range(items)]
    ratings: list[RatingRecord] = []
    for u in range(users):
        picked = rng.choice(items, size=ratings_per_user, replace=False, p=weights)
        for i in picked:
            liked = rng.random() < (0.9 if i < items // 4 else 0.15)
            value = rng.choice([4.0, 5.0]) if liked else rng.choice([1.0, 2.0])
            ratings.append(RatingRecord(_user_key(u), item_keys[int(i)], float(value)))
    return SyntheticDataset(
        ratings, [], {_user_key(u): 0 for u in range(users)}, {k: 0 for k in item_keys}
    )
