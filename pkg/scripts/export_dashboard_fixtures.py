"""Record dashboard fixtures: drive the HTTP app over a small demo session and
save each endpoint body together with its request descriptor.

The files under frontend/fixtures are the offline contract for the dashboard
tests. Regenerate after any service schema change:

    python3 scripts/export_dashboard_fixtures.py --out-dir frontend/fixtures

The demo world is tuned so the recorded payloads carry the reference shapes
the dashboard tests pin: the subject sees exactly 10 unseen items, so her
recommendation list always contains item01, whose 12-user neighborhood
supports a 3-user brush with a liked histogram peaking at "locations" with
count 6; the subject profile tops out at "photography"; nine selected raters
produce a rating histogram of five 4s and four 5s. The script asserts those
shapes before writing anything.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from aspectkg.embedding import TrainingConfig, train
from aspectkg.graph import AspectOpinionRecord, GraphVariant, RatingRecord, build_graph
from aspectkg.service import ApiSession, create_app

RATERS = [
    ("bob", 4.0), ("carol", 4.5), ("dave", 4.0), ("erin", 4.0),
    ("frank", 4.0), ("gina", 5.0), ("hank", 5.0), ("iris", 5.0),
    ("jack", 5.0), ("kate", 3.0), ("liam", 2.0), ("mona", 1.0),
]

FILLER_RATINGS = [
    ("erin", "item03", 4.0), ("frank", "item03", 5.0), ("gina", "item03", 3.0),
    ("hank", "item04", 4.0), ("iris", "item05", 5.0), ("jack", "item06", 4.0),
    ("kate", "item07", 3.0), ("liam", "item08", 2.0), ("bob", "item09", 4.0),
    ("carol", "item10", 5.0), ("dave", "item11", 4.0),
]

OPINIONS = [
    ("alice", "item02", "photography", 1.0),
    ("alice", "item04", "photography", 1.0),
    ("alice", "item05", "photography", 1.0),
    ("alice", "item02", "locations", 1.0),
    ("alice", "item02", "price", -1.0),
    ("bob", "item01", "locations", 1.0),
    ("bob", "item05", "locations", 1.0),
    ("carol", "item01", "locations", 1.0),
    ("carol", "item06", "locations", 1.0),
    ("carol", "item01", "screen", -1.0),
    ("carol", "item01", "price", 1.0),
    ("dave", "item01", "locations", 1.0),
    ("dave", "item07", "locations", 1.0),
    ("dave", "item01", "battery", -1.0),
    ("erin", "item01", "locations", 1.0),
]

REVIEWS = {
    ("bob", "item01"): "The locations are stunning.",
    ("carol", "item01"): "Display is dim but the price is fair.",
    ("dave", "item01"): "Battery life is poor.",
}

ALL_RATERS = ",".join(u for u, _ in RATERS)
NINE = "bob,carol,dave,erin,frank,gina,hank,iris,jack"
BRUSH = "bob,carol,dave"

REQUESTS = [
    ("recommendations_alice", "/users/alice/recommendations", {"n": "10"}),
    ("raters_item01", "/items/item01/raters", {"subject": "alice"}),
    ("raters_item02", "/items/item02/raters", {"subject": "alice"}),
    ("raters_item03", "/items/item03/raters", {"subject": "alice"}),
    ("aspect_distribution_item01_all", "/aspects/distribution",
     {"item": "item01", "users": ALL_RATERS}),
    ("aspect_distribution_item01_brushed", "/aspects/distribution",
     {"item": "item01", "users": BRUSH}),
    ("aspect_profile_alice", "/users/alice/aspect-profile", {}),
    ("reviews_item01_page0", "/items/item01/reviews", {"page": "0", "pageSize": "1"}),
    ("reviews_item01_page1", "/items/item01/reviews", {"page": "1", "pageSize": "1"}),
    ("reviews_item01_page2", "/items/item01/reviews", {"page": "2", "pageSize": "1"}),
    ("reviews_item01_brushed", "/items/item01/reviews",
     {"users": BRUSH, "page": "0", "pageSize": "1"}),
    ("rating_distribution_item01", "/items/item01/rating-distribution", {}),
    ("rating_distribution_item01_nine", "/items/item01/rating-distribution",
     {"users": NINE}),
    ("rating_distribution_item01_brushed", "/items/item01/rating-distribution",
     {"users": BRUSH}),
    ("error_unknown_user", "/users/ghost/recommendations", {"n": "10"}),
]


def demo_session() -> ApiSession:
    ratings = [RatingRecord(u, "item01", v) for u, v in RATERS]
    ratings.append(RatingRecord("alice", "item02", 4.0))
    ratings.extend(RatingRecord(u, i, v) for u, i, v in FILLER_RATINGS)
    opinions = [AspectOpinionRecord(*rec) for rec in OPINIONS]
    graph = build_graph(ratings, opinions, GraphVariant.GERA)
    model = train(graph, TrainingConfig(dimension=8, epochs=5, seed=7))
    return ApiSession(model, graph, REVIEWS, {"display": "screen"}, projection_seed=11)


def check_reference_shapes(recorded: dict[str, dict]) -> None:
    recs = recorded["recommendations_alice"]["body"]
    assert len(recs) == 10, f"expected 10 recommendations, got {len(recs)}"
    assert "item01" in {r["item"] for r in recs}, "item01 must be recommendable"

    raters = recorded["raters_item01"]["body"]
    assert len(raters) == 12 and not any(r["isSubject"] for r in raters)
    lone = recorded["raters_item02"]["body"]
    assert lone == [{"user": "alice", "x": 0.0, "y": 0.0, "isSubject": True}]
    assert len(recorded["raters_item03"]["body"]) == 3

    brushed = recorded["aspect_distribution_item01_brushed"]["body"]
    assert brushed["liked"]["locations"] == 6, brushed
    full = recorded["aspect_distribution_item01_all"]["body"]
    assert full["liked"]["locations"] == 7, full
    profile = recorded["aspect_profile_alice"]["body"]
    assert max(profile["liked"], key=profile["liked"].get) == "photography"

    nine = recorded["rating_distribution_item01_nine"]["body"]
    assert nine == {"1": 0, "2": 0, "3": 0, "4": 5, "5": 4}, nine
    full_hist = recorded["rating_distribution_item01"]["body"]
    assert full_hist == {"1": 1, "2": 1, "3": 1, "4": 5, "5": 4}, full_hist
    brushed_hist = recorded["rating_distribution_item01_brushed"]["body"]
    assert brushed_hist == {"1": 0, "2": 0, "3": 0, "4": 3, "5": 0}, brushed_hist

    page0 = recorded["reviews_item01_page0"]["body"]
    assert page0["pageCount"] == 3
    assert any(s["sign"] == "positive" for s in page0["reviews"][0]["spans"])
    page1 = recorded["reviews_item01_page1"]["body"]
    page1_spans = page1["reviews"][0]["spans"]
    assert any(s["aspect"] == "Display" and s["sign"] == "negative" for s in page1_spans)
    page2 = recorded["reviews_item01_page2"]["body"]
    assert [s["sign"] for s in page2["reviews"][0]["spans"]] == ["negative"]

    error = recorded["error_unknown_user"]
    assert error["status"] == 404 and error["body"]["code"] == "unknown_user"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="frontend/fixtures")
    args = parser.parse_args()

    client = TestClient(create_app(demo_session()))
    recorded = {}
    for name, path, query in REQUESTS:
        response = client.get(path, params=query)
        recorded[name] = {
            "path": path,
            "query": query,
            "status": response.status_code,
            "body": response.json(),
        }
    check_reference_shapes(recorded)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, payload in recorded.items():
        (out / f"{name}.json").write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {len(recorded)} fixtures to {out}")


if __name__ == "__main__":
    main()
