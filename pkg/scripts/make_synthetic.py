"""Write one of the synthetic datasets as ratings/opinions TSVs.

The files feed the CLI pipeline directly:

    python3 scripts/make_synthetic.py planted --seed 0 --out-dir /tmp/planted
    aspectkg ingest --ratings /tmp/planted/ratings.tsv \
        --opinions /tmp/planted/opinions.tsv --out /tmp/planted/graph.tsv
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from aspectkg import synthetic
from aspectkg.data import save_opinions, save_ratings


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("design", choices=["planted", "complementary", "skewed"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", required=True)
    args = parser.parse_args()

    if args.design == "planted":
        ds = synthetic.planted_clusters(seed=args.seed)
    elif args.design == "complementary":
        ds = synthetic.complementary_signal(seed=args.seed)
    else:
        ds = synthetic.popularity_skewed(seed=args.seed)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_ratings(ds.ratings, out / "ratings.tsv")
    save_opinions(ds.opinions, out / "opinions.tsv")
    (out / "clusters.json").write_text(
        json.dumps({"users": ds.user_cluster, "items": ds.item_cluster}, indent=1)
    )
    print(
        f"{args.design} seed={args.seed}: {len(ds.ratings)} ratings, "
        f"{len(ds.opinions)} opinions -> {out}"
    )


if __name__ == "__main__":
    main()
