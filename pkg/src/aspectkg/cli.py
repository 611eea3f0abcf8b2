"""Umbrella command line: ingest, train, recommend, evaluate, explain,
explain-stats, serve.

Path arguments fall back to ASPECTKG_* environment variables (ASPECTKG_RATINGS,
ASPECTKG_OPINIONS, ASPECTKG_REVIEWS, ASPECTKG_GRAPH, ASPECTKG_MODEL,
ASPECTKG_SYNONYMS) so pipelines can be wired without repeating flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import checkpoint, data, embedding, evaluation, explain, graph as graphmod

ENV_PREFIX = "ASPECTKG_"


def _env_default(name: str):
    return os.environ.get(ENV_PREFIX + name.upper())


def _add_path(parser: argparse.ArgumentParser, flag: str, env: str, help_text: str,
              required: bool = True) -> None:
    default = _env_default(env)
    parser.add_argument(
        flag,
        default=default,
        required=required and default is None,
        help=f"{help_text} (env {ENV_PREFIX}{env.upper()})",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aspectkg")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build and serialize a knowledge graph")
    _add_path(p, "--ratings", "ratings", "ratings TSV")
    _add_path(p, "--opinions", "opinions", "aspect-opinion TSV")
    p.add_argument(
        "--variant",
        default=graphmod.GraphVariant.GERA.value,
        choices=[v.value for v in graphmod.GraphVariant],
    )
    p.add_argument("--min-user-ratings", type=int, default=0)
    _add_path(p, "--out", "graph", "output graph path")

    p = sub.add_parser("train", help="train embeddings on a serialized graph")
    _add_path(p, "--graph", "graph", "input graph path")
    p.add_argument("--dim", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--file-order", action="store_true",
                   help="visit edges in file order instead of shuffling per epoch")
    _add_path(p, "--out", "model", "output checkpoint path")

    p = sub.add_parser("recommend", help="top-n items for a user")
    _add_path(p, "--model", "model", "model checkpoint")
    _add_path(p, "--graph", "graph", "graph path")
    p.add_argument("--user", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--include-seen", action="store_true")

    p = sub.add_parser("evaluate", help="k-fold ranking evaluation")
    _add_path(p, "--ratings", "ratings", "ratings TSV")
    _add_path(p, "--opinions", "opinions", "aspect-opinion TSV")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--ks", default="10,20,30")
    p.add_argument("--models", default="rdm,pop,gera")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--out", required=True, help="report JSON path")

    p = sub.add_parser("explain", help="aspect explanation bundle for a user")
    _add_path(p, "--model", "model", "model checkpoint")
    _add_path(p, "--graph", "graph", "graph path")
    p.add_argument("--user", required=True)
    p.add_argument("--cutoff", type=int, default=30)
    p.add_argument("--neighbors", type=int, default=20)
    p.add_argument("--out", required=True)

    p = sub.add_parser("explain-stats", help="aggregate statistics over bundles")
    p.add_argument("--bundles", required=True, help="directory of bundle JSON files")
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="run the HTTP API")
    _add_path(p, "--model", "model", "model checkpoint")
    _add_path(p, "--graph", "graph", "graph path")
    _add_path(p, "--reviews", "reviews", "reviews TSV", required=False)
    _add_path(p, "--synonyms", "synonyms", "synonym lexicon TSV", required=False)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--projection-seed", type=int, default=0)
    return parser


def _cmd_ingest(args) -> int:
    ratings = data.load_ratings(args.ratings, min_user_ratings=args.min_user_ratings)
    opinions = data.load_opinions(args.opinions)
    variant = graphmod.GraphVariant(args.variant)
    graph = graphmod.build_graph(ratings, opinions, variant)
    graphmod.save_graph(graph, args.out)
    stats = graphmod.graph_stats(ratings, opinions)
    payload = stats.to_dict()
    payload["variant"] = variant.value
    payload["edges"] = graph.num_edges()
    payload["rejectedRatings"] = len(graph.rejected_ratings)
    payload["rejectedOpinions"] = len(graph.rejected_opinions)
    print(json.dumps(payload, sort_keys=True))
    return 0


def _cmd_train(args) -> int:
    graph = graphmod.load_graph(args.graph)
    order = embedding.BatchOrder.FILE_ORDER if args.file_order else embedding.BatchOrder.SHUFFLED
    config = embedding.TrainingConfig(
        dimension=args.dim,
        learning_rate=args.lr,
        epochs=args.epochs,
        margin=args.margin,
        negatives_per_positive=args.negatives,
        seed=args.seed,
        partitions=args.partitions,
        batch_order=order,
    )

    def on_epoch(epoch: int, mean_loss: float, wall_millis: float) -> None:
        print(json.dumps(
            {"epoch": epoch, "meanLoss": mean_loss, "wallMillis": round(wall_millis, 3)}
        ))

    model = embedding.train(graph, config, epoch_callback=on_epoch)
    checkpoint.save_model(model, args.out)
    return 0


def _cmd_recommend(args) -> int:
    from . import recommend as recmod

    model = checkpoint.load_model(args.model)
    graph = graphmod.load_graph(args.graph)
    subject = graph.users.node(args.user)
    ranked = recmod.recommend_top_n(
        model, graph, subject, args.n, exclude_seen=not args.include_seen
    )
    for rank, (node, score) in enumerate(ranked.entries, start=1):
        print(f"{rank}\t{node.key}\t{score!r}")
    return 0


def _cmd_evaluate(args) -> int:
    ratings = data.load_ratings(args.ratings)
    opinions = data.load_opinions(args.opinions)
    fold_plan = evaluation.kfold_split(ratings, args.folds, args.seed)
    ks = [int(part) for part in args.ks.split(",") if part]
    model_names = [part.strip() for part in args.models.split(",") if part.strip()]
    config = embedding.TrainingConfig(
        dimension=args.dim,
        learning_rate=args.lr,
        epochs=args.epochs,
        margin=args.margin,
        negatives_per_positive=args.negatives,
        seed=args.seed,
    )
    report = evaluation.evaluate(ratings, opinions, fold_plan, ks, model_names, config)
    payload = report.to_dict()
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True))
    for name, body in sorted(payload["models"].items()):
        for k, means in sorted(body["overall"].items(), key=lambda kv: int(kv[0])):
            print(f"{name}\tf1@{k}\t{means['f1']:.4f}")
    return 0


def _cmd_explain(args) -> int:
    model = checkpoint.load_model(args.model)
    graph = graphmod.load_graph(args.graph)
    bundle = explain.build_explanation(
        model, graph, args.user, cutoff=args.cutoff, neighbor_k=args.neighbors
    )
    Path(args.out).write_text(json.dumps(bundle.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_explain_stats(args) -> int:
    paths = sorted(Path(args.bundles).glob("*.json"))
    bundles = [
        explain.ExplanationBundle.from_dict(json.loads(path.read_text())) for path in paths
    ]
    stats = explain.explanation_stats(bundles)
    Path(args.out).write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
    print(json.dumps(stats.to_dict(), sort_keys=True))
    return 0


def _cmd_serve(args) -> int:
    from . import service

    session = service.load_session(
        args.model,
        args.graph,
        reviews_path=args.reviews,
        synonyms_path=args.synonyms,
        port=args.port,
        projection_seed=args.projection_seed,
    )
    service.run_server(session)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_evaluate,
    "explain": _cmd_explain,
    "explain-stats": _cmd_explain_stats,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 0
    except (
        OSError,
        ValueError,
        KeyError,
        graphmod.GraphError,
        embedding.EmbeddingError,
        checkpoint.CheckpointError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
