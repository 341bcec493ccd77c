"""Operator entry points: ingest, train, index, serve, query, export,
gradcheck. Exit codes: 0 ok, 1 runtime failure, 2 usage."""

import argparse
import json
import logging
import sys

from .embedding import Activation, TrainConfig
from .errors import TagRankError

GRADCHECK_TOLERANCE = 1e-4


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    defaults = TrainConfig()
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--dim", type=int, default=defaults.dim)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--walks-per-node", type=int, default=defaults.walks_per_node)
    p.add_argument("--walk-length", type=int, default=defaults.walk_length)
    p.add_argument("--window", type=int, default=defaults.window)
    p.add_argument("--negatives", type=int, default=defaults.negatives)
    p.add_argument("--lr", type=float, default=defaults.learning_rate)
    p.add_argument("--preference-epochs", type=int,
                   default=defaults.preference_epochs)
    p.add_argument("--encoder-epochs", type=int, default=defaults.encoder_epochs)
    p.add_argument("--gcn-layers", type=int, choices=(1, 2),
                   default=defaults.gcn_layers)
    p.add_argument("--activation", choices=[a.value for a in Activation],
                   default=defaults.activation.value)
    p.add_argument("--negative-power", type=float, default=defaults.negative_power)
    p.add_argument("--unfreeze-embeddings", action="store_true")


def _config_from_args(args) -> TrainConfig:
    return TrainConfig(
        dim=args.dim, walks_per_node=args.walks_per_node,
        walk_length=args.walk_length, window=args.window,
        negatives=args.negatives, learning_rate=args.lr, epochs=args.epochs,
        seed=args.seed, activation=Activation(args.activation),
        gcn_layers=args.gcn_layers, negative_power=args.negative_power,
        preference_epochs=args.preference_epochs,
        encoder_epochs=args.encoder_epochs,
        unfreeze_embeddings=args.unfreeze_embeddings)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagrank",
        description="Train, inspect and serve hashtag-category rankings.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpora and print graph stats")
    p.add_argument("--posts", required=True)
    p.add_argument("--categories", required=True)

    p = sub.add_parser("train", help="build a model snapshot from corpora")
    p.add_argument("--posts", required=True)
    p.add_argument("--categories", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)

    p = sub.add_parser("index", help="export a snapshot's inverted index as JSON")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", default="-")

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--snapshot")
    p.add_argument("--port", type=int)
    p.add_argument("--host")
    p.add_argument("--config")

    p = sub.add_parser("query", help="rank hashtags for a category keyword")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--category", required=True,
                   help="category id, category name, or free keyword")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--min-posts", type=int)
    p.add_argument("--max-posts", type=int)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export", help="write ranked rows as CSV")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--min-posts", type=int)
    p.add_argument("--max-posts", type=int)
    p.add_argument("--out", default="-")

    p = sub.add_parser("gradcheck",
                       help="verify analytic gradients of all trained ops")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-5)

    return parser


def _resolve_keyword(snapshot, raw: str) -> str:
    """Category id -> its name; otherwise the raw string (name or keyword)."""
    cat_ord = snapshot.category_ordinal_by_id(raw)
    if cat_ord is not None:
        return snapshot.categories[cat_ord].name
    return raw


def _query_rows(args):
    from .ranking import RankingOptions, rank_hashtags
    from .snapshot import ModelSnapshot

    snapshot = ModelSnapshot.load(args.snapshot)
    keyword = _resolve_keyword(snapshot, args.category)
    opts = RankingOptions(top_n=args.n, min_post_count=args.min_posts,
                          max_post_count=args.max_posts)
    return rank_hashtags(keyword, opts, snapshot)


def cmd_ingest(args) -> int:
    from .graph import build_graph, graph_digest, read_categories, read_posts

    posts, rejects = read_posts(args.posts)
    for line_no, reason in rejects:
        print(f"rejected {args.posts}:{line_no}: {reason}", file=sys.stderr)
    categories = read_categories(args.categories)
    g = build_graph(posts, categories)
    print(f"posts: {len(posts)} accepted, {len(rejects)} rejected")
    for kind, count in g.node_counts.items():
        print(f"nodes[{kind.name.lower()}]: {count}")
    for kind, count in g.edge_counts.items():
        print(f"edges[{kind.name.lower()}]: {count}")
    print(f"digest: {graph_digest(g)}")
    return 0


def cmd_train(args) -> int:
    from .pipeline import build_snapshot_from_files

    cfg = _config_from_args(args)
    snapshot = build_snapshot_from_files(args.posts, args.categories, cfg)
    snapshot.save(args.out)
    print(f"snapshot written to {args.out} "
          f"(digest {snapshot.digest}, {len(snapshot.index.records)} hashtags)")
    return 0


def cmd_index(args) -> int:
    from .index import index_to_json
    from .snapshot import ModelSnapshot

    snapshot = ModelSnapshot.load(args.snapshot)
    payload = json.dumps(index_to_json(snapshot.index), indent=2, sort_keys=True)
    if args.out == "-":
        print(payload)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_service_config

    config = load_service_config(args.config)
    if args.port is not None:
        config["port"] = args.port
    if args.host:
        config["host"] = args.host
    if args.snapshot:
        config["snapshot"] = args.snapshot
    app = create_app(config=config)
    uvicorn.run(app, host=config["host"], port=config["port"], log_level="info")
    return 0


def cmd_query(args) -> int:
    from .service import scored_row

    rows = _query_rows(args)
    if args.json:
        print(json.dumps([scored_row(r) for r in rows]))
        return 0
    widths = {
        "hashtag": max([len("hashtag")] + [len(r.hashtag) for r in rows]),
        "similarity": 12,
        "rerank": 12,
        "posts": 8,
    }
    header = (f"{'hashtag':<{widths['hashtag']}}  "
              f"{'similarity':>{widths['similarity']}}  "
              f"{'rerank':>{widths['rerank']}}  "
              f"{'posts':>{widths['posts']}}")
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r.hashtag:<{widths['hashtag']}}  "
              f"{r.similarity:>{widths['similarity']}.6f}  "
              f"{r.rerank_score:>{widths['rerank']}.6f}  "
              f"{r.post_count:>{widths['posts']}}")
    return 0


def cmd_export(args) -> int:
    from .service import rows_to_csv

    body = rows_to_csv(_query_rows(args))
    if args.out == "-":
        sys.stdout.write(body)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
    return 0


def cmd_gradcheck(args) -> int:
    from .gradcheck import check_all

    results = check_all(seed=args.seed, epsilon=args.eps)
    failed = False
    for op, err in results.items():
        status = "ok" if err <= GRADCHECK_TOLERANCE else "FAIL"
        print(f"{op:<10} max relative error {err:.3e}  {status}")
        failed = failed or err > GRADCHECK_TOLERANCE
    return 1 if failed else 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "index": cmd_index,
    "serve": cmd_serve,
    "query": cmd_query,
    "export": cmd_export,
    "gradcheck": cmd_gradcheck,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except TagRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
