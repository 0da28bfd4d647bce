"""Command line entry points: mine, ingest, embed-train, session run, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import embed, miner, session as sess
from .core import Kind
from .select import SelectionStrategy, Variant

KINDS = {"set": Kind.SET, "seq": Kind.SEQUENCE, "graph": Kind.GRAPH}


def _cmd_mine(args):
    dataset = miner.read_itemset_dataset(args.input)
    patterns = miner.mine_closed_itemsets(dataset, args.min_support)
    miner.write_pattern_file(args.out, patterns, dataset)
    print(f"{len(patterns)} closed patterns -> {args.out}")


def _cmd_ingest(args):
    kind = KINDS[args.kind]
    dataset = miner.read_dataset(args.data, kind)
    patterns = miner.ingest_patterns(args.patterns, kind, dataset)
    if args.out:
        miner.write_pattern_file(args.out, patterns, dataset)
    print(f"{len(patterns)} patterns ingested from {args.patterns}")


def _cmd_embed_train(args):
    kind = KINDS[args.kind]
    dataset = miner.read_dataset(args.input, kind)
    corpus = embed.build_corpus(dataset)
    model = embed.train_embedding(
        corpus, args.dim, embed.Hyperparams(seed=args.seed, epochs=args.epochs)
    )
    embed.save_embedding(args.out, model)
    print(f"vocabulary {len(model.vocabulary)}, d={model.d} -> {args.out}")


def _cmd_session_run(args):
    kind = KINDS[args.kind]
    dataset = miner.read_dataset(args.data, kind)
    if kind == Kind.SET:
        if args.min_support is None:
            sys.exit("set sessions mine natively: pass --min-support")
        patterns = miner.mine_closed_itemsets(dataset, args.min_support)
    else:
        if args.patterns is None:
            sys.exit("sequence/graph sessions ingest patterns: pass --patterns")
        patterns = miner.ingest_patterns(args.patterns, kind, dataset)

    if args.oracle == "majority":
        oracle = sess.OracleSpec(variant="majority")
        class_count = max(dataset.class_labels or (2,))
    else:
        tokens = {name: tok for tok, name in zip(dataset.item_universe, dataset.token_names or ())}
        missing = [t for t in args.feature_set.split(",") if t not in tokens]
        if missing:
            sys.exit(f"feature tokens not in dataset: {missing}")
        oracle = sess.OracleSpec(
            variant="features",
            feature_set=frozenset(tokens[t] for t in args.feature_set.split(",")),
            threshold=args.threshold,
        )
        class_count = 2

    config = sess.SessionConfig(
        class_count=max(class_count, 2),
        strategy=SelectionStrategy(variant=Variant(args.strategy)),
        oracle=oracle,
        seed=args.seed,
        batch_fraction=args.batch_fraction,
        dim=args.dim,
    )
    _, report = sess.run_session(dataset, patterns, config)
    text = sess.report_to_json(report)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
        print(f"report -> {args.report}")
    else:
        print(text)


def _cmd_serve(args):
    from .service import serve

    serve(args.store, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patlearn")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine closed frequent itemsets from a FIMI file")
    p.add_argument("--input", required=True)
    p.add_argument("--min-support", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("ingest", help="verify an externally mined pattern file")
    p.add_argument("--kind", choices=["seq", "graph"], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--patterns", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("embed-train", help="train the sentence-vector model on a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["seq", "graph"], required=True)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed_train)

    p = sub.add_parser("session", help="session subcommands")
    ssub = p.add_subparsers(dest="session_command", required=True)
    pr = ssub.add_parser("run", help="run an oracle-rated session and write the report")
    pr.add_argument("--data", required=True)
    pr.add_argument("--kind", choices=["set", "seq", "graph"], default="set")
    pr.add_argument("--patterns")
    pr.add_argument("--min-support", type=int)
    pr.add_argument("--oracle", choices=["majority", "features"], default="majority")
    pr.add_argument("--feature-set", default="", help="comma-separated tokens for the features oracle")
    pr.add_argument("--threshold", type=float, default=0.8)
    pr.add_argument("--strategy", choices=[v.value for v in Variant], default="hybrid")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--batch-fraction", type=float, default=0.02)
    pr.add_argument("--dim", type=int, default=100)
    pr.add_argument("--report")
    pr.set_defaults(func=_cmd_session_run)

    p = sub.add_parser("serve", help="start the HTTP feedback service")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    args.func(args)


if __name__ == "__main__":
    main()
