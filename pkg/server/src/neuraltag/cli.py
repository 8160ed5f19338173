"""Command-line entry: finetune a checkpoint, serve it, or score it."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import TASKS, DatasetError
from .finetune import DEFAULT_BASE_MODEL, FinetuneConfig, finetune
from .serve import CheckpointError, Predictor, evaluate_checkpoint, make_http_server, serve_stdio


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neuraltag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="fine-tune the encoder for one task")
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--train", required=True, type=Path)
    p.add_argument("--val", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--base-model", default=DEFAULT_BASE_MODEL)
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-length", type=int, default=256)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("serve", help="serve a checkpoint over stdio or HTTP")
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--name", default="neuraltag")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--stdio", action="store_true", help="line protocol on stdin/stdout (default)")
    mode.add_argument("--http", metavar="HOST:PORT", help="HTTP binding")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="score a checkpoint on a JSONL dataset")
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--dataset", required=True, type=Path)
    p.set_defaults(func=cmd_eval)

    return parser


def cmd_finetune(args: argparse.Namespace) -> int:
    cfg = FinetuneConfig(
        base_model=args.base_model,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        dropout=args.dropout,
        batch_size=args.batch_size,
        seed=args.seed,
        max_length=args.max_length,
    )
    history = finetune(args.train, args.val, args.task, cfg, args.out)
    for epoch, loss in enumerate(history, 1):
        print(f"epoch {epoch}/{len(history)}: train loss {loss:.4f}", file=sys.stderr)
    print(f"checkpoint written to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    predictor = Predictor.load(args.checkpoint)
    if args.http:
        host, _, port = args.http.rpartition(":")
        server = make_http_server(predictor, host or "127.0.0.1", int(port), args.name)
        print(f"listening on http://{server.server_address[0]}:{server.server_port}", file=sys.stderr)
        server.serve_forever()
        return 0
    serve_stdio(predictor, args.name)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    result = evaluate_checkpoint(args.checkpoint, args.dataset)
    print(json.dumps(result, ensure_ascii=False))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())
