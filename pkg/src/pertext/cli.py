"""Command-line surface: build-dataset, train, eval, refine, healthcheck.

Exit codes: 0 success, 1 domain error, 2 I/O or environment error.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from . import corpus, metrics, remote, tagger
from .errors import PertextError
from .pipeline import EzafeMarker, PipelineConfig, refine
from .types import Task

_TASK_CHOICES = [t.value for t in Task]
_STAGES = ("punct", "zwnj", "ezafe")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pertext",
        description="Persian text refinement: punctuation, half-space, and ezafe models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="turn a Bijankhan-format corpus into task datasets")
    p.add_argument("corpus", type=Path, help="corpus file: word<TAB>tag lines, '#' between sentences")
    p.add_argument("--task", required=True, choices=_TASK_CHOICES)
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--ratios", default="0.8:0.1:0.1", metavar="f:f:f")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--zwnj-only", action="store_true",
                   help="keep only sentences containing a ZWNJ word (zwnj task)")
    p.add_argument("--ezafe-tag", default="EZ", metavar="SUBSTR",
                   help="POS-tag substring marking ezafe (ezafe task)")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", help="train the native baseline tagger")
    p.add_argument("--task", required=True, choices=_TASK_CHOICES)
    p.add_argument("--train", required=True, type=Path, dest="train_path")
    p.add_argument("--val", type=Path, dest="val_path")
    p.add_argument("--out", required=True, type=Path, help="model file to write")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model or endpoint on a dataset")
    p.add_argument("--dataset", required=True, type=Path)
    _add_stage_flags(p)
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("refine", help="refine text from a file or stdin, line by line")
    p.add_argument("input", nargs="?", type=Path, help="input file (default: stdin)")
    _add_stage_flags(p)
    p.add_argument("--marker", choices=[m.value for m in EzafeMarker], default="kasra")
    p.add_argument("--keep-punct", action="store_true")
    p.add_argument("--trace", type=Path, help="write per-line stage traces as JSON lines")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("healthcheck", help="probe a remote tagger endpoint")
    p.add_argument("endpoint", help="server command line or http(s) URL")
    p.set_defaults(func=cmd_healthcheck)

    return parser


def _add_stage_flags(p: argparse.ArgumentParser) -> None:
    for stage in _STAGES:
        p.add_argument(f"--{stage}-model", type=Path, dest=f"{stage}_model")
        p.add_argument(f"--{stage}-endpoint", dest=f"{stage}_endpoint")


def main(argv: list[str] | None = None) -> int:
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(line_buffering=True)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PertextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


# --- subcommands --------------------------------------------------------------


def cmd_build_dataset(args: argparse.Namespace) -> int:
    task = Task.from_wire(args.task)
    if args.zwnj_only and task is not Task.ZWNJ:
        raise PertextError("--zwnj-only applies only to --task zwnj")
    sentences = corpus.read_corpus_file(args.corpus)
    if task is Task.PUNCTUATION:
        dataset = corpus.build_punct_dataset(sentences)
    elif task is Task.ZWNJ:
        dataset = corpus.build_zwnj_dataset(sentences, zwnj_only=args.zwnj_only)
    else:
        dataset = corpus.build_ezafe_dataset(
            sentences, corpus.make_ezafe_predicate(args.ezafe_tag)
        )

    spec = corpus.SplitSpec.parse(args.ratios, seed=args.seed)
    train, val, test = corpus.split_dataset(dataset, spec)

    args.out.mkdir(parents=True, exist_ok=True)
    stats: dict = {
        "task": task.value,
        "seed": args.seed,
        "ratios": args.ratios,
        "splits": {},
    }
    for name, split in (("train", train), ("val", val), ("test", test)):
        corpus.save_dataset_file(split, args.out / f"{name}.jsonl")
        label_counts: dict[str, int] = {}
        for seq in split:
            for lab in seq.labels:
                label_counts[lab.value] = label_counts.get(lab.value, 0) + 1
        stats["splits"][name] = {
            "sequences": len(split),
            "tokens": sum(len(seq) for seq in split),
            "labels": label_counts,
        }
    (args.out / "stats.json").write_text(
        json.dumps(stats, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(train)}/{len(val)}/{len(test)} sequences to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    task = Task.from_wire(args.task)
    train_data = corpus.load_dataset_file(args.train_path)
    val_data = corpus.load_dataset_file(args.val_path) if args.val_path else []
    for seq in (*train_data, *val_data):
        if seq.task is not task:
            raise PertextError(
                f"dataset is task {seq.task.value}, but --task says {task.value}"
            )

    def report(epoch: int, macro: float) -> None:
        print(f"epoch {epoch}/{args.epochs}: val macro-F1 {macro:.4f}")

    cfg = tagger.TrainConfig(epochs=args.epochs, seed=args.seed)
    model = tagger.train(train_data, val_data, cfg, progress=report if val_data else None)
    tagger.save_file(model, args.out)
    print(f"wrote model to {args.out}")
    return 0


def _stage_handles(args: argparse.Namespace, task_for: Callable[[str], Task]) -> dict[str, object]:
    """Resolve --*-model / --*-endpoint flags into tagger handles, keyed by stage."""
    handles: dict[str, object] = {}
    for stage in _STAGES:
        model_path = getattr(args, f"{stage}_model")
        endpoint_spec = getattr(args, f"{stage}_endpoint")
        if model_path and endpoint_spec:
            raise PertextError(f"--{stage}-model and --{stage}-endpoint are mutually exclusive")
        if model_path:
            model = tagger.load_file(model_path)
            if model.task is not task_for(stage):
                raise PertextError(
                    f"--{stage}-model holds a {model.task.value} model"
                )
            handles[stage] = model
        elif endpoint_spec:
            handles[stage] = remote.RemoteTagger(
                remote.endpoint_for(endpoint_spec), task_for(stage)
            )
    return handles


def cmd_eval(args: argparse.Namespace) -> int:
    dataset = corpus.load_dataset_file(args.dataset)
    if not dataset:
        raise PertextError(f"{args.dataset} holds no sequences")
    task = dataset[0].task
    handles = _stage_handles(args, lambda stage: Task.from_wire(stage))
    if len(handles) != 1:
        raise PertextError("eval needs exactly one --<stage>-model or --<stage>-endpoint")
    stage, handle = next(iter(handles.items()))
    if Task.from_wire(stage) is not task:
        raise PertextError(f"dataset is task {task.value}, but the tagger is for {stage}")
    try:
        report = metrics.evaluate(handle, dataset)  # type: ignore[arg-type]
    finally:
        if isinstance(handle, remote.RemoteTagger):
            handle.close()
    if args.as_json:
        print(json.dumps(metrics.report_to_json(report), ensure_ascii=False))
    else:
        print(metrics.format_report(report))
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise PertextError("--jobs must be >= 1")
    marker = EzafeMarker(args.marker)
    open_handles: list[object] = []

    def make_config() -> PipelineConfig:
        handles = _stage_handles(args, lambda stage: Task.from_wire(stage))
        open_handles.extend(h for h in handles.values() if isinstance(h, remote.RemoteTagger))
        return PipelineConfig(
            punct_tagger=handles.get("punct"),  # type: ignore[arg-type]
            zwnj_tagger=handles.get("zwnj"),  # type: ignore[arg-type]
            ezafe_tagger=handles.get("ezafe"),  # type: ignore[arg-type]
            ezafe_marker=marker,
            keep_punct=args.keep_punct,
        )

    probe = make_config()
    if not probe.has_stage:
        raise PertextError("refine needs at least one configured stage")

    if args.input is not None:
        text = args.input.read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    lines = text.splitlines()

    try:
        if args.jobs == 1:
            results = [refine(line, probe) for line in lines]
        else:
            # Remote connections are per-requester, so each worker thread gets
            # its own config; executor.map keeps output in input order.
            local = threading.local()

            def work(line: str):
                cfg = getattr(local, "cfg", None)
                if cfg is None:
                    cfg = local.cfg = make_config()
                return refine(line, cfg)

            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(work, lines))
    finally:
        for handle in open_handles:
            handle.close()  # type: ignore[attr-defined]

    # Nothing is printed until every line succeeded (no partial output).
    for result in results:
        print(result.output)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for result in results:
                fh.write(json.dumps(result.to_json(), ensure_ascii=False))
                fh.write("\n")
    return 0


def cmd_healthcheck(args: argparse.Namespace) -> int:
    info = remote.healthcheck(remote.endpoint_for(args.endpoint))
    tasks = ",".join(t.value for t in info.tasks)
    print(f"name: {info.name}  protocol: {info.protocol_version}  tasks: {tasks}")
    return 0
