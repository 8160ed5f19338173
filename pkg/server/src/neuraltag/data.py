"""JSON Lines dataset loading (the refinement toolkit's dataset wire format)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

TASKS = ("punct", "zwnj", "ezafe")

# Class order matters: the last class is the "no change" fallback used when a
# word falls outside the encoder's truncation window.
LABELS: dict[str, tuple[str, ...]] = {
    "punct": ("PERIOD", "COLON", "COMMA", "QUESTION", "UNK"),
    "zwnj": ("1", "0"),
    "ezafe": ("1", "0"),
}


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    words: tuple[str, ...]
    labels: tuple[str, ...]


def load_jsonl(path, task: str) -> list[Example]:
    """Load one dataset file, failing fast on task or label-set mismatches."""
    if task not in TASKS:
        raise DatasetError(f"unknown task {task!r}")
    classes = set(LABELS[task])
    examples: list[Example] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:{line_no}: bad JSON: {exc}") from None
        if obj.get("task") != task:
            raise DatasetError(
                f"{path}:{line_no}: dataset is task {obj.get('task')!r}, expected {task!r}"
            )
        words = tuple(t["s"] for t in obj["tokens"])
        labels = tuple(obj["labels"])
        if len(words) != len(labels):
            raise DatasetError(f"{path}:{line_no}: {len(words)} tokens vs {len(labels)} labels")
        bad = [l for l in labels if l not in classes]
        if bad:
            raise DatasetError(f"{path}:{line_no}: labels {bad[:3]} not in the {task} label set")
        if words:
            examples.append(Example(words, labels))
    if not examples:
        raise DatasetError(f"{path}: no usable sequences")
    return examples


def macro_f1(pred: list[str], gold: list[str], classes: tuple[str, ...]) -> float:
    """Unweighted mean F1 over all classes, zero-support classes included."""
    total = 0.0
    for cls in classes:
        tp = sum(1 for p, g in zip(pred, gold) if p == cls and g == cls)
        n_pred = sum(1 for p in pred if p == cls)
        n_gold = sum(1 for g in gold if g == cls)
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_gold if n_gold else 0.0
        total += 2 * p * r / (p + r) if p + r else 0.0
    return total / len(classes)
