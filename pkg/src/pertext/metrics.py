"""Per-class precision/recall/F1, macro F1, token accuracy, and evaluation reports."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .errors import EmptyDataset, EmptySequences, LengthMismatch, MixedTasks
from .types import Label, LabeledSequence, Task, Token, label_set_for


@dataclass(frozen=True, slots=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    predicted_count: int


@dataclass(frozen=True)
class EvalReport:
    task: Task
    per_class: dict[str, ClassScores]
    macro_f1: float
    accuracy: float
    token_total: int


class SequenceTagger(Protocol):
    """Anything the evaluator can score: a task plus per-token predictions."""

    task: Task

    def predict(self, tokens: Sequence[Token]) -> list[Label]: ...


def _paired_task(pred: Sequence[Label], gold: Sequence[Label]) -> Task:
    if len(pred) != len(gold):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(gold)} gold labels")
    if not pred:
        raise EmptySequences("no labels to score")
    task = gold[0].task
    for label in (*pred, *gold):
        if label.task is not task:
            raise MixedTasks(f"labels mix {label.task.value} with {task.value}")
    return task


def per_class_prf(pred: Sequence[Label], gold: Sequence[Label]) -> dict[str, ClassScores]:
    """Precision/recall/F1 per class, with zero conventions for empty denominators."""
    task = _paired_task(pred, gold)
    predicted = Counter(label.value for label in pred)
    support = Counter(label.value for label in gold)
    correct = Counter(p.value for p, g in zip(pred, gold) if p.value == g.value)
    scores: dict[str, ClassScores] = {}
    for cls in label_set_for(task).classes:
        tp = correct[cls]
        p = tp / predicted[cls] if predicted[cls] else 0.0
        r = tp / support[cls] if support[cls] else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        scores[cls] = ClassScores(p, r, f1, support[cls], predicted[cls])
    return scores


def macro_f1(per_class: Mapping[str, ClassScores]) -> float:
    """Unweighted mean F1 over every class, zero-support classes included."""
    return sum(s.f1 for s in per_class.values()) / len(per_class)


def accuracy(pred: Sequence[Label], gold: Sequence[Label]) -> float:
    if len(pred) != len(gold):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(gold)} gold labels")
    if not pred:
        raise EmptySequences("no labels to score")
    return sum(p.value == g.value for p, g in zip(pred, gold)) / len(pred)


def evaluate(tagger: SequenceTagger, dataset: Sequence[LabeledSequence]) -> EvalReport:
    """Score a tagger over a dataset, pooling tokens across all sequences."""
    if not dataset:
        raise EmptyDataset("nothing to evaluate")
    for seq in dataset:
        if seq.task is not tagger.task:
            raise MixedTasks(
                f"dataset task {seq.task.value} differs from tagger task {tagger.task.value}"
            )
    pred_all: list[Label] = []
    gold_all: list[Label] = []
    for seq in dataset:
        pred_all.extend(tagger.predict(seq.tokens))
        gold_all.extend(seq.labels)
    per_class = per_class_prf(pred_all, gold_all)
    return EvalReport(
        task=tagger.task,
        per_class=per_class,
        macro_f1=macro_f1(per_class),
        accuracy=accuracy(pred_all, gold_all),
        token_total=len(gold_all),
    )


def _pct(x: float) -> str:
    return f"{100 * x:.2f}"


def format_report(report: EvalReport) -> str:
    """Human-readable table, percentages at two decimals."""
    lines = [f"task: {report.task.value}   tokens: {report.token_total}"]
    header = f"{'class':<10} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>9} {'predicted':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for cls, s in report.per_class.items():
        lines.append(
            f"{cls:<10} {_pct(s.precision):>9} {_pct(s.recall):>9} {_pct(s.f1):>9}"
            f" {s.support:>9} {s.predicted_count:>9}"
        )
    lines.append("-" * len(header))
    lines.append(f"macro F1   {_pct(report.macro_f1):>9}")
    lines.append(f"accuracy   {_pct(report.accuracy):>9}")
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> dict:
    """EvalReport mirrored as a JSON object, percentages at two decimals."""
    return {
        "task": report.task.value,
        "per_class": {
            cls: {
                "precision": round(100 * s.precision, 2),
                "recall": round(100 * s.recall, 2),
                "f1": round(100 * s.f1, 2),
                "support": s.support,
                "predicted": s.predicted_count,
            }
            for cls, s in report.per_class.items()
        },
        "macro_f1": round(100 * report.macro_f1, 2),
        "accuracy": round(100 * report.accuracy, 2),
        "token_total": report.token_total,
    }
