"""Core domain vocabulary: tasks, separators, tokens, labels, labeled sequences."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

ZWNJ = "\u200c"

# Marks recognized as tokenization boundaries. Only four of them are ever
# restored (see textproc.PUNCT_CLASS_OF_MARK); the rest are recognized so they
# can be split off and stripped.
PUNCT_MARKS = frozenset({".", ":", "،", "؟", "!", "؛", "(", ")", "«", "»", ",", "?", ";", '"'})

UNK = "UNK"
PUNCT_CLASSES = ("PERIOD", "COLON", "COMMA", "QUESTION", UNK)
BINARY_CLASSES = ("1", "0")


class Task(Enum):
    """The three refinement tasks; enum values double as wire names."""

    PUNCTUATION = "punct"
    ZWNJ = "zwnj"
    EZAFE = "ezafe"

    @classmethod
    def from_wire(cls, value: str) -> "Task":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown task {value!r}") from None


class Separator(Enum):
    """What follows a token in the surface text; values are wire names."""

    SPACE = "sp"
    ZWNJ = "zwnj"
    NONE = "none"

    @classmethod
    def from_wire(cls, value: str) -> "Separator":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown separator {value!r}") from None


@dataclass(frozen=True, slots=True)
class LabelSet:
    """Ordered class inventory of one task; order is fixed (serialization depends on it)."""

    task: Task
    classes: tuple[str, ...]

    def index_of(self, value: str) -> int:
        return self.classes.index(value)

    def __contains__(self, value: object) -> bool:
        return value in self.classes


_LABEL_SETS = {
    Task.PUNCTUATION: LabelSet(Task.PUNCTUATION, PUNCT_CLASSES),
    Task.ZWNJ: LabelSet(Task.ZWNJ, BINARY_CLASSES),
    Task.EZAFE: LabelSet(Task.EZAFE, BINARY_CLASSES),
}


def label_set_for(task: Task) -> LabelSet:
    """The canonical ordered label set of a task (same object on every call)."""
    return _LABEL_SETS[task]


@dataclass(frozen=True, slots=True)
class Token:
    """One surface word piece plus the separator that follows it.

    Surfaces never contain whitespace. The tokenizer and the dataset builders
    never emit U+200C inside a surface either; the only writer that does is
    the written-ye ezafe renderer, which suffixes U+200C + ye to a surface.
    """

    surface: str
    sep_after: Separator = Separator.NONE
    is_punct: bool = False

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token surface contains whitespace: {self.surface!r}")
        if self.is_punct and self.surface not in PUNCT_MARKS:
            raise ValueError(f"not a recognized punctuation mark: {self.surface!r}")


@dataclass(frozen=True, slots=True)
class Label:
    """A class assignment for one token under one task."""

    task: Task
    value: str

    def __post_init__(self) -> None:
        if self.value not in label_set_for(self.task):
            raise ValueError(f"{self.value!r} is not a class of task {self.task.value}")


@dataclass(frozen=True, slots=True)
class LabeledSequence:
    """A token sequence paired with one label per token, all on one task."""

    task: Task
    tokens: tuple[Token, ...]
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.labels):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.labels)} labels"
            )
        for label in self.labels:
            if label.task is not self.task:
                raise ValueError(
                    f"label task {label.task.value} differs from sequence task {self.task.value}"
                )

    def __len__(self) -> int:
        return len(self.tokens)
