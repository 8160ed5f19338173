"""Bijankhan-format corpus ingestion and task dataset construction."""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence, TextIO, TypeVar

from .errors import EmptyDataset, InvalidEncoding, MalformedLine
from .textproc import NormalizationConfig, detokenize, normalize, strip_punctuation, tokenize
from .types import (
    ZWNJ,
    Label,
    LabeledSequence,
    Separator,
    Task,
    Token,
    label_set_for,
)

DELM_TAG = "DELM"
SENTENCE_DELIMITER = "#"

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class CorpusEntry:
    """One corpus row: a word (possibly multi-part) and its POS tag."""

    word: str
    tag: str

    def __post_init__(self) -> None:
        if not self.word:
            raise ValueError("corpus word must be non-empty")
        if not self.tag:
            raise ValueError("corpus tag must be non-empty")

    @property
    def is_delm(self) -> bool:
        return self.tag == DELM_TAG


@dataclass(frozen=True, slots=True)
class CorpusSentence:
    entries: tuple[CorpusEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("corpus sentence must be non-empty")


@dataclass(frozen=True, slots=True)
class SplitSpec:
    """Deterministic shuffle-and-partition ratios; exact rational arithmetic."""

    train_ratio: Fraction
    val_ratio: Fraction
    test_ratio: Fraction
    seed: int = 42

    def __post_init__(self) -> None:
        ratios = (self.train_ratio, self.val_ratio, self.test_ratio)
        for r in ratios:
            if not isinstance(r, Fraction):
                raise TypeError("ratios must be Fractions; use SplitSpec.of() for floats")
            if not 0 <= r <= 1:
                raise ValueError(f"ratio {r} outside [0, 1]")
        if sum(ratios) != 1:
            raise ValueError(f"ratios sum to {sum(ratios)}, expected exactly 1")

    @classmethod
    def of(cls, train, val, test, seed: int = 42) -> "SplitSpec":
        """Build a spec from ints, decimal strings, or floats (read at face value)."""

        def frac(x) -> Fraction:
            # 0.8 means the decimal 0.8, not its binary float expansion.
            return Fraction(str(x)) if isinstance(x, float) else Fraction(x)

        return cls(frac(train), frac(val), frac(test), seed)

    @classmethod
    def parse(cls, text: str, seed: int = 42) -> "SplitSpec":
        """Parse a 'train:val:test' ratio string such as '0.8:0.1:0.1'."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected 'f:f:f', got {text!r}")
        return cls.of(parts[0], parts[1], parts[2], seed)


def read_corpus(stream: Iterable[str]) -> list[CorpusSentence]:
    """Parse 'word<TAB>tag' lines into sentences delimited by lone '#' lines.

    Empty sentences (consecutive delimiters) are skipped, as are blank lines.
    """
    sentences: list[CorpusSentence] = []
    entries: list[CorpusEntry] = []

    def flush() -> None:
        if entries:
            sentences.append(CorpusSentence(tuple(entries)))
            entries.clear()

    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        if stripped == SENTENCE_DELIMITER:
            flush()
            continue
        if not stripped:
            continue
        if "\t" not in line:
            raise MalformedLine(line_no)
        word, _, rest = line.partition("\t")
        word = word.strip()
        tag = rest.strip("\t").strip()
        if not word or not tag:
            raise MalformedLine(line_no, "empty word or tag field")
        entries.append(CorpusEntry(word, tag))
    flush()
    return sentences


def read_corpus_file(path) -> list[CorpusSentence]:
    """read_corpus over a file path, mapping undecodable bytes to InvalidEncoding."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(exc.start) from None
    return read_corpus(text.splitlines())


# --- dataset builders -------------------------------------------------------

_NORM = NormalizationConfig()


def _entry_tokens(entry: CorpusEntry) -> list[Token]:
    """Tokenize one corpus row; DELM rows keep only their punctuation marks."""
    toks = tokenize(normalize(entry.word, _NORM))
    if entry.is_delm:
        toks = [t for t in toks if t.is_punct]
    return toks


def _sentence_stream(sentence: CorpusSentence) -> list[Token]:
    """Render a corpus sentence as a token stream the tokenizer could have produced.

    Rows are separated by spaces; DELM marks attach to the word before them.
    """
    stream: list[Token] = []
    for entry in sentence.entries:
        toks = _entry_tokens(entry)
        if not toks:
            continue
        if entry.is_delm and stream:
            stream[-1] = replace(stream[-1], sep_after=Separator.NONE)
        toks[-1] = replace(toks[-1], sep_after=Separator.SPACE)
        stream.extend(toks)
    if stream:
        stream[-1] = replace(stream[-1], sep_after=Separator.NONE)
    return stream


def sentence_text(sentence: CorpusSentence) -> str:
    """The normalized surface text of a corpus sentence."""
    return detokenize(_sentence_stream(sentence))


def build_punct_dataset(sentences: Iterable[CorpusSentence]) -> list[LabeledSequence]:
    """Punctuation task: strip every mark, labeling the word each one followed."""
    out: list[LabeledSequence] = []
    for sentence in sentences:
        tokens, labels = strip_punctuation(_sentence_stream(sentence))
        if tokens:
            out.append(LabeledSequence(Task.PUNCTUATION, tuple(tokens), tuple(labels)))
    return out


def default_ezafe_predicate(tag: str) -> bool:
    return "EZ" in tag.upper()


def make_ezafe_predicate(substring: str) -> Callable[[str], bool]:
    """Tag predicate matching a substring case-insensitively (corpus encodings vary)."""
    needle = substring.upper()
    return lambda tag: needle in tag.upper()


def build_ezafe_dataset(
    sentences: Iterable[CorpusSentence],
    ezafe_predicate: Callable[[str], bool] = default_ezafe_predicate,
) -> list[LabeledSequence]:
    """Ezafe task: a word's final token is 1 when its POS tag marks ezafe."""
    out: list[LabeledSequence] = []
    for sentence in sentences:
        tokens: list[Token] = []
        values: list[str] = []
        for entry in sentence.entries:
            if entry.is_delm:
                continue
            parts = [t for t in _entry_tokens(entry) if not t.is_punct]
            if not parts:
                continue
            for i, part in enumerate(parts[:-1]):
                # A gap left by a dropped in-word mark widens to a space.
                sep = part.sep_after if part.sep_after is not Separator.NONE else Separator.SPACE
                tokens.append(replace(part, sep_after=sep))
                values.append("0")
            tokens.append(replace(parts[-1], sep_after=Separator.SPACE))
            values.append("1" if ezafe_predicate(entry.tag) else "0")
        if not tokens:
            continue
        tokens[-1] = replace(tokens[-1], sep_after=Separator.NONE)
        labels = tuple(Label(Task.EZAFE, v) for v in values)
        out.append(LabeledSequence(Task.EZAFE, tuple(tokens), labels))
    return out


_SPACE_OR_ZWNJ = re.compile(f"([ {ZWNJ}])")


def _word_parts(word: str) -> list[tuple[str, str]]:
    """Split a word at spaces and ZWNJs only, keeping each part's joining character."""
    pieces = _SPACE_OR_ZWNJ.split(word)
    parts: list[tuple[str, str]] = []
    for i in range(0, len(pieces), 2):
        part = pieces[i]
        joiner = pieces[i + 1] if i + 1 < len(pieces) else ""
        if part:
            parts.append((part, joiner))
        elif parts and joiner:
            # Consecutive separators: keep the later joiner.
            prev_part, _ = parts[-1]
            parts[-1] = (prev_part, joiner)
    return parts


def build_zwnj_dataset(
    sentences: Iterable[CorpusSentence],
    zwnj_only: bool = False,
) -> list[LabeledSequence]:
    """ZWNJ task: split multi-part words; 1 marks a boundary that was a ZWNJ.

    Tokens come out space-joined uniformly; the model's job is to decide which
    of those spaces should be half-spaces. With zwnj_only, sentences without a
    single ZWNJ word are dropped.
    """
    out: list[LabeledSequence] = []
    for sentence in sentences:
        tokens: list[Token] = []
        values: list[str] = []
        for entry in sentence.entries:
            if entry.is_delm:
                continue
            word = normalize(entry.word, _NORM)
            for part, joiner in _word_parts(word):
                tokens.append(Token(part, Separator.SPACE))
                values.append("1" if joiner == ZWNJ else "0")
        if not tokens:
            continue
        if zwnj_only and "1" not in values:
            continue
        labels = tuple(Label(Task.ZWNJ, v) for v in values)
        out.append(LabeledSequence(Task.ZWNJ, tuple(tokens), labels))
    return out


def split_dataset(items: Sequence[T], spec: SplitSpec) -> tuple[list[T], list[T], list[T]]:
    """Shuffle deterministically by spec.seed, then cut train/val/test by ratio."""
    if not items:
        raise EmptyDataset("nothing to split")
    order = list(items)
    random.Random(spec.seed).shuffle(order)
    n = len(order)
    n_train = math.floor(n * spec.train_ratio)
    n_val = math.floor(n * spec.val_ratio)
    return (
        order[:n_train],
        order[n_train : n_train + n_val],
        order[n_train + n_val :],
    )


# --- JSON Lines dataset files -----------------------------------------------


def sequence_to_json(seq: LabeledSequence) -> dict:
    return {
        "tokens": [{"s": t.surface, "sep": t.sep_after.value} for t in seq.tokens],
        "labels": [label.value for label in seq.labels],
        "task": seq.task.value,
    }


def sequence_from_json(obj: dict, line_no: int = 0) -> LabeledSequence:
    try:
        task = Task.from_wire(obj["task"])
        tokens = tuple(
            Token(t["s"], Separator.from_wire(t["sep"])) for t in obj["tokens"]
        )
        labels = tuple(Label(task, v) for v in obj["labels"])
        return LabeledSequence(task, tokens, labels)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedLine(line_no, f"bad dataset record: {exc}") from None


def save_dataset(sequences: Iterable[LabeledSequence], sink: TextIO) -> None:
    for seq in sequences:
        sink.write(json.dumps(sequence_to_json(seq), ensure_ascii=False))
        sink.write("\n")


def save_dataset_file(sequences: Iterable[LabeledSequence], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        save_dataset(sequences, fh)


def load_dataset(stream: Iterable[str]) -> list[LabeledSequence]:
    out: list[LabeledSequence] = []
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"bad JSON: {exc}") from None
        out.append(sequence_from_json(obj, line_no))
    return out


def load_dataset_file(path) -> list[LabeledSequence]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_dataset(fh)
