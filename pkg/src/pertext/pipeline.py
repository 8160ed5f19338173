"""Mapping and output layers: apply predicted labels and compose the three stages."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Protocol, Sequence

from .errors import LengthMismatch, StageError
from .textproc import (
    MARK_OF_PUNCT_CLASS,
    NormalizationConfig,
    detokenize,
    normalize,
    strip_punctuation,
    tokenize,
)
from .types import UNK, ZWNJ, Label, Separator, Task, Token

EZAFE_KASRA = "\u0650"
# Letters that read as vowels word-finally; written ezafe becomes -ye after them.
_VOWEL_FINAL = frozenset("اوهی")


class EzafeMarker(Enum):
    KASRA = "kasra"
    SUFFIX_YE = "ye"
    TAG_ONLY = "tag-only"


class Tagger(Protocol):
    """A stage handle: a trained native model or a remote connection."""

    task: Task

    def predict(self, tokens: Sequence[Token]) -> list[Label]: ...


@dataclass
class PipelineConfig:
    """Which taggers run and how ezafe is rendered; absent taggers are skipped.

    The CLI requires at least one stage; the library allows none so that the
    bare processing-layer normal form stays reachable.
    """

    punct_tagger: Tagger | None = None
    zwnj_tagger: Tagger | None = None
    ezafe_tagger: Tagger | None = None
    ezafe_marker: EzafeMarker = EzafeMarker.KASRA
    keep_punct: bool = False
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)

    @property
    def has_stage(self) -> bool:
        return any((self.punct_tagger, self.zwnj_tagger, self.ezafe_tagger))


@dataclass(frozen=True, slots=True)
class StageTrace:
    stage: str  # punct | zwnj | ezafe
    tokens: tuple[Token, ...]  # what the stage predicted on
    labels: tuple[Label, ...]  # what it predicted


@dataclass(frozen=True, slots=True)
class RefineResult:
    output: str
    stages: tuple[StageTrace, ...]

    def to_json(self) -> dict:
        def token_json(tok: Token) -> dict:
            obj = {"s": tok.surface, "sep": tok.sep_after.value}
            if tok.is_punct:
                obj["punct"] = True
            return obj

        return {
            "output": self.output,
            "stages": [
                {
                    "stage": trace.stage,
                    "tokens": [token_json(t) for t in trace.tokens],
                    "labels": [lab.value for lab in trace.labels],
                }
                for trace in self.stages
            ],
        }


def _check_pair(tokens: Sequence[Token], labels: Sequence[Label], task: Task) -> None:
    if len(tokens) != len(labels):
        raise LengthMismatch(f"{len(tokens)} tokens vs {len(labels)} labels")
    for label in labels:
        if label.task is not task:
            raise ValueError(f"expected {task.value} labels, got {label.task.value}")


def apply_punct(tokens: Sequence[Token], labels: Sequence[Label]) -> list[Token]:
    """Insert a mark after every token labeled with a punctuation class.

    The word turns to abut the new mark, which inherits the word's former
    separator. Input must already be punctuation-free.
    """
    _check_pair(tokens, labels, Task.PUNCTUATION)
    if any(t.is_punct for t in tokens):
        raise ValueError("apply_punct input must not contain punctuation tokens")
    out: list[Token] = []
    for tok, lab in zip(tokens, labels):
        if lab.value == UNK:
            out.append(tok)
        else:
            out.append(replace(tok, sep_after=Separator.NONE))
            out.append(Token(MARK_OF_PUNCT_CLASS[lab.value], tok.sep_after, is_punct=True))
    return out


def apply_zwnj(tokens: Sequence[Token], labels: Sequence[Label]) -> list[Token]:
    """Turn spaces into half-spaces where labeled 1 and back where labeled 0.

    Abutting boundaries and punctuation tokens are never modified.
    """
    _check_pair(tokens, labels, Task.ZWNJ)
    out: list[Token] = []
    for tok, lab in zip(tokens, labels):
        if tok.is_punct:
            out.append(tok)
        elif lab.value == "1" and tok.sep_after is Separator.SPACE:
            out.append(replace(tok, sep_after=Separator.ZWNJ))
        elif lab.value == "0" and tok.sep_after is Separator.ZWNJ:
            out.append(replace(tok, sep_after=Separator.SPACE))
        else:
            out.append(tok)
    return out


def _mark_ezafe(surface: str, marker: EzafeMarker) -> str:
    if marker is EzafeMarker.SUFFIX_YE and surface[-1] in _VOWEL_FINAL:
        return surface + ZWNJ + "ی"
    return surface + EZAFE_KASRA


def apply_ezafe(
    tokens: Sequence[Token],
    labels: Sequence[Label],
    marker: EzafeMarker = EzafeMarker.KASRA,
) -> list[Token]:
    """Rewrite tokens labeled 1 per the marker mode; punctuation is never marked."""
    _check_pair(tokens, labels, Task.EZAFE)
    if marker is EzafeMarker.TAG_ONLY:
        return list(tokens)
    out: list[Token] = []
    for tok, lab in zip(tokens, labels):
        if lab.value == "1" and not tok.is_punct:
            out.append(replace(tok, surface=_mark_ezafe(tok.surface, marker)))
        else:
            out.append(tok)
    return out


def _predict_stage(tagger: Tagger, stage: str, tokens: Sequence[Token]) -> list[Label]:
    try:
        labels = tagger.predict(tokens)
    except Exception as exc:
        raise StageError(stage, exc) from exc
    if len(labels) != len(tokens):
        raise StageError(stage, LengthMismatch(f"tagger returned {len(labels)} labels for {len(tokens)} tokens"))
    return labels


def refine(text: str, cfg: PipelineConfig) -> RefineResult:
    """Normalize, strip existing marks, then run punctuation -> ZWNJ -> ezafe.

    Stages without a configured tagger are identity. With keep_punct the input
    marks survive and the punctuation stage is skipped entirely.
    """
    tokens = tokenize(normalize(text, cfg.normalization))
    if not cfg.keep_punct:
        tokens, _ = strip_punctuation(tokens)
    if not tokens:
        return RefineResult("", ())

    traces: list[StageTrace] = []
    if cfg.punct_tagger is not None and not cfg.keep_punct:
        labels = _predict_stage(cfg.punct_tagger, "punct", tokens)
        traces.append(StageTrace("punct", tuple(tokens), tuple(labels)))
        tokens = apply_punct(tokens, labels)
    if cfg.zwnj_tagger is not None:
        labels = _predict_stage(cfg.zwnj_tagger, "zwnj", tokens)
        traces.append(StageTrace("zwnj", tuple(tokens), tuple(labels)))
        tokens = apply_zwnj(tokens, labels)
    if cfg.ezafe_tagger is not None:
        labels = _predict_stage(cfg.ezafe_tagger, "ezafe", tokens)
        traces.append(StageTrace("ezafe", tuple(tokens), tuple(labels)))
        tokens = apply_ezafe(tokens, labels, cfg.ezafe_marker)
    return RefineResult(detokenize(tokens), tuple(traces))
