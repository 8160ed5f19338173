"""Processing layer: normalization, tokenization, detokenization, punctuation stripping."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Sequence

from .types import PUNCT_MARKS, UNK, ZWNJ, Label, Separator, Task, Token

# ASCII and Arabic-Indic digits both map onto Extended Arabic-Indic (Persian) digits.
_DIGIT_MAP = str.maketrans(
    {chr(0x30 + d): chr(0x6F0 + d) for d in range(10)}
    | {chr(0x660 + d): chr(0x6F0 + d) for d in range(10)}
)

# Arabic yeh / kaf / alef maksura folded to their Persian forms (opt-in).
_ARABIC_FOLD_MAP = str.maketrans(
    {0x064A: chr(0x06CC), 0x0643: chr(0x06A9), 0x0649: chr(0x06CC)}
)

_WS_RUN = re.compile(r"\s+")

# Surface glyph -> restorable class. Arabic and Latin glyphs collapse to one
# class; the reverse map always renders the Persian glyph.
PUNCT_CLASS_OF_MARK = {
    ".": "PERIOD",
    ":": "COLON",
    "،": "COMMA",
    ",": "COMMA",
    "؟": "QUESTION",
    "?": "QUESTION",
}
MARK_OF_PUNCT_CLASS = {"PERIOD": ".", "COLON": ":", "COMMA": "،", "QUESTION": "؟"}


@dataclass(frozen=True, slots=True)
class NormalizationConfig:
    """Switches for normalize(); U+200C survives regardless of flags."""

    convert_digits: bool = True
    collapse_whitespace: bool = True
    strip_controls: bool = True
    # Off by default: corpora with consistent orthography must not be rewritten.
    fold_arabic_letters: bool = False


def _is_stripped_control(ch: str) -> bool:
    # Whitespace-class controls are left for the whitespace pass; ZWNJ is sacred.
    if ch == ZWNJ or ch.isspace():
        return False
    return unicodedata.category(ch) in ("Cc", "Cf")


def normalize(text: str, cfg: NormalizationConfig = NormalizationConfig()) -> str:
    """Normalize raw text: digit conversion, control stripping, whitespace collapse."""
    if cfg.strip_controls:
        text = "".join(ch for ch in text if not _is_stripped_control(ch))
    if cfg.convert_digits:
        text = text.translate(_DIGIT_MAP)
    if cfg.fold_arabic_letters:
        text = text.translate(_ARABIC_FOLD_MAP)
    if cfg.collapse_whitespace:
        text = _WS_RUN.sub(" ", text)
    return text.strip()


def tokenize(text: str) -> list[Token]:
    """Split normalized text at spaces, ZWNJs, and punctuation boundaries.

    Every mark in the punctuation inventory becomes its own token. A token's
    sep_after records what followed it: a space, a ZWNJ, or nothing (the next
    token abutted directly, or end of input).
    """
    raw: list[list] = []  # [surface, separator, is_punct], frozen at the end
    buf: list[str] = []

    def flush(sep: Separator) -> bool:
        if buf:
            raw.append(["".join(buf), sep, False])
            buf.clear()
            return True
        return False

    def annotate_last(sep: Separator) -> None:
        # A separator right after a punctuation boundary belongs to that mark.
        if raw and raw[-1][1] is Separator.NONE:
            raw[-1][1] = sep

    for ch in text:
        if ch.isspace():
            if not flush(Separator.SPACE):
                annotate_last(Separator.SPACE)
        elif ch == ZWNJ:
            if not flush(Separator.ZWNJ):
                annotate_last(Separator.ZWNJ)
        elif ch in PUNCT_MARKS:
            flush(Separator.NONE)
            raw.append([ch, Separator.NONE, True])
        else:
            buf.append(ch)
    flush(Separator.NONE)
    return [Token(surface, sep, punct) for surface, sep, punct in raw]


_GLUE = {Separator.SPACE: " ", Separator.ZWNJ: ZWNJ, Separator.NONE: ""}


def detokenize(tokens: Sequence[Token]) -> str:
    """Inverse of tokenize: join surfaces with each token's separator.

    Separators glue a token to its successor, so the final token's sep_after
    never reaches the output.
    """
    parts: list[str] = []
    last = len(tokens) - 1
    for i, tok in enumerate(tokens):
        parts.append(tok.surface)
        if i < last:
            parts.append(_GLUE[tok.sep_after])
    return "".join(parts)


def strip_punctuation(tokens: Sequence[Token]) -> tuple[list[Token], list[Label]]:
    """Remove punctuation tokens, recording each mark as a label on the word before it.

    Within a run of consecutive marks only the first restorable one labels the
    preceding word; every mark is removed either way, and the word inherits the
    separator that followed the run. A mark with no preceding word is dropped.
    """
    kept: list[list] = []  # [surface, separator]
    labels: list[str] = []
    for tok in tokens:
        if tok.is_punct:
            if not kept:
                continue
            cls = PUNCT_CLASS_OF_MARK.get(tok.surface)
            if cls is not None and labels[-1] == UNK:
                labels[-1] = cls
            kept[-1][1] = tok.sep_after
        else:
            kept.append([tok.surface, tok.sep_after])
            labels.append(UNK)
    out_tokens = [Token(surface, sep) for surface, sep in kept]
    out_labels = [Label(Task.PUNCTUATION, value) for value in labels]
    return out_tokens, out_labels
