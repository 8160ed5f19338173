"""Averaged-perceptron sequence tagger with greedy left-to-right decoding."""

from __future__ import annotations

import hashlib
import json
import random
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Callable, Sequence

import numpy as np

from .errors import CorruptModel, EmptyTrainingSet, MixedTasks, UnsupportedVersion
from .metrics import evaluate
from .types import Label, LabeledSequence, LabelSet, Separator, Task, Token, label_set_for

FORMAT_VERSION = 1

_MAGIC = b"VPRT"
_TASK_BYTE = {Task.PUNCTUATION: 0, Task.ZWNJ: 1, Task.EZAFE: 2}
_TASK_FROM_BYTE = {b: t for t, b in _TASK_BYTE.items()}

_BOS = "<BOS>"
_EOS = "<EOS>"
_START = "<START>"  # previous-label marker at sequence start


def _len_bucket(n: int) -> str:
    if n <= 3:
        return str(n)
    return "4-6" if n <= 6 else "7+"


def featurize(tokens: Sequence[Token], position: int, prev_label: str | None) -> list[str]:
    """Deterministic feature bag for one position (at most 20 features)."""
    tok = tokens[position]
    surface = tok.surface
    feats = [f"w0={surface}", f"lw0={surface.lower()}"]
    for off in (-2, -1, 1, 2):
        j = position + off
        if 0 <= j < len(tokens):
            ctx = tokens[j].surface
        else:
            ctx = _BOS if off < 0 else _EOS
        feats.append(f"w{off:+d}={ctx}")
    for k in (1, 2, 3):
        if len(surface) >= k:
            feats.append(f"pre{k}={surface[:k]}")
            feats.append(f"suf{k}={surface[-k:]}")
    feats.append(f"sep={tok.sep_after.value}")
    feats.append(f"prev={prev_label if prev_label is not None else _START}")
    feats.append(f"len={_len_bucket(len(surface))}")
    if any(ch.isdigit() for ch in surface):
        feats.append("hasdigit")
    return feats


@dataclass(frozen=True, slots=True)
class TrainConfig:
    epochs: int = 5
    seed: int = 42
    shuffle_each_epoch: bool = True
    averaged: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True, eq=False)
class TaggerModel:
    """Trained linear model: a dense weight matrix over an explicit feature vocabulary."""

    task: Task
    label_set: LabelSet
    weights: np.ndarray  # (n_features, n_classes) float64
    feature_vocab: dict[str, int]
    version: int = FORMAT_VERSION
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n_feats, n_classes = self.weights.shape
        if n_classes != len(self.label_set.classes):
            raise ValueError("weight matrix width differs from label set size")
        if n_feats != len(self.feature_vocab):
            raise ValueError("weight matrix height differs from vocabulary size")
        if sorted(self.feature_vocab.values()) != list(range(n_feats)):
            raise ValueError("feature ids must be dense 0..n-1")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaggerModel):
            return NotImplemented
        return (
            self.task is other.task
            and self.label_set == other.label_set
            and self.feature_vocab == other.feature_vocab
            and self.version == other.version
            and self.meta == other.meta
            and np.array_equal(self.weights, other.weights)
        )

    def predict(self, tokens: Sequence[Token]) -> list[Label]:
        return predict(self, tokens)


def predict(model: TaggerModel, tokens: Sequence[Token]) -> list[Label]:
    """Greedy left-to-right decoding; ties break toward the lowest class index."""
    classes = model.label_set.classes
    vocab = model.feature_vocab
    labels: list[Label] = []
    prev: str | None = None
    for i in range(len(tokens)):
        fids = [vocab[f] for f in featurize(tokens, i, prev) if f in vocab]
        if fids:
            scores = model.weights[fids].sum(axis=0)
            idx = int(np.argmax(scores))
        else:
            idx = 0
        prev = classes[idx]
        labels.append(Label(model.task, prev))
    return labels


def _single_task(sequences: Sequence[LabeledSequence]) -> Task:
    task = sequences[0].task
    for seq in sequences:
        if seq.task is not task:
            raise MixedTasks(f"dataset mixes {seq.task.value} with {task.value}")
    return task


def _corpus_digest(sequences: Sequence[LabeledSequence]) -> str:
    h = hashlib.sha256()
    for seq in sequences:
        for tok, lab in zip(seq.tokens, seq.labels):
            h.update(tok.surface.encode())
            h.update(tok.sep_after.value.encode())
            h.update(lab.value.encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


def _build_vocab(sequences: Sequence[LabeledSequence], classes: Sequence[str]) -> dict[str, int]:
    vocab: dict[str, int] = {}

    def add(feat: str) -> None:
        if feat not in vocab:
            vocab[feat] = len(vocab)

    for seq in sequences:
        for i in range(len(seq.tokens)):
            for feat in featurize(seq.tokens, i, None):
                add(feat)
    for cls in classes:
        add(f"prev={cls}")
    return vocab


def train(
    train_data: Sequence[LabeledSequence],
    val_data: Sequence[LabeledSequence],
    cfg: TrainConfig = TrainConfig(),
    progress: Callable[[int, float], None] | None = None,
) -> TaggerModel:
    """Train an averaged perceptron; fully deterministic given cfg.seed.

    After each epoch the model-so-far is scored on val_data and its macro F1
    handed to the progress callback.
    """
    if not train_data:
        raise EmptyTrainingSet("no training sequences")
    task = _single_task(list(train_data) + list(val_data))
    label_set = label_set_for(task)
    classes = label_set.classes
    class_index = {c: i for i, c in enumerate(classes)}

    vocab = _build_vocab(train_data, classes)
    n_feats, n_classes = len(vocab), len(classes)
    weights = np.zeros((n_feats, n_classes))
    totals = np.zeros_like(weights)
    stamps = np.zeros((n_feats, n_classes))
    t = 0

    rng = random.Random(cfg.seed)
    order = list(range(len(train_data)))

    def averaged_snapshot() -> np.ndarray:
        if not cfg.averaged or t == 0:
            return weights.copy()
        return (totals + (t - stamps) * weights) / t

    for epoch in range(1, cfg.epochs + 1):
        if cfg.shuffle_each_epoch:
            rng.shuffle(order)
        for si in order:
            seq = train_data[si]
            prev: str | None = None
            for i in range(len(seq.tokens)):
                t += 1
                fids = np.array(
                    [vocab[f] for f in featurize(seq.tokens, i, prev) if f in vocab],
                    dtype=np.intp,
                )
                guess = int(np.argmax(weights[fids].sum(axis=0)))
                gold = class_index[seq.labels[i].value]
                if guess != gold:
                    for col, delta in ((gold, 1.0), (guess, -1.0)):
                        totals[fids, col] += (t - stamps[fids, col]) * weights[fids, col]
                        weights[fids, col] += delta
                        stamps[fids, col] = t
                prev = classes[guess]
        if val_data and progress is not None:
            snapshot = TaggerModel(task, label_set, averaged_snapshot(), vocab)
            progress(epoch, evaluate(snapshot, val_data).macro_f1)

    final = averaged_snapshot()
    meta = {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "averaged": cfg.averaged,
        "corpus_hash": _corpus_digest(train_data),
        "positions": t,
    }
    return TaggerModel(task, label_set, final, vocab, FORMAT_VERSION, meta)


def majority_baseline(train_data: Sequence[LabeledSequence]) -> TaggerModel:
    """Degenerate model predicting the most frequent training class everywhere."""
    if not train_data:
        raise EmptyTrainingSet("no training sequences")
    task = _single_task(train_data)
    label_set = label_set_for(task)
    counts = Counter(lab.value for seq in train_data for lab in seq.labels)
    majority = max(label_set.classes, key=lambda c: counts[c])  # ties: class order

    # Every position carries exactly one sep=... feature, so weighting those
    # three features makes the majority class win every argmax.
    vocab = {f"sep={sep.value}": i for i, sep in enumerate(Separator)}
    weights = np.zeros((len(vocab), len(label_set.classes)))
    weights[:, label_set.index_of(majority)] = 1.0
    meta = {"baseline": "majority", "majority_class": majority}
    return TaggerModel(task, label_set, weights, vocab, FORMAT_VERSION, meta)


# --- model file format -------------------------------------------------------
# magic "VPRT" | u16 version | u8 task | u64 payload length | payload | u32 crc32
# payload: u32 header length | header JSON | weights as little-endian f64


def save(model: TaggerModel, sink: BinaryIO) -> None:
    features = [""] * len(model.feature_vocab)
    for feat, idx in model.feature_vocab.items():
        features[idx] = feat
    header = {
        "classes": list(model.label_set.classes),
        "features": features,
        "meta": model.meta,
    }
    header_bytes = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    weight_bytes = np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    payload = struct.pack("<I", len(header_bytes)) + header_bytes + weight_bytes
    sink.write(_MAGIC)
    sink.write(struct.pack("<H", model.version))
    sink.write(struct.pack("<B", _TASK_BYTE[model.task]))
    sink.write(struct.pack("<Q", len(payload)))
    sink.write(payload)
    sink.write(struct.pack("<I", zlib.crc32(payload)))


def load(source: BinaryIO) -> TaggerModel:
    def need(n: int) -> bytes:
        data = source.read(n)
        if len(data) != n:
            raise CorruptModel("truncated model file")
        return data

    if need(4) != _MAGIC:
        raise CorruptModel("bad magic bytes")
    (version,) = struct.unpack("<H", need(2))
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"model format {version}, supported: {FORMAT_VERSION}")
    (task_byte,) = struct.unpack("<B", need(1))
    task = _TASK_FROM_BYTE.get(task_byte)
    if task is None:
        raise CorruptModel(f"unknown task byte {task_byte}")
    (payload_len,) = struct.unpack("<Q", need(8))
    payload = need(payload_len)
    (crc,) = struct.unpack("<I", need(4))
    if zlib.crc32(payload) != crc:
        raise CorruptModel("checksum mismatch")

    if len(payload) < 4:
        raise CorruptModel("payload too short")
    (header_len,) = struct.unpack("<I", payload[:4])
    if 4 + header_len > len(payload):
        raise CorruptModel("header overruns payload")
    try:
        header = json.loads(payload[4 : 4 + header_len].decode("utf-8"))
        classes = tuple(header["classes"])
        features = list(header["features"])
        meta = dict(header["meta"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptModel(f"bad header: {exc}") from None

    label_set = label_set_for(task)
    if classes != label_set.classes:
        raise CorruptModel(f"label set {classes} does not match task {task.value}")
    weight_bytes = payload[4 + header_len :]
    expected = len(features) * len(classes) * 8
    if len(weight_bytes) != expected:
        raise CorruptModel(f"{len(weight_bytes)} weight bytes, expected {expected}")
    weights = (
        np.frombuffer(weight_bytes, dtype="<f8")
        .reshape(len(features), len(classes))
        .astype(np.float64)
    )
    vocab = {feat: idx for idx, feat in enumerate(features)}
    if len(vocab) != len(features):
        raise CorruptModel("duplicate feature strings")
    return TaggerModel(task, label_set, weights, vocab, version, meta)


def save_file(model: TaggerModel, path) -> None:
    with open(path, "wb") as fh:
        save(model, fh)


def load_file(path) -> TaggerModel:
    with open(path, "rb") as fh:
        return load(fh)
