"""Fine-tune a pretrained encoder with a token-classification head, one task per model."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import LABELS, DatasetError, Example, load_jsonl

DEFAULT_BASE_MODEL = "HooshvareLab/bert-fa-base-uncased"
CHECKPOINT_META = "neuraltag.json"

_IGNORE = -100


@dataclass(frozen=True)
class FinetuneConfig:
    base_model: str = DEFAULT_BASE_MODEL
    learning_rate: float = 2e-5
    epochs: int = 3
    dropout: float = 0.1
    batch_size: int = 8
    seed: int = 0
    max_length: int = 256

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


def _quiet_transformers() -> None:
    from transformers.utils import logging as hf_logging

    hf_logging.set_verbosity_error()
    hf_logging.disable_progress_bar()


def _encode_batch(tokenizer, batch: list[Example], binary: bool, classes, max_length: int):
    """Tokenize a batch of word sequences and align labels to first subwords.

    Non-first subwords and special tokens are masked out of the loss.
    """
    enc = tokenizer(
        [list(ex.words) for ex in batch],
        is_split_into_words=True,
        truncation=True,
        max_length=max_length,
        padding=True,
        return_tensors="pt",
    )
    seq_len = enc["input_ids"].shape[1]
    if binary:
        targets = torch.full((len(batch), seq_len), float(_IGNORE))
    else:
        targets = torch.full((len(batch), seq_len), _IGNORE, dtype=torch.long)
    for bi, ex in enumerate(batch):
        prev = None
        for pos, wid in enumerate(enc.word_ids(bi)):
            if wid is not None and wid != prev:
                label = ex.labels[wid]
                targets[bi, pos] = (
                    (1.0 if label == "1" else 0.0) if binary else classes.index(label)
                )
            prev = wid
    return enc, targets


def _loss(logits: torch.Tensor, targets: torch.Tensor, binary: bool) -> torch.Tensor:
    if binary:
        flat = logits.reshape(-1)
        gold = targets.reshape(-1)
        mask = gold != float(_IGNORE)
        return F.binary_cross_entropy_with_logits(flat[mask], gold[mask])
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), ignore_index=_IGNORE
    )


def finetune(train_path, val_path, task: str, cfg: FinetuneConfig, out_dir) -> list[float]:
    """Train a token-classification head over the base encoder; returns per-epoch losses.

    Binary tasks get a single sigmoid logit per token (thresholded at 0.5 at
    prediction time); the punctuation task gets a softmax over its five classes.
    """
    _quiet_transformers()
    from transformers import AutoConfig, AutoModelForTokenClassification, AutoTokenizer

    if task not in LABELS:
        raise DatasetError(f"unknown task {task!r}")
    classes = LABELS[task]
    binary = len(classes) == 2
    train_examples = load_jsonl(train_path, task)
    val_examples = load_jsonl(val_path, task) if val_path else []

    torch.manual_seed(cfg.seed)
    tokenizer = AutoTokenizer.from_pretrained(cfg.base_model)
    model_config = AutoConfig.from_pretrained(
        cfg.base_model,
        num_labels=1 if binary else len(classes),
        hidden_dropout_prob=cfg.dropout,
        classifier_dropout=cfg.dropout,
    )
    model = AutoModelForTokenClassification.from_pretrained(cfg.base_model, config=model_config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)

    rng = random.Random(cfg.seed)
    order = list(range(len(train_examples)))
    history: list[float] = []
    model.train()
    for _epoch in range(cfg.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_examples[i] for i in order[start : start + cfg.batch_size]]
            enc, targets = _encode_batch(tokenizer, batch, binary, classes, cfg.max_length)
            logits = model(input_ids=enc["input_ids"], attention_mask=enc["attention_mask"]).logits
            loss = _loss(logits, targets, binary)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            n_batches += 1
        history.append(epoch_loss / n_batches)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    meta = {
        "format": 1,
        "task": task,
        "classes": list(classes),
        "binary": binary,
        "max_length": cfg.max_length,
        "base_model": cfg.base_model,
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
        "dropout": cfg.dropout,
        "loss_history": history,
        "val_sequences": len(val_examples),
    }
    (out_dir / CHECKPOINT_META).write_text(
        json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return history
