"""Fixtures: a toy dataset, a tiny randomly initialized encoder, a fine-tuned checkpoint."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from neural_helpers import make_tiny_encoder, toy_examples, write_jsonl  # noqa: E402

from neuraltag import FinetuneConfig, finetune  # noqa: E402


@pytest.fixture(scope="session")
def toy_data_dir(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("toy-data")
    write_jsonl(d / "train.jsonl", toy_examples(50, seed=1))
    write_jsonl(d / "val.jsonl", toy_examples(20, seed=2))
    return d


@pytest.fixture(scope="session")
def tiny_base(tmp_path_factory) -> Path:
    return make_tiny_encoder(tmp_path_factory.mktemp("tiny-base"))


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory, toy_data_dir, tiny_base) -> Path:
    out = tmp_path_factory.mktemp("ckpt") / "zwnj"
    cfg = FinetuneConfig(
        base_model=str(tiny_base),
        learning_rate=5e-3,
        epochs=1,
        batch_size=8,
        seed=0,
        max_length=96,
    )
    finetune(toy_data_dir / "train.jsonl", toy_data_dir / "val.jsonl", "zwnj", cfg, out)
    return out
