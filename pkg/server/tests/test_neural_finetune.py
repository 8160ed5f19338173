"""Fine-tuning: shapes, loss curve, determinism guards, fail-fast validation."""

from __future__ import annotations

import json

import pytest

from neuraltag import DatasetError, FinetuneConfig, Predictor, finetune, load_jsonl
from neuraltag.finetune import CHECKPOINT_META

from neural_helpers import toy_examples, write_jsonl


def test_config_validation():
    FinetuneConfig(base_model="x")
    with pytest.raises(ValueError):
        FinetuneConfig(base_model="x", learning_rate=0.0)
    with pytest.raises(ValueError):
        FinetuneConfig(base_model="x", dropout=1.0)
    with pytest.raises(ValueError):
        FinetuneConfig(base_model="x", epochs=0)


def test_default_hyperparameters():
    cfg = FinetuneConfig()
    assert cfg.learning_rate == 2e-5
    assert cfg.epochs == 3
    assert cfg.dropout == 0.1


def test_load_jsonl_fails_fast_on_task_mismatch(toy_data_dir):
    with pytest.raises(DatasetError, match="task"):
        load_jsonl(toy_data_dir / "train.jsonl", "ezafe")


def test_load_jsonl_fails_fast_on_bad_labels(tmp_path):
    bad = tmp_path / "bad.jsonl"
    write_jsonl(bad, [{"tokens": [{"s": "a", "sep": "sp"}], "labels": ["PERIOD"], "task": "zwnj"}])
    with pytest.raises(DatasetError, match="label set"):
        load_jsonl(bad, "zwnj")


def test_finetune_rejects_wrong_task_dataset(toy_data_dir, tiny_base, tmp_path):
    cfg = FinetuneConfig(base_model=str(tiny_base), epochs=1)
    with pytest.raises(DatasetError):
        finetune(toy_data_dir / "train.jsonl", None, "punct", cfg, tmp_path / "out")


def test_checkpoint_loads_and_predicts_correct_lengths(toy_checkpoint, toy_data_dir):
    predictor = Predictor.load(toy_checkpoint)
    assert predictor.task == "zwnj"
    assert predictor.classes == ("1", "0")
    for ex in load_jsonl(toy_data_dir / "val.jsonl", "zwnj")[:10]:
        labels = predictor.predict(list(ex.words))
        assert len(labels) == len(ex.words)
        assert all(l in ("1", "0") for l in labels)


def test_checkpoint_meta(toy_checkpoint):
    meta = json.loads((toy_checkpoint / CHECKPOINT_META).read_text(encoding="utf-8"))
    assert meta["task"] == "zwnj"
    assert meta["binary"] is True
    assert meta["classes"] == ["1", "0"]
    assert len(meta["loss_history"]) == meta["epochs"] == 1


def test_loss_decreases_over_three_epochs(toy_data_dir, tiny_base, tmp_path):
    cfg = FinetuneConfig(
        base_model=str(tiny_base),
        learning_rate=5e-3,
        epochs=3,
        batch_size=8,
        seed=0,
        max_length=96,
    )
    history = finetune(toy_data_dir / "train.jsonl", None, "zwnj", cfg, tmp_path / "out")
    assert len(history) == 3
    assert history[2] < history[0]


def test_prediction_deterministic_from_fixed_checkpoint(toy_checkpoint):
    predictor = Predictor.load(toy_checkpoint)
    words = ["می", "رود", "کتاب"]
    assert predictor.predict(words) == predictor.predict(words)
    again = Predictor.load(toy_checkpoint)
    assert again.predict(words) == predictor.predict(words)


def test_multiclass_head_for_punct(tiny_base, tmp_path):
    rows = []
    for ex in toy_examples(12, seed=5):
        labels = ["PERIOD" if l == "1" else "UNK" for l in ex["labels"]]
        rows.append({"tokens": ex["tokens"], "labels": labels, "task": "punct"})
    data = tmp_path / "punct.jsonl"
    write_jsonl(data, rows)
    cfg = FinetuneConfig(base_model=str(tiny_base), learning_rate=5e-3, epochs=1, max_length=96)
    finetune(data, None, "punct", cfg, tmp_path / "out")
    predictor = Predictor.load(tmp_path / "out")
    assert predictor.binary is False
    labels = predictor.predict(["کتاب", "خانه"])
    assert len(labels) == 2
    assert all(l in predictor.classes for l in labels)
