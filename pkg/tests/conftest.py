"""Shared fixtures: generated corpora and a trained baseline model."""

from __future__ import annotations

import pytest

import corpusgen
from pertext import TrainConfig, train


@pytest.fixture(scope="session")
def fixture_sentences():
    """1,200 generated corpus sentences with both in- and out-of-class marks."""
    return corpusgen.make_corpus(1200, seed=7, in_class_only=False)


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory, fixture_sentences):
    path = tmp_path_factory.mktemp("corpus") / "bijankhan.txt"
    corpusgen.write_corpus(path, fixture_sentences)
    return path


@pytest.fixture(scope="session")
def suffix_train():
    return corpusgen.make_suffix_rule_dataset(2000, seed=11)


@pytest.fixture(scope="session")
def suffix_val():
    return corpusgen.make_suffix_rule_dataset(400, seed=12)


@pytest.fixture(scope="session")
def suffix_model(suffix_train, suffix_val):
    return train(suffix_train, suffix_val, TrainConfig(epochs=5, seed=3))
