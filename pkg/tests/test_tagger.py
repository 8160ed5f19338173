"""Averaged perceptron: features, training, decoding, and the model file format."""

from __future__ import annotations

import io
import random

import numpy as np
import pytest

import corpusgen
from pertext import (
    Label,
    LabeledSequence,
    Separator,
    Task,
    Token,
    TrainConfig,
    evaluate,
    featurize,
    label_set_for,
    majority_baseline,
    predict,
    train,
)
from pertext.errors import CorruptModel, EmptyTrainingSet, MixedTasks, UnsupportedVersion
from pertext.tagger import FORMAT_VERSION, TaggerModel, load, save


def seq_of(values: list[str], task: Task = Task.ZWNJ, words: list[str] | None = None):
    words = words or [f"w{i}" for i in range(len(values))]
    return LabeledSequence(
        task,
        tuple(Token(w, Separator.SPACE) for w in words),
        tuple(Label(task, v) for v in values),
    )


class TestFeaturize:
    def test_boundary_markers_on_single_token(self):
        feats = featurize([Token("کتاب", Separator.SPACE)], 0, None)
        assert "w0=کتاب" in feats
        assert "w-1=<BOS>" in feats
        assert "w-2=<BOS>" in feats
        assert "w+1=<EOS>" in feats
        assert "w+2=<EOS>" in feats
        assert "prev=<START>" in feats
        assert "sep=sp" in feats

    def test_deterministic(self):
        tokens = [Token("الف", Separator.ZWNJ), Token("ب", Separator.NONE)]
        assert featurize(tokens, 1, "1") == featurize(tokens, 1, "1")

    def test_prev_label_feature(self):
        tokens = [Token("a"), Token("b", Separator.SPACE)]
        assert "prev=PERIOD" in featurize(tokens, 1, "PERIOD")

    def test_digit_flag(self):
        assert "hasdigit" in featurize([Token("۱۲۳")], 0, None)
        assert "hasdigit" not in featurize([Token("abc")], 0, None)

    def test_count_bounded_by_template_enumeration(self):
        # Templates: w0, lw0, 4 context, <=6 affixes, sep, prev, len, hasdigit.
        rng = random.Random(5)
        alphabet = "ابپترسکد1"
        for _ in range(300):
            tokens = [
                Token(
                    "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12))),
                    rng.choice(list(Separator)),
                )
                for _ in range(rng.randint(1, 6))
            ]
            pos = rng.randrange(len(tokens))
            feats = featurize(tokens, pos, rng.choice([None, "1", "0"]))
            assert len(feats) <= 20
            assert len(feats) == len(set(feats))


class TestTrain:
    def test_learns_separable_rule(self, suffix_model, suffix_val):
        report = evaluate(suffix_model, suffix_val)
        assert report.macro_f1 >= 0.99

    def test_degenerate_single_class(self):
        data = [seq_of(["0", "0", "0"]), seq_of(["0", "0"], words=["x", "y"])]
        model = train(data, [], TrainConfig(epochs=5, seed=1))
        for seq in data:
            assert [l.value for l in predict(model, seq.tokens)] == ["0"] * len(seq)

    def test_same_seed_identical_weights(self, suffix_train, suffix_val):
        cfg = TrainConfig(epochs=2, seed=77)
        a = train(suffix_train[:200], [], cfg)
        b = train(suffix_train[:200], [], cfg)
        assert a == b
        assert a.weights.tobytes() == b.weights.tobytes()

    def test_different_seed_differs(self, suffix_train):
        a = train(suffix_train[:200], [], TrainConfig(epochs=1, seed=1))
        b = train(suffix_train[:200], [], TrainConfig(epochs=1, seed=2))
        assert a != b

    def test_training_accuracy_non_decreasing(self, suffix_train):
        # Deterministic setup: accuracy on the training set after k epochs.
        data = suffix_train[:400]
        accs = []
        for epochs in range(1, 6):
            model = train(data, [], TrainConfig(epochs=epochs, seed=13))
            accs.append(evaluate(model, data).accuracy)
        assert all(b >= a for a, b in zip(accs, accs[1:]))
        assert accs[-1] >= 0.99

    def test_progress_callback(self, suffix_train, suffix_val):
        seen = []
        train(
            suffix_train[:100],
            suffix_val[:50],
            TrainConfig(epochs=3, seed=2),
            progress=lambda epoch, macro: seen.append((epoch, macro)),
        )
        assert [e for e, _ in seen] == [1, 2, 3]
        assert all(0.0 <= m <= 1.0 for _, m in seen)

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            train([], [], TrainConfig())

    def test_mixed_tasks(self):
        data = [seq_of(["1"]), seq_of(["1"], task=Task.EZAFE)]
        with pytest.raises(MixedTasks):
            train(data, [], TrainConfig())

    def test_meta_provenance(self, suffix_model):
        assert suffix_model.meta["seed"] == 3
        assert suffix_model.meta["epochs"] == 5
        assert len(suffix_model.meta["corpus_hash"]) == 16


class TestPredict:
    def test_empty_input(self, suffix_model):
        assert predict(suffix_model, []) == []

    def test_all_zero_weights_pick_class_index_zero(self):
        model = TaggerModel(
            Task.ZWNJ,
            label_set_for(Task.ZWNJ),
            np.zeros((3, 2)),
            {f"sep={s.value}": i for i, s in enumerate(Separator)},
        )
        labels = predict(model, [Token("a", Separator.SPACE), Token("b")])
        assert [l.value for l in labels] == ["1", "1"]  # class index 0 is "1"

    def test_matches_brute_force_greedy_recurrence(self):
        # Hand-built model; the oracle re-runs the recurrence with dict arithmetic.
        rng = random.Random(23)
        classes = label_set_for(Task.PUNCTUATION).classes
        tokens = [Token("الف", Separator.SPACE), Token("ب", Separator.ZWNJ), Token("پ")]
        all_feats = sorted(
            {
                f
                for i in range(3)
                for prev in [None, *classes]
                for f in featurize(tokens, i, prev)
            }
        )
        vocab = {f: i for i, f in enumerate(all_feats)}
        weights = np.array(
            [[rng.uniform(-2, 2) for _ in classes] for _ in all_feats]
        )
        model = TaggerModel(Task.PUNCTUATION, label_set_for(Task.PUNCTUATION), weights, vocab)

        def oracle() -> list[str]:
            out: list[str] = []
            prev = None
            for i in range(len(tokens)):
                scores = {c: 0.0 for c in classes}
                for f in featurize(tokens, i, prev):
                    if f in vocab:
                        for j, c in enumerate(classes):
                            scores[c] += weights[vocab[f]][j]
                best = max(classes, key=lambda c: (scores[c], -classes.index(c)))
                out.append(best)
                prev = best
            return out

        assert [l.value for l in predict(model, tokens)] == oracle()

    def test_scaling_invariance(self, suffix_model, suffix_val):
        scaled = TaggerModel(
            suffix_model.task,
            suffix_model.label_set,
            suffix_model.weights * 3.75,
            suffix_model.feature_vocab,
            suffix_model.version,
            suffix_model.meta,
        )
        for seq in suffix_val[:40]:
            assert predict(scaled, seq.tokens) == predict(suffix_model, seq.tokens)

    def test_length_always_matches(self, suffix_model, suffix_val):
        for seq in suffix_val[:50]:
            assert len(predict(suffix_model, seq.tokens)) == len(seq.tokens)


class TestMajorityBaseline:
    def test_majority_wins(self):
        model = majority_baseline([seq_of(["0"] * 7 + ["1"] * 3)])
        labels = predict(model, [Token("a", Separator.SPACE), Token("b", Separator.ZWNJ)])
        assert [l.value for l in labels] == ["0", "0"]

    def test_tie_takes_first_class(self):
        model = majority_baseline([seq_of(["0"] * 5 + ["1"] * 5)])
        assert predict(model, [Token("x")])[0].value == "1"

    def test_empty(self):
        with pytest.raises(EmptyTrainingSet):
            majority_baseline([])

    def test_accuracy_is_one_minus_positive_rate(self, fixture_sentences):
        from pertext import build_ezafe_dataset, read_corpus

        data = build_ezafe_dataset(read_corpus(corpusgen.corpus_lines(fixture_sentences)))
        model = majority_baseline(data)
        assert model.meta["majority_class"] == "0"
        # Counting oracle over the built dataset.
        total = sum(len(s) for s in data)
        positives = sum(l.value == "1" for s in data for l in s.labels)
        report = evaluate(model, data)
        assert report.accuracy == (total - positives) / total


class TestModelFile:
    def round_trip(self, model: TaggerModel) -> TaggerModel:
        buf = io.BytesIO()
        save(model, buf)
        buf.seek(0)
        return load(buf)

    def test_round_trip_equality(self, suffix_model):
        clone = self.round_trip(suffix_model)
        assert clone == suffix_model
        assert clone.weights.tobytes() == suffix_model.weights.tobytes()

    def test_round_trip_majority(self):
        model = majority_baseline([seq_of(["0", "1", "0"])])
        assert self.round_trip(model) == model

    def test_truncated_stream(self, suffix_model):
        buf = io.BytesIO()
        save(suffix_model, buf)
        data = buf.getvalue()
        for cut in (0, 3, 6, 7, 14, len(data) // 2, len(data) - 1):
            with pytest.raises(CorruptModel):
                load(io.BytesIO(data[:cut]))

    def test_version_bump_rejected(self, suffix_model):
        buf = io.BytesIO()
        save(suffix_model, buf)
        data = bytearray(buf.getvalue())
        data[4] = FORMAT_VERSION + 1  # little-endian u16 low byte
        with pytest.raises(UnsupportedVersion):
            load(io.BytesIO(bytes(data)))

    def test_bad_magic(self, suffix_model):
        buf = io.BytesIO()
        save(suffix_model, buf)
        data = b"XXXX" + buf.getvalue()[4:]
        with pytest.raises(CorruptModel):
            load(io.BytesIO(data))

    def test_checksum_detects_flips(self, suffix_model):
        buf = io.BytesIO()
        save(suffix_model, buf)
        data = bytearray(buf.getvalue())
        data[len(data) // 2] ^= 0xFF
        with pytest.raises(CorruptModel):
            load(io.BytesIO(bytes(data)))

    def test_predictions_survive_round_trip(self, suffix_model, suffix_val):
        clone = self.round_trip(suffix_model)
        for seq in suffix_val[:30]:
            assert predict(clone, seq.tokens) == predict(suffix_model, seq.tokens)
