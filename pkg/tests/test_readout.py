"""ACTF container, zero-shot mapping, and decoder fits."""

import numpy as np
import pytest

from contour_bench.categories import CATEGORIES
from contour_bench.readout import (
    ActivationSet,
    CategoryMapping,
    DecoderHyper,
    DecoderModel,
    decoder_objective,
    decoder_predict,
    fit_decoder,
    read_actf,
    write_actf,
    zero_shot_predict,
)


def separable_clusters(rng, n_per_class=10, dim=16, separation=10.0):
    """Gaussian clusters separated by ~10 sigma; oracle for near-perfect fits."""
    means = rng.normal(size=(len(CATEGORIES), dim))
    means *= separation / np.linalg.norm(means, axis=1, keepdims=True)
    values, labels = [], []
    for label, mean in zip(CATEGORIES, means):
        values.append(mean + rng.normal(size=(n_per_class, dim)))
        labels.extend([label] * n_per_class)
    return ActivationSet(values=np.concatenate(values), labels=labels), means


class TestActf:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        original = ActivationSet(
            values=rng.normal(size=(7, 5)).astype(np.float32),
            ids=[f"img_{i}" for i in range(7)],
            labels=list(CATEGORIES[:7]),
        )
        path = tmp_path / "feats.actf"
        write_actf(path, original)
        loaded = read_actf(path)
        assert loaded.values.tobytes() == original.values.tobytes()
        assert loaded.ids == original.ids
        assert loaded.labels == original.labels

    def test_header_layout(self, tmp_path):
        path = tmp_path / "feats.actf"
        write_actf(path, ActivationSet(values=np.zeros((2, 3), dtype=np.float32)))
        raw = path.read_bytes()
        assert raw[:4] == b"ACTF"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 2
        assert int.from_bytes(raw[12:16], "little") == 3
        assert len(raw) == 16 + 2 * 3 * 4

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.actf"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(ValueError, match="not an ACTF file"):
            read_actf(path)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "feats.actf"
        write_actf(path, ActivationSet(values=np.zeros((4, 4), dtype=np.float32)))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="truncated"):
            read_actf(path)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            ActivationSet(values=np.array([[np.nan, 1.0]]))


class TestZeroShot:
    def test_all_mass_on_banana_class(self):
        mapping = CategoryMapping.default()
        logits = np.full(1000, -10.0)
        logits[mapping.members["banana"][0]] = 10.0
        assert zero_shot_predict(logits, mapping) == "banana"

    def test_max_aggregation_truck_vs_cup(self):
        mapping = CategoryMapping.default()
        logits = np.full(1000, -30.0)
        truck = mapping.members["truck"]
        cup = mapping.members["cup"]
        logits[truck[0]] = np.log(0.30)
        logits[truck[1]] = np.log(0.40)
        logits[cup[0]] = np.log(0.35)
        assert zero_shot_predict(logits, mapping) == "truck"
        # sum aggregation flips the call: 0.30 + 0.40 > 0.35 still truck,
        # but with the masses swapped the modes disagree
        logits[truck[0]] = np.log(0.10)
        logits[truck[1]] = np.log(0.20)
        logits[cup[0]] = np.log(0.25)
        assert zero_shot_predict(logits, mapping, aggregate="max") == "cup"
        assert zero_shot_predict(logits, mapping, aggregate="sum") == "truck"

    def test_uniform_logits_tie_breaks_alphabetically(self):
        mapping = CategoryMapping.default()
        assert zero_shot_predict(np.zeros(1000), mapping) == "banana"

    def test_shift_invariance(self):
        mapping = CategoryMapping.default()
        rng = np.random.default_rng(2)
        logits = rng.normal(size=1000)
        assert (zero_shot_predict(logits, mapping)
                == zero_shot_predict(logits + 123.4, mapping))

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError, match="1000 logits"):
            zero_shot_predict(np.zeros(12), CategoryMapping.default())


class TestMapping:
    def test_default_mapping_audit(self):
        mapping = CategoryMapping.default()
        assert set(mapping.members) == set(CATEGORIES)
        for label, indices in mapping.members.items():
            assert indices, label
            assert all(0 <= i < 1000 for i in indices)

    def test_missing_category_rejected(self):
        entries = {"954": "banana"}  # only one category covered
        with pytest.raises(ValueError, match="covers no class"):
            CategoryMapping(entries)

    def test_out_of_range_index_rejected(self):
        entries = {str(i): label for i, label in enumerate(CATEGORIES)}
        entries["1000"] = "banana"
        with pytest.raises(ValueError, match="outside 0..999"):
            CategoryMapping(entries)

    def test_unknown_label_rejected(self):
        entries = {str(i): label for i, label in enumerate(CATEGORIES)}
        entries["500"] = "zebra"
        with pytest.raises(ValueError, match="not in the 12-label set"):
            CategoryMapping(entries)


class TestDecoderObjective:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(10, 5))
        onehot = np.zeros((10, 3))
        onehot[np.arange(10), rng.integers(0, 3, 10)] = 1.0
        weights = rng.normal(size=(3, 5)) * 0.3
        biases = rng.normal(size=3) * 0.3
        l2 = 1e-3
        _, grad_w, grad_b = decoder_objective(weights, biases, x, onehot, l2)
        eps = 1e-6

        def loss_at(w, b):
            return decoder_objective(w, b, x, onehot, l2)[0]

        for index in np.ndindex(weights.shape):
            bump = np.zeros_like(weights)
            bump[index] = eps
            numeric = (loss_at(weights + bump, biases)
                       - loss_at(weights - bump, biases)) / (2 * eps)
            assert abs(numeric - grad_w[index]) <= 1e-5 * max(1.0, abs(numeric))
        for i in range(3):
            bump = np.zeros_like(biases)
            bump[i] = eps
            numeric = (loss_at(weights, biases + bump)
                       - loss_at(weights, biases - bump)) / (2 * eps)
            assert abs(numeric - grad_b[i]) <= 1e-5 * max(1.0, abs(numeric))


class TestFitDecoder:
    def test_separable_reaches_high_train_accuracy(self):
        rng = np.random.default_rng(0)
        train, _ = separable_clusters(rng)
        model = fit_decoder(train)
        predictions = decoder_predict(model, train)
        accuracy = np.mean([p == t for p, t in zip(predictions, train.labels)])
        assert accuracy >= 0.99

    def test_loss_below_zero_parameter_loss(self):
        rng = np.random.default_rng(1)
        train, _ = separable_clusters(rng)
        model = fit_decoder(train)
        assert model.final_loss < np.log(len(CATEGORIES))

    def test_permuted_labels_give_chance(self):
        rng = np.random.default_rng(42)
        accuracies = []
        for _ in range(20):
            train, means = separable_clusters(rng, dim=8)
            shuffled = list(train.labels)
            rng.shuffle(shuffled)
            permuted = ActivationSet(values=train.values, labels=shuffled)
            model = fit_decoder(permuted, DecoderHyper(max_iter=300))
            fresh, _ = separable_clusters(rng, dim=8)
            fresh = ActivationSet(
                values=np.concatenate([
                    means[i] + rng.normal(size=(10, 8))
                    for i in range(len(CATEGORIES))]),
                labels=[c for c in CATEGORIES for _ in range(10)],
            )
            predictions = decoder_predict(model, fresh)
            accuracies.append(np.mean([p == t for p, t
                                       in zip(predictions, fresh.labels)]))
        assert abs(np.mean(accuracies) - 1 / 12) <= 0.05

    def test_standardization_invariance(self):
        rng = np.random.default_rng(3)
        train, means = separable_clusters(rng)
        test = ActivationSet(values=train.values + rng.normal(
            size=train.values.shape, scale=0.5).astype(np.float32))
        base_model = fit_decoder(train)
        scaled_train = ActivationSet(values=train.values * 1000.0,
                                     labels=train.labels)
        scaled_model = fit_decoder(scaled_train)
        scaled_test = ActivationSet(values=test.values * 1000.0)
        assert (decoder_predict(base_model, test)
                == decoder_predict(scaled_model, scaled_test))

    def test_class_mean_predicts_itself(self):
        rng = np.random.default_rng(4)
        train, means = separable_clusters(rng)
        model = fit_decoder(train)
        probe = ActivationSet(values=means.astype(np.float32))
        predictions = decoder_predict(model, probe)
        assert predictions == list(CATEGORIES)

    def test_missing_category_rejected(self):
        rng = np.random.default_rng(5)
        train, _ = separable_clusters(rng)
        labels = ["banana" if l == "truck" else l for l in train.labels]
        broken = ActivationSet(values=train.values, labels=labels)
        with pytest.raises(ValueError, match="incomplete label coverage"):
            fit_decoder(broken)

    def test_unlabeled_rejected(self):
        with pytest.raises(ValueError, match="labels"):
            fit_decoder(ActivationSet(values=np.zeros((30, 4), dtype=np.float32)))

    def test_monotone_loss_trace(self):
        # re-run the optimizer manually and watch the loss sequence
        rng = np.random.default_rng(6)
        train, _ = separable_clusters(rng, dim=6)
        x = (train.values - train.values.mean(0)) / train.values.std(0)
        onehot = np.zeros((train.rows, 12))
        index = {c: i for i, c in enumerate(sorted(set(train.labels)))}
        onehot[np.arange(train.rows), [index[l] for l in train.labels]] = 1.0
        weights = np.zeros((12, 6))
        biases = np.zeros(12)
        losses = [decoder_objective(weights, biases, x, onehot, 1e-3)[0]]
        step = 1.0
        for _ in range(60):
            loss, grad_w, grad_b = decoder_objective(weights, biases, x,
                                                     onehot, 1e-3)
            step *= 2
            while True:
                new_w, new_b = weights - step * grad_w, biases - step * grad_b
                if decoder_objective(new_w, new_b, x, onehot, 1e-3)[0] <= loss:
                    break
                step /= 2
            weights, biases = new_w, new_b
            losses.append(decoder_objective(weights, biases, x, onehot, 1e-3)[0])
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


class TestDecoderPredict:
    def test_zero_model_predicts_alphabetical_first(self):
        model = DecoderModel(classes=tuple(CATEGORIES),
                             weights=np.zeros((12, 4)), biases=np.zeros(12),
                             mean=np.zeros(4), scale=np.ones(4))
        rows = ActivationSet(values=np.random.default_rng(0).normal(
            size=(5, 4)).astype(np.float32))
        assert decoder_predict(model, rows) == ["banana"] * 5

    def test_dimension_mismatch_rejected(self):
        model = DecoderModel(classes=tuple(CATEGORIES),
                             weights=np.zeros((12, 4)), biases=np.zeros(12),
                             mean=np.zeros(4), scale=np.ones(4))
        with pytest.raises(ValueError, match="dimension"):
            decoder_predict(model, ActivationSet(
                values=np.zeros((2, 5), dtype=np.float32)))

    def test_model_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(8)
        train, _ = separable_clusters(rng, dim=5)
        model = fit_decoder(train, DecoderHyper(max_iter=50))
        model.to_json(tmp_path / "model.json")
        loaded = DecoderModel.from_json(tmp_path / "model.json")
        probe = ActivationSet(values=rng.normal(size=(9, 5)).astype(np.float32))
        assert decoder_predict(loaded, probe) == decoder_predict(model, probe)
