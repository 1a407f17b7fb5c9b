import numpy as np
import pytest

from seann.baselines import (
    baseline_heatmap,
    input_gradient,
    input_times_gradient,
    integrated_gradients,
    normalize_heatmap,
    smooth_integrated_gradients,
)
from seann.classifier import (
    Dataset,
    MlpClassifier,
    forward,
    make_planted_dataset,
    train_classifier,
)
from seann.errors import DimensionError, InvalidArgument, NumericalError
from seann.resample import Heatmap


def linear_clf(weights, biases=None):
    """Single-layer classifier: logits = W x + b, so gradients are exact."""
    w = np.asarray(weights, dtype=np.float64)
    b = np.zeros(w.shape[0]) if biases is None else np.asarray(biases, float)
    return MlpClassifier([w], [b])


def small_mlp(seed=0, n_in=6, classes=3):
    return MlpClassifier.init_random([n_in, 8, classes], seed=seed)


def fd_input_gradient(clf, x, c, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        for sign in (+1, -1):
            bumped = x.copy()
            bumped[i] += sign * h
            g[i] += sign * clf.logits_batch(bumped[None, :])[0, c]
        g[i] /= 2 * h
    return g


class TestForward:
    def test_symmetric_zero_model(self):
        clf = linear_clf(np.zeros((2, 3)))
        _, probs, pred = forward(clf, np.array([0.3, 0.4, 0.5]))
        assert probs.tolist() == [0.5, 0.5]
        assert pred == 0  # tie breaks low

    def test_hand_softmax(self):
        clf = linear_clf([[1.0, 0.0], [0.0, 1.0]])
        x = np.array([2.0, 1.0])
        logits, probs, pred = forward(clf, x)
        assert logits.tolist() == [2.0, 1.0]
        expect = np.exp([2.0, 1.0])
        expect /= expect.sum()
        assert np.allclose(probs, expect, atol=1e-12)
        assert pred == 0

    def test_softmax_simplex(self):
        clf = small_mlp()
        rng = np.random.default_rng(0)
        for _ in range(10):
            _, probs, _ = forward(clf, rng.random(6))
            assert abs(probs.sum() - 1.0) <= 1e-12
            assert np.all(probs > 0) and np.all(probs < 1)

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            forward(small_mlp(), np.zeros(4))


class TestInputGradient:
    def test_linear_model_exact(self):
        w = np.array([[0.5, -1.0, 2.0], [0.0, 1.0, 0.0]])
        clf = linear_clf(w)
        x = np.array([0.2, 0.4, 0.9])
        assert np.array_equal(input_gradient(clf, x, 0), w[0])
        assert np.array_equal(input_gradient(clf, x, 1), w[1])

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            clf = small_mlp(seed=seed)
            x = rng.random(6)
            for c in range(3):
                got = input_gradient(clf, x, c)
                want = fd_input_gradient(clf, x, c)
                denom = max(np.linalg.norm(want), 1e-12)
                assert np.linalg.norm(got - want) / denom <= 1e-4

    def test_constant_model(self):
        clf = linear_clf(np.zeros((2, 4)))
        assert np.array_equal(input_gradient(clf, np.ones(4), 1), np.zeros(4))

    def test_softplus_activation(self):
        clf = MlpClassifier.init_random([5, 7, 2], seed=3, activation="softplus")
        x = np.random.default_rng(3).random(5)
        got = input_gradient(clf, x, 0)
        want = fd_input_gradient(clf, x, 0)
        assert np.linalg.norm(got - want) / max(np.linalg.norm(want), 1e-12) <= 1e-4


class TestIntegratedGradients:
    def test_linear_closed_form_any_steps(self):
        w = np.array([[1.5, -2.0, 0.25]])
        clf = linear_clf(w)
        x = np.array([0.9, 0.5, 1.0])
        for steps in (1, 3, 50):
            ig = integrated_gradients(clf, x, 0, steps=steps)
            assert np.allclose(ig, w[0] * x, atol=1e-12)

    def test_zero_path(self):
        clf = small_mlp()
        x = np.random.default_rng(2).random(6)
        ig = integrated_gradients(clf, x, 0, baseline=x)
        assert np.array_equal(ig, np.zeros(6))

    def test_completeness_at_300_steps(self):
        rng = np.random.default_rng(4)
        clf = small_mlp(seed=9)
        for _ in range(10):
            x = rng.random(6)
            c = 1
            ig = integrated_gradients(clf, x, c, steps=300)
            fx = clf.logits_batch(x[None, :])[0, c]
            f0 = clf.logits_batch(np.zeros((1, 6)))[0, c]
            gap = fx - f0
            assert abs(ig.sum() - gap) <= 0.01 * abs(gap) + 1e-8

    def test_steps_validation(self):
        with pytest.raises(InvalidArgument):
            integrated_gradients(small_mlp(), np.zeros(6), 0, steps=0)


class TestSmoothIntegratedGradients:
    def test_sigma_zero_is_ig_bitwise(self):
        clf = small_mlp(seed=5)
        x = np.random.default_rng(5).random(6)
        sg = smooth_integrated_gradients(clf, x, 0, samples=7, sigma=0.0, seed=1)
        ig = integrated_gradients(clf, x, 0)
        assert np.array_equal(sg, ig)

    def test_single_sample_reproducible(self):
        clf = small_mlp(seed=6)
        x = np.random.default_rng(6).random(6)
        a = smooth_integrated_gradients(clf, x, 0, samples=1, sigma=0.05, seed=42)
        b = smooth_integrated_gradients(clf, x, 0, samples=1, sigma=0.05, seed=42)
        assert np.array_equal(a, b)

    def test_linear_expectation_matches_ig(self):
        # for linear logits, IG(x + noise) = w * (x + noise): the mean over
        # draws concentrates around w * x at rate sigma/sqrt(N) per coord
        w = np.array([[1.0, -1.0, 0.5, 2.0]])
        clf = linear_clf(w)
        x = np.array([0.2, 0.9, 0.5, 0.1])
        sigma, samples = 0.05, 400
        sg = smooth_integrated_gradients(clf, x, 0, samples=samples, sigma=sigma, seed=3)
        tol = 3 * sigma / np.sqrt(samples) * np.abs(w[0]) + 1e-12
        assert np.all(np.abs(sg - w[0] * x) <= tol)


class TestInputTimesGradient:
    def test_linear(self):
        w = np.array([[2.0, 3.0]])
        clf = linear_clf(w)
        x = np.array([0.5, 0.25])
        got = input_times_gradient(clf, x, 0)
        assert np.allclose(got, [1.0, 0.75], atol=1e-15)
        assert np.allclose(got, integrated_gradients(clf, x, 0), atol=1e-12)

    def test_zero_input(self):
        clf = small_mlp()
        assert np.array_equal(input_times_gradient(clf, np.zeros(6), 0), np.zeros(6))

    def test_composition(self):
        clf = small_mlp(seed=7)
        x = np.random.default_rng(7).random(6)
        assert np.array_equal(
            input_times_gradient(clf, x, 2), x * input_gradient(clf, x, 2)
        )


class TestNormalizeHeatmap:
    def test_abs_symmetry(self):
        h = normalize_heatmap(np.array([-2.0, 0.0, 2.0]), 1, 3)
        assert h.values.tolist() == [1.0, 0.0, 1.0]

    def test_constant_goes_dark(self):
        h = normalize_heatmap(np.full(4, 3.3), 2, 2)
        assert h.values.tolist() == [0.0] * 4

    def test_affine_scaling(self):
        h = normalize_heatmap(np.array([1.0, 2.0, 3.0]), 1, 3)
        assert h.values.tolist() == [0.0, 0.5, 1.0]

    def test_signed_variant(self):
        h = normalize_heatmap(np.array([-1.0, 0.0, 1.0]), 1, 3, signed=True)
        assert h.values.tolist() == [0.0, 0.5, 1.0]

    def test_preserves_magnitude_ranking(self):
        rng = np.random.default_rng(8)
        raw = rng.normal(size=12)
        h = normalize_heatmap(raw, 3, 4)
        assert np.array_equal(np.argsort(h.values), np.argsort(np.abs(raw)))

    def test_nonfinite_rejected(self):
        with pytest.raises(NumericalError):
            normalize_heatmap(np.array([1.0, np.inf]), 1, 2)


class TestTrainClassifier:
    def test_separable_dataset_learned(self):
        data = make_planted_dataset(80, side=12, patch_side=3, seed=0)
        clf = train_classifier(data, epochs=30, lr=0.1, seed=1, hidden_dims=(16,))
        assert clf.train_accuracy >= 0.95

    def test_zero_epochs_returns_initial(self):
        data = make_planted_dataset(8, side=12, patch_side=3, seed=0)
        clf0 = train_classifier(data, epochs=0, lr=0.1, seed=5)
        init = MlpClassifier.init_random([144, 32, 2], seed=5)
        for a, b in zip(clf0.weights, init.weights):
            assert np.array_equal(a, b)

    def test_seeded_reproducibility(self):
        data = make_planted_dataset(20, side=12, patch_side=3, seed=2)
        a = train_classifier(data, epochs=5, lr=0.1, seed=9)
        b = train_classifier(data, epochs=5, lr=0.1, seed=9)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)
        for ba, bb in zip(a.biases, b.biases):
            assert np.array_equal(ba, bb)


class TestPlantedDataset:
    def test_mask_size(self):
        data = make_planted_dataset(4, side=16, patch_side=3, seed=0)
        assert all(len(m) == 9 for m in data.planted_masks)
        assert data.planted_masks[0].isdisjoint(data.planted_masks[1])

    def test_patchless_ablation_unlearnable(self):
        data = make_planted_dataset(80, side=12, patch_side=3, seed=3, patch_value=0.0)
        clf = train_classifier(data, epochs=20, lr=0.05, seed=1, hidden_dims=(8,))
        fresh = make_planted_dataset(80, side=12, patch_side=3, seed=99, patch_value=0.0)
        preds = np.argmax(clf.logits_batch(fresh.as_matrix()), axis=1)
        acc = float(np.mean(preds == fresh.labels))
        assert abs(acc - 0.5) <= 0.12

    def test_seeded_bytes_identical(self):
        a = make_planted_dataset(6, side=10, patch_side=2, seed=11)
        b = make_planted_dataset(6, side=10, patch_side=2, seed=11)
        for ia, ib in zip(a.images, b.images):
            assert np.array_equal(ia.values, ib.values)

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            make_planted_dataset(2, side=8, patch_side=8, seed=0)
        with pytest.raises(InvalidArgument):
            make_planted_dataset(0, side=8, patch_side=2, seed=0)


class TestBaselineHeatmapDriver:
    def test_all_methods_normalized(self):
        data = make_planted_dataset(6, side=8, patch_side=2, seed=4)
        clf = train_classifier(data, epochs=3, lr=0.05, seed=2, hidden_dims=(8,))
        img = data.images[0]
        for method in ("vg", "ig", "sg", "ixg"):
            h = baseline_heatmap(method, clf, img, seed=0)
            assert isinstance(h, Heatmap)
            assert (h.height, h.width) == (8, 8)

    def test_unknown_method(self):
        data = make_planted_dataset(2, side=8, patch_side=2, seed=4)
        clf = train_classifier(data, epochs=1, lr=0.05, seed=2, hidden_dims=(4,))
        with pytest.raises(InvalidArgument):
            baseline_heatmap("lime", clf, data.images[0])
