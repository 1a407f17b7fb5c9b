import math

import numpy as np
import pytest

from seann.dsf import (
    DsfArchitecture,
    DsfNetwork,
    SetEvaluator,
    empirical_lipschitz,
    indicator,
    lipschitz_bound,
    project_nonneg,
)
from seann.errors import (
    DimensionError,
    DomainError,
    InvalidArgument,
    UnsupportedArchitecture,
)

from conftest import fd_weight_gradient, grad_rel_error, random_net, tiny_sqrt_net


class TestArchitecture:
    def test_defaults(self):
        arch = DsfArchitecture()
        assert arch.layer_dims == (784, 512, 256, 32, 1)
        assert arch.activation == "sqrt"
        assert arch.num_weight_layers == 4

    @pytest.mark.parametrize(
        "dims", [(), (5,), (4, 2), (4, 0, 1), (4, 2, 3)],
        ids=["empty", "single", "ok-two", "zero-dim", "bad-output"],
    )
    def test_validation(self, dims):
        if dims == (4, 2):
            with pytest.raises(InvalidArgument):
                DsfArchitecture(dims)  # output dim must be 1
        else:
            with pytest.raises(InvalidArgument):
                DsfArchitecture(dims)

    def test_unknown_activation(self):
        with pytest.raises(InvalidArgument):
            DsfArchitecture((2, 1), activation="relu")


class TestEvaluate:
    def test_hand_example(self):
        net = tiny_sqrt_net()
        assert net.evaluate(np.array([1.0, 1.0])) == pytest.approx(math.sqrt(2), abs=1e-12)
        assert net.evaluate(np.array([0.0, 0.0])) == 0.0
        assert net.evaluate(np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_inputs(self):
        net = tiny_sqrt_net()
        with pytest.raises(DimensionError):
            net.evaluate(np.zeros(3))
        with pytest.raises(DomainError):
            net.evaluate(np.array([0.5, 1.5]))
        with pytest.raises(DomainError):
            net.evaluate(np.array([-0.1, 0.5]))

    def test_nonnegative_and_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            net = random_net(rng)
            x = rng.random(net.input_dim)
            v = net.evaluate(x)
            assert v >= 0
            bumped = np.minimum(x + rng.random(net.input_dim) * (1 - x), 1.0)
            assert net.evaluate(bumped) >= v - 1e-12

    def test_rejects_negative_weights(self):
        with pytest.raises(DomainError):
            DsfNetwork(DsfArchitecture((2, 1)), [np.array([[-0.5, 1.0]])])


class TestEvaluateSet:
    def test_hand_examples(self):
        net = tiny_sqrt_net()
        assert net.evaluate_set(set()) == 0.0
        assert net.evaluate_set({0}) == pytest.approx(1.0, abs=1e-15)
        assert net.evaluate_set({0, 1}) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_extension_consistency_bitwise(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            net = random_net(rng)
            n = net.input_dim
            members = set(rng.choice(n, size=rng.integers(0, n + 1), replace=False).tolist())
            assert net.evaluate_set(members) == net.evaluate(indicator(members, n))

    def test_index_out_of_range(self):
        net = tiny_sqrt_net()
        with pytest.raises(IndexError):
            net.evaluate_set({0, 5})


class TestMarginalGain:
    def test_hand_example(self):
        net = tiny_sqrt_net()
        assert net.marginal_gain(1, {0}) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_gain_from_empty_is_singleton_value(self):
        rng = np.random.default_rng(2)
        net = random_net(rng)
        for e in range(net.input_dim):
            assert net.marginal_gain(e, set()) == net.evaluate_set({e})

    def test_submodularity_witness(self):
        # f(A) = sqrt of the picked weight total; shrinking contexts win.
        net = DsfNetwork(
            DsfArchitecture((3, 1, 1)), [np.array([[1.0, 1.0, 1.0]]), np.array([[1.0]])]
        )
        g_small = net.marginal_gain(2, {0})
        g_large = net.marginal_gain(2, {0, 1})
        assert g_small == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
        assert g_large == pytest.approx(math.sqrt(3) - math.sqrt(2), abs=1e-12)
        assert g_small >= g_large

    def test_element_already_in_set(self):
        with pytest.raises(InvalidArgument):
            tiny_sqrt_net().marginal_gain(0, {0})


class TestProperties:
    """Randomized structural properties of the set function."""

    def _random_triple(self, rng, n):
        a_size = int(rng.integers(0, n - 1))
        b_extra = int(rng.integers(0, n - a_size - 1))
        perm = rng.permutation(n)
        small = set(perm[:a_size].tolist())
        big = small | set(perm[a_size : a_size + b_extra].tolist())
        e = int(perm[-1])
        return small, big, e

    def test_submodularity(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            net = random_net(rng, dims=(12, 5, 1))
            for _ in range(100):
                small, big, e = self._random_triple(rng, 12)
                assert net.marginal_gain(e, small) >= net.marginal_gain(e, big) - 1e-9

    def test_monotonicity(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            net = random_net(rng, dims=(12, 5, 1))
            for _ in range(100):
                small, big, _ = self._random_triple(rng, 12)
                assert net.evaluate_set(small) <= net.evaluate_set(big) + 1e-12

    def test_normalization_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            assert random_net(rng).evaluate_set(set()) == 0.0

    def test_concavity_along_lines(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            net = random_net(rng)
            n = net.input_dim
            x, y = rng.random(n), rng.random(n)
            t = float(rng.uniform(0.05, 0.95))
            mid = net.evaluate(t * x + (1 - t) * y)
            assert mid >= t * net.evaluate(x) + (1 - t) * net.evaluate(y) - 1e-9

    def test_log1p_activation_also_concave_monotone(self):
        rng = np.random.default_rng(7)
        net = random_net(rng, dims=(8, 4, 1), activation="log1p")
        for _ in range(50):
            small, big, e = self._random_triple(rng, 8)
            assert net.marginal_gain(e, small) >= net.marginal_gain(e, big) - 1e-9


class TestWeightGradient:
    def test_hand_example(self):
        net = tiny_sqrt_net()
        g = net.weight_gradient(np.array([1.0, 1.0]))
        assert g.layers[1][0, 0] == pytest.approx(math.sqrt(2), abs=1e-12)
        assert np.allclose(g.layers[0], 1 / (2 * math.sqrt(2)), atol=1e-12)

    def test_zero_input_clamped(self):
        net = tiny_sqrt_net()
        g = net.weight_gradient(np.zeros(2))
        assert all(np.all(layer == 0.0) for layer in g.layers)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            net = random_net(rng, dims=(8, 4, 2, 1))
            x = rng.uniform(0.1, 1.0, size=8)
            analytic = net.weight_gradient(x).layers
            numeric = fd_weight_gradient(lambda m: m.evaluate(x), net)
            assert grad_rel_error(analytic, numeric) <= 1e-4

    def test_batch_accumulation_matches_sum(self):
        rng = np.random.default_rng(9)
        net = random_net(rng, dims=(6, 3, 1))
        xs = rng.random((4, 6))
        coeffs = rng.normal(size=4)
        batched = net.weight_gradient_batch(xs, coeffs)
        manual = [np.zeros_like(w) for w in net.weights]
        for x, c in zip(xs, coeffs):
            for acc, layer in zip(manual, net.weight_gradient(x).layers):
                acc += c * layer
        for got, want in zip(batched.layers, manual):
            assert np.allclose(got, want, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            tiny_sqrt_net().weight_gradient(np.zeros(5))


class TestProjectNonneg:
    def test_clamps(self):
        (out,) = project_nonneg([np.array([[-1.0, 2.0]])])
        assert out.tolist() == [[0.0, 2.0]]

    def test_idempotent_on_nonnegative(self):
        mats = [np.array([[0.0, 3.5], [1.0, 2.0]])]
        once = project_nonneg(mats)
        twice = project_nonneg(once)
        assert np.array_equal(once[0], mats[0])
        assert np.array_equal(twice[0], once[0])

    def test_signed_zero_normalized(self):
        (out,) = project_nonneg([np.array([[-0.0]])])
        assert out[0, 0] == 0.0
        assert not np.signbit(out[0, 0])


class TestLipschitz:
    def test_closed_form_all_ones(self):
        net = DsfNetwork.ones(DsfArchitecture((784, 512, 256, 32, 1)))
        # direct numeric evaluation of the bound formula (the oracle):
        sums = [784 * 512, 512 * 256, 256 * 32, 32]
        expect = math.prod(s ** (1 / 2 ** (4 - i)) for i, s in enumerate(sums)) / 7
        got = lipschitz_bound(net)
        assert got == pytest.approx(expect, rel=1e-12)
        assert got == pytest.approx(75.11683870074967, abs=1e-9)

    def test_zero_layer_gives_zero(self):
        net = DsfNetwork.ones(DsfArchitecture((8, 4, 3, 2, 1)))
        net.weights[2][:] = 0.0
        assert lipschitz_bound(net) == 0.0

    def test_unsupported_architectures(self):
        with pytest.raises(UnsupportedArchitecture):
            lipschitz_bound(tiny_sqrt_net())
        rng = np.random.default_rng(10)
        log_net = random_net(rng, dims=(8, 4, 3, 2, 1), activation="log1p")
        with pytest.raises(UnsupportedArchitecture):
            lipschitz_bound(log_net)

    def test_empirical_zero_weights(self):
        arch = DsfArchitecture((4, 2, 1))
        net = DsfNetwork(arch, [np.zeros((2, 4)), np.zeros((1, 2))])
        assert empirical_lipschitz(net, 100, seed=0) == 0.0

    def test_empirical_below_bound_on_supported_nets(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            net = random_net(rng, dims=(64, 32, 16, 8, 1), low=0.1, high=1.0)
            est = empirical_lipschitz(net, 2000, seed=12)
            assert est <= lipschitz_bound(net) + 1e-9

    def test_empirical_two_input_example(self):
        # sqrt(x0 + x1) has unbounded difference quotients near the origin:
        # sampled estimates over 1e4 uniform pairs land around 1.8-2.6
        # (oracle: direct numpy recomputation across seeds), well above the
        # interior slope 1/sqrt(2) ~ 0.707.
        est = empirical_lipschitz(tiny_sqrt_net(), 10_000, seed=0)
        assert 1.0 <= est <= 4.0
        assert est == empirical_lipschitz(tiny_sqrt_net(), 10_000, seed=0)

    def test_lipschitz_property_random_pairs(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            net = random_net(rng, dims=(32, 16, 8, 4, 1), low=0.1, high=1.0)
            bound = lipschitz_bound(net)
            x = rng.random((200, 32))
            y = rng.random((200, 32))
            lhs = np.abs(net.evaluate_batch(x) - net.evaluate_batch(y))
            rhs = bound * np.linalg.norm(x - y, axis=1) + 1e-9
            assert np.all(lhs <= rhs)

    def test_empirical_requires_pairs(self):
        with pytest.raises(InvalidArgument):
            empirical_lipschitz(tiny_sqrt_net(), 0, seed=0)


class TestSetEvaluator:
    def test_counts_calls_and_matches_dense(self):
        rng = np.random.default_rng(14)
        net = random_net(rng, dims=(10, 4, 1))
        ev = SetEvaluator(net)
        base = indicator({1, 3}, 10)
        cands = np.array([0, 2, 5, 9])
        inc = ev.extend_batch(base, cands)
        dense_rows = np.stack([base.copy() for _ in cands])
        dense_rows[np.arange(len(cands)), cands] = 1.0
        dense = ev(dense_rows)
        assert ev.calls == 2
        assert np.allclose(inc, dense, atol=1e-12)

    def test_extend_rejects_present_candidate(self):
        net = tiny_sqrt_net()
        ev = SetEvaluator(net)
        with pytest.raises(InvalidArgument):
            ev.extend_batch(indicator({0}, 2), np.array([0]))
