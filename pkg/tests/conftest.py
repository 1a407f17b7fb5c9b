import numpy as np
import pytest

from seann.dsf import DsfArchitecture, DsfNetwork


class ModularEvaluator:
    """Additive set function given by per-element values; f(empty) = 0."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)

    def __call__(self, batch):
        return np.asarray(batch, dtype=np.float64) @ self.values


def modular_net(values) -> DsfNetwork:
    """Single-layer scoring net: no activation, so exactly modular."""
    values = np.asarray(values, dtype=np.float64)
    return DsfNetwork(DsfArchitecture((values.size, 1)), [values[None, :]])


def tiny_sqrt_net() -> DsfNetwork:
    """f(x) = sqrt(x0 + x1): the worked two-input example."""
    return DsfNetwork(
        DsfArchitecture((2, 1, 1)), [np.array([[1.0, 1.0]]), np.array([[1.0]])]
    )


def random_net(rng, dims=None, activation="sqrt", low=0.05, high=1.0) -> DsfNetwork:
    if dims is None:
        n = int(rng.integers(4, 10))
        dims = (n, int(rng.integers(2, 6)), 1)
    arch = DsfArchitecture(tuple(dims), activation)
    mats = [
        rng.uniform(low, high, size=(arch.layer_dims[i + 1], arch.layer_dims[i]))
        for i in range(arch.num_weight_layers)
    ]
    return DsfNetwork(arch, mats)


def fd_weight_gradient(evaluate, net, h=1e-5):
    """Central finite differences of a scalar function of the weights.

    ``evaluate`` maps a DsfNetwork to a float; the net's weights are
    perturbed entry by entry.
    """
    grads = []
    for li, w in enumerate(net.weights):
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            for sign in (+1, -1):
                mats = [m.copy() for m in net.weights]
                mats[li][idx] += sign * h
                g[idx] += sign * evaluate(DsfNetwork(net.arch, mats))
            g[idx] /= 2 * h
        grads.append(g)
    return grads


def grad_rel_error(analytic, numeric):
    """Relative error between gradients, measured on the stacked vector."""
    a = np.concatenate([g.ravel() for g in analytic])
    b = np.concatenate([g.ravel() for g in numeric])
    denom = max(np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


@pytest.fixture(scope="session")
def planted_world():
    """Shared small planted-patch dataset and classifier for slow suites."""
    from seann.classifier import make_planted_dataset, train_classifier

    train_set = make_planted_dataset(120, side=16, patch_side=3, seed=7)
    clf = train_classifier(train_set, epochs=40, lr=0.1, seed=3, hidden_dims=(24,))
    test_set = make_planted_dataset(60, side=16, patch_side=3, seed=1234)
    return train_set, test_set, clf
