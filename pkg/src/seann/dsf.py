"""Monotone submodular scoring networks.

A scoring network is a bias-free feedforward net with non-negative weights
and a concave, increasing activation after every layer but the last.
Restricted to binary inputs it is a normalized monotone submodular set
function; on the box [0, 1]^n it is that function's concave extension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InvalidArgument,
    UnsupportedArchitecture,
)

ACTIVATIONS = ("sqrt", "log1p")

# Below this pre-activation level the sqrt derivative is defined as 0
# (clamped subgradient); keeps gradients finite at the empty set.
SQRT_GRAD_EPS = 1e-12


@dataclass(frozen=True)
class DsfArchitecture:
    """Layer sizes and activation of a scoring network.

    ``layer_dims[0]`` is the input (ground-set) size, ``layer_dims[-1]``
    must be 1. The activation is applied after every layer except the last.
    """

    layer_dims: tuple[int, ...] = (784, 512, 256, 32, 1)
    activation: str = "sqrt"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        object.__setattr__(self, "layer_dims", dims)
        if len(dims) < 2:
            raise InvalidArgument("architecture needs at least two layers")
        if any(d < 1 for d in dims):
            raise InvalidArgument(f"all layer dims must be >= 1, got {dims}")
        if dims[-1] != 1:
            raise InvalidArgument(f"last layer dim must be 1, got {dims[-1]}")
        if self.activation not in ACTIVATIONS:
            raise InvalidArgument(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}"
            )

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_weight_layers(self) -> int:
        return len(self.layer_dims) - 1


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "sqrt":
        return np.sqrt(z)
    return np.log1p(z)


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "sqrt":
        out = np.zeros_like(z)
        big = z > SQRT_GRAD_EPS
        out[big] = 0.5 / np.sqrt(z[big])
        return out
    return 1.0 / (1.0 + z)


@dataclass
class WeightGradient:
    """Per-layer gradient matrices, shape-matched to a network's weights."""

    layers: list[np.ndarray]

    def scaled(self, c: float) -> "WeightGradient":
        return WeightGradient([c * g for g in self.layers])

    def add_(self, other: "WeightGradient", c: float = 1.0) -> "WeightGradient":
        for mine, theirs in zip(self.layers, other.layers):
            mine += c * theirs
        return self

    def sq_norm(self) -> float:
        return float(sum(np.sum(g * g) for g in self.layers))

    @staticmethod
    def zeros_like(net: "DsfNetwork") -> "WeightGradient":
        return WeightGradient([np.zeros_like(w) for w in net.weights])


class DsfNetwork:
    """Bias-free net with non-negative weights; weights[i] has shape
    (layer_dims[i+1], layer_dims[i])."""

    def __init__(self, arch: DsfArchitecture, weights: list[np.ndarray]):
        if len(weights) != arch.num_weight_layers:
            raise DimensionError(
                f"expected {arch.num_weight_layers} weight matrices, got {len(weights)}"
            )
        mats = []
        for i, w in enumerate(weights):
            w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
            want = (arch.layer_dims[i + 1], arch.layer_dims[i])
            if w.shape != want:
                raise DimensionError(f"layer {i}: shape {w.shape}, expected {want}")
            if not np.all(np.isfinite(w)):
                raise DomainError(f"layer {i}: non-finite weight entries")
            if np.any(w < 0):
                raise DomainError(f"layer {i}: negative weight entries")
            mats.append(w)
        self.arch = arch
        self.weights = mats

    # -- constructors ---------------------------------------------------

    @classmethod
    def ones(cls, arch: DsfArchitecture) -> "DsfNetwork":
        dims = arch.layer_dims
        return cls(arch, [np.ones((dims[i + 1], dims[i])) for i in range(len(dims) - 1)])

    @classmethod
    def random(
        cls, arch: DsfArchitecture, seed: int, low: float = 0.0, high: float = 1.0
    ) -> "DsfNetwork":
        if low < 0 or high < low:
            raise InvalidArgument("need 0 <= low <= high")
        rng = np.random.default_rng(seed)
        dims = arch.layer_dims
        mats = [
            rng.uniform(low, high, size=(dims[i + 1], dims[i]))
            for i in range(len(dims) - 1)
        ]
        return cls(arch, mats)

    @property
    def input_dim(self) -> int:
        return self.arch.input_dim

    # -- evaluation -----------------------------------------------------

    def _check_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise DimensionError(
                f"expected batch of shape (*, {self.input_dim}), got {x.shape}"
            )
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise DomainError("inputs must lie in [0, 1]")
        return x

    def evaluate_batch(self, x: np.ndarray) -> np.ndarray:
        """Concave-extension values for a batch of rows in [0, 1]^n."""
        h = self._check_batch(x)
        act = self.arch.activation
        last = len(self.weights) - 1
        for i, w in enumerate(self.weights):
            h = h @ w.T
            if i != last:
                h = _act(h, act)
        return h[:, 0]

    def evaluate(self, x: np.ndarray) -> float:
        """Concave-extension value for a single vector in [0, 1]^n."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionError(f"expected a vector, got shape {x.shape}")
        return float(self.evaluate_batch(x[None, :])[0])

    def evaluate_set(self, members) -> float:
        """Set-function value f(A): the extension at A's indicator vector."""
        return self.evaluate(indicator(members, self.input_dim))

    def marginal_gain(self, e: int, members) -> float:
        """f(A + e) - f(A).  Non-negative for monotone networks."""
        members = _as_index_set(members, self.input_dim)
        e = int(e)
        if e < 0 or e >= self.input_dim:
            raise IndexError(f"element {e} outside ground set of size {self.input_dim}")
        if e in members:
            raise InvalidArgument(f"element {e} already in the set")
        return self.evaluate_set(members | {e}) - self.evaluate_set(members)

    def _extend_batch(self, base: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        """Values of f at base + e_c for each candidate c, as one batch.

        Exploits linearity of the first layer: all rows share the base
        pre-activation, so the first matrix product collapses to one
        matrix-vector product plus a broadcast add.
        """
        base = self._check_batch(base[None, :])[0]
        candidates = np.asarray(candidates, dtype=np.intp)
        if candidates.size and np.any(base[candidates] != 0.0):
            raise InvalidArgument("candidates must be absent from the base vector")
        w1 = self.weights[0]
        h = base @ w1.T + w1.T[candidates]
        act = self.arch.activation
        last = len(self.weights) - 1
        if last == 0:
            return h[:, 0]
        h = _act(h, act)
        for i, w in enumerate(self.weights[1:], start=1):
            h = h @ w.T
            if i != last:
                h = _act(h, act)
        return h[:, 0]

    # -- gradients --------------------------------------------------------

    def weight_gradient(self, x: np.ndarray) -> WeightGradient:
        """Analytic gradient of the extension value with respect to every
        weight entry, by backpropagation."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionError(f"expected a vector, got shape {x.shape}")
        return self.weight_gradient_batch(x[None, :], np.ones(1))

    def weight_gradient_batch(self, x: np.ndarray, coeffs: np.ndarray) -> WeightGradient:
        """sum_b coeffs[b] * grad_w f(x[b]) in a single batched backward pass."""
        x = self._check_batch(x)
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape != (x.shape[0],):
            raise DimensionError("one coefficient per batch row required")
        act = self.arch.activation
        last = len(self.weights) - 1

        pre = []  # pre-activation of each layer
        post = [x]  # layer inputs
        h = x
        for i, w in enumerate(self.weights):
            z = h @ w.T
            pre.append(z)
            h = _act(z, act) if i != last else z
            if i != last:
                post.append(h)

        grads = [np.empty_like(w) for w in self.weights]
        g = coeffs[:, None].copy()  # d(output)/d(z_last), weighted per row
        for i in range(last, -1, -1):
            grads[i] = g.T @ post[i]
            if i > 0:
                g = (g @ self.weights[i]) * _act_grad(pre[i - 1], act)
        return WeightGradient(grads)

    # -- misc -------------------------------------------------------------

    def copy(self) -> "DsfNetwork":
        return DsfNetwork(self.arch, [w.copy() for w in self.weights])

    def sq_weight_norm(self) -> float:
        return float(sum(np.sum(w * w) for w in self.weights))

    def weight_sums(self) -> list[float]:
        return [float(w.sum()) for w in self.weights]


class SetEvaluator:
    """Batched set-function view of a network.

    Callable on a matrix of indicator rows; also offers the incremental
    ``extend_batch`` used by greedy loops. Counts batched calls so callers
    can assert evaluation budgets.
    """

    def __init__(self, net: DsfNetwork):
        self.net = net
        self.calls = 0

    @property
    def ground_size(self) -> int:
        return self.net.input_dim

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        self.calls += 1
        return self.net.evaluate_batch(batch)

    def extend_batch(self, base: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        self.calls += 1
        return self.net._extend_batch(base, candidates)


def indicator(members, n: int) -> np.ndarray:
    """0/1 vector of length n with ones at the given indices."""
    members = _as_index_set(members, n)
    out = np.zeros(n, dtype=np.float64)
    if members:
        out[sorted(members)] = 1.0
    return out


def _as_index_set(members, n: int) -> set:
    out = set(int(i) for i in members)
    for i in out:
        if i < 0 or i >= n:
            raise IndexError(f"index {i} outside ground set of size {n}")
    return out


def project_nonneg(matrices: list[np.ndarray]) -> list[np.ndarray]:
    """Entrywise max(0, .); idempotent, and normalizes -0.0 to +0.0."""
    return [np.maximum(np.asarray(m, dtype=np.float64), 0.0) + 0.0 for m in matrices]


def lipschitz_bound(net: DsfNetwork) -> float:
    """Closed-form Lipschitz constant of the concave extension for the
    supported depth: prod_i (total weight of layer i)^(1/2^(L+1-i)) / 7,
    defined for exactly four sqrt-activated weight layers."""
    if net.arch.num_weight_layers != 4 or net.arch.activation != "sqrt":
        raise UnsupportedArchitecture(
            "closed-form bound requires exactly 4 weight layers with sqrt activation"
        )
    sums = net.weight_sums()
    prod = 1.0
    for i, s in enumerate(sums, start=1):
        prod *= s ** (1.0 / 2.0 ** (5 - i))
    return prod / 7.0


def empirical_lipschitz(net: DsfNetwork, num_pairs: int, seed: int) -> float:
    """Largest |f(x) - f(y)| / ||x - y|| over sampled uniform pairs.

    Pairs closer than 1e-9 are skipped. Deterministic for a fixed seed.
    """
    if num_pairs < 1:
        raise InvalidArgument("num_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    n = net.input_dim
    best = 0.0
    chunk = 4096
    remaining = int(num_pairs)
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        x = rng.random((m, n))
        y = rng.random((m, n))
        dist = np.linalg.norm(x - y, axis=1)
        keep = dist >= 1e-9
        if not np.any(keep):
            continue
        fx = net.evaluate_batch(x[keep])
        fy = net.evaluate_batch(y[keep])
        q = np.abs(fx - fy) / dist[keep]
        best = max(best, float(q.max()))
    return best
