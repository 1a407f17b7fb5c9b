"""Learning the scoring network by projected subgradient descent.

The training objective rewards networks that (a) score every supervision
heatmap close to the all-ones map and (b) score each hard-thresholded map
within a margin of the best same-budget subset found by greedy search:

    ridge/2 ||w||^2
      + gap_weight  * sum_i ( f(ones) - f(map_i) )
      + hinge_weight * sum_{i,j} ( margin + f(greedy prefix at budget b_ij)
                                   - f(binarized map_ij) )^+

One greedy chain per step serves every budget, because greedy prefixes
solve all smaller cardinality constraints.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidArgument, NumericalError
from .dsf import (
    DsfArchitecture,
    DsfNetwork,
    SetEvaluator,
    WeightGradient,
    project_nonneg,
)
from .resample import BinaryMap, Heatmap, binarize_top, threshold_grid
from .submax import GreedyChain, greedy_maximize

ADAGRAD_EPS = 1e-10


def default_thresholds() -> tuple[int, ...]:
    return tuple(threshold_grid(10, 5, 50))


@dataclass
class TrainConfig:
    """Hyperparameters of the scoring-function objective and optimizer."""

    ridge: float = 1e-4
    gap_weight: float = 0.1
    hinge_weight: float = 10.0
    margin: float = 1e-5
    epochs: int = 50
    lr: float = 0.01
    lr_decay: float = 0.1
    weight_decay: float = 1e-6
    thresholds: tuple[int, ...] = field(default_factory=default_thresholds)
    seed: int = 0
    nonzero_features: tuple[int, ...] = ()
    nonzero_margin: float = 0.01
    zero_features: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("ridge", "gap_weight", "hinge_weight", "lr", "lr_decay",
                     "weight_decay"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"{name} must be >= 0")
        if self.margin <= 0:
            raise InvalidArgument("margin must be > 0")
        if self.epochs < 0:
            raise InvalidArgument("epochs must be >= 0")
        self.thresholds = tuple(sorted(int(t) for t in self.thresholds))
        if self.thresholds and self.thresholds[0] < 1:
            raise InvalidArgument("thresholds must be >= 1")
        self.nonzero_features = tuple(int(i) for i in self.nonzero_features)
        self.zero_features = tuple(int(i) for i in self.zero_features)


@dataclass
class TrainingSet:
    """Supervision: m real heatmaps plus their hard-thresholded versions."""

    real_maps: list[Heatmap]
    binary_maps: list[BinaryMap]
    h_star: Heatmap

    def __post_init__(self):
        if not self.real_maps:
            raise InvalidArgument("need at least one real heatmap")
        n = self.real_maps[0].n
        hw = (self.real_maps[0].height, self.real_maps[0].width)
        for m in self.real_maps:
            if (m.height, m.width) != hw:
                raise DimensionError("all real maps must share dimensions")
        for b in self.binary_maps:
            if (b.height, b.width) != hw:
                raise DimensionError("all binary maps must share dimensions")
            if b.budget < 1 or b.budget > n:
                raise InvalidArgument("binary-map budgets must lie in [1, n]")
        if (self.h_star.height, self.h_star.width) != hw:
            raise DimensionError("all-ones map must share dimensions")
        if not np.all(self.h_star.values == 1.0):
            raise InvalidArgument("h_star must be the all-ones heatmap")

    @property
    def n(self) -> int:
        return self.real_maps[0].n

    @property
    def height(self) -> int:
        return self.real_maps[0].height

    @property
    def width(self) -> int:
        return self.real_maps[0].width

    @property
    def max_budget(self) -> int:
        return max((b.budget for b in self.binary_maps), default=0)

    @classmethod
    def from_heatmaps(cls, maps: list[Heatmap], thresholds) -> "TrainingSet":
        """Pool real maps with their binarizations at every threshold."""
        if not maps:
            raise InvalidArgument("need at least one heatmap")
        binary = [binarize_top(m, t) for m in maps for t in thresholds]
        ones = Heatmap.full(maps[0].height, maps[0].width, 1.0)
        return cls(list(maps), binary, ones)


@dataclass
class TrainReport:
    """objectives[i] and hinge_active[i] are measured at the start of epoch
    i (before its update); final_objective is measured after the last
    update with one extra greedy chain."""

    objectives: list[float]
    hinge_active: list[int]
    final_objective: float
    greedy_calls: int
    wall_time: float


def gap_objective(net: DsfNetwork, data: TrainingSet, ridge: float) -> float:
    """Plain fit objective: ridge + per-map score gaps + a hinge keeping
    f(ones) >= 1 so the all-zero network is not optimal."""
    _check_dims(net, data)
    batch = np.vstack([data.h_star.values[None, :]] + [m.values[None, :] for m in data.real_maps])
    vals = net.evaluate_batch(batch)
    f_star = vals[0]
    gaps = float(np.sum(f_star - vals[1:]))
    return 0.5 * ridge * net.sq_weight_norm() + gaps + max(0.0, 1.0 - float(f_star))


def training_objective(
    net: DsfNetwork,
    data: TrainingSet,
    cfg: TrainConfig,
    chain: GreedyChain | None = None,
) -> float:
    """Full objective; ``chain`` (greedy run at the largest budget) is
    computed on the fly when not supplied."""
    value, _, _ = _objective_terms(net, data, cfg, chain)
    return value


def training_subgradient(
    net: DsfNetwork,
    data: TrainingSet,
    cfg: TrainConfig,
    chain: GreedyChain | None = None,
) -> WeightGradient:
    """A subgradient of the objective at the current weights.

    The greedy sets are treated as fixed for the step; each hinge term
    contributes exactly when its argument is strictly positive.
    """
    _, _, grad = _objective_terms(net, data, cfg, chain, want_gradient=True)
    return grad


def _check_dims(net: DsfNetwork, data: TrainingSet):
    if net.input_dim != data.n:
        raise DimensionError(
            f"network expects {net.input_dim} inputs, maps have {data.n} pixels"
        )


def _objective_terms(
    net: DsfNetwork,
    data: TrainingSet,
    cfg: TrainConfig,
    chain: GreedyChain | None,
    want_gradient: bool = False,
) -> tuple[float, int, WeightGradient | None]:
    """(objective value, active hinge count, optional subgradient).

    All evaluations happen in one batch; the subgradient reuses the same
    rows with signed coefficients, reduced in a fixed order.
    """
    _check_dims(net, data)
    n = data.n
    if chain is None:
        chain = greedy_maximize(SetEvaluator(net), n, min(data.max_budget, n))

    rows = [data.h_star.values]
    rows += [m.values for m in data.real_maps]
    rows += [b.indicator() for b in data.binary_maps]
    prefix_rows = []
    prefix_of = []
    budget_to_row: dict[int, int] = {}
    for b in data.binary_maps:
        budget = b.budget
        if budget not in budget_to_row:
            ind = np.zeros(n)
            members = list(chain.prefix(budget))
            if members:
                ind[members] = 1.0
            budget_to_row[budget] = len(prefix_rows)
            prefix_rows.append(ind)
        prefix_of.append(budget_to_row[budget])

    batch = np.vstack(rows + prefix_rows)
    vals = net.evaluate_batch(batch)

    m = len(data.real_maps)
    k = len(data.binary_maps)
    f_star = float(vals[0])
    f_real = vals[1 : 1 + m]
    f_bin = vals[1 + m : 1 + m + k]
    f_prefix = vals[1 + m + k :]

    gap_sum = float(np.sum(f_star - f_real))
    hinge_args = np.array(
        [cfg.margin + f_prefix[prefix_of[j]] - f_bin[j] for j in range(k)]
    )
    active = hinge_args > 0.0
    hinge_sum = float(np.sum(hinge_args[active])) if k else 0.0

    value = (
        0.5 * cfg.ridge * net.sq_weight_norm()
        + cfg.gap_weight * gap_sum
        + cfg.hinge_weight * hinge_sum
    )

    grad = None
    if want_gradient:
        coeffs = np.zeros(batch.shape[0])
        coeffs[0] = cfg.gap_weight * m
        coeffs[1 : 1 + m] = -cfg.gap_weight
        for j in range(k):
            if active[j]:
                coeffs[1 + m + j] -= cfg.hinge_weight
                coeffs[1 + m + k + prefix_of[j]] += cfg.hinge_weight
        grad = net.weight_gradient_batch(batch, coeffs)
        for gw, w in zip(grad.layers, net.weights):
            gw += cfg.ridge * w
    return value, int(np.count_nonzero(active)), grad


def sensitivity_penalties(
    net: DsfNetwork, cfg: TrainConfig
) -> tuple[float, WeightGradient]:
    """Optional axiom constraints folded into the objective with weight 1.

    Features that must receive attribution pay (eps - (f(ones) -
    f(ones minus e_i)))^+; features that must not, pay f({v}).
    """
    overlap = set(cfg.nonzero_features) & set(cfg.zero_features)
    if overlap:
        raise InvalidArgument(f"features {sorted(overlap)} in both constraint lists")
    n = net.input_dim
    for i in (*cfg.nonzero_features, *cfg.zero_features):
        if i < 0 or i >= n:
            raise InvalidArgument(f"constrained feature {i} outside ground set")

    grad = WeightGradient.zeros_like(net)
    if not cfg.nonzero_features and not cfg.zero_features:
        return 0.0, grad

    rows = [np.ones(n)]
    for i in cfg.nonzero_features:
        drop = np.ones(n)
        drop[i] = 0.0
        rows.append(drop)
    for v in cfg.zero_features:
        single = np.zeros(n)
        single[v] = 1.0
        rows.append(single)
    batch = np.vstack(rows)
    vals = net.evaluate_batch(batch)

    penalty = 0.0
    coeffs = np.zeros(batch.shape[0])
    f_ones = float(vals[0])
    for pos, _ in enumerate(cfg.nonzero_features, start=1):
        slack = cfg.nonzero_margin - (f_ones - float(vals[pos]))
        if slack > 0.0:
            penalty += slack
            coeffs[0] -= 1.0
            coeffs[pos] += 1.0
    off = 1 + len(cfg.nonzero_features)
    for pos in range(off, off + len(cfg.zero_features)):
        penalty += float(vals[pos])
        coeffs[pos] += 1.0

    if np.any(coeffs != 0.0):
        grad = net.weight_gradient_batch(batch, coeffs)
    return penalty, grad


def train(
    data: TrainingSet,
    cfg: TrainConfig,
    arch: DsfArchitecture | None = None,
) -> tuple[DsfNetwork, TrainReport]:
    """Projected subgradient descent with per-coordinate step scaling.

    Weights start at 1, every step computes a single greedy chain at the
    largest supervision budget, and after each update the weights are
    clamped to be non-negative. Deterministic for a fixed config.
    """
    start = time.perf_counter()
    if arch is None:
        arch = DsfArchitecture((data.n, *default_hidden_dims(data.n), 1))
    if arch.input_dim != data.n:
        raise DimensionError("architecture input dim must match the maps")

    net = DsfNetwork.ones(arch)
    accum = [np.zeros_like(w) for w in net.weights]
    budget = min(data.max_budget, data.n)

    objectives: list[float] = []
    hinge_active: list[int] = []
    greedy_calls = 0

    for step in range(cfg.epochs):
        chain = greedy_maximize(SetEvaluator(net), data.n, budget)
        greedy_calls += 1
        value, active, grad = _objective_terms(net, data, cfg, chain, want_gradient=True)
        pen, pen_grad = sensitivity_penalties(net, cfg)
        value += pen
        grad.add_(pen_grad)
        objectives.append(value)
        hinge_active.append(active)
        if not np.isfinite(value):
            report = TrainReport(
                objectives, hinge_active, float("nan"), greedy_calls,
                time.perf_counter() - start,
            )
            err = NumericalError(f"objective became non-finite at epoch {step}")
            err.report = report
            raise err

        lr_t = cfg.lr / (1.0 + step * cfg.lr_decay)
        new_weights = []
        for w, g, acc in zip(net.weights, grad.layers, accum):
            g = g + cfg.weight_decay * w
            acc += g * g
            new_weights.append(w - lr_t * g / (np.sqrt(acc) + ADAGRAD_EPS))
        net = DsfNetwork(arch, project_nonneg(new_weights))

    final_chain = greedy_maximize(SetEvaluator(net), data.n, budget)
    final_value, _, _ = _objective_terms(net, data, cfg, final_chain)
    final_value += sensitivity_penalties(net, cfg)[0]
    report = TrainReport(
        objectives,
        hinge_active,
        float(final_value),
        greedy_calls,
        time.perf_counter() - start,
    )
    return net, report


def default_hidden_dims(n: int) -> tuple[int, ...]:
    """Hidden sizes used when none are given: the reference 784-input stack,
    or the same proportions for other input sizes."""
    if n == 784:
        return (512, 256, 32)
    return (
        max(2, round(0.65 * n)),
        max(2, round(0.33 * n)),
        max(2, round(0.04 * n)),
    )
