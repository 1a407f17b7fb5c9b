"""Cardinality-constrained maximization of monotone set functions.

The greedy algorithm returns a chain whose b-element prefix solves the
budget-b problem, so one run serves every smaller budget. A brute-force
maximizer is included as a test oracle for small ground sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, TooLarge


@dataclass(frozen=True)
class GreedyChain:
    """Ordered greedy selection with per-step marginal gains.

    ``values[b]`` is the function value of the first b elements, with
    ``values[0] == 0`` (normalized functions assumed), and
    ``values[b] - values[b-1] == gains[b-1]`` exactly as stored.
    """

    elements: tuple[int, ...]
    gains: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.elements) + 1 or len(self.gains) != len(
            self.elements
        ):
            raise InvalidArgument("chain lists are inconsistent in length")

    def prefix(self, budget: int) -> tuple[int, ...]:
        """First min(budget, len) selected elements."""
        if budget < 0:
            raise InvalidArgument("budget must be >= 0")
        return self.elements[: min(budget, len(self.elements))]

    def value_at(self, budget: int) -> float:
        """Function value of the budget-b prefix.  If the chain stopped
        early (no positive gain left), larger budgets map to the final
        value."""
        if budget < 0:
            raise InvalidArgument("budget must be >= 0")
        return self.values[min(budget, len(self.elements))]


def greedy_maximize(evaluator, n: int, budget: int) -> GreedyChain:
    """Greedy maximization of a monotone set function under |A| <= budget.

    ``evaluator`` is called on one batch of indicator row-vectors per step
    (all remaining candidates at once); it may optionally expose
    ``extend_batch(base_indicator, candidate_ids)`` computing the same
    values without materializing the batch. Either way exactly one batched
    call happens per step. Ties break to the lowest index; the loop stops
    early once the best available gain is <= 0. The function is assumed
    normalized (f of the empty set is 0).
    """
    n = int(n)
    budget = int(budget)
    if n < 0:
        raise InvalidArgument("ground-set size must be >= 0")
    if budget < 0 or budget > n:
        raise InvalidArgument(f"budget must be in [0, {n}], got {budget}")

    base = np.zeros(n, dtype=np.float64)
    remaining = np.ones(n, dtype=bool)
    elements: list[int] = []
    gains: list[float] = []
    values: list[float] = [0.0]
    current = 0.0

    use_extend = hasattr(evaluator, "extend_batch")
    for _ in range(budget):
        cands = np.flatnonzero(remaining)
        if cands.size == 0:
            break
        if use_extend:
            vals = np.asarray(evaluator.extend_batch(base, cands), dtype=np.float64)
        else:
            batch = np.repeat(base[None, :], cands.size, axis=0)
            batch[np.arange(cands.size), cands] = 1.0
            vals = np.asarray(evaluator(batch), dtype=np.float64)
        step_gains = vals - current
        best = int(np.argmax(step_gains))  # first max = lowest index
        if step_gains[best] <= 0.0:
            break
        e = int(cands[best])
        elements.append(e)
        gains.append(float(step_gains[best]))
        values.append(float(vals[best]))
        current = float(vals[best])
        base[e] = 1.0
        remaining[e] = False

    return GreedyChain(tuple(elements), tuple(gains), tuple(values))


def brute_force_maximize(evaluator, n: int, budget: int) -> tuple[tuple[int, ...], float]:
    """Exact argmax of f over all subsets of size <= budget.

    Exhaustive; refuses ground sets larger than 20. Ties break to the
    lexicographically smallest index tuple. Returns (sorted indices, value).
    """
    n = int(n)
    budget = int(budget)
    if n > 20:
        raise TooLarge(f"brute force limited to n <= 20, got {n}")
    if n < 0:
        raise InvalidArgument("ground-set size must be >= 0")
    if budget < 0 or budget > n:
        raise InvalidArgument(f"budget must be in [0, {n}], got {budget}")

    best_set: tuple[int, ...] = ()
    best_val = _eval_subsets(evaluator, n, [()])[0]
    for size in range(1, budget + 1):
        combos = list(itertools.combinations(range(n), size))
        vals = _eval_subsets(evaluator, n, combos)
        for combo, val in zip(combos, vals):
            if val > best_val or (val == best_val and combo < best_set):
                best_val, best_set = val, combo
    return best_set, float(best_val)


def _eval_subsets(evaluator, n: int, combos) -> np.ndarray:
    batch = np.zeros((len(combos), n), dtype=np.float64)
    for row, combo in enumerate(combos):
        if combo:
            batch[row, list(combo)] = 1.0
    return np.asarray(evaluator(batch), dtype=np.float64)
