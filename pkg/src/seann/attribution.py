"""Attribution from a trained scoring network via greedy marginal gains.

Each feature's score is its marginal gain in the context of the already
selected features, so redundant-but-discriminative features are discounted
and the resulting maps are sharper than any pixelwise combination of the
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidArgument
from .classifier import MlpClassifier, forward
from .baselines import baseline_heatmap
from .dsf import DsfArchitecture, DsfNetwork, SetEvaluator
from .resample import Heatmap, downsample_real, nearest_indices
from .submax import greedy_maximize
from .trainer import TrainConfig, TrainingSet, default_hidden_dims, train

# Gains at or below this level count as zero for the selection loop guard.
GAIN_EPS = 1e-12


@dataclass(frozen=True)
class AttributionMap:
    """Raw marginal-gain scores plus a min-max normalized copy."""

    height: int
    width: int
    scores: np.ndarray
    normalized: np.ndarray = None  # derived in __post_init__

    def __post_init__(self):
        h, w = int(self.height), int(self.width)
        scores = np.ascontiguousarray(np.asarray(self.scores, dtype=np.float64)).ravel()
        if scores.shape != (h * w,):
            raise DimensionError(
                f"expected {h * w} scores for a {h}x{w} map, got {scores.shape[0]}"
            )
        if np.any(scores < 0.0):
            raise InvalidArgument("attribution scores must be non-negative")
        lo, hi = float(scores.min()), float(scores.max())
        if hi == lo:
            norm = np.zeros_like(scores)
        else:
            norm = np.clip((scores - lo) / (hi - lo), 0.0, 1.0)
        scores.setflags(write=False)
        norm.setflags(write=False)
        object.__setattr__(self, "height", h)
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "normalized", norm)

    @property
    def n(self) -> int:
        return self.height * self.width

    def as_heatmap(self) -> Heatmap:
        return Heatmap(self.height, self.width, self.normalized)


def sea_attribute(
    net: DsfNetwork,
    n: int | None = None,
    height: int | None = None,
    width: int | None = None,
) -> AttributionMap:
    """Greedy marginal-gain attribution over the whole ground set.

    Repeatedly finds the set M of maximum-gain features given the current
    context A, writes that gain to every member of M, moves the lowest
    index of M into A and drops all of M from the candidate pool. Stops
    when the best gain is no longer positive, the context covers the
    ground set, or no candidates remain; untouched features keep score 0.
    """
    if n is None:
        n = net.input_dim
    if int(n) != net.input_dim:
        raise DimensionError(
            f"ground-set size {n} does not match network input {net.input_dim}"
        )
    n = int(n)
    if height is None or width is None:
        height, width = 1, n
    if int(height) * int(width) != n:
        raise DimensionError(f"{height}x{width} does not cover {n} features")

    evaluator = SetEvaluator(net)
    scores = np.zeros(n)
    base = np.zeros(n)
    remaining = np.ones(n, dtype=bool)
    selected = 0
    current = 0.0
    while selected < n:
        cands = np.flatnonzero(remaining)
        if cands.size == 0:
            break
        vals = evaluator.extend_batch(base, cands)
        gains = vals - current
        best = int(np.argmax(gains))
        best_gain = float(gains[best])
        if best_gain <= GAIN_EPS:
            break
        ties = cands[gains == gains[best]]
        e = int(ties[0])  # lowest index, since candidates are ascending
        scores[ties] = best_gain
        base[e] = 1.0
        selected += 1
        current = float(vals[best])
        remaining[ties] = False
    return AttributionMap(height, width, scores)


def top_p_select(net: DsfNetwork, p: int) -> set[int]:
    """The p most valuable jointly non-redundant features: greedy argmax of
    the scoring function under |A| <= p."""
    n = net.input_dim
    p = int(p)
    if p < 1 or p > n:
        raise InvalidArgument(f"p must be in [1, {n}], got {p}")
    chain = greedy_maximize(SetEvaluator(net), n, p)
    return set(chain.elements)


def agg_mean(maps: list[Heatmap]) -> Heatmap:
    """Pixel-wise arithmetic mean of heatmaps with identical dimensions."""
    if not maps:
        raise InvalidArgument("need at least one heatmap")
    hw = (maps[0].height, maps[0].width)
    for m in maps:
        if (m.height, m.width) != hw:
            raise DimensionError("all heatmaps must share dimensions")
    mean = np.mean([m.values for m in maps], axis=0)
    return Heatmap(hw[0], hw[1], np.clip(mean, 0.0, 1.0))


def assemble_global(
    per_input_maps: list[list[Heatmap]], thresholds
) -> TrainingSet:
    """Pool the supervision of many inputs (e.g. every image of a class)
    into one training set: all real maps plus all their binarizations."""
    pooled = [m for group in per_input_maps for m in group]
    if not pooled:
        raise InvalidArgument("no heatmaps supplied")
    return TrainingSet.from_heatmaps(pooled, thresholds)


def sea_pipeline(
    clf: MlpClassifier,
    image: Heatmap,
    methods: list[str],
    cfg: TrainConfig | None = None,
    grid: int = 28,
    hidden_dims: tuple[int, ...] | None = None,
    ig_steps: int = 50,
    sg_samples: int = 25,
    sg_sigma: float | None = None,
    return_details: bool = False,
):
    """End-to-end attribution for one image.

    Runs each baseline method, normalizes the maps, downsamples them to a
    ``grid`` x ``grid`` working resolution when the image is larger, trains
    a scoring network on the maps plus their binarizations, attributes by
    greedy marginal gains, and upsamples the result back to image size by
    nearest neighbor.
    """
    if not methods:
        raise InvalidArgument("need at least one baseline method")
    if cfg is None:
        cfg = TrainConfig()
    if image.n != clf.input_dim:
        raise DimensionError("image size does not match the classifier")

    _, _, pred = forward(clf, image.values)
    maps = [
        baseline_heatmap(
            m, clf, image, c=pred,
            ig_steps=ig_steps, sg_samples=sg_samples, sg_sigma=sg_sigma,
            seed=cfg.seed,
        )
        for m in methods
    ]

    shrink = image.height > grid or image.width > grid
    work = [downsample_real(m, grid, grid) for m in maps] if shrink else maps
    gh, gw = (grid, grid) if shrink else (image.height, image.width)

    data = TrainingSet.from_heatmaps(work, cfg.thresholds)
    arch = DsfArchitecture(
        (data.n, *(hidden_dims or default_hidden_dims(data.n)), 1)
    )
    net, report = train(data, cfg, arch)
    amap = sea_attribute(net, height=gh, width=gw)

    if shrink:
        rows = nearest_indices(gh, image.height)
        cols = nearest_indices(gw, image.width)
        big = amap.scores.reshape(gh, gw)[np.ix_(rows, cols)]
        amap = AttributionMap(image.height, image.width, big.ravel())
    if return_details:
        return amap, net, report, maps
    return amap
