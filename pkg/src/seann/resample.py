"""Heatmaps, top-t binarization, and grid down/up-sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, InvalidArgument


@dataclass(frozen=True)
class Heatmap:
    """Real-valued attribution map: row-major values in [0, 1]."""

    height: int
    width: int
    values: np.ndarray

    def __post_init__(self):
        h, w = int(self.height), int(self.width)
        if h < 1 or w < 1:
            raise InvalidArgument(f"dimensions must be >= 1, got {h}x{w}")
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).ravel()
        if vals.shape != (h * w,):
            raise DimensionError(
                f"expected {h * w} values for a {h}x{w} map, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("heatmap values must be finite")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise DomainError("heatmap values must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "height", h)
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.height * self.width

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)

    @classmethod
    def full(cls, height: int, width: int, value: float) -> "Heatmap":
        return cls(height, width, np.full(height * width, float(value)))

    @classmethod
    def from_grid(cls, grid: np.ndarray) -> "Heatmap":
        grid = np.asarray(grid, dtype=np.float64)
        if grid.ndim != 2:
            raise DimensionError(f"expected a 2-D grid, got shape {grid.shape}")
        return cls(grid.shape[0], grid.shape[1], grid.ravel())


@dataclass(frozen=True)
class BinaryMap:
    """Hard-thresholded map; ``budget`` is the number of selected pixels."""

    height: int
    width: int
    mask: np.ndarray

    def __post_init__(self):
        h, w = int(self.height), int(self.width)
        if h < 1 or w < 1:
            raise InvalidArgument(f"dimensions must be >= 1, got {h}x{w}")
        mask = np.ascontiguousarray(np.asarray(self.mask, dtype=bool)).ravel()
        if mask.shape != (h * w,):
            raise DimensionError(
                f"expected {h * w} mask bits for a {h}x{w} map, got {mask.shape[0]}"
            )
        mask.setflags(write=False)
        object.__setattr__(self, "height", h)
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self) -> int:
        return self.height * self.width

    @property
    def budget(self) -> int:
        return int(np.count_nonzero(self.mask))

    def grid(self) -> np.ndarray:
        return self.mask.reshape(self.height, self.width)

    def indicator(self) -> np.ndarray:
        return self.mask.astype(np.float64)


def binarize_top(h: Heatmap, t: int) -> BinaryMap:
    """Select the t largest values (ties to the lowest pixel index)."""
    t = int(t)
    if t < 1 or t > h.n:
        raise InvalidArgument(f"t must be in [1, {h.n}], got {t}")
    order = np.argsort(-h.values, kind="stable")
    mask = np.zeros(h.n, dtype=bool)
    mask[order[:t]] = True
    return BinaryMap(h.height, h.width, mask)


def threshold_grid(k: int, lo: int, hi: int) -> list[int]:
    """k counts equally spaced over [lo, hi], rounded and deduplicated."""
    k, lo, hi = int(k), int(lo), int(hi)
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    if lo > hi:
        raise InvalidArgument(f"need lo <= hi, got {lo} > {hi}")
    points = np.linspace(lo, hi, k)
    return sorted({int(np.floor(p + 0.5)) for p in points})


def _pad_to_blocks(grid: np.ndarray, gh: int, gw: int) -> tuple[np.ndarray, int, int]:
    """Edge-replicate on the right/bottom so gh x gw blocks tile exactly."""
    h, w = grid.shape
    bh = -(-h // gh)
    bw = -(-w // gw)
    pad_h = gh * bh - h
    pad_w = gw * bw - w
    if pad_h or pad_w:
        grid = np.pad(grid, ((0, pad_h), (0, pad_w)), mode="edge")
    return grid, bh, bw


def downsample_real(h: Heatmap, gh: int, gw: int) -> Heatmap:
    """Block means on a gh x gw grid (edge-padded if blocks don't tile)."""
    gh, gw = int(gh), int(gw)
    if gh < 1 or gw < 1:
        raise InvalidArgument("grid dimensions must be >= 1")
    grid, bh, bw = _pad_to_blocks(h.grid(), gh, gw)
    means = grid.reshape(gh, bh, gw, bw).mean(axis=(1, 3))
    top = means.max(initial=0.0)
    if top > 1.0:  # cannot happen for in-range input; guards rounding drift
        means = means / top
    return Heatmap(gh, gw, means.ravel())


def downsample_binary(b: BinaryMap, gh: int, gw: int) -> BinaryMap:
    """Cell is set iff its block's popcount strictly exceeds the mean
    popcount over all blocks."""
    gh, gw = int(gh), int(gw)
    if gh < 1 or gw < 1:
        raise InvalidArgument("grid dimensions must be >= 1")
    grid, bh, bw = _pad_to_blocks(b.grid().astype(np.float64), gh, gw)
    sums = grid.reshape(gh, bh, gw, bw).sum(axis=(1, 3))
    return BinaryMap(gh, gw, (sums > sums.mean()).ravel())


def nearest_indices(src: int, dst: int) -> np.ndarray:
    """Floor-scaling source index for each destination index."""
    return (np.arange(dst, dtype=np.intp) * src) // dst


def upsample_nearest(h: Heatmap, out_h: int, out_w: int) -> Heatmap:
    """Nearest-neighbor enlargement; every output pixel copies its
    floor-scaled source pixel."""
    out_h, out_w = int(out_h), int(out_w)
    if out_h < h.height or out_w < h.width:
        raise InvalidArgument("upsampling cannot shrink the map")
    grid = h.grid()
    rows = nearest_indices(h.height, out_h)
    cols = nearest_indices(h.width, out_w)
    return Heatmap(out_h, out_w, grid[np.ix_(rows, cols)].ravel())
