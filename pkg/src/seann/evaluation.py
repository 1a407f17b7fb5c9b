"""Quantitative evaluation of attribution maps.

Perturbation curves destroy the most relevant regions first and watch the
classifier's confidence fall: sharper attributions give lower area under
the curve. Top-k Jaccard compares selected pixel sets, and the robustness
score measures how stable a method's top pixels are under input noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidArgument
from .classifier import MlpClassifier, forward
from .resample import Heatmap


@dataclass(frozen=True)
class PerturbationCurve:
    """Classifier scores after 0, 1, ... cumulative perturbations.

    ``aupc`` is the trapezoidal mean of the curve: lower means the
    attribution found the pixels the classifier actually relies on.
    """

    scores: tuple[float, ...]
    mode: str
    aupc: float = None  # derived

    def __post_init__(self):
        if len(self.scores) < 2:
            raise InvalidArgument("a curve needs at least one perturbation step")
        steps = len(self.scores) - 1
        s = np.asarray(self.scores, dtype=np.float64)
        area = float(0.5 * s[0] + s[1:-1].sum() + 0.5 * s[-1]) / steps
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        object.__setattr__(self, "aupc", area)

    @property
    def steps(self) -> int:
        return len(self.scores) - 1


def _scores_of(attribution) -> np.ndarray:
    if hasattr(attribution, "scores"):
        return np.asarray(attribution.scores, dtype=np.float64)
    return np.asarray(attribution.values, dtype=np.float64)


def _dims_of(attribution) -> tuple[int, int]:
    return int(attribution.height), int(attribution.width)


def top_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, ties to the lowest index."""
    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    return np.sort(order[:k])


def aupc(
    clf: MlpClassifier,
    image: Heatmap,
    attribution,
    mode: str = "patch",
    patch_side: int = 8,
    steps: int = 8,
    pixels_per_step: int | None = None,
    perturb_value: float = 0.0,
) -> PerturbationCurve:
    """Perturbation curve for one image and one attribution map.

    ``patch`` mode ranks square tiles by their summed attribution and
    overwrites them with ``perturb_value`` one by one (tiles at the right
    and bottom edges may be smaller when the side does not divide).
    ``topk`` mode perturbs ``pixels_per_step`` pixels per step (default:
    1/28th of the image) in decreasing attribution order until the image
    is exhausted. The recorded score is the softmax probability of the
    class predicted on the unperturbed image.
    """
    if _dims_of(attribution) != (image.height, image.width):
        raise DimensionError("attribution and image dimensions differ")
    scores = _scores_of(attribution)
    _, probs, pred = forward(clf, image.values)

    if mode == "patch":
        if patch_side < 1:
            raise InvalidArgument("patch_side must be >= 1")
        tiles = _tiles(image.height, image.width, patch_side)
        if steps < 1 or steps > len(tiles):
            raise InvalidArgument(
                f"steps must be in [1, {len(tiles)}], got {steps}"
            )
        relevance = np.array([scores[t].sum() for t in tiles])
        order = np.argsort(-relevance, kind="stable")
        groups = [tiles[i] for i in order[:steps]]
    elif mode == "topk":
        n = image.n
        k = pixels_per_step if pixels_per_step is not None else max(1, round(n / 28))
        if k < 1:
            raise InvalidArgument("pixels_per_step must be >= 1")
        ranked = np.argsort(-scores, kind="stable")
        groups = [ranked[i : i + k] for i in range(0, n, k)]
    else:
        raise InvalidArgument(f"unknown mode {mode!r}")

    curve = [float(probs[pred])]
    work = image.values.copy()
    for group in groups:
        work[group] = perturb_value
        _, p, _ = forward(clf, work)
        curve.append(float(p[pred]))
    return PerturbationCurve(tuple(curve), mode)


def _tiles(height: int, width: int, side: int) -> list[np.ndarray]:
    """Row-major square tiles; edge tiles shrink when side does not divide."""
    tiles = []
    for r0 in range(0, height, side):
        for c0 in range(0, width, side):
            rr = np.arange(r0, min(r0 + side, height))
            cc = np.arange(c0, min(c0 + side, width))
            tiles.append((rr[:, None] * width + cc[None, :]).ravel())
    return tiles


def mean_aupc(
    clf: MlpClassifier,
    images: list[Heatmap],
    attributions: list,
    labels=None,
    only_correct: bool = True,
    **kwargs,
) -> tuple[float, list[tuple[int, float]]]:
    """Average the curve area over a dataset.

    By default only images the classifier gets right are counted; pass
    ``only_correct=False`` (or no labels) to include everything.
    """
    if len(images) != len(attributions):
        raise DimensionError("one attribution per image required")
    rows = []
    for i, (im, att) in enumerate(zip(images, attributions)):
        if only_correct and labels is not None:
            _, _, pred = forward(clf, im.values)
            if pred != int(labels[i]):
                continue
        rows.append((i, aupc(clf, im, att, **kwargs).aupc))
    if not rows:
        raise InvalidArgument("no images qualified for averaging")
    return float(np.mean([v for _, v in rows])), rows


def jaccard_topk(a, b, k: int) -> float:
    """|top_k(a) and top_k(b)| / |top_k(a) or top_k(b)|."""
    if _dims_of(a) != _dims_of(b):
        raise InvalidArgument("maps must share dimensions")
    sa = _scores_of(a)
    k = int(k)
    if k < 1 or k > sa.size:
        raise InvalidArgument(f"k must be in [1, {sa.size}], got {k}")
    ta = set(top_indices(sa, k).tolist())
    tb = set(top_indices(_scores_of(b), k).tolist())
    return len(ta & tb) / len(ta | tb)


def robustness_iou(
    attribute_fn,
    clf: MlpClassifier,
    image: Heatmap,
    noise_amp: float = 0.02,
    top: int | None = None,
    seed: int = 0,
) -> float:
    """Top-set overlap between the map on the image and the map recomputed
    on the image plus uniform noise (clipped back into [0, 1]).

    ``top`` defaults to the 5000-of-224x224 ratio scaled to this image.
    """
    n = image.n
    if top is None:
        top = max(1, round(n * 5000 / 50176))
    top = int(top)
    if top < 1 or top > n:
        raise InvalidArgument(f"top must be in [1, {n}], got {top}")
    if noise_amp < 0:
        raise InvalidArgument("noise_amp must be >= 0")

    rng = np.random.default_rng(seed)
    noisy_vals = np.clip(
        image.values + rng.uniform(-noise_amp, noise_amp, size=n), 0.0, 1.0
    )
    noisy = Heatmap(image.height, image.width, noisy_vals)

    base_map = attribute_fn(clf, image)
    noisy_map = attribute_fn(clf, noisy)
    sa = set(top_indices(_scores_of(base_map), top).tolist())
    sb = set(top_indices(_scores_of(noisy_map), top).tolist())
    return len(sa & sb) / len(sa | sb)


def format_results_csv(rows) -> str:
    """Line-oriented results: image_id, method, metric, value."""
    out = ["image_id,method,metric,value"]
    for image_id, method, metric, value in rows:
        out.append(f"{image_id},{method},{metric},{value:.10g}")
    return "\n".join(out) + "\n"
