"""Gradient-based attribution baselines computed against an MlpClassifier.

All methods attribute the pre-softmax logit of a chosen class and return a
raw real vector; ``normalize_heatmap`` maps raw scores into a [0, 1]
Heatmap for downstream scoring.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, InvalidArgument, NumericalError
from .classifier import MlpClassifier
from .resample import Heatmap


def input_gradient(clf: MlpClassifier, x: np.ndarray, c: int) -> np.ndarray:
    """Gradient of the class-c logit with respect to every input pixel."""
    x = clf._check_input(x, batch=False)
    return clf.class_gradient_batch(x[None, :], c)[0]


def integrated_gradients(
    clf: MlpClassifier,
    x: np.ndarray,
    c: int,
    baseline: np.ndarray | None = None,
    steps: int = 50,
) -> np.ndarray:
    """Path integral of gradients from a baseline to the input, with a
    midpoint Riemann sum: (x - x') * mean_t grad F_c(x' + a_t (x - x'))."""
    x = clf._check_input(x, batch=False)
    if baseline is None:
        baseline = np.zeros_like(x)
    baseline = clf._check_input(baseline, batch=False)
    if steps < 1:
        raise InvalidArgument("steps must be >= 1")
    alphas = (np.arange(steps) + 0.5) / steps
    points = baseline[None, :] + alphas[:, None] * (x - baseline)[None, :]
    grads = clf.class_gradient_batch(points, c)
    return (x - baseline) * grads.mean(axis=0)


def smooth_integrated_gradients(
    clf: MlpClassifier,
    x: np.ndarray,
    c: int,
    samples: int = 25,
    sigma: float | None = None,
    seed: int = 0,
    steps: int = 50,
) -> np.ndarray:
    """Mean of integrated gradients over inputs perturbed with Gaussian
    noise of scale sigma (default: 10% of the input's value range).

    sigma == 0 degenerates to plain integrated gradients and returns its
    result bit-for-bit.
    """
    x = clf._check_input(x, batch=False)
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    if sigma is None:
        sigma = 0.1 * float(x.max() - x.min())
    if sigma < 0:
        raise InvalidArgument("sigma must be >= 0")
    if sigma == 0.0:
        return integrated_gradients(clf, x, c, steps=steps)
    rng = np.random.default_rng(seed)
    total = np.zeros_like(x)
    for _ in range(samples):
        noisy = x + rng.normal(0.0, sigma, size=x.shape)
        total += integrated_gradients(clf, noisy, c, steps=steps)
    return total / samples


def input_times_gradient(clf: MlpClassifier, x: np.ndarray, c: int) -> np.ndarray:
    """Element-wise product of the input and the class-logit gradient."""
    x = clf._check_input(x, batch=False)
    return x * input_gradient(clf, x, c)


def normalize_heatmap(
    raw: np.ndarray, height: int, width: int, signed: bool = False
) -> Heatmap:
    """Map raw scores to a [0, 1] Heatmap.

    Default: absolute value then min-max scaling (preserves the magnitude
    ranking of signed scores). ``signed=True`` shift-scales without the
    absolute value. Constant maps become all-zero.
    """
    raw = np.asarray(raw, dtype=np.float64).ravel()
    if raw.shape != (int(height) * int(width),):
        raise DimensionError(
            f"expected {int(height) * int(width)} values, got {raw.shape[0]}"
        )
    if not np.all(np.isfinite(raw)):
        raise NumericalError("raw attribution scores must be finite")
    base = raw if signed else np.abs(raw)
    lo, hi = float(base.min()), float(base.max())
    if hi == lo:
        return Heatmap(height, width, np.zeros_like(base))
    scaled = (base - lo) / (hi - lo)
    return Heatmap(height, width, np.clip(scaled, 0.0, 1.0))


BASELINE_METHODS = ("vg", "ig", "sg", "ixg")


def baseline_heatmap(
    method: str,
    clf: MlpClassifier,
    image: Heatmap,
    c: int | None = None,
    ig_steps: int = 50,
    sg_samples: int = 25,
    sg_sigma: float | None = None,
    seed: int = 0,
) -> Heatmap:
    """Run one named baseline on an image and normalize the result.

    ``c`` defaults to the classifier's predicted class for the image.
    """
    from .classifier import forward

    if c is None:
        _, _, c = forward(clf, image.values)
    x = image.values
    if method == "vg":
        raw = input_gradient(clf, x, c)
    elif method == "ig":
        raw = integrated_gradients(clf, x, c, steps=ig_steps)
    elif method == "sg":
        raw = smooth_integrated_gradients(
            clf, x, c, samples=sg_samples, sigma=sg_sigma, seed=seed, steps=ig_steps
        )
    elif method == "ixg":
        raw = input_times_gradient(clf, x, c)
    else:
        raise InvalidArgument(f"unknown baseline method {method!r}")
    return normalize_heatmap(raw, image.height, image.width)
