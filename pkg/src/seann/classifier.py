"""A small differentiable classifier with manual forward/backward passes,
plus the synthetic planted-patch dataset used for desk-scale evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, InvalidArgument, NumericalError
from .resample import Heatmap

HIDDEN_ACTIVATIONS = ("tanh", "softplus")


def _hidden_act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(z)
    # softplus, numerically stable
    return np.logaddexp(0.0, z)


def _hidden_act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return 1.0 / (1.0 + np.exp(-z))


class MlpClassifier:
    """Fully connected classifier; weights[i] maps layer i to i+1 and has
    shape (dims[i+1], dims[i]); every layer has a bias."""

    def __init__(
        self,
        weights: list[np.ndarray],
        biases: list[np.ndarray],
        activation: str = "tanh",
    ):
        if activation not in HIDDEN_ACTIVATIONS:
            raise InvalidArgument(
                f"activation must be one of {HIDDEN_ACTIVATIONS}, got {activation!r}"
            )
        if len(weights) != len(biases) or not weights:
            raise DimensionError("need equally many weight and bias arrays")
        self.weights = []
        self.biases = []
        for i, (w, b) in enumerate(zip(weights, biases)):
            w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
            b = np.ascontiguousarray(np.asarray(b, dtype=np.float64))
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimensionError(f"layer {i}: weight {w.shape} / bias {b.shape}")
            if i > 0 and w.shape[1] != self.weights[-1].shape[0]:
                raise DimensionError(f"layer {i}: input dim mismatch")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DomainError(f"layer {i}: non-finite parameters")
            self.weights.append(w)
            self.biases.append(b)
        self.activation = activation
        self.train_accuracy: float | None = None

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[0]

    @classmethod
    def init_random(
        cls,
        layer_dims: list[int],
        seed: int,
        activation: str = "tanh",
    ) -> "MlpClassifier":
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise InvalidArgument(f"bad layer dims {layer_dims}")
        rng = np.random.default_rng(seed)
        ws, bs = [], []
        for din, dout in zip(layer_dims[:-1], layer_dims[1:]):
            ws.append(rng.normal(0.0, np.sqrt(2.0 / din), size=(dout, din)))
            bs.append(np.zeros(dout))
        return cls(ws, bs, activation)

    def _check_input(self, x: np.ndarray, batch: bool) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        want_ndim = 2 if batch else 1
        if x.ndim != want_ndim or x.shape[-1] != self.input_dim:
            raise DimensionError(
                f"expected input with last dim {self.input_dim}, got shape {x.shape}"
            )
        return x

    def logits_batch(self, x: np.ndarray) -> np.ndarray:
        h = self._check_input(x, batch=True)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if i != last:
                h = _hidden_act(h, self.activation)
        return h

    def class_gradient_batch(self, x: np.ndarray, c: int) -> np.ndarray:
        """d logit_c / d input for every batch row, by backpropagation."""
        x = self._check_input(x, batch=True)
        c = int(c)
        if c < 0 or c >= self.num_classes:
            raise DimensionError(f"class {c} outside [0, {self.num_classes})")
        last = len(self.weights) - 1
        pre = []
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            if i != last:
                h = _hidden_act(z, self.activation)
        g = self.weights[last][c][None, :] * np.ones((x.shape[0], 1))
        for i in range(last - 1, -1, -1):
            g = g * _hidden_act_grad(pre[i], self.activation)
            g = g @ self.weights[i]
        return g


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(clf: MlpClassifier, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """(logits, softmax probabilities, predicted class) for one input.
    Prediction ties break to the lowest class index."""
    x = clf._check_input(x, batch=False)
    logits = clf.logits_batch(x[None, :])[0]
    probs = softmax(logits)
    return logits, probs, int(np.argmax(logits))


@dataclass
class Dataset:
    """Images with labels; ``planted_masks[c]`` optionally records the
    ground-truth discriminative pixels of class c (synthetic data only)."""

    images: list[Heatmap]
    labels: np.ndarray
    planted_masks: list[frozenset] | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.intp)
        if len(self.images) != self.labels.shape[0]:
            raise DimensionError("one label per image required")

    def __len__(self) -> int:
        return len(self.images)

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def as_matrix(self) -> np.ndarray:
        return np.stack([im.values for im in self.images])


def train_classifier(
    dataset: Dataset,
    epochs: int = 30,
    lr: float = 0.05,
    seed: int = 0,
    hidden_dims: tuple[int, ...] = (32,),
    activation: str = "tanh",
    batch_size: int = 32,
) -> MlpClassifier:
    """Cross-entropy minibatch SGD with manual backpropagation.

    Deterministic for a fixed seed; records training accuracy on the
    returned classifier. ``epochs == 0`` returns the freshly initialized
    model untouched.
    """
    if not dataset.images:
        raise InvalidArgument("dataset is empty")
    if epochs < 0:
        raise InvalidArgument("epochs must be >= 0")
    n_in = dataset.images[0].n
    dims = [n_in, *hidden_dims, dataset.num_classes]
    clf = MlpClassifier.init_random(dims, seed=seed, activation=activation)
    x_all = dataset.as_matrix()
    y_all = dataset.labels
    rng = np.random.default_rng(seed + 1)
    last = len(clf.weights) - 1

    for _ in range(epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            xb, yb = x_all[idx], y_all[idx]

            pre, post = [], [xb]
            h = xb
            for i, (w, b) in enumerate(zip(clf.weights, clf.biases)):
                z = h @ w.T + b
                pre.append(z)
                if i != last:
                    h = _hidden_act(z, clf.activation)
                    post.append(h)
            probs = softmax(pre[last])
            if not np.all(np.isfinite(probs)):
                raise NumericalError("training diverged: non-finite probabilities")

            g = probs.copy()
            g[np.arange(len(idx)), yb] -= 1.0
            g /= len(idx)
            for i in range(last, -1, -1):
                gw = g.T @ post[i]
                gb = g.sum(axis=0)
                if i > 0:
                    g = (g @ clf.weights[i]) * _hidden_act_grad(
                        pre[i - 1], clf.activation
                    )
                clf.weights[i] -= lr * gw
                clf.biases[i] -= lr * gb

    preds = np.argmax(clf.logits_batch(x_all), axis=1)
    clf.train_accuracy = float(np.mean(preds == y_all))
    return clf


def make_planted_dataset(
    n_images: int,
    side: int,
    patch_side: int,
    seed: int,
    patch_value: float = 0.6,
    noise_level: float = 0.4,
) -> Dataset:
    """Two classes told apart solely by a bright square patch at a
    class-specific fixed location over uniform background noise.

    ``patch_value`` is added on top of the background inside the patch
    (clipped to [0, 1]); 0 produces indistinguishable classes.
    ``planted_masks`` records each class's patch pixels.
    """
    if n_images < 1:
        raise InvalidArgument("need at least one image")
    if patch_side < 1 or patch_side >= side:
        raise InvalidArgument("need 1 <= patch_side < side")
    if not (0.0 <= patch_value <= 1.0) or not (0.0 <= noise_level <= 1.0):
        raise InvalidArgument("patch_value and noise_level must lie in [0, 1]")

    def _anchors(offset):
        return [(offset, offset), (side - offset - patch_side,) * 2]

    def _disjoint(pair):
        return pair[1][0] >= pair[0][0] + patch_side

    anchors = _anchors(side // 4)  # patch centered in opposite quadrants
    if not _disjoint(anchors):
        anchors = _anchors(max(1, side // 8))  # larger patches sit nearer corners
    if not _disjoint(anchors):
        raise InvalidArgument("side too small for disjoint class patches")
    masks = []
    for r0, c0 in anchors:
        pix = frozenset(
            (r0 + dr) * side + (c0 + dc)
            for dr in range(patch_side)
            for dc in range(patch_side)
        )
        masks.append(pix)

    rng = np.random.default_rng(seed)
    images, labels = [], []
    for i in range(n_images):
        label = i % 2
        img = rng.uniform(0.0, noise_level, size=(side, side))
        r0, c0 = anchors[label]
        img[r0 : r0 + patch_side, c0 : c0 + patch_side] += patch_value
        images.append(Heatmap(side, side, np.clip(img, 0.0, 1.0).ravel()))
        labels.append(label)
    return Dataset(images, np.asarray(labels), planted_masks=masks)
