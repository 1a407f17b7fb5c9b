"""Binary file formats, PGM rendering, and run configuration.

All formats are little-endian with 6-byte magics so they are trivially
parseable from any language:

  heatmap    "SEAHM1"  u32 height, u32 width, f32 values row-major
  scoring net "SEADF1" u32 weight-layer count L, (L+1) u32 layer dims,
             u8 activation (0=sqrt, 1=log1p), then each layer's weight
             matrix as f32 row-major with shape (dims[i+1], dims[i])
  classifier "SEACL1"  u32 layer count L, (L+1) u32 dims, u8 activation
             (0=tanh, 1=softplus), then per layer: f32 weights row-major
             (dims[i+1], dims[i]) followed by f32 biases (dims[i+1])

Values are stored as float32; a file read into memory and written back is
byte-identical. Heatmap reads fall back to CSV (rows of comma-separated
decimals). Writes go to a temp file first and are renamed into place.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import struct
import tempfile

import numpy as np

from .errors import DomainError, FormatError, InvalidArgument
from .classifier import HIDDEN_ACTIVATIONS, MlpClassifier
from .dsf import ACTIVATIONS, DsfArchitecture, DsfNetwork
from .resample import Heatmap
from .trainer import TrainConfig

log = logging.getLogger("seann")

HEATMAP_MAGIC = b"SEAHM1"
DSF_MAGIC = b"SEADF1"
CLASSIFIER_MAGIC = b"SEACL1"

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def atomic_write(path: str, payload: bytes):
    """Write to a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".seann-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _take(buf: bytes, offset: int, count: int, what: str) -> tuple[bytes, int]:
    if offset + count > len(buf):
        raise FormatError(f"truncated file: expected {what} at byte {offset}")
    return buf[offset : offset + count], offset + count


# -- heatmaps ------------------------------------------------------------


def heatmap_bytes(h: Heatmap) -> bytes:
    head = HEATMAP_MAGIC + struct.pack("<II", h.height, h.width)
    return head + h.values.astype("<f4").tobytes()


def write_heatmap(path: str, h: Heatmap):
    atomic_write(path, heatmap_bytes(h))


def read_heatmap(path: str) -> Heatmap:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:6] == HEATMAP_MAGIC:
        raw, off = _take(buf, 6, 8, "dimensions")
        height, width = struct.unpack("<II", raw)
        if height < 1 or width < 1:
            raise FormatError(f"bad dimensions {height}x{width}")
        raw, off = _take(buf, off, 4 * height * width, "pixel data")
        if off != len(buf):
            raise FormatError(f"{len(buf) - off} trailing bytes")
        values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        return Heatmap(height, width, values)  # range errors -> DomainError
    return _read_heatmap_csv(buf)


def _read_heatmap_csv(buf: bytes) -> Heatmap:
    try:
        text = buf.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("neither a heatmap file nor CSV text") from exc
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"bad CSV row {line!r}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise FormatError("CSV rows missing or unequal in length")
    return Heatmap(len(rows), len(rows[0]), np.asarray(rows).ravel())


# -- scoring networks ----------------------------------------------------


def dsf_bytes(net: DsfNetwork) -> bytes:
    dims = net.arch.layer_dims
    parts = [
        DSF_MAGIC,
        struct.pack("<I", len(dims) - 1),
        struct.pack(f"<{len(dims)}I", *dims),
        struct.pack("<B", ACTIVATIONS.index(net.arch.activation)),
    ]
    parts += [w.astype("<f4").tobytes() for w in net.weights]
    return b"".join(parts)


def write_dsf(path: str, net: DsfNetwork):
    atomic_write(path, dsf_bytes(net))


def read_dsf(path: str) -> DsfNetwork:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:6] != DSF_MAGIC:
        raise FormatError(f"bad magic {buf[:6]!r}, expected {DSF_MAGIC!r}")
    raw, off = _take(buf, 6, 4, "layer count")
    (layers,) = struct.unpack("<I", raw)
    if layers < 1 or layers > 64:
        raise FormatError(f"implausible layer count {layers}")
    raw, off = _take(buf, off, 4 * (layers + 1), "layer dims")
    dims = struct.unpack(f"<{layers + 1}I", raw)
    raw, off = _take(buf, off, 1, "activation tag")
    tag = raw[0]
    if tag >= len(ACTIVATIONS):
        raise FormatError(f"unknown activation tag {tag}")
    try:
        arch = DsfArchitecture(dims, ACTIVATIONS[tag])
    except InvalidArgument as exc:
        raise FormatError(str(exc)) from exc
    weights = []
    for i in range(layers):
        count = dims[i + 1] * dims[i]
        raw, off = _take(buf, off, 4 * count, f"layer {i} weights")
        w = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        weights.append(w.reshape(dims[i + 1], dims[i]))
    if off != len(buf):
        raise FormatError(f"{len(buf) - off} trailing bytes")
    try:
        return DsfNetwork(arch, weights)
    except DomainError as exc:
        raise FormatError(str(exc)) from exc


# -- classifiers ---------------------------------------------------------


def classifier_bytes(clf: MlpClassifier) -> bytes:
    dims = [clf.input_dim] + [w.shape[0] for w in clf.weights]
    parts = [
        CLASSIFIER_MAGIC,
        struct.pack("<I", len(clf.weights)),
        struct.pack(f"<{len(dims)}I", *dims),
        struct.pack("<B", HIDDEN_ACTIVATIONS.index(clf.activation)),
    ]
    for w, b in zip(clf.weights, clf.biases):
        parts.append(w.astype("<f4").tobytes())
        parts.append(b.astype("<f4").tobytes())
    return b"".join(parts)


def write_classifier(path: str, clf: MlpClassifier):
    atomic_write(path, classifier_bytes(clf))


def read_classifier(path: str) -> MlpClassifier:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:6] != CLASSIFIER_MAGIC:
        raise FormatError(f"bad magic {buf[:6]!r}, expected {CLASSIFIER_MAGIC!r}")
    raw, off = _take(buf, 6, 4, "layer count")
    (layers,) = struct.unpack("<I", raw)
    if layers < 1 or layers > 64:
        raise FormatError(f"implausible layer count {layers}")
    raw, off = _take(buf, off, 4 * (layers + 1), "layer dims")
    dims = struct.unpack(f"<{layers + 1}I", raw)
    if any(d < 1 for d in dims):
        raise FormatError(f"bad layer dims {dims}")
    raw, off = _take(buf, off, 1, "activation tag")
    tag = raw[0]
    if tag >= len(HIDDEN_ACTIVATIONS):
        raise FormatError(f"unknown activation tag {tag}")
    weights, biases = [], []
    for i in range(layers):
        count = dims[i + 1] * dims[i]
        raw, off = _take(buf, off, 4 * count, f"layer {i} weights")
        weights.append(
            np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(dims[i + 1], dims[i])
        )
        raw, off = _take(buf, off, 4 * dims[i + 1], f"layer {i} biases")
        biases.append(np.frombuffer(raw, dtype="<f4").astype(np.float64))
    if off != len(buf):
        raise FormatError(f"{len(buf) - off} trailing bytes")
    return MlpClassifier(weights, biases, HIDDEN_ACTIVATIONS[tag])


# -- IDX image/label files ------------------------------------------------


def read_idx_images(path: str) -> list[Heatmap]:
    """IDX image file (big-endian header, u8 pixels scaled into [0, 1])."""
    with open(path, "rb") as fh:
        buf = fh.read()
    raw, off = _take(buf, 0, 16, "IDX image header")
    magic, count, height, width = struct.unpack(">IIII", raw)
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(f"bad IDX image magic 0x{magic:08x}")
    raw, off = _take(buf, off, count * height * width, "pixel data")
    pixels = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
    pixels = pixels.reshape(count, height * width)
    return [Heatmap(height, width, row) for row in pixels]


def read_idx_labels(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    raw, off = _take(buf, 0, 8, "IDX label header")
    magic, count = struct.unpack(">II", raw)
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(f"bad IDX label magic 0x{magic:08x}")
    raw, off = _take(buf, off, count, "label data")
    return np.frombuffer(raw, dtype=np.uint8).astype(np.intp)


# -- rendering -----------------------------------------------------------


def _byte_levels(values: np.ndarray) -> np.ndarray:
    return np.floor(255.0 * values + 0.5).astype(np.uint8)


def render_pgm(map_like, path: str, overlay: Heatmap | None = None):
    """Render to P5 PGM (maxval 255, round-half-up), or, with an overlay
    base image, to P6 PPM blending the base grayscale with a red heat
    channel at alpha 0.5."""
    values = (
        np.asarray(map_like.normalized)
        if hasattr(map_like, "normalized")
        else np.asarray(map_like.values)
    )
    h, w = int(map_like.height), int(map_like.width)
    if overlay is None:
        head = f"P5\n{w} {h}\n255\n".encode()
        atomic_write(path, head + _byte_levels(values).tobytes())
        return
    if (overlay.height, overlay.width) != (h, w):
        raise InvalidArgument("overlay dimensions must match the map")
    base = overlay.values
    red = _byte_levels(0.5 * base + 0.5 * values)
    gray = _byte_levels(0.5 * base)
    rgb = np.stack([red, gray, gray], axis=1)
    head = f"P6\n{w} {h}\n255\n".encode()
    atomic_write(path, head + rgb.tobytes())


# -- run configuration ----------------------------------------------------

PIPELINE_KEYS = {
    "methods": ["vg", "ig", "sg"],
    "grid": 28,
    "hidden_dims": None,
    "ig_steps": 50,
    "sg_samples": 25,
    "sg_sigma": None,
    "render_palette": "gray",
}


@dataclasses.dataclass
class RunConfig:
    """Training hyperparameters plus pipeline options, loaded from JSON."""

    train: TrainConfig
    methods: list[str]
    grid: int
    hidden_dims: tuple[int, ...] | None
    ig_steps: int
    sg_samples: int
    sg_sigma: float | None
    render_palette: str


def load_run_config(path: str | None) -> RunConfig:
    """Parse a JSON config; unknown keys are rejected, missing keys take
    defaults with a logged notice."""
    doc = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise FormatError("config must be a JSON object")
    return run_config_from_dict(doc)


def run_config_from_dict(doc: dict) -> RunConfig:
    train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
    known = train_fields | set(PIPELINE_KEYS)
    unknown = set(doc) - known
    if unknown:
        raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
    missing = sorted(known - set(doc))
    if missing:
        log.info("config: using defaults for %s", ", ".join(missing))

    train_kwargs = {k: doc[k] for k in doc if k in train_fields}
    if "thresholds" in train_kwargs:
        train_kwargs["thresholds"] = tuple(train_kwargs["thresholds"])
    cfg = TrainConfig(**train_kwargs)

    opts = {k: doc.get(k, v) for k, v in PIPELINE_KEYS.items()}
    if opts["render_palette"] not in ("gray", "overlay"):
        raise InvalidArgument(f"unknown render palette {opts['render_palette']!r}")
    if opts["hidden_dims"] is not None:
        opts["hidden_dims"] = tuple(int(d) for d in opts["hidden_dims"])
    if not isinstance(opts["methods"], list) or not all(
        isinstance(m, str) for m in opts["methods"]
    ):
        raise InvalidArgument("config key 'methods' must be a list of strings")
    return RunConfig(train=cfg, **opts)
