"""State features: the 8000-bin CIELab histogram plus a context feature.

The state the agent sees is ``concat(context, histogram)``.  The context is
either the built-in tiny-image feature (16x16 bilinear downsample, 768-d,
recomputed every step) or an externally exported vector loaded from a CTXF
file and held fixed for the episode.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels, color

HISTOGRAM_BINS = 8000
TINY_SIDE = 16
TINY_DIM = TINY_SIDE * TINY_SIDE * 3

CTXF_MAGIC = b"CTXF"
CTXF_VERSION = 1


@dataclass(frozen=True)
class ContextFeature:
    values: np.ndarray  # float32, 1-D
    source: str  # "tiny" | "external"

    @property
    def dim(self) -> int:
        return int(self.values.size)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with pixel-center alignment (identity when sizes match)."""
    h, w = img.shape[:2]
    arr = img.astype(np.float64)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    top = arr[y0][:, x0] * (1 - wx) + arr[y0][:, x1] * wx
    bot = arr[y1][:, x0] * (1 - wx) + arr[y1][:, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def working_copy(img: np.ndarray, max_side: int = 256) -> np.ndarray:
    """Downsample so max(height, width) <= max_side; identity if already small."""
    h, w = img.shape[:2]
    side = max(h, w)
    if side <= max_side:
        return img
    scale = max_side / side
    return resize_bilinear(img, max(1, round(h * scale)), max(1, round(w * scale)))


def lab_histogram(img: np.ndarray) -> np.ndarray:
    """Normalized 20x20x20 CIELab histogram, flattened to 8000 bins.

    L bins linearly over [0, 100], a and b over [-128, 127]; boundary values
    fall into the last bin.  Bin index = iL*400 + ia*20 + ib.
    """
    return _kernels.lab_histogram(color.srgb_to_lab(img))


def lab_histogram_from_lab(lab: np.ndarray) -> np.ndarray:
    """Histogram for an image already in Lab (hot-path variant)."""
    return _kernels.lab_histogram(np.ascontiguousarray(lab, dtype=np.float32))


def tiny_context(img: np.ndarray) -> ContextFeature:
    """768-d tiny-image feature: 16x16 bilinear downsample, flattened."""
    small = resize_bilinear(img, TINY_SIDE, TINY_SIDE)
    return ContextFeature(small.reshape(-1).astype(np.float32), "tiny")


def write_context_feature(path, values) -> None:
    """Write a CTXF v1 file: magic, u32 version, u32 dim, dim little-endian f32."""
    v = np.ascontiguousarray(np.asarray(values).ravel(), dtype="<f4")
    if v.size == 0:
        raise ValueError("context feature must not be empty")
    if not np.isfinite(v).all():
        raise ValueError("context feature values must be finite")
    with open(path, "wb") as fh:
        fh.write(CTXF_MAGIC)
        fh.write(struct.pack("<II", CTXF_VERSION, v.size))
        fh.write(v.tobytes())


def load_context_feature(path) -> ContextFeature:
    """Parse a CTXF v1 file; raises ValueError naming the offending field."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise ValueError(f"{path}: header shorter than 12 bytes")
    if data[:4] != CTXF_MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    version, dim = struct.unpack("<II", data[4:12])
    if version != CTXF_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise ValueError(f"{path}: dim is zero")
    payload = data[12:]
    if len(payload) < 4 * dim:
        raise ValueError(f"{path}: payload shorter than dim")
    if len(payload) > 4 * dim:
        raise ValueError(f"{path}: payload longer than dim")
    values = np.frombuffer(payload, dtype="<f4", count=dim).copy()
    if not np.isfinite(values).all():
        raise ValueError(f"{path}: payload contains non-finite values")
    return ContextFeature(values, "external")


def build_state(ctx: ContextFeature, histogram: np.ndarray) -> np.ndarray:
    """Concatenate context then histogram into the agent's state vector."""
    hist = np.asarray(histogram, dtype=np.float32).ravel()
    if hist.size != HISTOGRAM_BINS:
        raise ValueError(f"histogram must have {HISTOGRAM_BINS} bins, got {hist.size}")
    return np.concatenate([ctx.values.astype(np.float32), hist])


def state_dim(context_dim: int) -> int:
    return context_dim + HISTOGRAM_BINS
