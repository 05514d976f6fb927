"""Colorimetry kernel: sRGB <-> CIELab (D65, 2-degree observer) and the mean
per-pixel Lab distance that drives both the reward and the evaluation metric.

Image convention used throughout the package:

* an RGB image is a float32 ndarray of shape ``(height, width, 3)`` holding
  nonlinear sRGB values in [0, 1], row-major;
* a Lab image has the same shape with L in [0, 100] and a, b in [-128, 127].

Conversions run in float64 internally so the in-gamut round trip stays below
1e-4 per channel even though values are stored as float32.
"""

import numpy as np

from . import _kernels


def as_rgb_image(arr) -> np.ndarray:
    """Validate and normalize an array to the package's RGB image layout."""
    img = np.asarray(arr, dtype=np.float32)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must contain at least one pixel")
    if np.isnan(img).any():
        raise ValueError("image contains NaN values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("channel values must lie in [0, 1]")
    return np.ascontiguousarray(img)


def srgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an sRGB image to CIELab.

    Standard pipeline: IEC gamma expansion (0.04045 knee) -> linear RGB ->
    XYZ (D65) -> Lab.  Pure white maps to (100, 0, 0).
    """
    return _kernels.srgb_to_lab(np.ascontiguousarray(img, dtype=np.float32))


def lab_to_srgb(img: np.ndarray) -> np.ndarray:
    """Inverse of :func:`srgb_to_lab`; out-of-gamut values clamp per channel."""
    return _kernels.lab_to_srgb(np.ascontiguousarray(img, dtype=np.float32))


def mean_lab_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean over pixels of the Euclidean CIELab difference (Delta-E units)."""
    if a.shape != b.shape:
        raise ValueError(f"images are not comparable: shapes {a.shape} vs {b.shape}")
    return _kernels.mean_lab_distance(
        np.ascontiguousarray(a, dtype=np.float32),
        np.ascontiguousarray(b, dtype=np.float32),
    )


def mean_lab_distance_lab(lab_a: np.ndarray, lab_b: np.ndarray) -> float:
    """Same metric for images already converted to Lab (hot-path variant)."""
    if lab_a.shape != lab_b.shape:
        raise ValueError(f"images are not comparable: shapes {lab_a.shape} vs {lab_b.shape}")
    return _kernels.mean_lab_distance_lab(
        np.ascontiguousarray(lab_a, dtype=np.float32),
        np.ascontiguousarray(lab_b, dtype=np.float32),
    )


def luminance(img: np.ndarray) -> np.ndarray:
    """Per-pixel Rec.601 luma (0.299 R + 0.587 G + 0.114 B), shape (H, W)."""
    return _kernels.luminance(np.ascontiguousarray(img, dtype=np.float32))


def kernel_backend() -> str:
    """Name of the active kernel backend ("cython" or "numpy")."""
    return _kernels.BACKEND
