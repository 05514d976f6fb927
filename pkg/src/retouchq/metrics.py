"""Evaluation metrics: mean CIELab error and single-scale SSIM.

SSIM is computed on Rec.601 luminance with an 11x11 Gaussian window
(sigma 1.5), stability constants K1=0.01 / K2=0.03 at dynamic range 1.0,
and only fully-valid window positions (no padding).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import color

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DYNAMIC_RANGE = 1.0


def mean_l2_error(img: np.ndarray, reference: np.ndarray) -> float:
    """Mean per-pixel Euclidean CIELab distance between two RGB images."""
    return color.mean_lab_distance(img, reference)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k /= k.sum()
    return np.outer(k, k)


def _to_luminance(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim == 3:
        return color.luminance(arr).astype(np.float64)
    if arr.ndim == 2:
        return arr.astype(np.float64)
    raise ValueError(f"expected an RGB or grayscale image, got shape {arr.shape}")


def ssim(img: np.ndarray, reference: np.ndarray) -> float:
    """Mean SSIM over all valid window positions; 1.0 for identical images."""
    x = _to_luminance(img)
    y = _to_luminance(reference)
    if x.shape != y.shape:
        raise ValueError(
            f"images are not comparable: shapes {x.shape} and {y.shape} differ"
        )
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(
            f"image {x.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    window = _gaussian_window()
    wx = sliding_window_view(x, (SSIM_WINDOW, SSIM_WINDOW))
    wy = sliding_window_view(y, (SSIM_WINDOW, SSIM_WINDOW))
    mu_x = np.einsum("ijkl,kl->ij", wx, window)
    mu_y = np.einsum("ijkl,kl->ij", wy, window)
    xx = np.einsum("ijkl,kl->ij", wx * wx, window)
    yy = np.einsum("ijkl,kl->ij", wy * wy, window)
    xy = np.einsum("ijkl,kl->ij", wx * wy, window)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y

    c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))
