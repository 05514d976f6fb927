"""Pure-numpy implementations of the per-pixel hot kernels.

Mirrors the compiled extension in ``_cyext.pyx``; the package selects one of
the two at import time.  Inputs/outputs are float32, intermediate math runs
in float64 so the sRGB/Lab round trip stays below 1e-4 per channel.
"""

import numpy as np

# D65 white point, 2-degree observer.
_WHITE = np.array([0.95047, 1.0, 1.08883])

_RGB2XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)

_XYZ2RGB = np.array(
    [
        [3.2404542, -1.5371385, -0.4985314],
        [-0.9692660, 1.8760108, 0.0415560],
        [0.0556434, -0.2040259, 1.0572252],
    ]
)

_DELTA = 6.0 / 29.0
_DELTA3 = _DELTA**3
_F_SLOPE = 1.0 / (3.0 * _DELTA**2)


def _lab_from_rgb64(rgb64):
    lin = np.where(rgb64 <= 0.04045, rgb64 / 12.92, ((rgb64 + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB2XYZ.T
    t = xyz / _WHITE
    f = np.where(t > _DELTA3, np.cbrt(t), t * _F_SLOPE + 4.0 / 29.0)
    lab = np.empty_like(rgb64)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def srgb_to_lab(rgb):
    return _lab_from_rgb64(rgb.astype(np.float64)).astype(np.float32)


def lab_to_srgb(lab):
    lab64 = lab.astype(np.float64)
    fy = (lab64[..., 0] + 16.0) / 116.0
    fx = fy + lab64[..., 1] / 500.0
    fz = fy - lab64[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f > _DELTA, f**3, (f - 4.0 / 29.0) / _F_SLOPE)
    xyz = t * _WHITE
    lin = xyz @ _XYZ2RGB.T
    rgb = np.where(
        lin <= 0.0031308, 12.92 * lin, 1.055 * np.power(np.maximum(lin, 0.0), 1.0 / 2.4) - 0.055
    )
    return np.clip(rgb, 0.0, 1.0).astype(np.float32)


def mean_lab_distance(rgb_a, rgb_b):
    lab_a = _lab_from_rgb64(rgb_a.astype(np.float64))
    lab_b = _lab_from_rgb64(rgb_b.astype(np.float64))
    diff = lab_a - lab_b
    return float(np.mean(np.sqrt(np.sum(diff * diff, axis=-1))))


def mean_lab_distance_lab(lab_a, lab_b):
    diff = lab_a.astype(np.float64) - lab_b.astype(np.float64)
    return float(np.mean(np.sqrt(np.sum(diff * diff, axis=-1))))


def lab_histogram(lab):
    lab64 = lab.reshape(-1, 3).astype(np.float64)
    i_l = np.clip(np.floor(lab64[:, 0] * 0.2), 0, 19).astype(np.int64)
    i_a = np.clip(np.floor((lab64[:, 1] + 128.0) * (20.0 / 255.0)), 0, 19).astype(np.int64)
    i_b = np.clip(np.floor((lab64[:, 2] + 128.0) * (20.0 / 255.0)), 0, 19).astype(np.int64)
    idx = i_l * 400 + i_a * 20 + i_b
    counts = np.bincount(idx, minlength=8000).astype(np.float64)
    return (counts / lab64.shape[0]).astype(np.float32)


def luminance(rgb):
    rgb64 = rgb.astype(np.float64)
    y = 0.299 * rgb64[..., 0] + 0.587 * rgb64[..., 1] + 0.114 * rgb64[..., 2]
    return y.astype(np.float32)


def adam_step(p, m, v, g, lr, corr1, corr2, beta1, beta2, eps):
    """One Adam update over flat float32 views, float64 math, in place.

    The compiled twin performs the identical per-element double-precision
    expression, so both backends produce bit-equal parameters.
    """
    g64 = g.astype(np.float64)
    m64 = beta1 * m.astype(np.float64) + (1.0 - beta1) * g64
    v64 = beta2 * v.astype(np.float64) + (1.0 - beta2) * (g64 * g64)
    m[:] = m64
    v[:] = v64
    p[:] = p.astype(np.float64) - lr * (m64 / corr1) / (np.sqrt(v64 / corr2) + eps)
