"""The 12 discrete global color-adjustment actions.

Every action scales one property by 5% (x0.95 down, x1.05 up): contrast,
saturation, brightness, or one of the three channel pairs RG / GB / RB.
Action indices 0..11 are a frozen wire encoding used in checkpoints and
trace files.
"""

from dataclasses import dataclass

import numpy as np

_PAIRS = {"RG": (0, 1), "GB": (1, 2), "RB": (0, 2)}


@dataclass(frozen=True)
class EditAction:
    index: int
    name: str
    group: str  # "contrast" | "saturation" | "brightness" | "channels"
    factor: float
    pair: str = ""  # channel pair for group "channels"


ACTIONS: tuple[EditAction, ...] = (
    EditAction(0, "contrast_down", "contrast", 0.95),
    EditAction(1, "contrast_up", "contrast", 1.05),
    EditAction(2, "saturation_down", "saturation", 0.95),
    EditAction(3, "saturation_up", "saturation", 1.05),
    EditAction(4, "brightness_down", "brightness", 0.95),
    EditAction(5, "brightness_up", "brightness", 1.05),
    EditAction(6, "red_green_down", "channels", 0.95, "RG"),
    EditAction(7, "red_green_up", "channels", 1.05, "RG"),
    EditAction(8, "green_blue_down", "channels", 0.95, "GB"),
    EditAction(9, "green_blue_up", "channels", 1.05, "GB"),
    EditAction(10, "red_blue_down", "channels", 0.95, "RB"),
    EditAction(11, "red_blue_up", "channels", 1.05, "RB"),
)

NUM_ACTIONS = len(ACTIONS)


def action_by_index(index: int) -> EditAction:
    if not 0 <= index < NUM_ACTIONS:
        raise ValueError(f"action index out of range: {index}")
    return ACTIONS[index]


def _check_factor(f: float) -> None:
    if f <= 0.0:
        raise ValueError(f"factor must be positive, got {f}")


def adjust_brightness(img: np.ndarray, f: float) -> np.ndarray:
    """Scale all channels by f, clamped to [0, 1]."""
    _check_factor(f)
    return np.clip(img * np.float32(f), 0.0, 1.0).astype(np.float32)


def adjust_contrast(img: np.ndarray, f: float) -> np.ndarray:
    """Scale deviations from the global mean channel value by f."""
    _check_factor(f)
    mu = float(np.mean(img, dtype=np.float64))
    out = mu + (img.astype(np.float64) - mu) * f
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV, H in degrees [0, 360), S and V in [0, 1]."""
    arr = img.astype(np.float64)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    mx = arr.max(axis=-1)
    mn = arr.min(axis=-1)
    c = mx - mn
    safe_c = np.where(c > 0, c, 1.0)
    h = np.select(
        [mx == r, mx == g],
        [((g - b) / safe_c) % 6.0, (b - r) / safe_c + 2.0],
        default=(r - g) / safe_c + 4.0,
    )
    h = np.where(c > 0, h * 60.0, 0.0)
    s = np.where(mx > 0, c / np.where(mx > 0, mx, 1.0), 0.0)
    return np.stack([h, s, mx], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = (h / 60.0) % 6.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - c
    zeros = np.zeros_like(c)
    sextant = np.floor(hp).astype(np.int64) % 6
    r = np.choose(sextant, [c, x, zeros, zeros, x, c])
    g = np.choose(sextant, [x, c, c, x, zeros, zeros])
    b = np.choose(sextant, [zeros, zeros, x, c, c, x])
    return np.stack([r + m, g + m, b + m], axis=-1)


def adjust_saturation(img: np.ndarray, f: float) -> np.ndarray:
    """Scale HSV saturation by f; hue and value are untouched."""
    _check_factor(f)
    hsv = rgb_to_hsv(img)
    hsv[..., 1] = np.clip(hsv[..., 1] * f, 0.0, 1.0)
    return np.clip(hsv_to_rgb(hsv), 0.0, 1.0).astype(np.float32)


def scale_channels(img: np.ndarray, pair: str, f: float) -> np.ndarray:
    """Scale the two channels named by pair ("RG", "GB" or "RB") by f."""
    _check_factor(f)
    if pair not in _PAIRS:
        raise ValueError(f"unknown channel pair: {pair!r}")
    out = img.astype(np.float32).copy()
    for ch in _PAIRS[pair]:
        out[..., ch] = np.clip(out[..., ch] * np.float32(f), 0.0, 1.0)
    return out


def apply_edit(img: np.ndarray, action: EditAction) -> np.ndarray:
    """Apply one action; output has the same shape, channels clamped to [0, 1]."""
    if action.group == "brightness":
        return adjust_brightness(img, action.factor)
    if action.group == "contrast":
        return adjust_contrast(img, action.factor)
    if action.group == "saturation":
        return adjust_saturation(img, action.factor)
    if action.group == "channels":
        return scale_channels(img, action.pair, action.factor)
    raise ValueError(f"unknown action group: {action.group!r}")
