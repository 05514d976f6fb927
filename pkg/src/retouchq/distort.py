"""Distort-and-recover pair synthesis.

Reference images are corrupted by randomly sampled global operations until
the mean CIELab distance to the reference lands in a target band (default
10..20).  The distortion op family deliberately differs from the agent's
action set: brightness/contrast/saturation applied globally or weighted
toward highlight/shadow pixels through a sigmoid soft mask, plus C/M/Y/R/G/B
channel pushes weighted toward pixels where that channel component is high.
"""

from dataclasses import dataclass, field

import numpy as np

from . import actions, color

SIGMOID_STEEPNESS = 10.0
PIVOT_HIGHLIGHT = 0.6
PIVOT_SHADOW = 0.4

# Sampled factors stay clear of 1.0; near-identity ops stall the distance walk.
FACTOR_RANGES = ((0.85, 0.97), (1.03, 1.15))

# C/M/Y pushes scale the two channels that mix to that secondary color;
# the soft mask is computed on the matching channel-intensity map.
_PUSH_CHANNELS = {
    "r": (0,),
    "g": (1,),
    "b": (2,),
    "c": (1, 2),
    "m": (0, 2),
    "y": (0, 1),
}

OP_KINDS_ALL: tuple[str, ...] = tuple(
    f"{fam}_{region}"
    for fam in ("brightness", "contrast", "saturation")
    for region in ("global", "highlight", "shadow")
) + tuple(f"push_{ch}" for ch in "cmyrgb")

OP_POOL_GLOBAL_BC: tuple[str, ...] = ("brightness_global", "contrast_global")
OP_POOL_REGIONAL_BC: tuple[str, ...] = (
    "brightness_highlight",
    "brightness_shadow",
    "contrast_highlight",
    "contrast_shadow",
)

OP_POOLS = {
    "all": OP_KINDS_ALL,
    "global-bc": OP_POOL_GLOBAL_BC,
    "regional-bc": OP_POOL_REGIONAL_BC,
}


@dataclass(frozen=True)
class DistortOp:
    kind: str
    factor: float


@dataclass
class TrainingPair:
    distorted: np.ndarray
    reference: np.ndarray
    achieved_distance: float
    op_log: list[DistortOp] = field(default_factory=list)
    stem: str = ""


class SynthesisError(RuntimeError):
    """Raised when an image cannot be distorted into the distance band."""


def _sigmoid_weights(values: np.ndarray, region: str, steepness: float, pivot: float):
    if region == "highlight":
        return 1.0 / (1.0 + np.exp(-steepness * (values.astype(np.float64) - pivot)))
    if region == "shadow":
        return 1.0 / (1.0 + np.exp(-steepness * (pivot - values.astype(np.float64))))
    raise ValueError(f"unknown region: {region!r}")


def soft_mask(
    img: np.ndarray,
    region: str,
    steepness: float = SIGMOID_STEEPNESS,
    pivot: float | None = None,
) -> np.ndarray:
    """Per-pixel weight in [0, 1], a sigmoid of luminance around the pivot."""
    if pivot is None:
        pivot = PIVOT_HIGHLIGHT if region == "highlight" else PIVOT_SHADOW
    return _sigmoid_weights(color.luminance(img), region, steepness, pivot).astype(np.float32)


def apply_distort_op(
    img: np.ndarray,
    op: DistortOp,
    steepness: float = SIGMOID_STEEPNESS,
    pivot_highlight: float = PIVOT_HIGHLIGHT,
    pivot_shadow: float = PIVOT_SHADOW,
) -> np.ndarray:
    """Blend the full-strength op result into img with the op's soft weights."""
    if op.kind.startswith("push_"):
        ch_key = op.kind[len("push_") :]
        if ch_key not in _PUSH_CHANNELS:
            raise ValueError(f"unknown distortion op: {op.kind!r}")
        chans = _PUSH_CHANNELS[ch_key]
        full = img.astype(np.float32).copy()
        for ch in chans:
            full[..., ch] = np.clip(full[..., ch] * np.float32(op.factor), 0.0, 1.0)
        intensity = img[..., chans].astype(np.float64).mean(axis=-1)
        w = _sigmoid_weights(intensity, "highlight", steepness, pivot_highlight)
    else:
        fam, _, region = op.kind.partition("_")
        if fam == "brightness":
            full = actions.adjust_brightness(img, op.factor)
        elif fam == "contrast":
            full = actions.adjust_contrast(img, op.factor)
        elif fam == "saturation":
            full = actions.adjust_saturation(img, op.factor)
        else:
            raise ValueError(f"unknown distortion op: {op.kind!r}")
        if region == "global":
            return full
        pivot = pivot_highlight if region == "highlight" else pivot_shadow
        w = _sigmoid_weights(color.luminance(img), region, steepness, pivot)

    blended = img.astype(np.float64) + w[..., None] * (
        full.astype(np.float64) - img.astype(np.float64)
    )
    return np.clip(blended, 0.0, 1.0).astype(np.float32)


def _sample_factor(rng: np.random.Generator) -> float:
    lo, hi = FACTOR_RANGES[int(rng.integers(len(FACTOR_RANGES)))]
    return float(rng.uniform(lo, hi))


def synthesize_pair(
    reference: np.ndarray,
    seed,
    d_min: float = 10.0,
    d_max: float = 20.0,
    max_ops: int = 30,
    op_pool=None,
    max_restarts: int = 100,
    name: str = "image",
) -> TrainingPair:
    """Random-walk the reference out to a Lab distance in [d_min, d_max].

    Ops are sampled uniformly from the pool; overshooting d_max (or running
    out of ops) restarts from the reference with the random stream advanced,
    so the result is deterministic per (reference, seed).
    """
    pool = tuple(op_pool) if op_pool is not None else OP_KINDS_ALL
    if not pool:
        raise ValueError("op pool must not be empty")
    rng = np.random.default_rng(seed)
    ref_lab = color.srgb_to_lab(reference)

    for _ in range(max_restarts):
        img = reference
        ops: list[DistortOp] = []
        for _ in range(max_ops):
            op = DistortOp(pool[int(rng.integers(len(pool)))], _sample_factor(rng))
            img = apply_distort_op(img, op)
            ops.append(op)
            d = color.mean_lab_distance_lab(color.srgb_to_lab(img), ref_lab)
            if d_min <= d <= d_max:
                return TrainingPair(img, reference, d, ops)
            if d > d_max:
                break
    raise SynthesisError(
        f"could not distort {name!r} into the band [{d_min}, {d_max}] "
        f"after {max_restarts} restarts"
    )
