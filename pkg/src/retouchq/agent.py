"""Action selection and the greedy enhancement loop.

Inference is pure greedy: take the argmax action while its value is strictly
positive, stop as soon as every action value is <= 0 (ties break toward the
lowest action index).  Feature extraction runs on a working copy capped at
256 px on the long side; the chosen actions are re-applied to the original
full-resolution image for the final output.
"""

import numpy as np

from . import color, features, nn
from .actions import ACTIONS, NUM_ACTIONS, EditAction, apply_edit
from .env import TraceEntry
from .features import ContextFeature

STOP = None  # sentinel returned by select_greedy when all values are non-positive


def q_values(net: nn.MlpNetwork, state: np.ndarray) -> np.ndarray:
    """Forward pass: the 12 action values for one state."""
    return nn.forward(net, state)


def select_greedy(q: np.ndarray):
    """Argmax action if max(q) > 0, else STOP (ties: lowest index)."""
    idx = int(np.argmax(q))
    if q[idx] > 0.0:
        return ACTIONS[idx]
    return STOP


def select_eps_greedy(q: np.ndarray, epsilon: float, rng: np.random.Generator) -> EditAction:
    """Uniform random action with probability epsilon, else argmax.

    Never stops; training episodes run to their fixed length.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return ACTIONS[int(rng.integers(NUM_ACTIONS))]
    return ACTIONS[int(np.argmax(q))]


def _context_for(img: np.ndarray, context) -> ContextFeature:
    if context == "tiny":
        return features.tiny_context(img)
    if isinstance(context, ContextFeature):
        return context
    raise ValueError(f"context must be 'tiny' or a ContextFeature, got {context!r}")


def state_for(img: np.ndarray, context, lab: np.ndarray | None = None) -> np.ndarray:
    """State vector for an image: context feature + Lab histogram."""
    ctx = _context_for(img, context)
    hist = features.lab_histogram_from_lab(lab) if lab is not None else features.lab_histogram(img)
    return features.build_state(ctx, hist)


def enhance(
    net: nn.MlpNetwork,
    input_img: np.ndarray,
    context="tiny",
    max_steps: int = 20,
    target: np.ndarray | None = None,
    work_max_side: int = 256,
):
    """Greedy enhancement: returns (output image, trace).

    A fixed (external) context is held for the whole episode; the tiny-image
    context is recomputed from the working copy every step.  When a target is
    given, trace entries also record the distance after each action.
    """
    work = features.working_copy(input_img, work_max_side)
    ctx = _context_for(work, context)
    expected = features.state_dim(ctx.dim)
    if net.input_dim != expected:
        raise ValueError(
            f"network input dim {net.input_dim} does not match feature dim {expected} "
            f"(context {ctx.dim} + histogram {features.HISTOGRAM_BINS})"
        )

    work_target = None
    if target is not None:
        work_target = features.working_copy(target, work_max_side)
        if work_target.shape != work.shape:
            raise ValueError("target dimensions do not match the input")

    trace: list[TraceEntry] = []
    target_lab = None
    for step_idx in range(max_steps):
        if context == "tiny":
            ctx = features.tiny_context(work)
        state = features.build_state(ctx, features.lab_histogram(work))
        q = q_values(net, state)
        action = select_greedy(q)
        if action is STOP:
            break
        work = apply_edit(work, action)
        distance_after = None
        if work_target is not None:
            if target_lab is None:
                target_lab = color.srgb_to_lab(work_target)
            distance_after = color.mean_lab_distance_lab(color.srgb_to_lab(work), target_lab)
        trace.append(TraceEntry(step_idx, action, float(q[action.index]), distance_after))

    out = input_img.astype(np.float32)
    for entry in trace:
        out = apply_edit(out, entry.action)
    return out, trace
