"""Episode environment: applies edit actions against a target image and pays
the change in mean CIELab distance as the immediate reward.

Training episodes are fixed length: terminal fires exactly at max_steps.
Rewards telescope, so the return of an episode equals d(0) - d(final).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import color
from .actions import EditAction, apply_edit


@dataclass
class TraceEntry:
    step: int
    action: EditAction
    q_value: float | None = None
    distance_after: float | None = None


@dataclass
class Episode:
    current: np.ndarray
    target: np.ndarray
    step: int
    max_steps: int
    last_distance: float
    trace: list[TraceEntry] = field(default_factory=list)
    # Lab caches; distance and histogram consumers share them.
    current_lab: np.ndarray | None = None
    target_lab: np.ndarray | None = None

    @property
    def done(self) -> bool:
        return self.step >= self.max_steps


def reset(input_img: np.ndarray, target: np.ndarray, max_steps: int = 20) -> Episode:
    """Start an episode at step 0 with an empty trace."""
    if input_img.shape != target.shape:
        raise ValueError(
            f"input and target dimensions differ: {input_img.shape} vs {target.shape}"
        )
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    input_img = np.ascontiguousarray(input_img, dtype=np.float32)
    target = np.ascontiguousarray(target, dtype=np.float32)
    current_lab = color.srgb_to_lab(input_img)
    target_lab = color.srgb_to_lab(target)
    d0 = color.mean_lab_distance_lab(current_lab, target_lab)
    return Episode(
        current=input_img,
        target=target,
        step=0,
        max_steps=max_steps,
        last_distance=d0,
        current_lab=current_lab,
        target_lab=target_lab,
    )


def step(ep: Episode, action: EditAction, q_value: float | None = None):
    """Apply one action in place; returns (reward, terminal).

    reward = d(t-1) - d(t): positive iff the action moved the image closer
    to the target.
    """
    if ep.done:
        raise RuntimeError(f"episode is already terminal at step {ep.step}")
    ep.current = apply_edit(ep.current, action)
    ep.current_lab = color.srgb_to_lab(ep.current)
    d = color.mean_lab_distance_lab(ep.current_lab, ep.target_lab)
    reward = ep.last_distance - d
    ep.last_distance = d
    ep.step += 1
    ep.trace.append(TraceEntry(ep.step - 1, action, q_value, d))
    return reward, ep.done


@dataclass
class Transition:
    state: np.ndarray
    action_index: int
    reward: float
    next_state: np.ndarray
    terminal: bool


def trace_to_json(trace: list[TraceEntry]) -> str:
    """Serialize a trace as the JSON action-sequence artifact."""
    rows = [
        {
            "step": t.step,
            "action_index": t.action.index,
            "action_name": t.action.name,
            "q_value": t.q_value,
            "distance_after": t.distance_after,
        }
        for t in trace
    ]
    return json.dumps(rows, indent=2)
