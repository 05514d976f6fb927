"""Double Q-learning training over distort-and-recover pairs.

The loop rolls fixed-length epsilon-greedy episodes on (distorted, reference)
pairs, pushes transitions into a ring replay buffer, and after a warmup takes
one gradient step per environment step.  Bootstrap targets follow the
double-Q rule: the online network picks the next action, the target network
values it.  One seed drives pair shuffling, exploration, and replay sampling,
so runs replay bit-identically.
"""

import csv
from dataclasses import dataclass, field, fields

import numpy as np

from . import env, features, nn
from .actions import ACTIONS, NUM_ACTIONS
from .distort import TrainingPair
from .env import Transition
from .features import ContextFeature


@dataclass
class TrainConfig:
    gamma: float = 0.99
    batch_size: int = 4
    base_lr: float = nn.BASE_LR
    min_lr: float = nn.MIN_LR
    lr_decay: float = nn.LR_DECAY
    lr_decay_every: int = nn.LR_DECAY_EVERY
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 50_000
    replay_capacity: int = 50_000
    warmup: int = 1_000
    target_sync_every: int = 1_000
    max_episode_steps: int = 20
    seed: int = 0
    steps: int = 100_000
    hidden_dims: tuple[int, ...] = nn.DEFAULT_HIDDEN_DIMS
    log_every: int = 200
    checkpoint_every: int = 0  # env steps between periodic saves; 0 = final only
    work_max_side: int = 256

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.eps_end > self.eps_start:
            raise ValueError("eps_end must not exceed eps_start")

    @classmethod
    def desk(cls, **overrides) -> "TrainConfig":
        """CPU-scale preset: small hidden layers, all other defaults kept."""
        overrides.setdefault("hidden_dims", nn.DESK_HIDDEN_DIMS)
        return cls(**overrides)


_INT_TUPLE_KEYS = {"hidden_dims"}


def parse_config_file(path) -> dict:
    """Parse a ``key = value`` config file; unknown keys are errors."""
    known = {f.name: f.type for f in fields(TrainConfig)}
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in _INT_TUPLE_KEYS:
                out[key] = tuple(int(v) for v in value.replace(",", " ").split())
            elif known[key] in (int, "int"):
                out[key] = int(value)
            else:
                out[key] = float(value)
    return out


class ReplayBuffer:
    """Fixed-capacity ring of transitions; oldest entries evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, t: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(t)
        else:
            self._items[self._cursor] = t
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, n: int, rng: np.random.Generator) -> list[Transition]:
        if len(self._items) < n:
            raise ValueError(f"cannot sample {n} transitions from buffer of {len(self._items)}")
        idx = rng.integers(len(self._items), size=n)
        return [self._items[int(i)] for i in idx]


def push(buffer: ReplayBuffer, t: Transition) -> ReplayBuffer:
    buffer.push(t)
    return buffer


def sample(buffer: ReplayBuffer, n: int, rng: np.random.Generator) -> list[Transition]:
    return buffer.sample(n, rng)


@dataclass
class TargetPair:
    online: nn.MlpNetwork
    target: nn.MlpNetwork


def sync_target(pair: TargetPair) -> TargetPair:
    """Make the target network a bit-exact copy of the online network."""
    pair.target = pair.online.copy()
    return pair


def double_q_targets(batch: list[Transition], pair: TargetPair, gamma: float) -> np.ndarray:
    """Per-item scalar targets: y = r, or r + gamma * Q_target(s', a*) with
    a* chosen by the online network."""
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    terminal = np.array([t.terminal for t in batch], dtype=bool)
    y = rewards.copy()
    live = ~terminal
    if live.any():
        next_states = np.stack([t.next_state for t in batch if not t.terminal])
        q_online = np.atleast_2d(nn.forward(pair.online, next_states))
        q_target = np.atleast_2d(nn.forward(pair.target, next_states))
        a_star = np.argmax(q_online, axis=1)
        y[live] += gamma * q_target[np.arange(len(a_star)), a_star].astype(np.float64)
    return y


def train_step(
    pair: TargetPair,
    adam: nn.AdamState,
    batch: list[Transition],
    iteration: int,
    cfg: TrainConfig,
) -> float:
    """One MSE step on the chosen actions' values; returns the batch loss.

    Gradients flow only through each item's taken action; the global gradient
    norm is clipped at 1.0 before the Adam update.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    n = len(batch)
    states = np.stack([t.state for t in batch])
    action_idx = np.array([t.action_index for t in batch])
    y = double_q_targets(batch, pair, cfg.gamma)
    q, cache = nn.forward(pair.online, states, want_cache=True)
    pred = q[np.arange(n), action_idx].astype(np.float64)
    err = pred - y
    loss = float(np.mean(err**2))
    out_grad = np.zeros_like(q)
    out_grad[np.arange(n), action_idx] = (2.0 * err / n).astype(q.dtype)
    grads = nn.backward(pair.online, cache, out_grad)
    norm = grads.global_norm()
    if norm > 1.0:
        grads.scale(1.0 / norm)
    lr = nn.lr_at(iteration, cfg.base_lr, cfg.min_lr, cfg.lr_decay, cfg.lr_decay_every)
    nn.adam_update(pair.online, adam, grads, lr)
    return loss


def epsilon_at(step: int, cfg: TrainConfig) -> float:
    """Linear anneal from eps_start to eps_end over eps_decay_steps."""
    if step < 0:
        raise ValueError("step must be nonnegative")
    if step >= cfg.eps_decay_steps:
        return cfg.eps_end
    frac = step / cfg.eps_decay_steps
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac


def _resolve_contexts(pairs, contexts):
    """Per-pair fixed context features, or None for per-step tiny context."""
    if contexts is None:
        return None, features.TINY_DIM
    missing = [p.stem for p in pairs if p.stem not in contexts]
    if missing:
        raise ValueError(f"missing context features for stems: {', '.join(sorted(missing))}")
    dims = {contexts[p.stem].dim for p in pairs}
    if len(dims) != 1:
        raise ValueError(f"context feature dims differ across images: {sorted(dims)}")
    return contexts, dims.pop()


@dataclass
class TrainResult:
    pair: TargetPair
    adam: nn.AdamState
    log_rows: list[tuple] = field(default_factory=list)


def run_training(
    pairs: list[TrainingPair],
    cfg: TrainConfig,
    contexts: dict[str, ContextFeature] | None = None,
    log_path=None,
    checkpoint_path=None,
    resume: tuple[nn.MlpNetwork, nn.AdamState | None] | None = None,
    progress=None,
) -> TrainResult:
    """Run the full training loop; returns networks, optimizer state and log."""
    if not pairs:
        raise ValueError("training-pair source is empty")
    contexts, ctx_dim = _resolve_contexts(pairs, contexts)
    input_dim = features.state_dim(ctx_dim)

    rng = np.random.default_rng(cfg.seed)
    if resume is not None:
        online, adam = resume
        if online.input_dim != input_dim:
            raise ValueError(
                f"checkpoint input dim {online.input_dim} does not match "
                f"feature dim {input_dim}"
            )
        adam = adam if adam is not None else nn.init_adam(online)
    else:
        online = nn.init_network(input_dim, cfg.seed, cfg.hidden_dims)
        adam = nn.init_adam(online)
    pair_nets = TargetPair(online, online.copy())

    work = [
        (
            features.working_copy(p.distorted, cfg.work_max_side),
            features.working_copy(p.reference, cfg.work_max_side),
            p.stem,
        )
        for p in pairs
    ]

    buffer = ReplayBuffer(cfg.replay_capacity)
    log_rows: list[tuple] = []
    log_file = open(log_path, "w", newline="") if log_path else None
    writer = None
    if log_file:
        writer = csv.writer(log_file)
        writer.writerow(["iteration", "loss", "epsilon", "lr", "mean_return"])

    env_step = 0
    last_loss = float("nan")
    recent_returns: list[float] = []
    order = rng.permutation(len(work))
    order_pos = 0

    try:
        while env_step < cfg.steps:
            if order_pos >= len(order):
                order = rng.permutation(len(work))
                order_pos = 0
            distorted, reference, stem = work[order[order_pos]]
            order_pos += 1

            ep = env.reset(distorted, reference, cfg.max_episode_steps)
            fixed_ctx = contexts[stem] if contexts is not None else None
            ctx = fixed_ctx if fixed_ctx is not None else features.tiny_context(ep.current)
            state = features.build_state(ctx, features.lab_histogram_from_lab(ep.current_lab))
            ep_return = 0.0

            while not ep.done and env_step < cfg.steps:
                eps = epsilon_at(env_step, cfg)
                if rng.random() < eps:
                    action = ACTIONS[int(rng.integers(NUM_ACTIONS))]
                else:
                    action = ACTIONS[int(np.argmax(nn.forward(pair_nets.online, state)))]
                reward, terminal = env.step(ep, action)
                ep_return += reward
                ctx = fixed_ctx if fixed_ctx is not None else features.tiny_context(ep.current)
                next_state = features.build_state(
                    ctx, features.lab_histogram_from_lab(ep.current_lab)
                )
                buffer.push(Transition(state, action.index, reward, next_state, terminal))
                state = next_state
                env_step += 1

                if len(buffer) >= max(cfg.warmup, cfg.batch_size):
                    batch = buffer.sample(cfg.batch_size, rng)
                    last_loss = train_step(pair_nets, adam, batch, adam.step, cfg)
                    if adam.step % cfg.target_sync_every == 0:
                        sync_target(pair_nets)

                if env_step % cfg.log_every == 0:
                    mean_ret = float(np.mean(recent_returns)) if recent_returns else float("nan")
                    lr = nn.lr_at(
                        adam.step, cfg.base_lr, cfg.min_lr, cfg.lr_decay, cfg.lr_decay_every
                    )
                    row = (env_step, last_loss, eps, lr, mean_ret)
                    log_rows.append(row)
                    if writer:
                        writer.writerow([f"{v:.8g}" if isinstance(v, float) else v for v in row])
                        log_file.flush()
                    if progress:
                        progress(row)

                if (
                    checkpoint_path
                    and cfg.checkpoint_every > 0
                    and env_step % cfg.checkpoint_every == 0
                ):
                    nn.save_checkpoint(pair_nets.online, checkpoint_path, adam)

            if ep.done:
                recent_returns.append(ep_return)
                del recent_returns[:-25]
    finally:
        if log_file:
            log_file.close()

    if checkpoint_path:
        nn.save_checkpoint(pair_nets.online, checkpoint_path, adam)
    return TrainResult(pair_nets, adam, log_rows)
