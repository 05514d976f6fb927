"""Q-network: a 4-layer MLP with rectifier hidden activations and a linear
output head, plus exact reverse-mode gradients, Adam, the step-decay learning
rate schedule, and binary checkpoint persistence.

The output layer is linear so action values can go negative, which the
inference stop rule depends on.  Default layer widths are 4096/4096/512/12;
``DESK_HIDDEN_DIMS`` is a small preset for CPU-scale runs.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels

OUTPUT_DIM = 12
DEFAULT_HIDDEN_DIMS = (4096, 4096, 512)
DESK_HIDDEN_DIMS = (512, 512, 128)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

BASE_LR = 1e-5
MIN_LR = 1e-8
LR_DECAY = 0.96
LR_DECAY_EVERY = 5000

CHECKPOINT_MAGIC = b"DQNC"
CHECKPOINT_VERSION = 1


@dataclass
class MlpNetwork:
    weights: list[np.ndarray]  # each (in_dim, out_dim)
    biases: list[np.ndarray]  # each (out_dim,)
    version: int = 0  # bumped on every parameter update; guards stale caches

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [w.shape[1] for w in self.weights]

    @property
    def dtype(self):
        return self.weights[0].dtype

    def copy(self) -> "MlpNetwork":
        return MlpNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class GradientSet:
    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]

    def global_norm(self) -> float:
        total = 0.0
        for g in self.d_weights + self.d_biases:
            flat = g.reshape(-1).astype(np.float64)
            total += float(np.dot(flat, flat))
        return float(np.sqrt(total))

    def scale(self, factor: float) -> None:
        for g in self.d_weights + self.d_biases:
            g *= g.dtype.type(factor)


@dataclass
class ForwardCache:
    net_version: tuple[int, int]  # (id(net), net.version) at forward time
    inputs: list[np.ndarray]  # activation entering each layer
    relu_masks: list[np.ndarray]  # z > 0 per hidden layer
    squeezed: bool


def init_network(
    input_dim: int,
    seed,
    hidden_dims=DEFAULT_HIDDEN_DIMS,
    output_dim: int = OUTPUT_DIM,
    dtype=np.float32,
) -> MlpNetwork:
    """He-initialized network: W ~ N(0, 2/fan_in), biases zero."""
    if input_dim <= 0:
        raise ValueError(f"input_dim must be positive, got {input_dim}")
    rng = np.random.default_rng(seed)
    dims = [input_dim, *hidden_dims, output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return MlpNetwork(weights, biases)


def forward(net: MlpNetwork, x: np.ndarray, want_cache: bool = False):
    """Q-values for a state vector (d,) or batch (N, d).

    With want_cache=True also returns the activations needed by backward.
    """
    arr = np.asarray(x, dtype=net.dtype)
    squeezed = arr.ndim == 1
    if squeezed:
        arr = arr[None, :]
    if arr.shape[1] != net.input_dim:
        raise ValueError(f"state length {arr.shape[1]} != network input dim {net.input_dim}")

    inputs = [arr]
    masks = []
    h = arr
    last = net.num_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        if i < last:
            mask = z > 0
            h = np.where(mask, z, 0)
            masks.append(mask)
            inputs.append(h)
        else:
            h = z
    out = h[0] if squeezed else h
    if not want_cache:
        return out
    cache = ForwardCache((id(net), net.version), inputs, masks, squeezed)
    return out, cache


def backward(net: MlpNetwork, cache: ForwardCache, output_grad: np.ndarray) -> GradientSet:
    """Exact gradients of the forward map, contracted with output_grad."""
    if cache.net_version != (id(net), net.version):
        raise RuntimeError("stale forward cache: network parameters changed since forward")
    grad = np.asarray(output_grad, dtype=net.dtype)
    if cache.squeezed:
        grad = grad[None, :]
    if grad.shape != (cache.inputs[0].shape[0], net.output_dim):
        raise ValueError(f"output_grad shape {output_grad.shape} does not match forward output")

    d_weights = [None] * net.num_layers
    d_biases = [None] * net.num_layers
    delta = grad
    for i in range(net.num_layers - 1, -1, -1):
        d_weights[i] = cache.inputs[i].T @ delta
        d_biases[i] = delta.sum(axis=0, dtype=np.float64).astype(net.dtype)
        if i > 0:
            delta = (delta @ net.weights[i].T) * cache.relu_masks[i - 1]
    return GradientSet(d_weights, d_biases)


@dataclass
class AdamState:
    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0


def init_adam(net: MlpNetwork) -> AdamState:
    return AdamState(
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(b) for b in net.biases],
        [np.zeros_like(b) for b in net.biases],
    )


def adam_update(net: MlpNetwork, adam: AdamState, grads: GradientSet, lr: float):
    """Standard Adam step with bias correction; mutates net and adam in place."""
    for g, w in zip(grads.d_weights, net.weights):
        if g.shape != w.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {w.shape}")
    adam.step += 1
    t = adam.step
    corr1 = 1.0 - ADAM_BETA1**t
    corr2 = 1.0 - ADAM_BETA2**t
    params = net.weights + net.biases
    ms = adam.m_weights + adam.m_biases
    vs = adam.v_weights + adam.v_biases
    gs = grads.d_weights + grads.d_biases
    for p, m, v, g in zip(params, ms, vs, gs):
        g = np.ascontiguousarray(g, dtype=p.dtype)
        _kernels.adam_step(
            p.reshape(-1),
            m.reshape(-1),
            v.reshape(-1),
            g.reshape(-1),
            float(lr),
            corr1,
            corr2,
            ADAM_BETA1,
            ADAM_BETA2,
            ADAM_EPS,
        )
    net.version += 1
    return net, adam


def lr_at(
    iteration: int,
    base_lr: float = BASE_LR,
    min_lr: float = MIN_LR,
    decay: float = LR_DECAY,
    decay_every: int = LR_DECAY_EVERY,
) -> float:
    """Step-decayed learning rate, clamped below at min_lr."""
    if iteration < 0:
        raise ValueError("iteration must be nonnegative")
    return max(min_lr, base_lr * decay ** (iteration // decay_every))


def save_checkpoint(net: MlpNetwork, path, adam: AdamState | None = None) -> None:
    """Write the DQNC binary format (little-endian, float32 parameters)."""
    chunks = [CHECKPOINT_MAGIC, struct.pack("<II", CHECKPOINT_VERSION, net.num_layers)]
    for w in net.weights:
        chunks.append(struct.pack("<II", w.shape[0], w.shape[1]))
    for w, b in zip(net.weights, net.biases):
        chunks.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
        chunks.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    if adam is None:
        chunks.append(struct.pack("<B", 0))
    else:
        chunks.append(struct.pack("<B", 1))
        for i in range(net.num_layers):
            chunks.append(np.ascontiguousarray(adam.m_weights[i], dtype="<f4").tobytes())
            chunks.append(np.ascontiguousarray(adam.v_weights[i], dtype="<f4").tobytes())
            chunks.append(np.ascontiguousarray(adam.m_biases[i], dtype="<f4").tobytes())
            chunks.append(np.ascontiguousarray(adam.v_biases[i], dtype="<f4").tobytes())
        chunks.append(struct.pack("<Q", adam.step))
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError(f"{self.path}: truncated checkpoint")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32_array(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.frombuffer(self.take(4 * n), dtype="<f4").reshape(shape).copy()


def load_checkpoint(path):
    """Read a DQNC file; returns (net, adam_or_None).  Corruption raises ValueError."""
    r = _Reader(Path(path).read_bytes(), path)
    if r.take(4) != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: bad magic")
    version = r.u32()
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    num_layers = r.u32()
    if not 0 < num_layers <= 64:
        raise ValueError(f"{path}: implausible layer count {num_layers}")
    shapes = [(r.u32(), r.u32()) for _ in range(num_layers)]
    for (_, out_prev), (in_next, _) in zip(shapes[:-1], shapes[1:]):
        if out_prev != in_next:
            raise ValueError(f"{path}: layer dimension chain mismatch")
    weights, biases = [], []
    for in_dim, out_dim in shapes:
        weights.append(r.f32_array((in_dim, out_dim)))
        biases.append(r.f32_array((out_dim,)))
    net = MlpNetwork(weights, biases)
    flag = r.take(1)[0]
    adam = None
    if flag == 1:
        adam = init_adam(net)
        for i, (in_dim, out_dim) in enumerate(shapes):
            adam.m_weights[i] = r.f32_array((in_dim, out_dim))
            adam.v_weights[i] = r.f32_array((in_dim, out_dim))
            adam.m_biases[i] = r.f32_array((out_dim,))
            adam.v_biases[i] = r.f32_array((out_dim,))
        adam.step = struct.unpack("<Q", r.take(8))[0]
    elif flag != 0:
        raise ValueError(f"{path}: bad optimizer-state flag {flag}")
    if r.pos != len(r.data):
        raise ValueError(f"{path}: trailing bytes after checkpoint payload")
    return net, adam
