"""Named trainable parameters, Adam with decoupled weight decay, and the
linear warmup/decay learning-rate schedule."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .tensor import DEFAULT_DTYPE, Tensor


@dataclass
class TrainSchedule:
    peak_lr: float = 3e-5
    warmup_ratio: float = 0.1
    total_steps: int = 1
    batch_size: int = 8
    epochs: int = 10
    dropout_p: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ValueError(f"warmup_ratio must be in [0, 1], got {self.warmup_ratio}")
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")


def lr_at(schedule: TrainSchedule, step: int) -> float:
    """Linear ramp 0 -> peak over the warmup steps, then linear decay to 0."""
    if not 0 <= step <= schedule.total_steps:
        raise ValueError(f"step {step} outside 0..{schedule.total_steps}")
    warmup = schedule.warmup_ratio * schedule.total_steps
    if step < warmup:
        return schedule.peak_lr * step / warmup
    if schedule.total_steps == warmup:
        return schedule.peak_lr if step == warmup else 0.0
    return schedule.peak_lr * (schedule.total_steps - step) / (schedule.total_steps - warmup)


class MissingGradient(RuntimeError):
    """A trainable parameter had no gradient when the optimizer stepped."""


class ParameterStore:
    """Map of path-like names to trainable tensors plus per-parameter Adam
    state (m, v, step count). Parameters are created lazily on first request
    with an init drawn from a per-name RNG, so creation order never affects
    values. Updates are exclusive; concurrent readers must hold a snapshot.
    """

    def __init__(
        self,
        seed: int = 0,
        dtype=DEFAULT_DTYPE,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        self.seed = seed
        self.dtype = dtype
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.params: dict[str, Tensor] = {}
        self._adam: dict[str, dict] = {}

    def _rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFF, zlib.crc32(name.encode())])

    def parameter(self, name: str, shape, init: str = "xavier", fan=None) -> Tensor:
        """Fetch or create a trainable tensor.

        init: "xavier" uniform +-sqrt(6/(fan_in+fan_out)) for weight matrices,
        "zeros" for biases, "embedding" for normal(0, 0.01) lookup tables.
        """
        if name in self.params:
            p = self.params[name]
            if tuple(p.data.shape) != tuple(shape):
                raise ValueError(f"parameter {name}: shape {p.data.shape} != requested {tuple(shape)}")
            return p
        shape = tuple(shape)
        rng = self._rng(name)
        if init == "zeros":
            data = np.zeros(shape, dtype=self.dtype)
        elif init == "embedding":
            data = rng.normal(0.0, 0.01, size=shape).astype(self.dtype)
        elif init == "xavier":
            if fan is None:
                fan = (int(np.prod(shape[:-1])), shape[-1]) if len(shape) > 1 else (shape[0], shape[0])
            bound = np.sqrt(6.0 / (fan[0] + fan[1]))
            data = rng.uniform(-bound, bound, size=shape).astype(self.dtype)
        else:
            raise ValueError(f"unknown init {init!r}")
        p = Tensor(data, requires_grad=True, op="param")
        self.params[name] = p
        self._adam[name] = {
            "m": np.zeros(shape, dtype=self.dtype),
            "v": np.zeros(shape, dtype=self.dtype),
            "t": 0,
        }
        return p

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.grad = None

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        for name, data in snap.items():
            self.params[name].data = data.copy()

    def astype(self, dtype) -> "ParameterStore":
        """Copy of the store with parameters cast (used by gradient checks)."""
        clone = ParameterStore(
            seed=self.seed,
            dtype=dtype,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            weight_decay=self.weight_decay,
        )
        for name, p in self.params.items():
            clone.params[name] = Tensor(p.data.astype(dtype), requires_grad=True, op="param")
            clone._adam[name] = {
                "m": np.zeros(p.data.shape, dtype=dtype),
                "v": np.zeros(p.data.shape, dtype=dtype),
                "t": 0,
            }
        return clone


def adam_step(store: ParameterStore, schedule: TrainSchedule, step: int) -> None:
    """Decoupled weight decay, then bias-corrected Adam; clears gradients."""
    lr = lr_at(schedule, step)
    for name in sorted(store.params):
        p = store.params[name]
        if p.grad is None:
            raise MissingGradient(f"parameter {name} has no gradient")
        g = p.grad
        state = store._adam[name]
        if store.weight_decay:
            p.data *= 1.0 - lr * store.weight_decay
        state["t"] += 1
        state["m"] = store.beta1 * state["m"] + (1.0 - store.beta1) * g
        state["v"] = store.beta2 * state["v"] + (1.0 - store.beta2) * (g * g)
        m_hat = state["m"] / (1.0 - store.beta1 ** state["t"])
        v_hat = state["v"] / (1.0 - store.beta2 ** state["t"])
        p.data -= lr * m_hat / (np.sqrt(v_hat) + store.eps)
    store.zero_grads()
