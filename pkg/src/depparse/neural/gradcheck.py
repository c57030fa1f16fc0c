"""Central-finite-difference gradient checking.

The loss builder is re-run on a float64 copy of the parameter store, so the
numeric oracle is not limited by float32 rounding. Graphs containing
train-mode dropout are rejected: the builder must be deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optim import ParameterStore
from .tensor import Tensor, graph_nodes


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_error: float = 0.0
    per_param: dict[str, float] = field(default_factory=dict)
    checked_entries: int = 0

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def has_active_dropout(loss: Tensor) -> bool:
    return any(node.op == "dropout" for node in graph_nodes(loss))


def relu_preactivation_margin(loss: Tensor) -> float:
    """Smallest |input| over all relu nodes in the graph (inf if none).

    Central differences are only meaningful away from relu kinks; callers
    can resample instances whose margin is below a few multiples of h.
    """
    margin = np.inf
    for node in graph_nodes(loss):
        if node.op == "relu" and node._parents:
            values = np.abs(node._parents[0].data)
            if values.size:
                margin = min(margin, float(values.min()))
    return margin


def grad_check(
    build_loss,
    store: ParameterStore,
    tolerance: float = 1e-3,
    h: float = 1e-4,
    max_entries_per_param: int = 200,
    rng: np.random.Generator | None = None,
) -> GradCheckReport:
    """Compare analytic gradients of build_loss(store) with central differences.

    build_loss must return a scalar Tensor and be deterministic in the store
    contents. Large parameters are spot-checked on max_entries_per_param
    random coordinates (seeded rng, defaults to a fixed seed).
    """
    work = store.astype(np.float64)
    loss = build_loss(work)
    if has_active_dropout(loss):
        raise ValueError("grad_check rejects graphs with train-mode dropout; disable it")
    work.zero_grads()
    loss = build_loss(work)
    loss.backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in work.params.items()
    }

    if rng is None:
        rng = np.random.default_rng(0)
    report = GradCheckReport(tolerance=tolerance)
    for name in sorted(work.params):
        p = work.params[name]
        flat = p.data.reshape(-1)
        size = flat.size
        if size <= max_entries_per_param:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_entries_per_param, replace=False)
        worst = 0.0
        for c in coords:
            saved = flat[c]
            flat[c] = saved + h
            up = float(build_loss(work).data)
            flat[c] = saved - h
            down = float(build_loss(work).data)
            flat[c] = saved
            numeric = (up - down) / (2.0 * h)
            a = float(analytic[name].reshape(-1)[c])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, rel)
            report.checked_entries += 1
        report.per_param[name] = worst
        report.max_rel_error = max(report.max_rel_error, worst)
    return report
