"""
Central finite-difference gradient checking.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from numerics.tensor import Tensor, fresh_tape, no_grad


@dataclass
class GradCheckResult:
    passed: bool
    max_relative_error: float
    worst_input: int

    def __str__(self) -> str:
        status = "passed" if self.passed else "FAILED"
        return f"gradcheck {status}: max relative error {self.max_relative_error:.3e} (input {self.worst_input})"


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """||a - n|| / max(||a||, ||n||, floor) over the whole gradient array."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(np.linalg.norm(analytic - numeric) / scale)


def numeric_gradient(fn: Callable[..., Tensor], inputs: Sequence[Tensor], index: int, h: float = 1e-4) -> np.ndarray:
    target = inputs[index]
    grad = np.zeros_like(target.data)
    flat = target.data.reshape(-1)
    with no_grad():
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + h
            plus = fn(*inputs).item()
            flat[k] = original - h
            minus = fn(*inputs).item()
            flat[k] = original
            grad.reshape(-1)[k] = (plus - minus) / (2.0 * h)
    return grad


def check_gradients(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-4,
    rtol: float = 1e-4,
    floor: float = 1e-6,
) -> GradCheckResult:
    """Compare backward() against central differences for every requires_grad input.

    ``fn`` must map the inputs to a scalar Tensor and must not mutate them.
    """
    with fresh_tape():
        for t in inputs:
            t.grad = None
        fn(*inputs).backward()
        analytic: List[np.ndarray] = [
            t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in inputs
        ]

    worst, worst_index = 0.0, -1
    for i, t in enumerate(inputs):
        if not t.requires_grad:
            continue
        error = relative_error(analytic[i], numeric_gradient(fn, inputs, i, h), floor)
        if error > worst:
            worst, worst_index = error, i
    return GradCheckResult(worst <= rtol, worst, worst_index)
