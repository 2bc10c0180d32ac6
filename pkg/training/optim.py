"""
AdamW with decoupled weight decay and per-group learning-rate scales.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.run_config import OptimConfig
from numerics import Tensor
from utils.errors import NumericalError, ShapeError, TrainingError

logger = logging.getLogger(__name__)


@dataclass
class Moments:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, weights: np.ndarray) -> "Moments":
        return cls(np.zeros_like(weights), np.zeros_like(weights), 0)


def adamw_step(
    weights: np.ndarray,
    grads: np.ndarray,
    moments: Moments,
    lr: float,
    config: OptimConfig,
) -> Tuple[np.ndarray, Moments]:
    """One AdamW update; returns new arrays and leaves the inputs untouched.

    Decay scales the weights by (1 - lr * weight_decay) before the
    bias-corrected Adam step, never through the gradient.

    Raises:
        ShapeError: If weights, gradients and moments disagree in shape
        NumericalError: If the gradient holds NaN or Inf
    """
    if weights.shape != grads.shape or weights.shape != moments.m.shape:
        raise ShapeError(f"adamw_step: weights {weights.shape}, grads {grads.shape}, moments {moments.m.shape}")
    if not np.all(np.isfinite(grads)):
        raise NumericalError("non-finite gradient")
    step = moments.step + 1
    b1, b2 = config.beta1, config.beta2
    m = b1 * moments.m + (1.0 - b1) * grads
    v = b2 * moments.v + (1.0 - b2) * grads * grads
    m_hat = m / (1.0 - b1 ** step)
    v_hat = v / (1.0 - b2 ** step)
    decayed = weights * (1.0 - lr * config.weight_decay)
    return decayed - lr * m_hat / (np.sqrt(v_hat) + config.eps), Moments(m, v, step)


class AdamW:
    """Shared optimizer over named parameter groups.

    Groups whose name ends in ``decoder`` run at ``lr * decoder_lr_multiplier``.
    """

    def __init__(self, groups: Dict[str, List[Tensor]], config: OptimConfig):
        self.groups = groups
        self.config = config
        self.lr_scales = {
            name: config.decoder_lr_multiplier if name.endswith("decoder") else 1.0 for name in groups
        }
        self.state: Dict[str, Moments] = {}

    def parameters(self) -> List[Tensor]:
        return [p for params in self.groups.values() for p in params]

    def grad_norm(self) -> float:
        squares = [float(np.sum(p.grad * p.grad)) for p in self.parameters() if p.grad is not None]
        return float(np.sqrt(sum(squares)))

    def step(self, lr: float, iteration: int = 0) -> None:
        """Update every parameter that received a gradient.

        Raises:
            TrainingError: If any gradient is non-finite
        """
        scale = 1.0
        if self.config.grad_clip_norm is not None:
            norm = self.grad_norm()
            if not np.isfinite(norm):
                raise TrainingError("non-finite gradient norm", iteration, {"grad_norm": norm})
            if norm > self.config.grad_clip_norm:
                scale = self.config.grad_clip_norm / (norm + 1e-6)

        for name, params in self.groups.items():
            group_lr = lr * self.lr_scales[name]
            for p in params:
                if p.grad is None:
                    continue
                moments = self.state.get(p.name) or Moments.zeros_like(p.data)
                grads = p.grad * scale if scale != 1.0 else p.grad
                try:
                    new_weights, self.state[p.name] = adamw_step(p.data, grads, moments, group_lr, self.config)
                except NumericalError as exc:
                    raise TrainingError(f"{exc} for parameter '{p.name}'", iteration) from exc
                p.data[...] = new_weights

    def state_dict(self) -> Dict[str, Dict[str, np.ndarray]]:
        """Moments in the checkpoint layout: slot -> parameter name -> array."""
        return {
            "m": {name: s.m for name, s in self.state.items()},
            "v": {name: s.v for name, s in self.state.items()},
            "t": {name: np.array(s.step, dtype=np.int64) for name, s in self.state.items()},
        }

    def load_state_dict(self, slots: Dict[str, Dict[str, np.ndarray]], strict: Optional[bool] = True) -> None:
        known = {p.name for p in self.parameters()}
        m, v, t = slots.get("m", {}), slots.get("v", {}), slots.get("t", {})
        unknown = sorted(set(m) - known)
        if strict and unknown:
            raise ShapeError(f"optimizer state names unknown parameters: {unknown}")
        self.state = {
            name: Moments(np.array(m[name]), np.array(v[name]), int(t[name])) for name in m if name in known
        }
