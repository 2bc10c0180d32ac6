"""
Prediction-level distillation from the senior into the junior.
"""

from typing import Optional

import numpy as np

from numerics import Tensor, log_softmax_t, softmax_t, stop_gradient
from utils.errors import ShapeError


def kd_loss(
    senior_logits: Tensor,
    junior_logits: Tensor,
    temperature: float,
    detach_senior: bool = True,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """Pixel-averaged KL(p_senior || p_junior) of temperature-scaled softmaxes.

    Both log-distributions come from log-softmax, never from log(softmax).
    ``mask`` [N,H,W] restricts the average to selected pixels.

    The divergence is non-negative in exact arithmetic. In floating point the
    value can come out a few ulps below zero (around -1e-17) when the two
    distributions nearly coincide; it is not clamped, so the gradient stays
    that of the unclamped expression.
    """
    if senior_logits.shape != junior_logits.shape:
        raise ShapeError(f"kd_loss: senior {senior_logits.shape} and junior {junior_logits.shape} differ")
    source = stop_gradient(senior_logits) if detach_senior else senior_logits
    log_p_senior = log_softmax_t(source, temperature, axis=1)
    p_senior = softmax_t(source, temperature, axis=1)
    log_p_junior = log_softmax_t(junior_logits, temperature, axis=1)
    per_pixel = (p_senior * (log_p_senior - log_p_junior)).sum(axis=1)

    if mask is None:
        return per_pixel.mean()
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != per_pixel.shape:
        raise ShapeError(f"kd_loss: mask {mask.shape} does not match pixels {per_pixel.shape}")
    count = int(mask.sum())
    return (per_pixel * mask.astype(per_pixel.data.dtype)).sum() * (1.0 / max(count, 1)) + 0.0
