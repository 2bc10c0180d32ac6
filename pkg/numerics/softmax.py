"""
Temperature-scaled softmax and log-softmax.

Forward passes use scipy's max-subtracted implementations so that low
temperatures never overflow.
"""

import numpy as np
from scipy import special

from numerics.tensor import Tensor
from utils.errors import ParameterError


def _check_temperature(temperature: float) -> float:
    if not temperature > 0:
        raise ParameterError(f"temperature must be > 0, got {temperature}")
    return float(temperature)


def softmax_t(logits: Tensor, temperature: float = 1.0, axis: int = -1) -> Tensor:
    """Probabilities exp(z_c / T) / sum_d exp(z_d / T) along ``axis``."""
    temperature = _check_temperature(temperature)
    probs = special.softmax(logits.data / temperature, axis=axis)

    def backward(grad):
        inner = np.sum(grad * probs, axis=axis, keepdims=True)
        return ((grad - inner) * probs / temperature,)

    return Tensor._from_op("softmax_t", probs, (logits,), backward)


def log_softmax_t(logits: Tensor, temperature: float = 1.0, axis: int = -1) -> Tensor:
    """Log of :func:`softmax_t`, computed without forming the probabilities first."""
    temperature = _check_temperature(temperature)
    log_probs = special.log_softmax(logits.data / temperature, axis=axis)
    probs = np.exp(log_probs)

    def backward(grad):
        total = np.sum(grad, axis=axis, keepdims=True)
        return ((grad - probs * total) / temperature,)

    return Tensor._from_op("log_softmax_t", log_probs, (logits,), backward)


def softmax_array(values: np.ndarray, temperature: float = 1.0, axis: int = -1) -> np.ndarray:
    """Plain-array softmax for code paths that never need gradients."""
    temperature = _check_temperature(temperature)
    return special.softmax(np.asarray(values) / temperature, axis=axis)
