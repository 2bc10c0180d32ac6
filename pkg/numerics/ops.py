"""
Elementwise, reduction and structural operations on Tensors.

Binary operations accept a Tensor of the same shape, a constant ndarray of the
same shape, or a Python scalar. There is no general broadcasting.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from numerics.tensor import Tensor
from utils.errors import ShapeError

Operand = Union[Tensor, np.ndarray, float, int]


def _split(a: Tensor, b: Operand, op: str) -> Tuple[np.ndarray, Optional[Tensor]]:
    """Return (values of b, b as a Tensor when it is one)."""
    if isinstance(b, Tensor):
        if b.shape != a.shape:
            raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")
        return b.data, b
    if np.isscalar(b):
        return np.asarray(b, dtype=a.data.dtype), None
    values = np.asarray(b, dtype=a.data.dtype)
    if values.shape != a.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {values.shape} differ")
    return values, None


def _as_tensor(x: Operand) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def add(a: Operand, b: Operand) -> Tensor:
    a = _as_tensor(a)
    b_values, b_tensor = _split(a, b, "add")
    inputs = (a,) if b_tensor is None else (a, b_tensor)

    def backward(grad):
        return (grad, grad)

    return Tensor._from_op("add", a.data + b_values, inputs, backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a = _as_tensor(a)
    b_values, b_tensor = _split(a, b, "sub")
    inputs = (a,) if b_tensor is None else (a, b_tensor)

    def backward(grad):
        return (grad, -grad)

    return Tensor._from_op("sub", a.data - b_values, inputs, backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a = _as_tensor(a)
    b_values, b_tensor = _split(a, b, "mul")
    a_values = a.data
    inputs = (a,) if b_tensor is None else (a, b_tensor)

    def backward(grad):
        return (grad * b_values, grad * a_values)

    return Tensor._from_op("mul", a_values * b_values, inputs, backward)


def relu(x: Tensor) -> Tensor:
    positive = x.data > 0

    def backward(grad):
        return (grad * positive,)

    return Tensor._from_op("relu", np.where(positive, x.data, 0.0), (x,), backward)


def exp(x: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        out = np.exp(x.data)

    def backward(grad):
        return (grad * out,)

    return Tensor._from_op("exp", out, (x,), backward)


def log(x: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.data)
    inputs = x.data

    def backward(grad):
        return (grad / inputs,)

    return Tensor._from_op("log", out, (x,), backward)


def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(sorted(a % ndim for a in axes))


def reduce_sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    shape = x.shape
    kept_shape = tuple(1 if i in axes else n for i, n in enumerate(shape))

    def backward(grad):
        return (np.broadcast_to(np.reshape(grad, kept_shape), shape).copy(),)

    out = np.sum(x.data, axis=axes, keepdims=keepdims)
    return Tensor._from_op("sum", out, (x,), backward)


def reduce_mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    return mul(reduce_sum(x, axis=axes, keepdims=keepdims), 1.0 / count)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along ``axis`` (the channel axis for NCHW by default)."""
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    reference = tensors[0].shape
    axis = axis % len(reference)
    for t in tensors[1:]:
        if len(t.shape) != len(reference) or any(
            n != m for i, (n, m) in enumerate(zip(t.shape, reference)) if i != axis
        ):
            raise ShapeError(f"concat: shape {t.shape} incompatible with {reference} on axis {axis}")
    boundaries = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, boundaries, axis=axis))

    out = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor._from_op("concat", out, tuple(tensors), backward)


def stop_gradient(x: Tensor) -> Tensor:
    """Same values, detached from the tape."""
    return Tensor(x.data, requires_grad=False, name=x.name)


def argmax(x: Union[Tensor, np.ndarray], axis: int = 1) -> np.ndarray:
    """Index of the largest entry along ``axis``; ties resolve to the lowest index."""
    values = x.data if isinstance(x, Tensor) else np.asarray(x)
    return np.argmax(values, axis=axis)
