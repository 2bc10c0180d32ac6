"""
Dense tensors with reverse-mode differentiation.

Every differentiable operation executed while gradient recording is enabled
appends one entry to the calling thread's GraphTape. ``backward`` walks that
tape once, newest entry first, and accumulates gradients additively.
"""

import logging
import os
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ContractError, NumericalError

logger = logging.getLogger(__name__)

_SUPPORTED_DTYPES = {"float64": np.float64, "float32": np.float32}
_default_dtype = _SUPPORTED_DTYPES.get(os.environ.get("SEGKC_DTYPE", "float64"), np.float64)


def set_default_dtype(name: str) -> None:
    """Select the floating-point precision used for new tensors."""
    global _default_dtype
    if name not in _SUPPORTED_DTYPES:
        raise ValueError(f"Unsupported dtype '{name}', expected one of {sorted(_SUPPORTED_DTYPES)}")
    _default_dtype = _SUPPORTED_DTYPES[name]


def get_default_dtype() -> type:
    return _default_dtype


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeEntry:
    """One executed differentiable operation."""

    op: str
    inputs: Tuple["Tensor", ...]
    output: "Tensor"
    backward: BackwardFn
    tape: "GraphTape"
    index: int


class GraphTape:
    """Ordered record of differentiable operations for one thread."""

    def __init__(self):
        self._entries: List[TapeEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    def record(self, op: str, inputs: Sequence["Tensor"], output: "Tensor", backward: BackwardFn) -> TapeEntry:
        entry = TapeEntry(op, tuple(inputs), output, backward, self, len(self._entries))
        self._entries.append(entry)
        return entry

    def contains(self, entry: Optional[TapeEntry]) -> bool:
        return (
            entry is not None
            and entry.tape is self
            and entry.index < len(self._entries)
            and self._entries[entry.index] is entry
        )

    def reset(self) -> None:
        for entry in self._entries:
            entry.output._entry = None
        self._entries = []

    def backward(self, root: "Tensor") -> None:
        """Populate ``grad`` of every requires_grad tensor that ``root`` depends on."""
        if root.size != 1:
            raise ContractError(f"backward needs a scalar root, got shape {root.shape}")
        if not self.contains(root._entry):
            raise ContractError("backward root was not produced on the active tape")

        grads = {id(root): np.ones_like(root.data)}
        owners = {id(root): root}
        for entry in reversed(self._entries[: root._entry.index + 1]):
            grad_out = grads.pop(id(entry.output), None)
            if grad_out is None:
                continue
            entry.output.grad = grad_out
            for tensor, grad_in in zip(entry.inputs, entry.backward(grad_out)):
                if grad_in is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad_in
                else:
                    grads[key] = grad_in
                    owners[key] = tensor

        # what is left belongs to leaves
        for key, grad in grads.items():
            leaf = owners[key]
            if not np.all(np.isfinite(grad)):
                raise NumericalError(f"non-finite gradient reached leaf '{leaf.name or key}'")
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
        self.reset()


class _ThreadState(threading.local):
    def __init__(self):
        self.tape = GraphTape()
        self.recording = True


_state = _ThreadState()


def current_tape() -> GraphTape:
    return _state.tape


def is_recording() -> bool:
    return _state.recording


@contextmanager
def no_grad() -> Iterator[None]:
    """Run operations without recording them (inference)."""
    previous = _state.recording
    _state.recording = False
    try:
        yield
    finally:
        _state.recording = previous


@contextmanager
def fresh_tape() -> Iterator[GraphTape]:
    """Give the current thread an empty tape for the duration of the block."""
    previous = _state.tape
    _state.tape = GraphTape()
    try:
        yield _state.tape
    finally:
        _state.tape = previous


class Tensor:
    """Dense array that can take part in a differentiation graph."""

    def __init__(self, values, requires_grad: bool = False, name: Optional[str] = None, copy: bool = True):
        data = np.array(values, dtype=_default_dtype) if copy else np.asarray(values, dtype=_default_dtype)
        if not np.all(np.isfinite(data)):
            raise NumericalError(f"tensor '{name or 'unnamed'}' would hold non-finite values")
        self.data = data
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._entry: Optional[TapeEntry] = None

    @classmethod
    def _from_op(cls, op: str, data: np.ndarray, inputs: Sequence["Tensor"], backward: BackwardFn) -> "Tensor":
        needs_grad = is_recording() and any(t.requires_grad for t in inputs)
        try:
            out = cls(data, requires_grad=needs_grad, copy=False)
        except NumericalError as exc:
            raise NumericalError(f"{op} produced non-finite values") from exc
        if needs_grad:
            out._entry = current_tape().record(op, inputs, out, backward)
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def backward(self) -> None:
        current_tape().backward(self)

    def detach(self) -> "Tensor":
        from numerics.ops import stop_gradient
        return stop_gradient(self)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        from numerics.ops import add
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from numerics.ops import sub
        return sub(self, other)

    def __rsub__(self, other):
        from numerics.ops import mul, add
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        from numerics.ops import mul
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from numerics.ops import mul
        return mul(self, -1.0)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from numerics.ops import reduce_sum
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from numerics.ops import reduce_mean
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def relu(self) -> "Tensor":
        from numerics.ops import relu
        return relu(self)

    def exp(self) -> "Tensor":
        from numerics.ops import exp
        return exp(self)

    def log(self) -> "Tensor":
        from numerics.ops import log
        return log(self)


def backward(root: Tensor) -> None:
    """Differentiate the scalar ``root`` with respect to every tensor on the tape."""
    current_tape().backward(root)
