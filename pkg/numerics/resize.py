"""
Bilinear resizing with half-pixel centres (align_corners=False).

Resizing is separable, so it is expressed as two small interpolation matrices
applied along height and width.
"""

from functools import lru_cache

import numpy as np

from numerics.tensor import Tensor
from utils.errors import ParameterError, ShapeError


@lru_cache(maxsize=256)
def interpolation_matrix(in_size: int, out_size: int) -> np.ndarray:
    """Row i holds the weights of output sample i over the input samples."""
    matrix = np.zeros((out_size, in_size), dtype=np.float64)
    scale = in_size / out_size
    for i in range(out_size):
        source = max((i + 0.5) * scale - 0.5, 0.0)
        lower = min(int(np.floor(source)), in_size - 1)
        upper = min(lower + 1, in_size - 1)
        frac = source - lower
        matrix[i, lower] += 1.0 - frac
        matrix[i, upper] += frac
    matrix.setflags(write=False)
    return matrix


def bilinear_resize(input: Tensor, out_h: int, out_w: int) -> Tensor:
    if out_h < 1 or out_w < 1:
        raise ParameterError(f"output size must be positive, got {out_h}x{out_w}")
    if input.ndim != 4:
        raise ShapeError(f"bilinear_resize expects [N,C,H,W], got {input.shape}")
    h, w = input.shape[2:]
    if (h, w) == (out_h, out_w):
        return input
    rows = interpolation_matrix(h, out_h)
    cols = interpolation_matrix(w, out_w)
    out = np.einsum("ih,nchw,jw->ncij", rows, input.data, cols, optimize=True)

    def backward(grad):
        return (np.einsum("ih,ncij,jw->nchw", rows, grad, cols, optimize=True),)

    return Tensor._from_op("bilinear_resize", out, (input,), backward)


def resize_array(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a plain [N,C,H,W] array."""
    h, w = values.shape[2:]
    if (h, w) == (out_h, out_w):
        return values
    return np.einsum(
        "ih,nchw,jw->ncij", interpolation_matrix(h, out_h), values, interpolation_matrix(w, out_w), optimize=True
    )
