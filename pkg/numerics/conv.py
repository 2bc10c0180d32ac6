"""
2-D cross-correlation (the "convolution" of deep-learning libraries).

Windows are taken with ``sliding_window_view`` and contracted with a single
``einsum`` so the heavy lifting runs through BLAS. The input gradient is the
full correlation of the stride-dilated output gradient with the flipped kernel.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from numerics.tensor import Tensor
from utils.errors import ParameterError, ShapeError


def _correlate(padded: np.ndarray, kernel: np.ndarray, stride: int) -> np.ndarray:
    kh, kw = kernel.shape[2:]
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    return np.einsum("nchwij,ocij->nohw", windows, kernel, optimize=True)


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def conv2d(input: Tensor, kernel: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Correlate ``input`` [N,C,H,W] with ``kernel`` [O,C,kH,kW].

    Output spatial size is floor((H + 2*padding - kH) / stride) + 1.
    """
    if stride < 1:
        raise ParameterError(f"stride must be positive, got {stride}")
    if padding < 0:
        raise ParameterError(f"padding must be non-negative, got {padding}")
    if input.ndim != 4 or kernel.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input and kernel, got {input.shape} and {kernel.shape}")
    n, c, h, w = input.shape
    o, kc, kh, kw = kernel.shape
    if kc != c:
        raise ShapeError(f"conv2d: input has {c} channels but kernel expects {kc}")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeError(f"conv2d: kernel {kh}x{kw} larger than padded input {h + 2 * padding}x{w + 2 * padding}")

    pad = ((0, 0), (0, 0), (padding, padding), (padding, padding))
    padded = np.pad(input.data, pad) if padding else input.data
    weights = kernel.data
    out = _correlate(padded, weights, stride)
    out_h, out_w = out.shape[2:]

    def backward(grad):
        windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        grad_kernel = np.einsum("nchwij,nohw->ocij", windows, grad, optimize=True)

        dilated = np.zeros((n, o, (out_h - 1) * stride + 1, (out_w - 1) * stride + 1), dtype=grad.dtype)
        dilated[:, :, ::stride, ::stride] = grad
        dilated = np.pad(dilated, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
        flipped = weights[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        grad_padded = _correlate(dilated, flipped, 1)

        # rows/cols the last window never reached get no gradient
        hp, wp = padded.shape[2:]
        grad_padded = np.pad(
            grad_padded,
            ((0, 0), (0, 0), (0, hp - grad_padded.shape[2]), (0, wp - grad_padded.shape[3])),
        )
        grad_input = grad_padded[:, :, padding:padding + h, padding:padding + w]
        return (grad_input, grad_kernel)

    return Tensor._from_op("conv2d", out, (input, kernel), backward)
