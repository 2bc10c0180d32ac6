"""
Dense tensor arithmetic with reverse-mode automatic differentiation.
"""

from .tensor import (
    GraphTape,
    Tensor,
    backward,
    current_tape,
    fresh_tape,
    get_default_dtype,
    no_grad,
    set_default_dtype,
)
from .ops import add, argmax, concat, exp, log, mul, reduce_mean, reduce_sum, relu, stop_gradient, sub
from .conv import conv2d, conv_output_size
from .resize import bilinear_resize, resize_array
from .softmax import log_softmax_t, softmax_array, softmax_t
from .gradcheck import check_gradients

__all__ = [
    'GraphTape',
    'Tensor',
    'backward',
    'current_tape',
    'fresh_tape',
    'get_default_dtype',
    'no_grad',
    'set_default_dtype',
    'add',
    'argmax',
    'concat',
    'exp',
    'log',
    'mul',
    'reduce_mean',
    'reduce_sum',
    'relu',
    'stop_gradient',
    'sub',
    'conv2d',
    'conv_output_size',
    'bilinear_resize',
    'resize_array',
    'log_softmax_t',
    'softmax_array',
    'softmax_t',
    'check_gradients',
]
