"""
Inference helpers: divisibility resizing and sliding-window prediction.
"""

from typing import Callable, List, Tuple

import numpy as np

from numerics import Tensor, bilinear_resize, no_grad, resize_array, softmax_array
from utils.errors import ParameterError

PredictFn = Callable[[Tensor], Tensor]


def nearest_multiple(size: int, divisor: int) -> int:
    """Nearest multiple of ``divisor``, halves rounded up, never below ``divisor``."""
    return max(divisor, (2 * size + divisor) // (2 * divisor) * divisor)


def resize_for_inference(image: Tensor, divisor: int) -> Tuple[Tensor, Tuple[int, int]]:
    """Bilinear-resize H and W to multiples of ``divisor``; also return the original size."""
    if divisor < 1:
        raise ParameterError(f"divisor must be >= 1, got {divisor}")
    height, width = image.shape[2:]
    target = (nearest_multiple(height, divisor), nearest_multiple(width, divisor))
    with no_grad():
        return bilinear_resize(image, *target), (height, width)


def window_starts(size: int, window: int, stride: int) -> List[int]:
    """Tile origins along one axis; the last tile ends flush with the border."""
    starts = list(range(0, size - window + 1, stride))
    if starts[-1] + window < size:
        starts.append(size - window)
    return starts


def sliding_window_predict(
    predict: PredictFn,
    image: Tensor,
    window: int,
    stride: int,
    average: str = "logits",
) -> Tensor:
    """Average per-pixel outputs of overlapping tiles.

    Tiles are ``window`` square, clipped to the image. When one tile covers
    the whole image this is a single forward pass. With ``average="probs"``
    the tiles' softmax probabilities are averaged instead of their logits.
    """
    if stride < 1 or window < stride:
        raise ParameterError(f"need window >= stride >= 1, got window {window}, stride {stride}")
    if average not in ("logits", "probs"):
        raise ParameterError(f"average must be 'logits' or 'probs', got '{average}'")
    height, width = image.shape[2:]
    win_h, win_w = min(window, height), min(window, width)
    if (win_h, win_w) == (height, width):
        out = predict(image)
        return Tensor(softmax_array(out.data, axis=1)) if average == "probs" else out

    total = None
    count = np.zeros((height, width))
    for y in window_starts(height, win_h, stride):
        for x in window_starts(width, win_w, stride):
            tile = Tensor(image.data[:, :, y:y + win_h, x:x + win_w])
            out = predict(tile).data
            if average == "probs":
                out = softmax_array(out, axis=1)
            if total is None:
                total = np.zeros(image.shape[:1] + out.shape[1:2] + (height, width))
            total[:, :, y:y + win_h, x:x + win_w] += out
            count[y:y + win_h, x:x + win_w] += 1
    return Tensor(total / count)


def predict_labels(
    predict: PredictFn,
    image: np.ndarray,
    divisor: int,
    window: int,
    stride: int,
    sliding: bool = True,
    average: str = "logits",
) -> np.ndarray:
    """Full inference pipeline for one [3,H,W] image; returns an [H,W] class map."""
    batch = Tensor(image[None])
    resized, (height, width) = resize_for_inference(batch, divisor)
    if sliding:
        scores = sliding_window_predict(predict, resized, window, stride, average)
    else:
        scores = predict(resized)
    scores = resize_array(scores.data, height, width)
    return np.argmax(scores[0], axis=0)
