"""
Confusion matrix and mean intersection-over-union.
"""

from typing import List, Optional

import numpy as np

from config.run_config import IGNORE_INDEX
from utils.errors import DataError, ShapeError


class ConfusionMatrix:
    """K x K pixel counts, rows = ground truth, columns = prediction."""

    def __init__(self, num_classes: int, ignore_index: int = IGNORE_INDEX):
        self.num_classes = num_classes
        self.ignore_index = ignore_index
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @classmethod
    def from_counts(cls, counts, ignore_index: int = IGNORE_INDEX) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeError(f"confusion counts must be square, got {counts.shape}")
        if (counts < 0).any():
            raise DataError("confusion counts must be non-negative")
        cm = cls(counts.shape[0], ignore_index)
        cm.counts = counts.copy()
        return cm

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, pred: np.ndarray, truth: np.ndarray) -> "ConfusionMatrix":
        """Count every pixel whose truth is not ``ignore_index``.

        Raises:
            DataError: If a counted pixel has a class outside 0..K-1
        """
        pred, truth = np.asarray(pred), np.asarray(truth)
        if pred.shape != truth.shape:
            raise ShapeError(f"prediction {pred.shape} and truth {truth.shape} differ")
        valid = truth != self.ignore_index
        t = truth[valid].astype(np.int64)
        p = pred[valid].astype(np.int64)
        k = self.num_classes
        if t.size and (t.min() < 0 or t.max() >= k or p.min() < 0 or p.max() >= k):
            raise DataError(f"class index outside 0..{k - 1} in confusion accumulation")
        self.counts += np.bincount(t * k + p, minlength=k * k).reshape(k, k)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ShapeError(f"cannot merge {self.num_classes}-class and {other.num_classes}-class matrices")
        return ConfusionMatrix.from_counts(self.counts + other.counts, self.ignore_index)

    __add__ = merge

    def iou_per_class(self) -> np.ndarray:
        """IoU per class; NaN where a class is absent from both truth and prediction."""
        intersection = np.diag(self.counts).astype(np.float64)
        union = self.counts.sum(axis=0) + self.counts.sum(axis=1) - intersection
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(union > 0, intersection / np.maximum(union, 1), np.nan)

    def miou(self) -> float:
        """Mean IoU over classes with a non-zero union; 0 for an empty matrix."""
        iou = self.iou_per_class()
        present = ~np.isnan(iou)
        return float(iou[present].mean()) if present.any() else 0.0

    def iou_list(self) -> List[Optional[float]]:
        return [None if np.isnan(v) else float(v) for v in self.iou_per_class()]


def accumulate(cm: ConfusionMatrix, pred: np.ndarray, truth: np.ndarray) -> ConfusionMatrix:
    return cm.accumulate(pred, truth)


def miou(cm: ConfusionMatrix) -> float:
    return cm.miou()
