"""
Per-pixel cross-entropy terms: supervised loss, pseudo-labels and the
cross pseudo-supervision consistency loss.
"""

from dataclasses import dataclass

import numpy as np

from config.run_config import IGNORE_INDEX
from numerics import Tensor, argmax, log_softmax_t, softmax_array
from utils.errors import DataError, ShapeError


@dataclass
class PseudoLabels:
    """Hard targets produced by one branch for its peer.

    Attributes:
        labels: Argmax class per pixel [N,H,W]
        mask: True where the producing branch is confident enough [N,H,W]
        confidence: Maximum softmax probability per pixel [N,H,W]
    """

    labels: np.ndarray
    mask: np.ndarray
    confidence: np.ndarray

    @property
    def suppressed_fraction(self) -> float:
        return float(1.0 - self.mask.mean()) if self.mask.size else 0.0


def masked_cross_entropy(logits: Tensor, labels: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean of -log softmax(logits)[label] over the pixels where ``mask`` holds.

    Pixels outside the mask contribute nothing to the value or the gradient;
    an empty mask gives exactly 0.
    """
    n, k, h, w = logits.shape
    if labels.shape != (n, h, w) or mask.shape != (n, h, w):
        raise ShapeError(f"labels {labels.shape} / mask {mask.shape} do not match logits {logits.shape}")
    safe_labels = np.where(mask, labels, 0)
    one_hot = (safe_labels[:, None] == np.arange(k)[None, :, None, None]) & mask[:, None]
    count = int(mask.sum())
    log_probs = log_softmax_t(logits, 1.0, axis=1)
    picked = (log_probs * one_hot.astype(log_probs.data.dtype)).sum()
    # + 0.0 turns the -0.0 of an empty mask into 0.0
    return picked * (-1.0 / max(count, 1)) + 0.0


def supervised_loss(logits: Tensor, labels: np.ndarray, ignore_index: int = IGNORE_INDEX) -> Tensor:
    """Cross-entropy against ground truth, averaged over non-ignored pixels.

    Raises:
        DataError: If a label is neither a class index nor ``ignore_index``
    """
    labels = np.asarray(labels)
    num_classes = logits.shape[1]
    valid = labels != ignore_index
    bad = valid & ((labels < 0) | (labels >= num_classes))
    if bad.any():
        raise DataError(
            f"label values {sorted(np.unique(labels[bad]).tolist())} outside 0..{num_classes - 1} "
            f"and not ignore_index {ignore_index}"
        )
    return masked_cross_entropy(logits, labels, valid)


def make_pseudo_labels(logits: Tensor, conf_tau: float) -> PseudoLabels:
    """Argmax pseudo-labels with a confidence mask; reads values only, never the graph."""
    values = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    confidence = softmax_array(values, 1.0, axis=1).max(axis=1)
    return PseudoLabels(argmax(values, axis=1), confidence >= conf_tau, confidence)


def consistency_loss(logits_a: Tensor, pseudo_from_b: PseudoLabels) -> Tensor:
    """Cross-entropy of branch a against branch b's confident pseudo-labels."""
    return masked_cross_entropy(logits_a, pseudo_from_b.labels, pseudo_from_b.mask)
