"""
Loss terms of senior/junior co-training and their aggregation.
"""

from .segmentation import (
    IGNORE_INDEX,
    PseudoLabels,
    consistency_loss,
    make_pseudo_labels,
    masked_cross_entropy,
    supervised_loss,
)
from .distillation import kd_loss
from .aggregate import TERM_NAMES, LossReport, LossTerms, make_report, total_loss, zero_term

__all__ = [
    'IGNORE_INDEX',
    'PseudoLabels',
    'consistency_loss',
    'make_pseudo_labels',
    'masked_cross_entropy',
    'supervised_loss',
    'kd_loss',
    'TERM_NAMES',
    'LossReport',
    'LossTerms',
    'make_report',
    'total_loss',
    'zero_term',
]
