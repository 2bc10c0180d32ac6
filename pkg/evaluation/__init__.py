"""
mIoU computation, inference resizing, sliding-window prediction and dataset evaluation.
"""

from .metrics import ConfusionMatrix, accumulate, miou
from .inference import nearest_multiple, predict_labels, resize_for_inference, sliding_window_predict, window_starts
from .evaluator import (
    EvaluationResult,
    evaluate_dataset,
    format_iou_table,
    resolve_threads,
    write_iou_csv,
    write_predictions,
)

__all__ = [
    'ConfusionMatrix',
    'accumulate',
    'miou',
    'nearest_multiple',
    'predict_labels',
    'resize_for_inference',
    'sliding_window_predict',
    'window_starts',
    'EvaluationResult',
    'evaluate_dataset',
    'format_iou_table',
    'resolve_threads',
    'write_iou_csv',
    'write_predictions',
]
