"""
Dataset-level evaluation of one branch of a DualModel.

Images are predicted in parallel threads; inference records no tape, so the
shared model is only read. Per-image confusion matrices are merged at the end.
"""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import psutil

from config.run_config import EvalConfig, IGNORE_INDEX
from data.netpbm import write_pgm
from evaluation.inference import predict_labels
from evaluation.metrics import ConfusionMatrix
from models.dual_model import DualModel
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "SEGKC_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else ``SEGKC_THREADS``, else the physical core count."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                threads = int(raw)
            except ValueError as exc:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from exc
        else:
            threads = psutil.cpu_count(logical=False) or 1
    if threads < 1:
        raise ConfigError(f"thread count must be >= 1, got {threads}")
    return threads


@dataclass
class EvaluationResult:
    branch: str
    confusion: ConfusionMatrix
    predictions: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def miou(self) -> float:
        return self.confusion.miou()

    @property
    def iou_per_class(self) -> List[Optional[float]]:
        return self.confusion.iou_list()


def evaluate_dataset(
    model: DualModel,
    dataset,
    eval_config: EvalConfig,
    num_classes: int,
    branch: str = "junior",
    threads: Optional[int] = None,
    keep_predictions: int = 0,
    divisor: Optional[int] = None,
) -> EvaluationResult:
    """Predict every scene of ``dataset`` with ``branch`` and score against its labels.

    Args:
        model: Trained (or initialised) model
        dataset: Indexable collection of SegSample
        eval_config: Window, stride, averaging and divisor settings
        num_classes: Number of classes K
        branch: ``junior`` or ``senior``
        threads: Worker threads; see :func:`resolve_threads`
        keep_predictions: Number of leading predictions to return for dumping
        divisor: Resize divisor overriding ``eval_config.divisor``

    Returns:
        EvaluationResult with the merged confusion matrix
    """
    if branch == "senior" and not model.has_senior:
        raise ConfigError("senior branch requested but the model has no senior weights", field="branch")
    divisor = divisor or eval_config.divisor or model.output_stride()
    stride = eval_config.window_stride

    def predict(tensor):
        return model.forward_branch(branch, tensor)

    def run(i: int):
        sample = dataset[i]
        pred = predict_labels(
            predict, sample.image, divisor, eval_config.window, stride, eval_config.sliding, eval_config.average
        )
        cm = ConfusionMatrix(num_classes, IGNORE_INDEX).accumulate(pred, sample.labels)
        return i, pred, cm

    workers = min(resolve_threads(threads), max(len(dataset), 1))
    confusion = ConfusionMatrix(num_classes, IGNORE_INDEX)
    predictions: Dict[int, np.ndarray] = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, pred, cm in pool.map(run, range(len(dataset))):
            confusion = confusion.merge(cm)
            if i < keep_predictions:
                predictions[i] = pred
    logger.debug(f"Evaluated {len(dataset)} scenes on the {branch} branch with {workers} threads")
    return EvaluationResult(branch, confusion, predictions)


def write_iou_csv(path: Path, results: Dict[str, EvaluationResult]) -> Path:
    """One row per class plus a final ``mean`` row; one column per evaluated branch."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    branches = list(results)
    num_classes = next(iter(results.values())).confusion.num_classes if results else 0
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["class"] + [f"iou_{b}" for b in branches])
        for c in range(num_classes):
            row = [c]
            for b in branches:
                value = results[b].iou_per_class[c]
                row.append("" if value is None else repr(value))
            writer.writerow(row)
        writer.writerow(["mean"] + [repr(results[b].miou) for b in branches])
    return path


def write_predictions(directory: Path, predictions: Dict[int, np.ndarray]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, pred in sorted(predictions.items()):
        write_pgm(directory / f"pred_{i:05d}.pgm", pred.astype(np.uint8))


def format_iou_table(results: Dict[str, EvaluationResult]) -> str:
    """Plain-text per-class IoU table for the console."""
    branches = list(results)
    lines = ["class  " + "  ".join(f"{b:>8}" for b in branches)]
    num_classes = next(iter(results.values())).confusion.num_classes if results else 0
    for c in range(num_classes):
        cells = []
        for b in branches:
            value = results[b].iou_per_class[c]
            cells.append(f"{'-':>8}" if value is None else f"{value:8.4f}")
        lines.append(f"{c:<5}  " + "  ".join(cells))
    lines.append("mIoU   " + "  ".join(f"{results[b].miou:8.4f}" for b in branches))
    return "\n".join(lines)
