"""
End-to-end experiment: data, model, co-training loop, evaluation and artifacts.

Every run directory receives:

  config.resolved      the exact configuration used
  metrics.csv          one row per iteration (evaluation rows carry miou_junior)
  iou_per_class.csv    final per-class IoU of the evaluated branches
  ckpt.final           final weights, optimizer moments and stream state
  preds/               final junior predictions for the first validation scenes
  run_report.json      structured summary of the run
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from tqdm import tqdm

from config.config_file import flatten_config, write_config
from config.run_config import RunConfig
from data.datasets import build_datasets
from data.splits import SplitManifest, make_split
from data.stream import BatchStream
from evaluation.evaluator import EvaluationResult, evaluate_dataset, write_iou_csv, write_predictions
from models.dual_model import DualModel
from training.optim import AdamW
from training.resume import resume_from, save_training_checkpoint
from training.step import TrainState, train_step
from utils.errors import SegKCError
from utils.run_report import RunReport

logger = logging.getLogger(__name__)

METRICS_HEADER = [
    "iter", "epoch", "lr", "sup_sr", "sup_jr", "con_sr", "con_jr", "kd", "total", "masked_fraction", "miou_junior",
]


@dataclass
class ExperimentResult:
    out_dir: Path
    miou_junior: float
    miou_senior: Optional[float]
    iterations: int
    history: List[Dict[str, Any]] = field(default_factory=list)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class MetricsWriter:
    """Appends rows in METRICS_HEADER order to ``metrics.csv``."""

    def __init__(self, path: Path, append: bool = False):
        self.path = Path(path)
        exists = self.path.is_file()
        self._file = open(self.path, "a" if append and exists else "w", newline="")
        self._writer = csv.writer(self._file)
        if not (append and exists):
            self._writer.writerow(METRICS_HEADER)

    def write(self, row: Dict[str, Any], miou_junior: Optional[float] = None) -> None:
        values = dict(row, miou_junior=miou_junior)
        self._writer.writerow([_cell(values.get(name)) for name in METRICS_HEADER])
        self._file.flush()

    def close(self) -> None:
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def load_or_make_manifest(config: RunConfig, dataset_size: int) -> SplitManifest:
    """Reuse a dumped dataset's manifest when it matches the configured split."""
    if config.scene.data_dir:
        path = Path(config.scene.data_dir) / "manifest.txt"
        if path.is_file():
            manifest = SplitManifest.load(path)
            if manifest.ratio_name == config.split.ratio and manifest.dataset_size == dataset_size:
                return manifest
            logger.warning(f"{path} does not match split.ratio={config.split.ratio}; drawing a new split")
    return make_split(dataset_size, config.split.ratio, config.split_seed)


def evaluate_branches(dual: DualModel, dataset, config: RunConfig, threads: Optional[int] = None,
                      keep_predictions: int = 0, senior: bool = False) -> Dict[str, EvaluationResult]:
    results = {
        "junior": evaluate_dataset(
            dual, dataset, config.eval, config.scene.num_classes, "junior", threads, keep_predictions
        )
    }
    if senior and dual.has_senior:
        results["senior"] = evaluate_dataset(dual, dataset, config.eval, config.scene.num_classes, "senior", threads)
    return results


def run_experiment(
    config: RunConfig,
    progress: bool = True,
    resume: Optional[Path] = None,
    threads: Optional[int] = None,
    preset: Optional[str] = None,
    variant: Optional[str] = None,
) -> ExperimentResult:
    """Train and evaluate one configuration, writing all artifacts to ``config.out_dir``.

    With ``train.epochs = 0`` (and no explicit ``optim.total_iters``) the
    initialised model is evaluated without training.
    """
    config = config.resolved()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir / "config.resolved")

    report = RunReport(out_dir.name, "train")
    report.update_run_info(config.seed, preset, variant)
    report.update_config({k: list(v) if isinstance(v, tuple) else v for k, v in flatten_config(config).items()})

    train_set, val_set = build_datasets(config)
    manifest = load_or_make_manifest(config, len(train_set))
    stream = BatchStream(
        train_set,
        manifest,
        config.train.batch_size,
        seed=config.seed,
        augment=config.train.augment,
        crop_padding=config.train.crop_padding,
        ignore_index=config.loss.ignore_index,
    )
    dual = DualModel.from_config(config)
    optimizer = AdamW(dual.parameter_groups(), config.optim)
    total = config.optim.total_iters or config.train.epochs * stream.iterations_per_epoch
    state = TrainState(0, 0, config.seed, max(total, 1), optimizer, config.optim, stream)
    if resume is not None:
        resume_from(resume, dual, state)

    counts = dual.parameter_counts()
    report.update_model_info(config.model.pairing, config.model.fusion_mode, counts)
    report.update_data_info(
        len(train_set), len(manifest.labeled_ids), len(stream.unlabeled.pool), len(val_set), manifest.ratio_name
    )
    logger.info(
        f"{len(manifest.labeled_ids)} labeled / {len(stream.unlabeled.pool)} unlabeled scenes, "
        f"{total} iterations, parameters {counts}"
    )

    eval_every = config.train.eval_interval or stream.iterations_per_epoch
    results: Optional[Dict[str, EvaluationResult]] = None
    try:
        with MetricsWriter(out_dir / "metrics.csv", append=resume is not None) as metrics:
            if total == 0:
                results = evaluate_branches(dual, val_set, config, threads, config.eval.pred_dumps, config.train.eval_senior)
                metrics.write({"iter": 0, "epoch": 0}, results["junior"].miou)
                report.add_evaluation(0, 0, results["junior"].miou, _senior_miou(results))
            bar = tqdm(range(state.iteration, total), disable=not progress, desc=out_dir.name, ncols=90, leave=False)
            for _ in bar:
                labeled, unlabeled = stream.next_batch()
                loss_report = train_step(
                    state, dual, labeled, unlabeled, config.loss.weights, config.loss.thresholds, config.loss
                )
                miou_junior = None
                last = state.iteration == total
                if state.iteration % eval_every == 0 or last:
                    results = evaluate_branches(
                        dual, val_set, config, threads,
                        config.eval.pred_dumps if last else 0,
                        config.train.eval_senior and last,
                    )
                    miou_junior = results["junior"].miou
                    report.add_evaluation(state.iteration, state.epoch, miou_junior, _senior_miou(results))
                    logger.info(f"iter {state.iteration} epoch {state.epoch}: junior mIoU {miou_junior:.4f}")
                metrics.write(state.history[-1], miou_junior)
                bar.set_postfix(loss=f"{loss_report.total.item():.4f}", refresh=False)
                if state.iteration % config.train.log_interval == 0:
                    logger.debug(f"iter {state.iteration}: {loss_report.as_row()}")
            if results is None:
                # resumed at the end of the schedule
                results = evaluate_branches(dual, val_set, config, threads, config.eval.pred_dumps, config.train.eval_senior)
    except SegKCError as exc:
        report.record_failure(exc)
        report.save_report(out_dir)
        raise

    write_iou_csv(out_dir / "iou_per_class.csv", results)
    write_predictions(out_dir / "preds", results["junior"].predictions)
    save_training_checkpoint(out_dir / "ckpt.final", dual, state, config)

    final_losses = {k: v for k, v in state.history[-1].items() if k not in ("iter", "epoch")} if state.history else {}
    report.update_training(total, state.iteration, state.epoch, final_losses)
    report.update_final_metrics(results["junior"].miou, results["junior"].iou_per_class, _senior_miou(results))
    report.save_report(out_dir)
    return ExperimentResult(out_dir, results["junior"].miou, _senior_miou(results), state.iteration, list(state.history))


def _senior_miou(results: Dict[str, EvaluationResult]) -> Optional[float]:
    return results["senior"].miou if "senior" in results else None
