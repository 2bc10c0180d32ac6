"""
Implementations of the ``gen-data``, ``train`` and ``eval`` subcommands.

Each command takes the parsed namespace plus generic dotted overrides and
returns the process exit code; errors propagate as ``SegKCError`` subclasses.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Mapping

from cli.arguments import flag_overrides
from config.config_file import apply_overrides, load_config, parse_config_text
from config.run_config import RunConfig
from data.datasets import build_datasets
from data.dump import dump_dataset
from evaluation.evaluator import evaluate_dataset, format_iou_table, write_iou_csv
from models.checkpoint import load_checkpoint, restore_model
from models.dual_model import DualModel
from training.ablation import run_preset
from training.runner import run_experiment
from utils.colors import print_step, print_success, print_warning, summary

logger = logging.getLogger(__name__)


def _merged_overrides(args: argparse.Namespace, overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = flag_overrides(args)
    merged.update(overrides)
    # a new window invalidates a stride derived from the old one
    if "eval.window" in merged and "eval.stride" not in merged:
        merged["eval.stride"] = None
    return merged


def build_config(args: argparse.Namespace, overrides: Mapping[str, Any], base: RunConfig = None) -> RunConfig:
    """Defaults (or ``base``), then ``--config``, then named flags, then ``--section.field`` overrides."""
    config = base or RunConfig()
    if getattr(args, "config", None):
        config = load_config(Path(args.config), base=config)
    return apply_overrides(config, _merged_overrides(args, overrides))


def cmd_gen_data(args: argparse.Namespace, overrides: Mapping[str, Any]) -> int:
    config = build_config(args, overrides)
    out_dir = Path(args.out)
    print_step(f"Generating {config.scene.dataset_size} + {config.scene.val_size} scenes", 1)
    manifest = dump_dataset(config, out_dir)
    print_success(f"Dataset written to {out_dir}")
    print_success(
        f"Split {manifest.ratio_name}: {len(manifest.labeled_ids)} labeled, "
        f"{len(manifest.unlabeled_ids())} unlabeled"
    )
    return 0


def cmd_train(args: argparse.Namespace, overrides: Mapping[str, Any]) -> int:
    config = build_config(args, overrides)
    progress = not args.no_progress
    if args.preset:
        seeds = args.seeds or [config.seed]
        result = run_preset(args.preset, config, seeds, Path(config.out_dir), progress=progress, threads=args.threads)
        print(summary(f"{len(result.runs)} runs, summary in {result.summary_csv}"))
        return 0
    if args.seeds:
        print_warning("--seeds only applies together with --preset; using --seed")

    print_step(f"Training into {config.out_dir}", 1)
    result = run_experiment(
        config, progress=progress, resume=Path(args.resume) if args.resume else None, threads=args.threads
    )
    print_success(f"{result.iterations} iterations")
    line = f"junior mIoU {result.miou_junior:.4f}"
    if result.miou_senior is not None:
        line += f", senior mIoU {result.miou_senior:.4f}"
    print(summary(line))
    return 0


def config_from_checkpoint(meta: Mapping[str, Any], source: str) -> RunConfig:
    text = meta.get("config")
    if not text:
        logger.warning(f"{source} carries no configuration; using defaults")
        return RunConfig()
    return apply_overrides(RunConfig(), parse_config_text(text, source=source))


def cmd_eval(args: argparse.Namespace, overrides: Mapping[str, Any]) -> int:
    path = Path(args.checkpoint)
    senior = args.branch == "senior"
    checkpoint = load_checkpoint(path, junior_only=not senior)
    config = build_config(args, overrides, base=config_from_checkpoint(checkpoint.meta, str(path))).resolved()

    dual = DualModel.from_config(config)
    if not senior:
        dual.drop_senior()
    restore_model(checkpoint, dual)
    _, val_set = build_datasets(config)

    print_step(f"Evaluating the {args.branch} branch on {len(val_set)} scenes", 1)
    result = evaluate_dataset(dual, val_set, config.eval, config.scene.num_classes, args.branch, args.threads)
    print(format_iou_table({args.branch: result}))

    out_dir = Path(args.out) if args.out else path.parent
    csv_path = write_iou_csv(out_dir / f"eval_iou_{args.branch}.csv", {args.branch: result})
    print_success(f"Per-class IoU written to {csv_path}")
    print(summary(f"{args.branch} mIoU {result.miou:.4f}"))
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
}
