"""
Ablation presets: every variant of a preset, for every seed, on identical splits.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from config.config_file import apply_overrides
from config.presets import preset_variants
from config.run_config import RunConfig
from experiments.analysis.ablation_summary import summarize
from training.runner import ExperimentResult, run_experiment
from utils.colors import print_step, print_success

logger = logging.getLogger(__name__)

SUMMARY_HEADER = ["preset", "variant", "seed", "miou_junior", "miou_senior"]


@dataclass
class PresetResult:
    preset: str
    out_root: Path
    summary_csv: Path
    runs: List[ExperimentResult] = field(default_factory=list)


def variant_configs(name: str, base: RunConfig, seed: int, out_root: Path):
    """(variant, config) pairs for one seed; each run writes to ``out_root/<variant>/seed<seed>``."""
    pairs = []
    for variant, overrides in preset_variants(name, base):
        config = apply_overrides(base, dict(overrides, seed=seed, out_dir=str(out_root / variant / f"seed{seed}")))
        pairs.append((variant, config))
    return pairs


def run_preset(
    name: str,
    base: RunConfig,
    seeds: Sequence[int],
    out_root: Path,
    progress: bool = True,
    threads: Optional[int] = None,
) -> PresetResult:
    """Train every variant of preset ``name`` once per seed.

    Scene and split seeds are pinned from ``base`` so that all variants of a
    seed see the same data; only the model, loss and stream seeds follow
    ``seed``.
    """
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    resolved = base.resolved()
    base = apply_overrides(base, {"scene.seed": resolved.scene_seed, "split.seed": resolved.split_seed})

    summary_csv = out_root / "summary.csv"
    result = PresetResult(name, out_root, summary_csv)
    order: List[str] = []
    with open(summary_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_HEADER)
        for seed in seeds:
            for variant, config in variant_configs(name, base, seed, out_root):
                if variant not in order:
                    order.append(variant)
                print_step(f"{name}: {variant} (seed {seed})", len(result.runs) + 1)
                run = run_experiment(config, progress=progress, threads=threads, preset=name, variant=variant)
                result.runs.append(run)
                writer.writerow([
                    name, variant, seed, repr(run.miou_junior),
                    "" if run.miou_senior is None else repr(run.miou_senior),
                ])
                f.flush()
                print_success(f"junior mIoU {run.miou_junior:.4f}")

    trend = summarize(summary_csv, order)
    logger.info(f"{name} trend:\n{trend.to_string(index=False)}")
    return result
