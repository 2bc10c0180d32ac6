#!/usr/bin/env python3
"""
Summarize an ablation preset from its summary.csv.

- Per variant: mean, std and count of final junior (and senior) mIoU over seeds
- Per variant against the first variant of the preset, paired by seed:
  mean delta, number of seeds where the variant wins, paired t-test p-value

Writes trend.csv next to the input and prints the table to stdout.
"""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy import stats

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["preset", "variant", "seed", "miou_junior", "miou_senior"]
TREND_COLUMNS = [
    "variant", "seeds", "miou_junior_mean", "miou_junior_std", "miou_senior_mean",
    "delta_vs_baseline", "wins_vs_baseline", "p_value",
]


def load_summary(path: Path) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in SUMMARY_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path} lacks columns {missing}")
    df["miou_junior"] = pd.to_numeric(df["miou_junior"], errors="coerce")
    df["miou_senior"] = pd.to_numeric(df["miou_senior"], errors="coerce")
    return df


def paired_p_value(baseline: np.ndarray, other: np.ndarray) -> float:
    """Two-sided paired t-test; NaN with fewer than two seeds or no spread in the differences."""
    if len(baseline) < 2:
        return float("nan")
    diff = other - baseline
    if np.allclose(diff, diff[0]):
        return float("nan")
    return float(stats.ttest_rel(other, baseline).pvalue)


def compute_trend(df: pd.DataFrame, order: Optional[List[str]] = None) -> pd.DataFrame:
    """One row per variant in ``order`` (default: first appearance in ``df``)."""
    order = order or list(dict.fromkeys(df["variant"]))
    grouped = df.groupby("variant")
    baseline = grouped.get_group(order[0]).set_index("seed")["miou_junior"]

    rows = []
    for variant in order:
        scores = grouped.get_group(variant).set_index("seed")["miou_junior"]
        seniors = grouped.get_group(variant)["miou_senior"]
        common = baseline.index.intersection(scores.index)
        base_vals = baseline.loc[common].to_numpy(dtype=float)
        vals = scores.loc[common].to_numpy(dtype=float)
        rows.append({
            "variant": variant,
            "seeds": int(scores.count()),
            "miou_junior_mean": float(scores.mean()),
            "miou_junior_std": float(scores.std(ddof=1)) if scores.count() > 1 else 0.0,
            "miou_senior_mean": float(seniors.mean()) if seniors.notna().any() else float("nan"),
            "delta_vs_baseline": float(np.mean(vals - base_vals)) if len(common) else float("nan"),
            "wins_vs_baseline": int(np.sum(vals > base_vals)),
            "p_value": paired_p_value(base_vals, vals),
        })
    return pd.DataFrame(rows, columns=TREND_COLUMNS)


def summarize(summary_csv: Path, order: Optional[List[str]] = None, out_path: Optional[Path] = None) -> pd.DataFrame:
    summary_csv = Path(summary_csv)
    trend = compute_trend(load_summary(summary_csv), order)
    out_path = Path(out_path) if out_path else summary_csv.with_name("trend.csv")
    trend.to_csv(out_path, index=False)
    logger.info(f"Wrote {out_path}")
    return trend


def main():
    parser = argparse.ArgumentParser(description="Summarize an ablation preset's summary.csv across seeds")
    parser.add_argument("summary", type=Path, help="summary.csv written by 'train --preset'")
    parser.add_argument("--out", type=Path, default=None, help="Output CSV (default: trend.csv next to the input)")
    args = parser.parse_args()

    trend = summarize(args.summary, out_path=args.out)
    print("=" * 60)
    print("ABLATION TREND")
    print("=" * 60)
    print(trend.to_string(index=False, float_format=lambda v: f"{v:.4f}"))


if __name__ == "__main__":
    main()
