"""
Write a generated dataset to disk.

Layout::

    <out>/train/img_00000.ppm, lbl_00000.pgm, ...
    <out>/val/img_00000.ppm,   lbl_00000.pgm, ...
    <out>/manifest.txt
"""

import logging
from pathlib import Path

from config.run_config import RunConfig
from data.datasets import IMAGE_PATTERN, LABEL_PATTERN, SyntheticSegDataset
from data.netpbm import write_pgm, write_ppm
from data.splits import SplitManifest, make_split
from utils.errors import DataError

logger = logging.getLogger(__name__)


def _write_split(dataset: SyntheticSegDataset, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(len(dataset)):
        sample = dataset[i]
        write_ppm(directory / IMAGE_PATTERN.format(i), sample.image_u8)
        write_pgm(directory / LABEL_PATTERN.format(i), sample.labels)


def dump_dataset(config: RunConfig, out_dir: Path) -> SplitManifest:
    """Generate the train/val scenes of ``config`` and write them with the split manifest.

    Raises:
        DataError: If the output directory cannot be written
    """
    out_dir = Path(out_dir)
    spec = config.scene
    try:
        _write_split(SyntheticSegDataset(spec, spec.dataset_size), out_dir / "train")
        _write_split(SyntheticSegDataset(spec, spec.val_size, offset=spec.dataset_size), out_dir / "val")
        manifest = make_split(spec.dataset_size, config.split.ratio, config.split_seed)
        manifest.save(out_dir / "manifest.txt")
    except OSError as exc:
        raise DataError(f"cannot write dataset to {out_dir}: {exc}") from exc
    logger.info(f"Wrote {spec.dataset_size} training and {spec.val_size} validation scenes to {out_dir}")
    return manifest
