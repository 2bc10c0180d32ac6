"""
Indexable scene collections: generated on demand, or read from a dumped directory.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Tuple

from config.run_config import RunConfig, SceneSpec
from data.netpbm import read_pgm, read_ppm
from data.scenes import SegSample, generate_scene
from utils.errors import DataError

logger = logging.getLogger(__name__)

IMAGE_PATTERN = "img_{:05d}.ppm"
LABEL_PATTERN = "lbl_{:05d}.pgm"
_IMAGE_RE = re.compile(r"img_(\d{5})\.ppm$")


class SyntheticSegDataset:
    """Scenes ``offset .. offset+size-1`` of a SceneSpec, generated lazily and cached."""

    def __init__(self, spec: SceneSpec, size: int, offset: int = 0):
        self.spec = spec
        self.size = size
        self.offset = offset
        self._cache: Dict[int, SegSample] = {}

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> SegSample:
        if not 0 <= i < self.size:
            raise IndexError(f"scene {i} outside dataset of size {self.size}")
        sample = self._cache.get(i)
        if sample is None:
            generated = generate_scene(self.spec, self.offset + i)
            sample = SegSample(i, generated.image_u8, generated.labels)
            self._cache[i] = sample
        return sample


class DiskSegDataset:
    """Scenes previously written by the dataset dump (``img_%05d.ppm`` / ``lbl_%05d.pgm``)."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise DataError(f"dataset directory not found: {self.directory}")
        ids = sorted(int(m.group(1)) for p in self.directory.iterdir() if (m := _IMAGE_RE.match(p.name)))
        if ids != list(range(len(ids))):
            raise DataError(f"{self.directory}: image ids are not contiguous from 0")
        self.size = len(ids)
        self._cache: Dict[int, SegSample] = {}

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> SegSample:
        if not 0 <= i < self.size:
            raise IndexError(f"scene {i} outside dataset of size {self.size}")
        sample = self._cache.get(i)
        if sample is None:
            image = read_ppm(self.directory / IMAGE_PATTERN.format(i))
            labels = read_pgm(self.directory / LABEL_PATTERN.format(i))
            if image.shape[:2] != labels.shape:
                raise DataError(f"{self.directory}: scene {i} image {image.shape} and labels {labels.shape} differ")
            sample = SegSample(i, image, labels)
            self._cache[i] = sample
        return sample


def build_datasets(config: RunConfig) -> Tuple[object, object]:
    """Training and validation datasets for a resolved run configuration."""
    spec = config.scene
    if spec.data_dir:
        root = Path(spec.data_dir)
        train, val = DiskSegDataset(root / "train"), DiskSegDataset(root / "val")
        logger.info(f"Loaded {len(train)} training and {len(val)} validation scenes from {root}")
        return train, val
    return (
        SyntheticSegDataset(spec, spec.dataset_size),
        SyntheticSegDataset(spec, spec.val_size, offset=spec.dataset_size),
    )