"""
Labeled/unlabeled partitions of a dataset.

Manifest file format (text, one record per line):

    <dataset_size> <ratio_name> <seed>
    <labeled id>
    <labeled id>
    ...

Ids are written sorted so that manifests diff cleanly.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from config.run_config import SPLIT_RATIOS
from utils.errors import ConfigError, DataError


@dataclass(frozen=True)
class SplitManifest:
    dataset_size: int
    labeled_ids: Tuple[int, ...]
    ratio_name: str
    seed: int

    @property
    def is_full(self) -> bool:
        return self.ratio_name == "full"

    def unlabeled_ids(self) -> List[int]:
        labeled = set(self.labeled_ids)
        return [i for i in range(self.dataset_size) if i not in labeled]

    def to_text(self) -> str:
        lines = [f"{self.dataset_size} {self.ratio_name} {self.seed}"]
        lines.extend(str(i) for i in self.labeled_ids)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SplitManifest":
        """Parse :meth:`to_text` output.

        Raises:
            DataError: On a malformed header, bad ids, or unsorted/duplicate ids
        """
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines:
            raise DataError("empty split manifest")
        header = lines[0].split()
        if len(header) != 3:
            raise DataError(f"manifest header must be 'size ratio seed', got '{lines[0]}'")
        try:
            size, seed = int(header[0]), int(header[2])
            ids = tuple(int(line) for line in lines[1:])
        except ValueError as exc:
            raise DataError(f"malformed manifest: {exc}") from exc
        ratio = header[1]
        if ratio not in SPLIT_RATIOS:
            raise DataError(f"manifest names unknown ratio '{ratio}'")
        if list(ids) != sorted(set(ids)):
            raise DataError("manifest ids must be sorted and unique")
        if ids and (ids[0] < 0 or ids[-1] >= size):
            raise DataError(f"manifest ids must lie in [0, {size})")
        return cls(size, ids, ratio, seed)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> "SplitManifest":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"manifest not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))


def labeled_count(dataset_size: int, ratio_name: str) -> int:
    if ratio_name not in SPLIT_RATIOS:
        raise ConfigError(f"unknown ratio '{ratio_name}', expected one of {list(SPLIT_RATIOS)}", field="split.ratio")
    return math.ceil(dataset_size * SPLIT_RATIOS[ratio_name])


def make_split(dataset_size: int, ratio_name: str, seed: int) -> SplitManifest:
    """Shuffle ids with ``seed`` and label the first ceil(size * ratio) of them."""
    count = labeled_count(dataset_size, ratio_name)
    if dataset_size < 1:
        raise ConfigError(f"dataset size must be positive, got {dataset_size}", field="scene.dataset_size")
    order = np.random.default_rng(seed).permutation(dataset_size)
    return SplitManifest(dataset_size, tuple(sorted(int(i) for i in order[:count])), ratio_name, seed)
