"""
Paired labeled/unlabeled batch streams.

The labeled stream cycles over the labeled ids, reshuffling at the start of
every pass. The unlabeled stream does the same over the remaining ids with its
own generator, and its passes define the training epoch. Unlabeled samples
never carry their true labels.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.run_config import IGNORE_INDEX
from data.splits import SplitManifest
from numerics import Tensor
from utils.errors import ConfigError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class SegBatch:
    images: Tensor
    labels: np.ndarray
    is_labeled: np.ndarray
    ids: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.ids)


def augment(
    image: np.ndarray,
    labels: np.ndarray,
    rng: np.random.Generator,
    padding: int,
    ignore_index: int = IGNORE_INDEX,
) -> Tuple[np.ndarray, np.ndarray]:
    """Random horizontal flip, then reflect-pad by ``padding`` and crop back.

    Image is [3,H,W], labels [H,W]; padded label pixels are ``ignore_index``.
    """
    if rng.random() < 0.5:
        image, labels = image[:, :, ::-1], labels[:, ::-1]
    height, width = labels.shape
    pad = min(padding, height - 1, width - 1)
    if pad > 0:
        image = np.pad(image, ((0, 0), (pad, pad), (pad, pad)), mode="reflect")
        labels = np.pad(labels, pad, mode="constant", constant_values=ignore_index)
        dy, dx = rng.integers(0, 2 * pad + 1, size=2)
        image = image[:, dy:dy + height, dx:dx + width]
        labels = labels[dy:dy + height, dx:dx + width]
    return np.ascontiguousarray(image), np.ascontiguousarray(labels)


class CyclingSampler:
    """Endless reshuffled passes over a fixed pool of ids."""

    def __init__(self, pool: Sequence[int], rng: np.random.Generator):
        self.pool = list(pool)
        self.rng = rng
        self.epoch = 0
        self._order = self._shuffle()
        self._position = 0

    def _shuffle(self) -> List[int]:
        return [self.pool[i] for i in self.rng.permutation(len(self.pool))]

    def take(self, count: int) -> List[int]:
        ids = []
        while len(ids) < count:
            if self._position == len(self._order):
                self.epoch += 1
                self._order = self._shuffle()
                self._position = 0
            ids.append(self._order[self._position])
            self._position += 1
        return ids

    def state_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "order": list(self._order),
            "position": self._position,
            "rng": self.rng.bit_generator.state,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.epoch = int(state["epoch"])
        self._order = [int(i) for i in state["order"]]
        self._position = int(state["position"])
        self.rng.bit_generator.state = state["rng"]


class BatchStream:
    """Single-consumer iterator of (labeled, unlabeled) batch pairs.

    Args:
        dataset: Indexable collection of SegSample
        manifest: Labeled/unlabeled partition of ``dataset``
        batch_size: Samples per batch, for each of the two batches
        seed: Stream seed; labeled, unlabeled and augmentation draws use separate children
        augment: Apply flip and pad-and-crop augmentation
        crop_padding: Reflect padding before the random crop
    """

    def __init__(
        self,
        dataset,
        manifest: SplitManifest,
        batch_size: int,
        seed: int,
        augment: bool = True,
        crop_padding: int = 4,
        ignore_index: int = IGNORE_INDEX,
    ):
        if batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
        if not manifest.labeled_ids:
            raise ConfigError("the split has no labeled samples", field="split.ratio")
        if manifest.dataset_size != len(dataset):
            raise ConfigError(
                f"manifest covers {manifest.dataset_size} scenes but the dataset holds {len(dataset)}",
                field="scene.dataset_size",
            )
        self.dataset = dataset
        self.manifest = manifest
        self.batch_size = batch_size
        self.augment = augment
        self.crop_padding = crop_padding
        self.ignore_index = ignore_index

        unlabeled_pool = manifest.unlabeled_ids() or list(range(manifest.dataset_size))
        labeled_seq, unlabeled_seq, augment_seq = np.random.SeedSequence(seed).spawn(3)
        self.labeled = CyclingSampler(manifest.labeled_ids, np.random.default_rng(labeled_seq))
        self.unlabeled = CyclingSampler(unlabeled_pool, np.random.default_rng(unlabeled_seq))
        self.augment_rng = np.random.default_rng(augment_seq)
        self.steps = 0

    @property
    def epoch(self) -> int:
        """Completed passes over the unlabeled pool."""
        return self.unlabeled.epoch

    @property
    def iterations_per_epoch(self) -> int:
        return math.ceil(len(self.unlabeled.pool) / self.batch_size)

    def _make_batch(self, ids: List[int], labeled: bool) -> SegBatch:
        images, labels = [], []
        for i in ids:
            sample = self.dataset[i]
            image = sample.image
            target = sample.labels if labeled else np.full(sample.labels.shape, self.ignore_index, dtype=np.uint8)
            if self.augment:
                image, target = augment(image, target, self.augment_rng, self.crop_padding, self.ignore_index)
            images.append(image)
            labels.append(target)
        return SegBatch(
            images=Tensor(np.stack(images)),
            labels=np.stack(labels).astype(np.int64),
            is_labeled=np.full(len(ids), labeled),
            ids=tuple(ids),
        )

    def next_batch(self) -> Tuple[SegBatch, SegBatch]:
        labeled_ids = self.labeled.take(self.batch_size)
        unlabeled_ids = self.unlabeled.take(self.batch_size)
        self.steps += 1
        return self._make_batch(labeled_ids, True), self._make_batch(unlabeled_ids, False)

    def __iter__(self):
        return self

    def __next__(self) -> Tuple[SegBatch, SegBatch]:
        return self.next_batch()

    def state_dict(self) -> Dict[str, Any]:
        return {
            "labeled": self.labeled.state_dict(),
            "unlabeled": self.unlabeled.state_dict(),
            "augment_rng": self.augment_rng.bit_generator.state,
            "steps": self.steps,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.labeled.load_state_dict(state["labeled"])
        self.unlabeled.load_state_dict(state["unlabeled"])
        self.augment_rng.bit_generator.state = state["augment_rng"]
        self.steps = int(state.get("steps", 0))


def next_batch(stream: BatchStream, batch_size: Optional[int] = None) -> Tuple[SegBatch, SegBatch]:
    """Draw the next batch pair, optionally changing the batch size first."""
    if batch_size is not None:
        if batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
        stream.batch_size = batch_size
    return stream.next_batch()
