"""
Versioned checkpoint files.

A checkpoint is an uncompressed ``.npz`` archive (numpy's zip of ``.npy``
records) holding:

  __format__          int64[1]  format version
  __meta__            str       JSON metadata (resolved config, iteration, stream state...)
  param/<name>        float     model weights, one record per parameter
  optim/m/<name>      float     AdamW first moments
  optim/v/<name>      float     AdamW second moments
  optim/t/<name>      int64     AdamW step counter per parameter, for bias correction

Arrays are stored verbatim, so save followed by load is bit-exact. Nothing is
pickled.
"""

import json
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from models.dual_model import DualModel
from utils.errors import CheckpointError, ConfigError, ShapeError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_PARAM = "param/"
_MOMENTS = ("m", "v", "t")


@dataclass
class Checkpoint:
    version: int
    params: Dict[str, np.ndarray]
    meta: Dict[str, Any] = field(default_factory=dict)
    moments: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)

    def branch_params(self, branch: str) -> Dict[str, np.ndarray]:
        return {name: values for name, values in self.params.items() if name.startswith(f"{branch}.")}


def save_checkpoint(
    path: Path,
    model: DualModel,
    meta: Optional[Dict[str, Any]] = None,
    moments: Optional[Dict[str, Dict[str, np.ndarray]]] = None,
) -> Path:
    """Write ``model`` (and optionally optimizer moments) to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "__format__": np.array([FORMAT_VERSION], dtype=np.int64),
        "__meta__": np.array(json.dumps(meta or {}, sort_keys=True)),
    }
    for name, values in model.state_dict().items():
        arrays[_PARAM + name] = values
    for slot, per_param in (moments or {}).items():
        for name, values in per_param.items():
            arrays[f"optim/{slot}/{name}"] = values
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    logger.debug(f"Saved checkpoint with {len(arrays)} records to {path}")
    return path


def load_checkpoint(path: Path, junior_only: bool = False) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Args:
        path: Checkpoint file
        junior_only: Keep only junior weights and skip optimizer moments

    Raises:
        CheckpointError: Missing or unreadable file, or a different format version
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            records = {key: archive[key] for key in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    if "__format__" not in records:
        raise CheckpointError(f"{path} is not a checkpoint (no format record)")
    version = int(records["__format__"][0])
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format version {version}; this build reads version {FORMAT_VERSION}"
        )
    meta = json.loads(records["__meta__"].item()) if "__meta__" in records else {}

    params: Dict[str, np.ndarray] = {}
    moments: Dict[str, Dict[str, np.ndarray]] = {slot: {} for slot in _MOMENTS}
    for key, values in records.items():
        if key.startswith(_PARAM):
            name = key[len(_PARAM):]
            if junior_only and not name.startswith("junior."):
                continue
            params[name] = values
        elif key.startswith("optim/") and not junior_only:
            _, slot, name = key.split("/", 2)
            moments.setdefault(slot, {})[name] = values
    return Checkpoint(version, params, meta, {k: v for k, v in moments.items() if v})


def restore_model(checkpoint: Checkpoint, model: DualModel) -> None:
    """Load checkpoint weights into ``model``; a model without senior takes junior weights only."""
    params = checkpoint.params if model.has_senior else checkpoint.branch_params("junior")
    try:
        model.load_state_dict(params, strict=True)
    except (ShapeError, ConfigError) as exc:
        raise CheckpointError(f"checkpoint (format version {checkpoint.version}) does not fit the model: {exc}") from exc
