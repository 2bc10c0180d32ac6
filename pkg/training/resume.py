"""
Saving and restoring the complete training state through a checkpoint.
"""

import logging
from pathlib import Path

from config.config_file import dump_config
from config.run_config import RunConfig
from models.checkpoint import Checkpoint, load_checkpoint, restore_model, save_checkpoint
from models.dual_model import DualModel
from training.step import TrainState
from utils.errors import CheckpointError, ShapeError

logger = logging.getLogger(__name__)


def save_training_checkpoint(path: Path, dual: DualModel, state: TrainState, config: RunConfig) -> Path:
    meta = {
        "config": dump_config(config),
        "iteration": state.iteration,
        "epoch": state.epoch,
        "seed": state.seed,
        "total_iters": state.total_iters,
        "stream": state.stream.state_dict() if state.stream is not None else None,
        "parameter_counts": dual.parameter_counts(),
    }
    return save_checkpoint(path, dual, meta=meta, moments=state.optimizer.state_dict())


def restore_training(checkpoint: Checkpoint, dual: DualModel, state: TrainState) -> None:
    """Load weights, optimizer moments, stream position and counters into a fresh run."""
    restore_model(checkpoint, dual)
    meta = checkpoint.meta
    if "iteration" not in meta:
        raise CheckpointError("checkpoint carries no training state (iteration missing)")
    try:
        state.optimizer.load_state_dict(checkpoint.moments)
    except ShapeError as exc:
        raise CheckpointError(f"optimizer state does not fit the model: {exc}") from exc
    if state.stream is not None and meta.get("stream"):
        state.stream.load_state_dict(meta["stream"])
    state.iteration = int(meta["iteration"])
    state.epoch = int(meta.get("epoch", 0))
    if state.iteration > state.total_iters:
        raise CheckpointError(
            f"checkpoint is at iteration {state.iteration}, beyond the configured {state.total_iters} iterations"
        )
    logger.info(f"Resumed at iteration {state.iteration} (epoch {state.epoch})")


def resume_from(path: Path, dual: DualModel, state: TrainState) -> Checkpoint:
    checkpoint = load_checkpoint(path)
    restore_training(checkpoint, dual, state)
    return checkpoint
