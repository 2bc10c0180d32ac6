"""
Co-training: learning-rate schedule, AdamW, the per-step update, resumable
checkpoints, the end-to-end runner and ablation presets.
"""

from .schedule import poly_lr, sigmoid_rampup
from .optim import AdamW, Moments, adamw_step
from .step import TrainState, compute_terms, train_step
from .resume import restore_training, resume_from, save_training_checkpoint
from .runner import ExperimentResult, evaluate_branches, run_experiment
from .ablation import PresetResult, run_preset

__all__ = [
    'poly_lr',
    'sigmoid_rampup',
    'AdamW',
    'Moments',
    'adamw_step',
    'TrainState',
    'compute_terms',
    'train_step',
    'restore_training',
    'resume_from',
    'save_training_checkpoint',
    'ExperimentResult',
    'evaluate_branches',
    'run_experiment',
    'PresetResult',
    'run_preset',
]
