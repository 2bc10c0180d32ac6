"""
Run configuration: validated models, the key/value file format and ablation presets.
"""

from .run_config import (
    IGNORE_INDEX,
    SPLIT_RATIOS,
    EncoderConfig,
    EvalConfig,
    LossConfig,
    LossWeights,
    ModelConfig,
    OptimConfig,
    RunConfig,
    SceneSpec,
    SplitConfig,
    Thresholds,
    TrainConfig,
)
from .config_file import apply_overrides, dump_config, flatten_config, load_config, parse_config_text, write_config
from .presets import PRESETS, preset_variants

__all__ = [
    'IGNORE_INDEX',
    'SPLIT_RATIOS',
    'EncoderConfig',
    'EvalConfig',
    'LossConfig',
    'LossWeights',
    'ModelConfig',
    'OptimConfig',
    'RunConfig',
    'SceneSpec',
    'SplitConfig',
    'Thresholds',
    'TrainConfig',
    'apply_overrides',
    'dump_config',
    'flatten_config',
    'load_config',
    'parse_config_text',
    'write_config',
    'PRESETS',
    'preset_variants',
]
