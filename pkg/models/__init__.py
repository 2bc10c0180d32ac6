from .encoder import ConvEncoder, SegmentationBranch, he_uniform
from .fusion import FUSION_MODES, FusionConnector
from .dual_model import PARAMETER_GROUPS, DualModel, ForwardOutput, forward_dual, forward_junior
from .checkpoint import FORMAT_VERSION, Checkpoint, load_checkpoint, restore_model, save_checkpoint

__all__ = [
    'ConvEncoder',
    'SegmentationBranch',
    'he_uniform',
    'FUSION_MODES',
    'FusionConnector',
    'PARAMETER_GROUPS',
    'DualModel',
    'ForwardOutput',
    'forward_dual',
    'forward_junior',
    'FORMAT_VERSION',
    'Checkpoint',
    'load_checkpoint',
    'restore_model',
    'save_checkpoint',
]
