"""
Senior/junior network pair and its forward passes.

The junior branch never reads anything from the senior, so it can be
evaluated, checkpointed and deployed on its own.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np

from config.run_config import EncoderConfig, RunConfig
from models.encoder import IMAGE_CHANNELS, SegmentationBranch
from models.fusion import FusionConnector
from numerics import Tensor, no_grad
from utils.errors import ConfigError, ContractError, ShapeError

logger = logging.getLogger(__name__)

ImageInput = Union[Tensor, np.ndarray]

PARAMETER_GROUPS = ("senior.encoder", "senior.decoder", "junior.encoder", "junior.decoder")


@dataclass
class ForwardOutput:
    senior_logits: Tensor
    junior_logits: Tensor
    junior_features: List[Tensor]


class DualModel:
    """Paired senior and junior branches plus the fusion connector.

    Args:
        senior: Senior encoder configuration
        junior: Junior encoder configuration
        num_classes: Number of output classes K
        fusion_mode: ``add``, ``concat`` or ``none``
        fusion_detach: Stop gradients from the senior into the junior through fusion
        pairing: ``hetero`` (senior at least as wide) or ``homo`` (equal widths)
        seed: Initialisation seed; the junior draws from its own child stream
    """

    def __init__(
        self,
        senior: EncoderConfig,
        junior: EncoderConfig,
        num_classes: int,
        fusion_mode: str = "add",
        fusion_detach: bool = True,
        pairing: str = "hetero",
        seed: int = 0,
    ):
        if pairing == "hetero" and senior.base_width < junior.base_width:
            raise ConfigError("hetero pairing needs senior.base_width >= junior.base_width", field="model.pairing")
        if pairing == "homo" and senior.base_width != junior.base_width:
            raise ConfigError("homo pairing needs equal base widths", field="model.pairing")
        self.num_classes = num_classes
        self.pairing = pairing
        senior_seq, junior_seq = np.random.SeedSequence(seed).spawn(2)
        self.junior = SegmentationBranch("junior", junior, num_classes, np.random.default_rng(junior_seq))
        self.senior: Optional[SegmentationBranch] = SegmentationBranch(
            "senior", senior, num_classes, np.random.default_rng(senior_seq)
        )
        self.fusion: Optional[FusionConnector] = FusionConnector(
            junior.stage_widths(), senior.stage_widths(), mode=fusion_mode, detach=fusion_detach
        )

    @classmethod
    def from_config(cls, config: RunConfig) -> "DualModel":
        return cls(
            senior=config.senior,
            junior=config.junior,
            num_classes=config.scene.num_classes,
            fusion_mode=config.model.fusion_mode,
            fusion_detach=config.model.fusion_detach,
            pairing=config.model.pairing,
            seed=config.seed,
        )

    @property
    def has_senior(self) -> bool:
        return self.senior is not None

    def drop_senior(self) -> None:
        """Discard senior and fusion weights, leaving a deployable junior."""
        self.senior = None
        self.fusion = None

    def output_stride(self) -> int:
        strides = [self.junior.config.output_stride]
        if self.senior is not None:
            strides.append(self.senior.config.output_stride)
        return max(strides)

    def check_input(self, images: ImageInput) -> Tensor:
        if not isinstance(images, Tensor):
            images = Tensor(images)
        if images.ndim != 4 or images.shape[1] != IMAGE_CHANNELS:
            raise ShapeError(f"expected images of shape [N,{IMAGE_CHANNELS},H,W], got {images.shape}")
        stride = self.output_stride()
        height, width = images.shape[2:]
        if height % stride or width % stride:
            raise ConfigError(f"input {height}x{width} is not divisible by the output stride {stride}", field="scene.image_size")
        return images

    def _senior_forward(self, images: Tensor, junior_features: List[Tensor]) -> Tensor:
        if self.senior is None:
            raise ContractError("senior branch has been dropped")
        fusion = self.fusion

        def hook(stage: int, features: Tensor) -> Tensor:
            return fusion.inject(stage, features, junior_features[stage])

        logits, _ = self.senior.forward(images, hook=hook if fusion is not None else None)
        return logits

    def forward_dual(self, images: ImageInput) -> ForwardOutput:
        """Junior first, then the senior with junior features fused in at every stage."""
        images = self.check_input(images)
        junior_logits, junior_features = self.junior.forward(images)
        senior_logits = self._senior_forward(images, junior_features)
        return ForwardOutput(senior_logits, junior_logits, junior_features)

    def forward_junior(self, images: ImageInput) -> Tensor:
        """Junior-only inference; builds no tape."""
        with no_grad():
            images = self.check_input(images)
            logits, _ = self.junior.forward(images)
        return logits

    def forward_senior(self, images: ImageInput) -> Tensor:
        """Senior inference, which still needs the junior features for fusion."""
        with no_grad():
            images = self.check_input(images)
            _, junior_features = self.junior.forward(images)
            return self._senior_forward(images, junior_features)

    def forward_branch(self, branch: str, images: ImageInput) -> Tensor:
        if branch == "junior":
            return self.forward_junior(images)
        if branch == "senior":
            return self.forward_senior(images)
        raise ConfigError(f"unknown branch '{branch}'", field="branch")

    def parameter_groups(self) -> Dict[str, List[Tensor]]:
        """Encoder and decoder groups per branch; fusion counts as senior decoder."""
        groups = {
            "junior.encoder": self.junior.encoder_parameters(),
            "junior.decoder": self.junior.decoder_parameters(),
        }
        if self.senior is not None:
            groups["senior.encoder"] = self.senior.encoder_parameters()
            groups["senior.decoder"] = self.senior.decoder_parameters() + (
                self.fusion.parameters() if self.fusion is not None else []
            )
        return {name: groups[name] for name in PARAMETER_GROUPS if name in groups}

    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        named = OrderedDict()
        for params in self.parameter_groups().values():
            for t in params:
                named[t.name] = t
        return named

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.grad = None

    def parameter_counts(self) -> Dict[str, int]:
        counts = {"junior": self.junior.parameter_count()}
        if self.senior is not None:
            counts["senior"] = self.senior.parameter_count()
            counts["fusion"] = sum(t.size for t in self.fusion.parameters()) if self.fusion is not None else 0
        return counts

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((name, t.data.copy()) for name, t in self.named_parameters().items())

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True) -> None:
        """Copy arrays into the matching parameters.

        Raises:
            ShapeError: If an array does not match its parameter's shape
            ConfigError: If ``strict`` and names are missing or unexpected
        """
        named = self.named_parameters()
        if strict:
            missing = sorted(set(named) - set(state))
            unexpected = sorted(set(state) - set(named))
            if missing or unexpected:
                raise ConfigError(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for name, values in state.items():
            if name not in named:
                continue
            target = named[name]
            if target.shape != values.shape:
                raise ShapeError(f"parameter '{name}': checkpoint shape {values.shape}, model shape {target.shape}")
            target.data[...] = values
            target.grad = None


def forward_dual(model: DualModel, images: ImageInput) -> ForwardOutput:
    return model.forward_dual(images)


def forward_junior(model: DualModel, images: ImageInput) -> Tensor:
    return model.forward_junior(images)
