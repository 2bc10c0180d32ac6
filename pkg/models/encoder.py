"""
Plain convolutional segmentation branch: encoder stages plus a 1x1 classifier.
"""

import logging
from collections import OrderedDict
from typing import Callable, Dict, List, Optional

import numpy as np

from config.run_config import EncoderConfig
from numerics import Tensor, bilinear_resize, conv2d

logger = logging.getLogger(__name__)

IMAGE_CHANNELS = 3

StageHook = Callable[[int, Tensor], Tensor]


def he_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6 / fan_in), fan_in = C * kH * kW."""
    fan_in = int(np.prod(shape[1:]))
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class ConvEncoder:
    """Stages of (stride-2 conv, relu, stride-1 conv, relu).

    Stage ``s`` has ``base_width * 2**s`` channels, so the encoder's output
    stride is ``2**num_stages``.
    """

    def __init__(self, config: EncoderConfig, rng: np.random.Generator, prefix: str = "encoder"):
        self.config = config
        self.padding = config.kernel_size // 2
        self.kernels: List[Dict[str, Tensor]] = []
        k = config.kernel_size
        in_channels = IMAGE_CHANNELS
        for s, width in enumerate(config.stage_widths()):
            down = Tensor(he_uniform(rng, (width, in_channels, k, k)), requires_grad=True, name=f"{prefix}.stage{s}.down")
            refine = Tensor(he_uniform(rng, (width, width, k, k)), requires_grad=True, name=f"{prefix}.stage{s}.refine")
            self.kernels.append({"down": down, "refine": refine})
            in_channels = width

    @property
    def out_channels(self) -> int:
        return self.config.stage_widths()[-1]

    def stage(self, index: int, x: Tensor) -> Tensor:
        kernels = self.kernels[index]
        x = conv2d(x, kernels["down"], stride=2, padding=self.padding).relu()
        return conv2d(x, kernels["refine"], stride=1, padding=self.padding).relu()

    def parameters(self) -> List[Tensor]:
        return [t for stage in self.kernels for t in (stage["down"], stage["refine"])]


class SegmentationBranch:
    """Encoder followed by a 1x1 classifier and bilinear upsampling to input size."""

    def __init__(self, name: str, config: EncoderConfig, num_classes: int, rng: np.random.Generator):
        self.name = name
        self.config = config
        self.num_classes = num_classes
        self.encoder = ConvEncoder(config, rng, prefix=f"{name}.encoder")
        self.classifier = Tensor(
            he_uniform(rng, (num_classes, self.encoder.out_channels, 1, 1)),
            requires_grad=True,
            name=f"{name}.classifier",
        )

    def forward(self, images: Tensor, hook: Optional[StageHook] = None):
        """Return (logits [N,K,H,W], per-stage features).

        ``hook`` may replace each stage output before the next stage sees it.
        """
        height, width = images.shape[2:]
        features: List[Tensor] = []
        x = images
        for s in range(self.config.num_stages):
            x = self.encoder.stage(s, x)
            features.append(x)
            if hook is not None:
                x = hook(s, x)
        logits = conv2d(x, self.classifier)
        return bilinear_resize(logits, height, width), features

    def encoder_parameters(self) -> List[Tensor]:
        return self.encoder.parameters()

    def decoder_parameters(self) -> List[Tensor]:
        return [self.classifier]

    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        return OrderedDict((t.name, t) for t in self.encoder_parameters() + self.decoder_parameters())

    def parameter_count(self) -> int:
        return sum(t.size for t in self.named_parameters().values())
