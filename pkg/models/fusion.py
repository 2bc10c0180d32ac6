"""
Junior-to-senior feature connector.

Each stage owns a 1x1 projection. In ``add`` mode the projected junior
features are added to the senior's same-stage features; in ``concat`` mode
the two are concatenated on the channel axis and projected back to the senior
width. Both start as the identity on the senior features.
"""

from collections import OrderedDict
from typing import List, Sequence

import numpy as np

from numerics import Tensor, concat, conv2d, stop_gradient
from utils.errors import ConfigError, ShapeError

FUSION_MODES = ("add", "concat", "none")


class FusionConnector:
    def __init__(self, junior_widths: Sequence[int], senior_widths: Sequence[int], mode: str = "add", detach: bool = True):
        if mode not in FUSION_MODES:
            raise ConfigError(f"unknown fusion mode '{mode}', expected one of {FUSION_MODES}", field="model.fusion_mode")
        if mode != "none" and len(junior_widths) != len(senior_widths):
            raise ConfigError(
                f"fusion needs equal stage counts, got junior {len(junior_widths)} and senior {len(senior_widths)}",
                field="model.fusion_mode",
            )
        self.mode = mode
        self.detach = detach
        self.projections: List[Tensor] = []
        if mode == "none":
            return
        for s, (cj, cs) in enumerate(zip(junior_widths, senior_widths)):
            if mode == "add":
                weights = np.zeros((cs, cj, 1, 1))
            else:
                weights = np.zeros((cs, cs + cj, 1, 1))
                weights[np.arange(cs), np.arange(cs), 0, 0] = 1.0
            self.projections.append(Tensor(weights, requires_grad=True, name=f"fusion.stage{s}"))

    def inject(self, stage: int, senior_features: Tensor, junior_features: Tensor) -> Tensor:
        if self.mode == "none":
            return senior_features
        if senior_features.shape[2:] != junior_features.shape[2:]:
            raise ShapeError(
                f"fusion stage {stage}: senior {senior_features.shape} and junior {junior_features.shape} differ spatially"
            )
        source = stop_gradient(junior_features) if self.detach else junior_features
        projection = self.projections[stage]
        if self.mode == "add":
            return senior_features + conv2d(source, projection)
        return conv2d(concat([senior_features, source], axis=1), projection)

    def parameters(self) -> List[Tensor]:
        return list(self.projections)

    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        return OrderedDict((t.name, t) for t in self.projections)
