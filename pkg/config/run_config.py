"""
Validated run configuration.

Every section is a pydantic model that rejects unknown fields. ``RunConfig``
is the umbrella object that the CLI resolves and writes to
``config.resolved`` for provenance.
"""

import logging
from fractions import Fraction
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

IGNORE_INDEX = 255

SPLIT_RATIOS = {
    "1/16": Fraction(1, 16),
    "1/8": Fraction(1, 8),
    "1/4": Fraction(1, 4),
    "1/2": Fraction(1, 2),
    "full": Fraction(1, 1),
}


def _split_pair(value):
    if isinstance(value, str):
        parts = value.replace("x", ",").split(",")
        return tuple(p.strip() for p in parts if p.strip())
    return value


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class SceneSpec(Section):
    """Procedural scene generator parameters."""

    image_size: Tuple[int, int] = Field((64, 64), description="Image height and width")
    num_classes: int = Field(4, ge=2, description="Background plus K-1 shape classes")
    shapes_per_image: Tuple[int, int] = Field((1, 4), description="Inclusive range of shapes per scene")
    noise_sigma: float = Field(0.25, ge=0.0, description="Gaussian pixel noise")
    color_jitter: float = Field(0.2, ge=0.0, description="Per-shape uniform jitter on each colour channel")
    illumination_jitter: float = Field(0.25, ge=0.0, lt=1.0, description="Per-scene brightness gain drawn from 1 +- this")
    seed: Optional[int] = Field(None, ge=0, description="Scene seed; inherits the run seed when unset")
    dataset_size: int = Field(1464, ge=1, description="Number of training scenes")
    val_size: int = Field(64, ge=0, description="Number of validation scenes")
    data_dir: Optional[str] = Field(None, description="Read scenes from a dumped dataset instead of generating them")

    _split_image_size = field_validator("image_size", "shapes_per_image", mode="before")(_split_pair)

    @field_validator("image_size")
    @classmethod
    def _positive_size(cls, value):
        if min(value) < 1:
            raise ValueError("image dimensions must be positive")
        return value

    @field_validator("shapes_per_image")
    @classmethod
    def _ordered_range(cls, value):
        low, high = value
        if low < 0 or high < low:
            raise ValueError("expected 0 <= min <= max")
        return value


class SplitConfig(Section):
    ratio: str = Field("1/8", description="Labeled share: 1/16, 1/8, 1/4, 1/2 or full")
    seed: Optional[int] = Field(None, ge=0, description="Split shuffle seed; inherits the run seed when unset")

    @field_validator("ratio")
    @classmethod
    def _known_ratio(cls, value):
        if value not in SPLIT_RATIOS:
            raise ValueError(f"unknown ratio '{value}', expected one of {list(SPLIT_RATIOS)}")
        return value


class EncoderConfig(Section):
    """Plain conv/relu encoder; each stage halves resolution and doubles channels."""

    base_width: int = Field(8, ge=1)
    num_stages: int = Field(3, ge=1)
    kernel_size: int = Field(3, ge=1)

    @field_validator("kernel_size")
    @classmethod
    def _odd_kernel(cls, value):
        if value % 2 == 0:
            raise ValueError("kernel_size must be odd")
        return value

    @property
    def output_stride(self) -> int:
        return 2 ** self.num_stages

    def stage_widths(self) -> Tuple[int, ...]:
        return tuple(self.base_width * 2 ** s for s in range(self.num_stages))


class ModelConfig(Section):
    pairing: Literal["hetero", "homo"] = "hetero"
    fusion_mode: Literal["add", "concat", "none"] = "add"
    fusion_detach: bool = True


class LossWeights(Section):
    lambda1: float = Field(1.0, ge=0.0, description="Supervised weight")
    lambda2: float = Field(1.0, ge=0.0, description="Consistency weight")
    lambda3: float = Field(1.0, ge=0.0, description="Distillation weight")

    def ramped(self, factor: float) -> "LossWeights":
        """Copy with lambda2 and lambda3 scaled by ``factor``; lambda1 is unchanged."""
        return self.model_copy(update={"lambda2": self.lambda2 * factor, "lambda3": self.lambda3 * factor})


class Thresholds(Section):
    conf_tau: float = Field(0.95, ge=0.0, description="Pseudo-label confidence threshold")
    kd_temperature: float = Field(2.0, gt=0.0, description="Distillation softmax temperature")
    clamp_conf_tau: bool = Field(True, description="Clamp conf_tau into [0, 1]")

    @model_validator(mode="after")
    def _clamp(self):
        if self.clamp_conf_tau and self.conf_tau > 1.0:
            logger.warning(f"conf_tau={self.conf_tau} clamped to 1.0")
            object.__setattr__(self, "conf_tau", 1.0)
        return self


class LossConfig(Section):
    weights: LossWeights = Field(default_factory=LossWeights)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    kd_on: Literal["labeled", "unlabeled", "both"] = "unlabeled"
    kd_detach: bool = True
    kd_use_conf_mask: bool = False
    rampup_fraction: float = Field(
        0.3, ge=0.0, le=1.0, description="Share of the schedule over which lambda2 and lambda3 ramp up; 0 disables"
    )
    ignore_index: int = IGNORE_INDEX


class OptimConfig(Section):
    base_lr: float = Field(1e-3, gt=0.0)
    decoder_lr_multiplier: float = Field(10.0, gt=0.0)
    weight_decay: float = Field(0.01, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    total_iters: Optional[int] = Field(None, ge=1, description="Defaults to epochs x iterations per epoch")
    poly_power: float = 0.9
    grad_clip_norm: Optional[float] = Field(None, gt=0.0)


class TrainConfig(Section):
    epochs: int = Field(4, ge=0)
    batch_size: int = Field(8, ge=1)
    augment: bool = True
    crop_padding: int = Field(4, ge=0)
    log_interval: int = Field(10, ge=1)
    eval_interval: Optional[int] = Field(None, ge=1, description="Iterations between evaluations; once per epoch when unset")
    eval_senior: bool = False


class EvalConfig(Section):
    divisor: Optional[int] = Field(None, ge=1, description="Inference resize divisor; the encoder output stride when unset")
    sliding: bool = True
    window: int = Field(32, ge=1)
    stride: Optional[int] = Field(None, ge=1, description="Window stride; window/2 when unset")
    average: Literal["logits", "probs"] = "logits"
    pred_dumps: int = Field(4, ge=0, description="Validation predictions written to preds/")

    @model_validator(mode="after")
    def _stride_fits(self):
        if self.stride is not None and self.stride > self.window:
            raise ValueError("eval.stride must not exceed eval.window")
        return self

    @property
    def window_stride(self) -> int:
        return self.stride if self.stride is not None else max(1, self.window // 2)


class RunConfig(Section):
    seed: int = Field(0, ge=0, description="Run seed; every random stream derives from it")
    out_dir: str = "runs/default"
    scene: SceneSpec = Field(default_factory=SceneSpec)
    split: SplitConfig = Field(default_factory=SplitConfig)
    junior: EncoderConfig = Field(default_factory=lambda: EncoderConfig(base_width=8))
    senior: EncoderConfig = Field(default_factory=lambda: EncoderConfig(base_width=16))
    model: ModelConfig = Field(default_factory=ModelConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    optim: OptimConfig = Field(default_factory=OptimConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    @model_validator(mode="after")
    def _check_pairing(self):
        if self.model.pairing == "hetero" and self.senior.base_width < self.junior.base_width:
            raise ValueError("hetero pairing needs senior.base_width >= junior.base_width")
        if self.model.pairing == "homo" and self.senior.base_width != self.junior.base_width:
            raise ValueError("homo pairing needs senior.base_width == junior.base_width")
        if self.model.fusion_mode != "none" and self.senior.num_stages != self.junior.num_stages:
            raise ValueError("feature fusion needs senior and junior with the same num_stages")
        stride = self.output_stride
        height, width = self.scene.image_size
        if height % stride or width % stride:
            raise ValueError(f"scene.image_size {height}x{width} is not divisible by the output stride {stride}")
        if self.eval.window % stride:
            raise ValueError(f"eval.window {self.eval.window} is not divisible by the output stride {stride}")
        return self

    @property
    def output_stride(self) -> int:
        return max(self.senior.output_stride, self.junior.output_stride)

    @property
    def scene_seed(self) -> int:
        return self.scene.seed if self.scene.seed is not None else self.seed

    @property
    def split_seed(self) -> int:
        return self.split.seed if self.split.seed is not None else self.seed

    def resolved(self) -> "RunConfig":
        """Copy with every inherited value written out explicitly."""
        update = self.model_copy(deep=True)
        update.scene.seed = self.scene_seed
        update.split.seed = self.split_seed
        if update.eval.divisor is None:
            update.eval.divisor = self.output_stride
        if update.eval.stride is None:
            update.eval.stride = self.eval.window_stride
        return update
