"""
Procedural segmentation scenes.

A scene is a flat background with rectangles, disks and triangles drawn on
top. Each shape's class picks its colour from a fixed palette with a per-shape
jitter, and a per-scene illumination gain scales the whole image, so colour
is informative but not a reliable cue on its own. Later shapes occlude
earlier ones.
"""

import colorsys
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from config.run_config import IGNORE_INDEX, SceneSpec
from utils.errors import ParameterError

logger = logging.getLogger(__name__)

SHAPE_KINDS = ("rectangle", "disk", "triangle")
BACKGROUND_COLOR = (0.15, 0.15, 0.15)

# 4-connected neighbourhood for boundary extraction
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass
class SegSample:
    """One scene: an [H,W,3] uint8 image and an [H,W] uint8 label map."""

    index: int
    image_u8: np.ndarray
    labels: np.ndarray

    @property
    def image(self) -> np.ndarray:
        """Float [3,H,W] image scaled to [0,1]."""
        return self.image_u8.transpose(2, 0, 1).astype(np.float64) / 255.0


@lru_cache(maxsize=32)
def class_palette(num_classes: int) -> Tuple[Tuple[float, float, float], ...]:
    """Background colour followed by evenly spaced hues for the shape classes."""
    colors = [BACKGROUND_COLOR]
    for c in range(1, num_classes):
        hue = (c - 1) / max(num_classes - 1, 1)
        colors.append(colorsys.hsv_to_rgb(hue, 0.75, 0.9))
    return tuple(colors)


def _shape_mask(kind: str, height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    short = min(height, width)
    low, high = max(2.0, short / 8.0), max(2.0, short / 4.0)
    cy, cx = rng.uniform(0, height), rng.uniform(0, width)
    canvas = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(canvas)
    if kind == "rectangle":
        ry, rx = rng.uniform(low, high, size=2)
        draw.rectangle([cx - rx, cy - ry, cx + rx, cy + ry], fill=1)
    elif kind == "disk":
        r = rng.uniform(low, high)
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=1)
    else:
        r = rng.uniform(low, high)
        start = rng.uniform(0, 2 * np.pi)
        angles = start + 2 * np.pi * np.arange(3) / 3 + rng.uniform(-0.3, 0.3, size=3)
        draw.polygon([(cx + r * np.cos(a), cy + r * np.sin(a)) for a in angles], fill=1)
    return np.array(canvas, dtype=bool)


def shape_boundaries(labels: np.ndarray) -> np.ndarray:
    """Inner one-pixel rim of every foreground class region."""
    rim = np.zeros(labels.shape, dtype=bool)
    for c in np.unique(labels):
        if c == 0:
            continue
        region = labels == c
        rim |= region & ~ndimage.binary_erosion(region, structure=_CROSS, border_value=1)
    return rim


def generate_scene(spec: SceneSpec, index: int) -> SegSample:
    """Render scene ``index``; a pure function of (spec, index)."""
    if index < 0:
        raise ParameterError(f"scene index must be non-negative, got {index}")
    height, width = spec.image_size
    seed = spec.seed if spec.seed is not None else 0
    rng = np.random.default_rng([seed, index])
    palette = class_palette(spec.num_classes)
    gain = 1.0 + rng.uniform(-spec.illumination_jitter, spec.illumination_jitter)

    image = np.empty((height, width, 3), dtype=np.float64)
    image[...] = palette[0]
    labels = np.zeros((height, width), dtype=np.uint8)

    low, high = spec.shapes_per_image
    for _ in range(int(rng.integers(low, high + 1))):
        cls = int(rng.integers(1, spec.num_classes))
        kind = SHAPE_KINDS[int(rng.integers(len(SHAPE_KINDS)))]
        mask = _shape_mask(kind, height, width, rng)
        color = np.clip(np.asarray(palette[cls]) + rng.uniform(-spec.color_jitter, spec.color_jitter, size=3), 0.0, 1.0)
        image[mask] = color
        labels[mask] = cls

    labels[shape_boundaries(labels)] = IGNORE_INDEX
    image = image * gain
    if spec.noise_sigma > 0:
        image = image + rng.normal(0.0, spec.noise_sigma, size=image.shape)
    image_u8 = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    return SegSample(index, image_u8, labels)
