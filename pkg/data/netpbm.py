"""
8-bit binary PPM (P6) images and PGM (P5) label masks.
"""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from utils.errors import DataError


def write_ppm(path: Path, image: np.ndarray) -> None:
    """Write an [H,W,3] uint8 array as binary PPM."""
    image = np.asarray(image)
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise DataError(f"PPM needs an [H,W,3] uint8 array, got {image.dtype} {image.shape}")
    Image.fromarray(image).save(path, format="PPM")


def write_pgm(path: Path, labels: np.ndarray) -> None:
    """Write an [H,W] uint8 array as binary PGM."""
    labels = np.asarray(labels)
    if labels.dtype != np.uint8 or labels.ndim != 2:
        raise DataError(f"PGM needs an [H,W] uint8 array, got {labels.dtype} {labels.shape}")
    Image.fromarray(labels).save(path, format="PPM")


def _read(path: Path, mode: str, kind: str) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format != "PPM" or img.mode != mode:
                raise DataError(f"{path}: expected an 8-bit {kind} file, found {img.format} mode {img.mode}")
            return np.array(img, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise DataError(f"{path}: file not found") from exc
    except (UnidentifiedImageError, OSError) as exc:
        raise DataError(f"{path}: cannot parse {kind} file: {exc}") from exc


def read_ppm(path: Path) -> np.ndarray:
    return _read(path, "RGB", "PPM")


def read_pgm(path: Path) -> np.ndarray:
    return _read(path, "L", "PGM")
