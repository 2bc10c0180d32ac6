"""
Synthetic scenes, split manifests, batch streams and image I/O.
"""

from .scenes import SHAPE_KINDS, SegSample, class_palette, generate_scene, shape_boundaries
from .splits import SplitManifest, labeled_count, make_split
from .datasets import DiskSegDataset, SyntheticSegDataset, build_datasets
from .stream import BatchStream, CyclingSampler, SegBatch, augment, next_batch
from .netpbm import read_pgm, read_ppm, write_pgm, write_ppm
from .dump import dump_dataset

__all__ = [
    'SHAPE_KINDS',
    'SegSample',
    'class_palette',
    'generate_scene',
    'shape_boundaries',
    'SplitManifest',
    'labeled_count',
    'make_split',
    'DiskSegDataset',
    'SyntheticSegDataset',
    'build_datasets',
    'BatchStream',
    'CyclingSampler',
    'SegBatch',
    'augment',
    'next_batch',
    'read_pgm',
    'read_ppm',
    'write_pgm',
    'write_ppm',
    'dump_dataset',
]
