"""
Ablation presets.

Each preset maps to a list of named variants; a variant is a set of dotted
overrides applied on top of the base configuration. Widths are expressed
relative to the base junior width so the presets scale with it.
"""

from typing import Callable, Dict, List, Tuple

from config.run_config import RunConfig
from utils.errors import ConfigError

Variant = Tuple[str, Dict[str, object]]


def _components(base: RunConfig) -> List[Variant]:
    return [
        ("sup", {"loss.weights.lambda2": 0.0, "loss.weights.lambda3": 0.0}),
        ("sup_con", {"loss.weights.lambda3": 0.0}),
        ("sup_con_kd", {}),
    ]


def _pairing(base: RunConfig) -> List[Variant]:
    junior = base.junior.base_width
    return [
        ("hetero", {"model.pairing": "hetero", "senior.base_width": 2 * junior}),
        ("homo", {"model.pairing": "homo", "senior.base_width": junior}),
    ]


def _senior_capacity(base: RunConfig) -> List[Variant]:
    junior = base.junior.base_width
    return [
        ("senior_2x", {"model.pairing": "hetero", "senior.base_width": 2 * junior}),
        ("senior_4x", {"model.pairing": "hetero", "senior.base_width": 4 * junior}),
    ]


PRESETS: Dict[str, Callable[[RunConfig], List[Variant]]] = {
    "table5": _components,
    "table6": _pairing,
    "table7": _senior_capacity,
}


def preset_variants(name: str, base: RunConfig) -> List[Variant]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}", field="preset")
    return PRESETS[name](base)
