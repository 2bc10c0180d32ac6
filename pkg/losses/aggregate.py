"""
Weighted aggregation of the per-branch loss terms.
"""

from dataclasses import dataclass, fields
from typing import Dict, Union

from config.run_config import LossWeights
from numerics import Tensor

TERM_NAMES = ("sup_sr", "sup_jr", "con_sr", "con_jr", "kd")


def zero_term() -> Tensor:
    return Tensor(0.0)


@dataclass
class LossTerms:
    """Scalar loss terms of one step, before weighting."""

    sup_sr: Tensor
    sup_jr: Tensor
    con_sr: Tensor
    con_jr: Tensor
    kd: Tensor

    @classmethod
    def from_values(cls, **values: Union[float, Tensor]) -> "LossTerms":
        """Build from floats or Tensors; missing terms are zero."""
        return cls(**{
            name: value if isinstance(value, Tensor) else Tensor(float(value))
            for name, value in ((n, values.get(n, 0.0)) for n in TERM_NAMES)
        })

    def swapped(self) -> "LossTerms":
        """Same terms with the senior and junior roles exchanged."""
        return LossTerms(self.sup_jr, self.sup_sr, self.con_jr, self.con_sr, self.kd)


def total_loss(terms: LossTerms, weights: LossWeights) -> Tensor:
    """lambda1 * sup + lambda2 * con + lambda3 * kd, each of sup and con a 0.5 branch average."""
    supervised = (terms.sup_sr + terms.sup_jr) * 0.5
    consistency = (terms.con_sr + terms.con_jr) * 0.5
    return supervised * weights.lambda1 + consistency * weights.lambda2 + terms.kd * weights.lambda3


@dataclass
class LossReport:
    sup_sr: Tensor
    sup_jr: Tensor
    con_sr: Tensor
    con_jr: Tensor
    kd: Tensor
    total: Tensor
    masked_fraction: float = 0.0

    def values(self) -> Dict[str, float]:
        """Every field as a Python float."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.item() if isinstance(value, Tensor) else float(value)
        return out

    def as_row(self) -> Dict[str, float]:
        """Loss columns of the metrics CSV, in CSV order."""
        values = self.values()
        return {name: values[name] for name in TERM_NAMES + ("total", "masked_fraction")}


def make_report(terms: LossTerms, weights: LossWeights, masked_fraction: float = 0.0) -> LossReport:
    return LossReport(
        terms.sup_sr,
        terms.sup_jr,
        terms.con_sr,
        terms.con_jr,
        terms.kd,
        total_loss(terms, weights),
        masked_fraction,
    )
