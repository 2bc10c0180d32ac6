"""
One co-training iteration.

A step runs the dual model on the labeled batch (supervised terms) and on the
unlabeled batch (cross pseudo-supervision and distillation), differentiates
the weighted total once, and applies one AdamW update at the scheduled rate.
Terms whose weight is zero are neither computed nor reported. Over the first
``rampup_fraction`` of the schedule lambda2 and lambda3 rise along a sigmoid
from exp(-5) of their configured value.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from config.run_config import LossConfig, LossWeights, OptimConfig, Thresholds
from data.stream import BatchStream, SegBatch
from losses import (
    LossReport,
    LossTerms,
    consistency_loss,
    kd_loss,
    make_pseudo_labels,
    make_report,
    supervised_loss,
    zero_term,
)
from models.dual_model import DualModel
from numerics import fresh_tape, no_grad
from training.optim import AdamW
from training.schedule import poly_lr, sigmoid_rampup
from utils.errors import NumericalError, TrainingError

logger = logging.getLogger(__name__)


@dataclass
class TrainState:
    """Mutable progress of one run.

    Attributes:
        iteration: Completed optimizer steps
        epoch: Completed passes over the unlabeled pool
        seed: Run seed
        total_iters: Schedule length
        optimizer: Shared AdamW over all parameter groups
        optim_config: Learning-rate settings
        stream: Batch stream, when the state drives its own data
        history: One CSV-ready row per completed step
    """

    iteration: int
    epoch: int
    seed: int
    total_iters: int
    optimizer: AdamW
    optim_config: OptimConfig
    stream: Optional[BatchStream] = None
    history: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def current_lr(self) -> float:
        return poly_lr(self.optim_config.base_lr, self.iteration, self.total_iters, self.optim_config.poly_power)

    def rampup(self, fraction: float) -> float:
        """Ramp factor for lambda2 and lambda3 at the current iteration."""
        return sigmoid_rampup(self.iteration, int(round(fraction * self.total_iters)))


def _kd_term(dual_outputs, pseudo_senior, loss_config: LossConfig, thr: Thresholds):
    labeled_out, unlabeled_out = dual_outputs
    parts = []
    if loss_config.kd_on in ("labeled", "both"):
        parts.append(kd_loss(
            labeled_out.senior_logits, labeled_out.junior_logits, thr.kd_temperature, loss_config.kd_detach
        ))
    if loss_config.kd_on in ("unlabeled", "both"):
        mask = pseudo_senior.mask if loss_config.kd_use_conf_mask else None
        parts.append(kd_loss(
            unlabeled_out.senior_logits, unlabeled_out.junior_logits, thr.kd_temperature, loss_config.kd_detach, mask
        ))
    return parts[0] if len(parts) == 1 else (parts[0] + parts[1]) * 0.5


def compute_terms(
    dual: DualModel,
    labeled: SegBatch,
    unlabeled: SegBatch,
    weights: LossWeights,
    thr: Thresholds,
    loss_config: LossConfig,
    partial: Optional[Dict[str, float]] = None,
):
    """Forward passes and loss terms of one step; returns (LossTerms, masked_fraction).

    ``partial`` collects each term's value as soon as it exists, for failure dumps.
    """
    partial = partial if partial is not None else {}
    ignore = loss_config.ignore_index
    labeled_out = dual.forward_dual(labeled.images)
    sup_sr = supervised_loss(labeled_out.senior_logits, labeled.labels, ignore)
    partial["sup_sr"] = sup_sr.item()
    sup_jr = supervised_loss(labeled_out.junior_logits, labeled.labels, ignore)
    partial["sup_jr"] = sup_jr.item()

    use_con = weights.lambda2 > 0
    use_kd = weights.lambda3 > 0
    needs_unlabeled = use_con or (use_kd and loss_config.kd_on != "labeled")
    con_sr = con_jr = kd = zero_term()
    masked_fraction = 0.0
    unlabeled_out = pseudo_senior = None

    if needs_unlabeled:
        unlabeled_out = dual.forward_dual(unlabeled.images)
        pseudo_senior = make_pseudo_labels(unlabeled_out.senior_logits, thr.conf_tau)
        pseudo_junior = make_pseudo_labels(unlabeled_out.junior_logits, thr.conf_tau)
        masked_fraction = 0.5 * (pseudo_senior.suppressed_fraction + pseudo_junior.suppressed_fraction)
        if use_con:
            # each branch learns from its peer's pseudo-labels
            con_sr = consistency_loss(unlabeled_out.senior_logits, pseudo_junior)
            partial["con_sr"] = con_sr.item()
            con_jr = consistency_loss(unlabeled_out.junior_logits, pseudo_senior)
            partial["con_jr"] = con_jr.item()
    if use_kd:
        kd = _kd_term((labeled_out, unlabeled_out), pseudo_senior, loss_config, thr)
        partial["kd"] = kd.item()
    return LossTerms(sup_sr, sup_jr, con_sr, con_jr, kd), masked_fraction


def train_step(
    state: TrainState,
    dual: DualModel,
    labeled: SegBatch,
    unlabeled: SegBatch,
    weights: LossWeights,
    thr: Thresholds,
    loss_config: Optional[LossConfig] = None,
) -> LossReport:
    """Run one optimisation step and advance ``state`` by one iteration.

    Raises:
        TrainingError: If a loss term or gradient becomes non-finite; the
            message lists every term computed so far
    """
    loss_config = loss_config or LossConfig(weights=weights, thresholds=thr)
    lr = state.current_lr
    weights = weights.ramped(state.rampup(loss_config.rampup_fraction))
    partial: Dict[str, float] = {}
    dual.zero_grad()
    with fresh_tape():
        try:
            terms, masked_fraction = compute_terms(dual, labeled, unlabeled, weights, thr, loss_config, partial)
            report = make_report(terms, weights, masked_fraction)
            partial["total"] = report.total.item()
            if report.total.requires_grad:
                report.total.backward()
        except NumericalError as exc:
            if isinstance(exc, TrainingError):
                raise
            raise TrainingError(str(exc), state.iteration, partial) from exc

    with no_grad():
        state.optimizer.step(lr, state.iteration)
    state.iteration += 1
    if state.stream is not None:
        state.epoch = state.stream.epoch

    row = {"iter": state.iteration, "epoch": state.epoch, "lr": lr}
    row.update(report.as_row())
    state.history.append(row)
    return report
