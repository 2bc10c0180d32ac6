import math

from utils.errors import ContractError


def poly_lr(base_lr: float, iteration: int, total_iters: int, power: float = 0.9) -> float:
    """base_lr * (1 - iteration / total_iters) ** power, for 0 <= iteration <= total_iters."""
    if total_iters < 1:
        raise ContractError(f"total_iters must be >= 1, got {total_iters}")
    if not 0 <= iteration <= total_iters:
        raise ContractError(f"iteration {iteration} outside [0, {total_iters}]")
    return base_lr * (1.0 - iteration / total_iters) ** power


def sigmoid_rampup(iteration: int, rampup_iters: int) -> float:
    """exp(-5 (1 - t)^2) with t = iteration / rampup_iters clipped to [0, 1].

    Returns 1.0 once ``iteration`` reaches ``rampup_iters``, and always when
    ``rampup_iters`` is 0.
    """
    if rampup_iters < 0:
        raise ContractError(f"rampup_iters must be >= 0, got {rampup_iters}")
    if rampup_iters == 0 or iteration >= rampup_iters:
        return 1.0
    t = max(iteration, 0) / rampup_iters
    return math.exp(-5.0 * (1.0 - t) ** 2)
