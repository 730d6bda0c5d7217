"""
Sample-Size Planner
Hoeffding-bound circuit counts for estimating fbar_d and the decay rate
"""

import math
from typing import Optional

from pydantic import BaseModel

from birb.core.errors import DomainError


class PlannerInput(BaseModel):
    """
    nu         failure probability
    alpha      relative accuracy of fbar_d
    A          decay amplitude
    gamma_bar  expected layer polarization
    d          benchmark depth
    beta       multiplicative accuracy wanted on gamma_bar (two-depth plan)
    """

    nu: float
    alpha: float
    A: float = 1.0
    gamma_bar: float = 1.0
    d: int = 0
    beta: Optional[float] = None


class TwoDepthPlan(BaseModel):
    d1: int
    per_depth_accuracy: float
    circuits_at_zero: int
    circuits_at_d1: int


class PlannerOutput(BaseModel):
    K: int
    inputs: PlannerInput
    two_depth: Optional[TwoDepthPlan] = None


def _check(nu: float, A: float, gamma_bar: float):
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    if not 0.0 < A <= 1.0:
        raise DomainError(f"A must lie in (0, 1], got {A}")
    if not 0.0 < gamma_bar <= 1.0:
        raise DomainError(f"gamma_bar must lie in (0, 1], got {gamma_bar}")


def _ceil(x: float) -> int:
    # 2 ln(40) / 0.01 must round to 738, not 739 from float noise
    return math.ceil(x - 1e-9)


def circuits_needed(nu: float, alpha: float, A: float, gamma_bar: float, d: int) -> int:
    """K = 2 ln(2/nu) / (alpha^2 A^2 gamma_bar^(2d)), rounded up"""
    _check(nu, A, gamma_bar)
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if d < 0:
        raise DomainError(f"depth must be non-negative, got {d}")
    return _ceil(2.0 * math.log(2.0 / nu) / (alpha**2 * A**2 * gamma_bar ** (2 * d)))


def two_depth_plan(nu: float, beta: float, A: float, gamma_bar: float) -> TwoDepthPlan:
    """
    Depths 0 and d1 ~ 1/ln(1/gamma_bar); estimating gamma_bar to
    multiplicative accuracy beta needs each fbar to accuracy d1*beta/2
    """
    _check(nu, A, gamma_bar)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if gamma_bar >= 1.0:
        raise DomainError("a two-depth plan needs gamma_bar < 1")
    d1 = max(1, math.ceil(1.0 / math.log(1.0 / gamma_bar)))
    accuracy = d1 * beta / 2.0
    base = 8.0 * math.log(2.0 / nu) / (d1**2 * beta**2 * A**2)
    return TwoDepthPlan(
        d1=d1,
        per_depth_accuracy=accuracy,
        circuits_at_zero=_ceil(base),
        circuits_at_d1=_ceil(base / gamma_bar ** (2 * d1)),
    )


def plan_samples(plan: PlannerInput) -> PlannerOutput:
    """Circuits per depth, plus the two-depth plan when beta is given"""
    K = circuits_needed(plan.nu, plan.alpha, plan.A, plan.gamma_bar, plan.d)
    two_depth = None
    if plan.beta is not None:
        two_depth = two_depth_plan(plan.nu, plan.beta, plan.A, plan.gamma_bar)
    return PlannerOutput(K=K, inputs=plan, two_depth=two_depth)
