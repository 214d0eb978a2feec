"""Closed-form divergences and the transcript-level budgets they certify.

Everything here is scalar arithmetic: KL between unit-variance Gaussians,
KL and squared Hellinger distance on the Bernoulli family, and the two
budgets used by the decision problems downstream (mean estimation from n
draws, two-armed bandit over horizon T).  The bandit budget is policy
independent: each round shifts the chosen arm's mean by the same amount g
under either model, so every round contributes g^2/2 to the transcript KL
no matter which arm was pulled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

__all__ = [
    "DivergenceKind",
    "HellingerBudget",
    "kl_gaussian_unit_var",
    "kl_bernoulli",
    "hellinger2_bernoulli",
    "estimation_budget",
    "bandit_budget",
    "hellinger_le_kl_check",
]

# slack for the hellinger <= kl comparison; both sides are closed forms
_ORDER_TOL = 1e-12


class DivergenceKind(Enum):
    KL = "kl"
    SQUARED_HELLINGER = "h2"


@dataclass(frozen=True)
class HellingerBudget:
    """Nonnegative cap on the squared Hellinger distance between two transcript laws."""

    gamma: float

    def __post_init__(self) -> None:
        g = float(self.gamma)
        if not (g >= 0.0 and math.isfinite(g)):
            raise ValueError(f"budget must be finite and >= 0, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    def __float__(self) -> float:
        return self.gamma


def _check_unit(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def kl_gaussian_unit_var(mu1: float, mu2: float) -> float:
    """KL(N(mu1, 1) || N(mu2, 1)) = (mu1 - mu2)^2 / 2."""
    d = float(mu1) - float(mu2)
    return 0.5 * d * d


def kl_bernoulli(a: float, b: float) -> float:
    """Binary KL a log(a/b) + (1-a) log((1-a)/(1-b)), with 0 log 0 = 0.

    Raises DomainError where the divergence is infinite (a > 0 against b = 0,
    or a < 1 against b = 1).
    """
    a = _check_unit(a, "a")
    b = _check_unit(b, "b")
    if a > 0.0 and b == 0.0:
        raise DomainError("kl_bernoulli is infinite for a > 0, b = 0")
    if a < 1.0 and b == 1.0:
        raise DomainError("kl_bernoulli is infinite for a < 1, b = 1")
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return out


def hellinger2_bernoulli(a: float, b: float) -> float:
    """Squared Hellinger distance 1 - sqrt(ab) - sqrt((1-a)(1-b)) on [0, 1]^2.

    Always finite; equivalently half the sum of squared root differences over
    the two outcomes.  Clamped at zero against sub-ulp rounding when a = b.
    """
    a = _check_unit(a, "a")
    b = _check_unit(b, "b")
    v = 1.0 - math.sqrt(a * b) - math.sqrt((1.0 - a) * (1.0 - b))
    return v if v > 0.0 else 0.0


def estimation_budget(n: int, delta: float) -> HellingerBudget:
    """Budget 2 n delta^2 for n unit-variance draws whose mean differs by
    2 delta between the two candidate models.

    The exact product-measure squared Hellinger distance is
    1 - exp(-n delta^2 / 2) <= 2 n delta^2; the linearized cap keeps the
    downstream closed forms polynomial in delta.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    d = float(delta)
    if not (d > 0.0 and math.isfinite(d)):
        raise ValueError(f"separation delta must be finite and > 0, got {delta!r}")
    return HellingerBudget(2.0 * n * d * d)


def bandit_budget(g: float, horizon: int) -> HellingerBudget:
    """Budget g^2 T / 2 for a horizon-T two-armed transcript with per-arm mean
    shift g between the two models; holds for every policy since each round
    contributes g^2/2 to the transcript KL regardless of the arm pulled, and
    squared Hellinger never exceeds KL.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    gv = float(g)
    if not (gv > 0.0 and math.isfinite(gv)):
        raise ValueError(f"arm gap g must be finite and > 0, got {g!r}")
    return HellingerBudget(0.5 * gv * gv * horizon)


def hellinger_le_kl_check(a: float, b: float) -> bool:
    """Squared Hellinger <= KL on the Bernoulli family (within rounding)."""
    return hellinger2_bernoulli(a, b) <= kl_bernoulli(a, b) + _ORDER_TOL
