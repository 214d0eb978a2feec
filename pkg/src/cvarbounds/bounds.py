"""Closed-form lower bounds on prior-predictive CVaR for two-point problems.

The machinery rests on a single scalar minimization.  For a pair of models
whose losses add up to at least c on every transcript, whose losses are
capped at l_max, and whose transcript laws are within squared Hellinger
distance gamma, the CVaR of the loss under the uniform two-point prior obeys

    CVaR_alpha >= min over t in [0, l_max] of
        t + (l_max / (1 - alpha)) * (sqrt(((c/2 - t)/l_max)_+) - sqrt(gamma))_+^2.

Substituting x = (c/2 - t)/l_max turns this into minimizing

    F(x) = c/(2 l_max) - x + (sqrt(x) - sqrt(gamma))_+^2 / (1 - alpha)

over x in [0, c/(2 l_max)], which has a three-branch piecewise solution: an
interior stationary point of the quadratic part, the right boundary, or zero
once the budget swallows the separation.  The balanced case c = l_max gives
the normalized profile `bound_factor` with its optimized constant, and the
two decision problems (Gaussian mean estimation, two-armed Gaussian bandit)
plug in their own budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .divergences import DivergenceKind, HellingerBudget, bandit_budget, estimation_budget
from .inversion import bernoulli_inverse
from .risk import RiskLevel

__all__ = [
    "Branch",
    "Method",
    "FactorEvaluation",
    "TwoPointSpec",
    "BoundResult",
    "bound_factor",
    "bound_factor_grid_min",
    "optimal_bound_constant",
    "optimal_rho",
    "two_point_bound",
    "balanced_bound",
    "estimation_bound",
    "bandit_bound",
    "optimal_separation",
    "optimal_gap",
    "hinge_lower_bound",
]

_FALLBACK_GRID = 100_000
_MIN_ORACLE_GRID = 1_000


class Branch(Enum):
    """Which piece of the scalar minimization attained the minimum."""

    INTERIOR_QUADRATIC = "interior_quadratic"
    BOUNDARY = "boundary"
    ZERO = "zero"


class Method(Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_MIN = "numeric_min"
    GRID_ORACLE = "grid_oracle"


@dataclass(frozen=True)
class FactorEvaluation:
    """Value of the normalized profile at one (alpha, rho) point."""

    level: RiskLevel
    rho: float
    value: float
    branch: Branch


@dataclass(frozen=True)
class TwoPointSpec:
    """Inputs to the general template: loss cap l_max, transcript-wise loss
    sum floor c_sep, and the Hellinger budget between the two models."""

    l_max: float
    c_sep: float
    budget: HellingerBudget

    def __post_init__(self) -> None:
        lm = float(self.l_max)
        if not (lm > 0.0 and math.isfinite(lm)):
            raise ValueError(f"l_max must be finite and > 0, got {self.l_max!r}")
        cs = float(self.c_sep)
        if not (0.0 <= cs <= 2.0 * lm):
            raise ValueError(f"c_sep must lie in [0, 2 l_max], got {self.c_sep!r}")
        object.__setattr__(self, "l_max", lm)
        object.__setattr__(self, "c_sep", cs)


@dataclass(frozen=True)
class BoundResult:
    """A certified lower bound with the threshold that attains it."""

    value: float
    t_star: float
    branch: Branch
    method: Method


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (rho >= 0.0 and math.isfinite(rho)):
        raise ValueError(f"rho must be finite and >= 0, got {rho!r}")
    return rho


def bound_factor(level: RiskLevel, rho: float) -> FactorEvaluation:
    """Normalized balanced-case profile: the bound equals l_max times this.

    Piecewise in the signal strength rho = sqrt(2 gamma):

        1/2 - rho^2 / (2 alpha)          for rho <= alpha (alpha > 0),
        (1 - rho)^2 / (2 (1 - alpha))    for alpha < rho <= 1,
        0                                for rho >= 1.

    Continuous at both breakpoints, equal to 1/2 at rho = 0, nonincreasing
    in rho, nondecreasing in alpha.
    """
    rho = _check_rho(rho)
    alpha = level.alpha
    if rho >= 1.0:
        return FactorEvaluation(level, rho, 0.0, Branch.ZERO)
    if alpha > 0.0 and rho <= alpha:
        value = 0.5 - rho * rho / (2.0 * alpha)
        return FactorEvaluation(level, rho, value, Branch.INTERIOR_QUADRATIC)
    one_minus = 1.0 - rho
    value = one_minus * one_minus / (2.0 * (1.0 - alpha))
    return FactorEvaluation(level, rho, value, Branch.BOUNDARY)


@lru_cache(maxsize=8)
def _half_unit_grid(points: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.linspace(0.0, 0.5, points)
    roots = np.sqrt(xs)
    xs.setflags(write=False)
    roots.setflags(write=False)
    return xs, roots


def bound_factor_grid_min(level: RiskLevel, rho: float, grid_points: int) -> float:
    """Brute-force check of `bound_factor`: minimize
    1/2 - x + (sqrt(x) - rho/sqrt(2))_+^2 / (1 - alpha) over an even grid of
    x in [0, 1/2] including both endpoints.  Never below the closed form by
    more than grid resolution."""
    grid_points = int(grid_points)
    if grid_points < _MIN_ORACLE_GRID:
        raise ValueError(f"grid_points must be >= {_MIN_ORACLE_GRID}, got {grid_points}")
    rho = _check_rho(rho)
    xs, roots = _half_unit_grid(grid_points)
    gap = np.maximum(roots - rho / math.sqrt(2.0), 0.0)
    vals = 0.5 - xs + gap * gap / (1.0 - level.alpha)
    return float(vals.min())


def optimal_bound_constant(level: RiskLevel) -> float:
    """sup over rho of rho * bound_factor: 2 / (27 (1 - alpha)) below
    alpha = 1/3, then sqrt(alpha / 27); the branches meet at 1/9.

    The sqrt arrangement takes over from alpha = 1/3 because it lands on 1/9
    to the last ulp there; the rational form is one ulp off.
    """
    a = level.alpha
    if a < 1.0 / 3.0:
        return 2.0 / (27.0 * (1.0 - a))
    return math.sqrt(a / 27.0)


def optimal_rho(level: RiskLevel) -> float:
    """argmax of rho * bound_factor: 1/3 below alpha = 1/3, then sqrt(alpha/3)."""
    a = level.alpha
    if a < 1.0 / 3.0:
        return 1.0 / 3.0
    return math.sqrt(a / 3.0)


def two_point_bound(spec: TwoPointSpec, level: RiskLevel) -> BoundResult:
    """General template bound, minimized over thresholds t in [0, l_max].

    The analytic three-branch solution (see module docstring) is cross
    checked against a dense threshold grid and the smaller value is kept;
    threshold ties resolve to the smallest t.
    """
    alpha = level.alpha
    l_max = spec.l_max
    x_hi = spec.c_sep / (2.0 * l_max)  # in [0, 1]
    h = math.sqrt(spec.budget.gamma)

    if h * h >= x_hi:
        value, x_star, branch = 0.0, x_hi, Branch.ZERO
    elif alpha > 0.0 and h <= alpha * math.sqrt(x_hi):
        x_star = h * h / (alpha * alpha)
        value = l_max * (x_hi - h * h / alpha)
        branch = Branch.INTERIOR_QUADRATIC
    else:
        root_gap = math.sqrt(x_hi) - h
        value = l_max * root_gap * root_gap / (1.0 - alpha)
        x_star = x_hi
        branch = Branch.BOUNDARY
    t_star = max(0.0, 0.5 * spec.c_sep - l_max * x_star)

    # grid fallback; ascending thresholds so argmin lands on the smallest tie
    ts = np.linspace(0.0, l_max, _FALLBACK_GRID)
    x = np.maximum((0.5 * spec.c_sep - ts) / l_max, 0.0)
    gap = np.maximum(np.sqrt(x) - h, 0.0)
    vals = ts + l_max * gap * gap / (1.0 - alpha)
    i = int(np.argmin(vals))
    if float(vals[i]) < value - 1e-12 * max(1.0, l_max):
        value, t_star = float(vals[i]), float(ts[i])
    return BoundResult(value=value, t_star=t_star, branch=branch, method=Method.NUMERIC_MIN)


def balanced_bound(l_max: float, budget: HellingerBudget, level: RiskLevel) -> BoundResult:
    """Template value when the pairwise loss sum floor equals the cap:
    l_max * bound_factor(alpha, sqrt(2 gamma)), fully closed form."""
    l_max = float(l_max)
    if not (l_max > 0.0 and math.isfinite(l_max)):
        raise ValueError(f"l_max must be finite and > 0, got {l_max!r}")
    rho = math.sqrt(2.0 * budget.gamma)
    ev = bound_factor(level, rho)
    if ev.branch is Branch.INTERIOR_QUADRATIC:
        x_star = rho * rho / (2.0 * level.alpha * level.alpha)
        t_star = l_max * max(0.0, 0.5 - x_star)
    else:
        # boundary and zero branches both sit at x = 1/2, i.e. t = 0
        t_star = 0.0
    return BoundResult(
        value=l_max * ev.value, t_star=t_star, branch=ev.branch, method=Method.CLOSED_FORM
    )


def estimation_bound(n: int, delta: float, level: RiskLevel) -> BoundResult:
    """Clipped-error CVaR bound 2 delta * bound_factor(alpha, 2 sqrt(n) delta)
    for estimating a unit-variance Gaussian mean known to be one of two
    points 2 delta apart, from n draws."""
    return balanced_bound(2.0 * float(delta), estimation_budget(n, delta), level)


def bandit_bound(g: float, horizon: int, level: RiskLevel) -> BoundResult:
    """Regret CVaR bound g T * bound_factor(alpha, g sqrt(T)) for the
    symmetric two-armed unit-variance Gaussian pair with per-arm gap g."""
    return balanced_bound(float(g) * int(horizon), bandit_budget(g, horizon), level)


def optimal_separation(n: int, level: RiskLevel) -> tuple[float, float]:
    """Worst-case separation for estimation: delta* = optimal_rho / (2 sqrt(n)),
    returned with its bound value optimal_bound_constant / sqrt(n)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    root_n = math.sqrt(n)
    return optimal_rho(level) / (2.0 * root_n), optimal_bound_constant(level) / root_n


def optimal_gap(horizon: int, level: RiskLevel) -> tuple[float, float]:
    """Worst-case arm gap for the bandit: g* = optimal_rho / sqrt(T), returned
    with its bound value optimal_bound_constant * sqrt(T)."""
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    root_t = math.sqrt(horizon)
    return optimal_rho(level) / root_t, optimal_bound_constant(level) * root_t


def hinge_lower_bound(
    l_max: float, budget: float, reference_hinge: float, kind: DivergenceKind
) -> float:
    """Floor on a hinge expectation transported across a divergence ball.

    If E[(L - t)_+] / l_max equals `reference_hinge` under a reference law,
    then under any law within `budget` of it the normalized hinge is at least
    the Bernoulli divergence-ball inverse, so the hinge expectation is at
    least l_max times that inverse.
    """
    l_max = float(l_max)
    if not (l_max > 0.0 and math.isfinite(l_max)):
        raise ValueError(f"l_max must be finite and > 0, got {l_max!r}")
    ref = float(reference_hinge)
    if not 0.0 <= ref <= 1.0:
        raise ValueError(f"reference_hinge must lie in [0, 1], got {reference_hinge!r}")
    return l_max * bernoulli_inverse(kind, budget, ref).a_minus
