"""Monte Carlo sampling of prior-predictive losses, plus exact-law oracles.

Two problem families:

* mean estimation: theta is drawn uniformly from {-delta, +delta}, n
  unit-variance Gaussians are observed, and the loss is the clipped error
  min(|theta_hat - theta|, 2 delta);
* two-armed bandit: the model index is drawn uniformly from {1, 2}, arm
  means are (+g/2, -g/2) under model 1 and flipped under model 2, rewards
  are unit-variance Gaussian, and the loss is the realized pseudo-regret
  g * (pulls of the suboptimal arm).

Randomness contract: replicate r of a run with master seed s draws
everything from a Philox stream keyed by (s, r).  Per replicate the stream
is consumed in a fixed order (model draw, then any policy draws, then the
reward/observation noise), so results are independent of batch size and the
first replicates of a longer run reproduce a shorter one bit for bit.  The
rollout itself is vectorized across replicates in lockstep over rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import DomainError
from .risk import DiscreteLossDistribution, SampleSet

__all__ = [
    "Estimator",
    "UniformRandom",
    "ExploreThenCommit",
    "UCB",
    "ThompsonGaussian",
    "Policy",
    "EstimationConfig",
    "BanditConfig",
    "EstimationBatch",
    "Transcript",
    "BanditBatch",
    "replicate_rng",
    "resolve_tau",
    "policy_name",
    "run_estimation",
    "simulate_estimation",
    "run_bandit",
    "simulate_bandit",
    "mc_transcript_kl",
    "normal_upper_tail",
    "exact_uniform_bandit_law",
    "exact_sign_estimator_law",
]

_MAX_EXACT_HORIZON = 64
_MIN_KL_REPLICATES = 1_000
_SEED_LIMIT = 2**64


class Estimator(Enum):
    SAMPLE_MEAN = "sample_mean"
    SIGN_COMMIT = "sign_commit"
    ALWAYS_ZERO = "always_zero"


@dataclass(frozen=True)
class UniformRandom:
    """Pick each arm with probability 1/2, independently every round."""


@dataclass(frozen=True)
class ExploreThenCommit:
    """Pull arm 1 for tau rounds, arm 2 for tau rounds, then commit to the
    empirical best (ties go to arm 1).  tau = None resolves to
    ceil(T^(2/3)) clipped into [1, T // 2]."""

    tau: int | None = None


@dataclass(frozen=True)
class UCB:
    """Each arm once, then argmax of mean + c_explore sqrt(2 ln t / pulls),
    with t the 1-based round index; ties go to arm 1."""

    c_explore: float = 1.0


@dataclass(frozen=True)
class ThompsonGaussian:
    """Draw each arm mean from its conjugate posterior under a standard
    normal prior and unit observation variance; pull the argmax."""


Policy = Union[UniformRandom, ExploreThenCommit, UCB, ThompsonGaussian]

_POLICY_NAMES = {
    UniformRandom: "uniform",
    ExploreThenCommit: "etc",
    UCB: "ucb",
    ThompsonGaussian: "thompson",
}


def policy_name(policy: Policy) -> str:
    return _POLICY_NAMES[type(policy)]


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def resolve_tau(policy: ExploreThenCommit, horizon: int) -> int:
    """Per-arm exploration length, defaulting to ceil(T^(2/3)) clipped into
    [1, T // 2].  Explicit values must satisfy 1 <= tau <= T/2."""
    if policy.tau is not None:
        tau = int(policy.tau)
        if tau < 1 or 2 * tau > horizon:
            raise ValueError(f"tau must satisfy 1 <= tau <= T/2, got tau={tau} for T={horizon}")
        return tau
    if horizon < 2:
        raise ValueError(f"explore-then-commit needs horizon >= 2, got {horizon}")
    return max(1, min(math.ceil(horizon ** (2.0 / 3.0)), horizon // 2))


@dataclass(frozen=True)
class EstimationConfig:
    n: int
    delta: float
    estimator: Estimator
    replicates: int
    seed: int

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        d = float(self.delta)
        if not (d > 0.0 and math.isfinite(d)):
            raise ValueError(f"delta must be finite and > 0, got {self.delta!r}")
        if not isinstance(self.estimator, Estimator):
            raise ValueError(f"estimator must be an Estimator, got {self.estimator!r}")
        if int(self.replicates) < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        _check_seed(self.seed)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class BanditConfig:
    horizon: int
    gap: float
    policy: Policy
    replicates: int
    seed: int

    def __post_init__(self) -> None:
        if int(self.horizon) < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        g = float(self.gap)
        if not (g > 0.0 and math.isfinite(g)):
            raise ValueError(f"gap must be finite and > 0, got {self.gap!r}")
        if type(self.policy) not in _POLICY_NAMES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if int(self.replicates) < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        _check_seed(self.seed)
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "gap", g)
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "seed", int(self.seed))
        if isinstance(self.policy, ExploreThenCommit):
            resolve_tau(self.policy, self.horizon)  # fail fast on bad tau


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Counter-based stream for one replicate, keyed by (master seed, index);
    streams for different keys are statistically independent and order free."""
    key = np.array([_check_seed(seed), int(replicate)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------- estimation


@dataclass(frozen=True)
class EstimationBatch:
    """Replicate-aligned draws: true mean, estimate, clipped loss."""

    delta: float
    theta: np.ndarray
    theta_hat: np.ndarray
    losses: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.theta, self.theta_hat, self.losses):
            arr.setflags(write=False)


def run_estimation(config: EstimationConfig) -> EstimationBatch:
    """Draw all replicates and apply the configured estimator.

    Stream order per replicate: one integer for the sign of theta, then the
    n standard normal observation noises (observations are theta + noise).
    """
    reps, n, delta = config.replicates, config.n, config.delta
    theta = np.empty(reps)
    ybar = np.empty(reps)
    for r in range(reps):
        rng = replicate_rng(config.seed, r)
        theta[r] = delta if rng.integers(0, 2) == 1 else -delta
        ybar[r] = theta[r] + rng.standard_normal(n).mean()
    if config.estimator is Estimator.SAMPLE_MEAN:
        theta_hat = ybar.copy()
    elif config.estimator is Estimator.SIGN_COMMIT:
        # sign(0) resolves to +1
        theta_hat = np.where(ybar >= 0.0, delta, -delta)
    else:
        theta_hat = np.zeros(reps)
    losses = np.minimum(np.abs(theta_hat - theta), 2.0 * delta)
    return EstimationBatch(delta=delta, theta=theta, theta_hat=theta_hat, losses=losses)


def simulate_estimation(config: EstimationConfig) -> SampleSet:
    batch = run_estimation(config)
    return SampleSet(
        batch.losses,
        provenance={
            "problem": "estimation",
            "n": config.n,
            "delta": config.delta,
            "estimator": config.estimator.value,
            "replicates": config.replicates,
            "seed": config.seed,
        },
    )


# -------------------------------------------------------------------- bandit


@dataclass(frozen=True)
class Transcript:
    """One bandit run: action sequence, pull counts, model index, regret."""

    actions: np.ndarray
    pulls: tuple[int, int]
    model_index: int
    loss: float

    def __post_init__(self) -> None:
        n1 = int(np.count_nonzero(self.actions == 1))
        n2 = int(self.actions.size - n1)
        if self.pulls != (n1, n2):
            raise ValueError(f"pull counts {self.pulls} disagree with actions ({n1}, {n2})")
        if self.model_index not in (1, 2):
            raise ValueError(f"model_index must be 1 or 2, got {self.model_index}")


@dataclass(frozen=True)
class BanditBatch:
    """Replicate-aligned transcripts in array form; actions are in {1, 2}."""

    gap: float
    horizon: int
    actions: np.ndarray
    model_index: np.ndarray
    losses: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.actions, self.model_index, self.losses):
            arr.setflags(write=False)

    def pulls(self) -> np.ndarray:
        """(replicates, 2) pull counts; rows sum to the horizon exactly."""
        n1 = (self.actions == 1).sum(axis=1)
        return np.stack([n1, self.horizon - n1], axis=1)

    def regret_under(self, model_index: int) -> np.ndarray:
        """Regret each action sequence would incur under the given model:
        gap times the pulls of that model's suboptimal arm."""
        if model_index not in (1, 2):
            raise ValueError(f"model_index must be 1 or 2, got {model_index}")
        n1 = (self.actions == 1).sum(axis=1)
        return self.gap * (self.horizon - n1) if model_index == 1 else self.gap * n1

    def transcript(self, r: int) -> Transcript:
        n1 = int(np.count_nonzero(self.actions[r] == 1))
        return Transcript(
            actions=self.actions[r],
            pulls=(n1, self.horizon - n1),
            model_index=int(self.model_index[r]),
            loss=float(self.losses[r]),
        )


def _predraw(config: BanditConfig):
    """Consume each replicate's stream up front, in the documented order."""
    reps, horizon = config.replicates, config.horizon
    model = np.empty(reps, dtype=np.int64)
    noise = np.empty((reps, horizon))
    arms = None
    posterior_z = None
    if isinstance(config.policy, UniformRandom):
        arms = np.empty((reps, horizon), dtype=np.int8)
    elif isinstance(config.policy, ThompsonGaussian):
        posterior_z = np.empty((reps, horizon, 2))
    for r in range(reps):
        rng = replicate_rng(config.seed, r)
        model[r] = 1 + int(rng.integers(0, 2))
        if arms is not None:
            arms[r] = rng.integers(1, 3, size=horizon, dtype=np.int8)
        elif posterior_z is not None:
            posterior_z[r] = rng.standard_normal((horizon, 2))
        noise[r] = rng.standard_normal(horizon)
    return model, arms, posterior_z, noise


def _rollout(config: BanditConfig, model, arms, posterior_z, noise) -> np.ndarray:
    """Lockstep rollout across replicates; returns the (reps, T) action array."""
    reps, horizon, g = config.replicates, config.horizon, config.gap
    policy = config.policy
    mu_arm1 = np.where(model == 1, 0.5 * g, -0.5 * g)
    actions = np.empty((reps, horizon), dtype=np.int8)
    n1 = np.zeros(reps, dtype=np.int64)
    s1 = np.zeros(reps)
    n2 = np.zeros(reps, dtype=np.int64)
    s2 = np.zeros(reps)
    committed = None
    tau = resolve_tau(policy, horizon) if isinstance(policy, ExploreThenCommit) else 0

    for t in range(horizon):
        if isinstance(policy, UniformRandom):
            a = arms[:, t]
        elif isinstance(policy, ExploreThenCommit):
            if t < tau:
                a = np.ones(reps, dtype=np.int8)
            elif t < 2 * tau:
                a = np.full(reps, 2, dtype=np.int8)
            else:
                if committed is None:
                    # equal exploration counts, so compare sums; ties -> arm 1
                    committed = np.where(s1 >= s2, 1, 2).astype(np.int8)
                a = committed
        elif isinstance(policy, UCB):
            if t == 0:
                a = np.ones(reps, dtype=np.int8)
            elif t == 1:
                a = np.full(reps, 2, dtype=np.int8)
            else:
                radius = policy.c_explore * math.sqrt(2.0 * math.log(t + 1))
                idx1 = s1 / n1 + radius / np.sqrt(n1)
                idx2 = s2 / n2 + radius / np.sqrt(n2)
                a = np.where(idx1 >= idx2, 1, 2).astype(np.int8)
        else:
            d1 = n1 + 1.0
            d2 = n2 + 1.0
            draw1 = s1 / d1 + posterior_z[:, t, 0] / np.sqrt(d1)
            draw2 = s2 / d2 + posterior_z[:, t, 1] / np.sqrt(d2)
            a = np.where(draw1 >= draw2, 1, 2).astype(np.int8)
        actions[:, t] = a
        on1 = a == 1
        y = np.where(on1, mu_arm1, -mu_arm1) + noise[:, t]
        n1 += on1
        n2 += ~on1
        s1 += np.where(on1, y, 0.0)
        s2 += np.where(on1, 0.0, y)
    return actions


def run_bandit(config: BanditConfig) -> BanditBatch:
    """Simulate every replicate under its drawn model."""
    model, arms, posterior_z, noise = _predraw(config)
    actions = _rollout(config, model, arms, posterior_z, noise)
    n1 = (actions == 1).sum(axis=1)
    losses = np.where(model == 1, config.gap * (config.horizon - n1), config.gap * n1)
    return BanditBatch(
        gap=config.gap,
        horizon=config.horizon,
        actions=actions,
        model_index=model,
        losses=losses.astype(float),
    )


def simulate_bandit(config: BanditConfig) -> SampleSet:
    batch = run_bandit(config)
    return SampleSet(
        batch.losses,
        provenance={
            "problem": "bandit",
            "horizon": config.horizon,
            "gap": config.gap,
            "policy": policy_name(config.policy),
            "replicates": config.replicates,
            "seed": config.seed,
        },
    )


def mc_transcript_kl(config: BanditConfig) -> tuple[float, float]:
    """Monte Carlo (estimate, standard error) of the transcript KL between
    the two models, simulated under model 1.

    Each replicate accumulates sum_t [(Y_t - mu_2(A_t))^2 - (Y_t - mu_1(A_t))^2] / 2
    along a transcript rolled out under model 1.  The model draw at the head
    of each replicate stream is consumed but ignored so the remaining draws
    align with `run_bandit`.  Population value is g^2 T / 2 for any policy.
    """
    if config.replicates < _MIN_KL_REPLICATES:
        raise ValueError(
            f"mc_transcript_kl needs >= {_MIN_KL_REPLICATES} replicates, got {config.replicates}"
        )
    _, arms, posterior_z, noise = _predraw(config)
    forced = np.ones(config.replicates, dtype=np.int64)
    actions = _rollout(config, forced, arms, posterior_z, noise)
    half_g = 0.5 * config.gap
    mu1 = np.where(actions == 1, half_g, -half_g)  # chosen-arm mean under model 1
    y = mu1 + noise
    per_transcript = 0.5 * ((y + mu1) ** 2 - (y - mu1) ** 2).sum(axis=1)
    estimate = float(per_transcript.mean())
    stderr = float(per_transcript.std(ddof=1)) / math.sqrt(config.replicates)
    return estimate, stderr


# --------------------------------------------------------------- exact laws


def normal_upper_tail(x: float) -> float:
    """P(Z > x) for standard normal Z, via the complementary error function."""
    return 0.5 * math.erfc(float(x) / math.sqrt(2.0))


def exact_uniform_bandit_law(g: float, horizon: int) -> DiscreteLossDistribution:
    """Exact regret law of the uniform-random policy: g * Binomial(T, 1/2).

    Under either model the suboptimal arm is pulled Binomial(T, 1/2) times.
    Weights are exact integers divided by 2^T (one correctly rounded float
    division per atom); horizons above 64 raise DomainError rather than
    silently losing precision.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if horizon > _MAX_EXACT_HORIZON:
        raise DomainError(
            f"exact uniform-policy law supports horizons up to {_MAX_EXACT_HORIZON}, got {horizon}"
        )
    g = float(g)
    if not (g > 0.0 and math.isfinite(g)):
        raise ValueError(f"gap must be finite and > 0, got {g!r}")
    denom = 1 << horizon
    atoms = tuple((g * k, math.comb(horizon, k) / denom) for k in range(horizon + 1))
    return DiscreteLossDistribution(atoms)


def exact_sign_estimator_law(n: int, delta: float) -> DiscreteLossDistribution:
    """Exact loss law of the sign-commit estimator: loss 0 with probability
    1 - p and 2 delta with p = P(Z > sqrt(n) delta), by symmetry of the two
    mean hypotheses."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    delta = float(delta)
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValueError(f"delta must be finite and > 0, got {delta!r}")
    p = normal_upper_tail(math.sqrt(n) * delta)
    return DiscreteLossDistribution(((0.0, 1.0 - p), (2.0 * delta, p)))
