import math

import numpy as np
import pytest

from cvarbounds.errors import DomainError
from cvarbounds.risk import RiskLevel, exact_cvar
from cvarbounds.sim import (
    BanditConfig,
    EstimationConfig,
    Estimator,
    ExploreThenCommit,
    ThompsonGaussian,
    UCB,
    UniformRandom,
    exact_sign_estimator_law,
    exact_uniform_bandit_law,
    mc_transcript_kl,
    normal_upper_tail,
    policy_name,
    replicate_rng,
    resolve_tau,
    run_bandit,
    run_estimation,
    simulate_bandit,
    simulate_estimation,
)

ALL_POLICIES = (UniformRandom(), ExploreThenCommit(), UCB(), ThompsonGaussian())


# ----------------------------------------------------------------- plumbing


def test_replicate_rng_streams():
    a = replicate_rng(42, 0).standard_normal(5)
    b = replicate_rng(42, 0).standard_normal(5)
    c = replicate_rng(42, 1).standard_normal(5)
    d = replicate_rng(43, 0).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    with pytest.raises(ValueError):
        replicate_rng(-1, 0)
    with pytest.raises(ValueError):
        replicate_rng(2**64, 0)


def test_resolve_tau():
    assert resolve_tau(ExploreThenCommit(), 200) == 35  # ceil(200^(2/3))
    assert resolve_tau(ExploreThenCommit(), 2) == 1
    assert resolve_tau(ExploreThenCommit(tau=5), 10) == 5
    with pytest.raises(ValueError):
        resolve_tau(ExploreThenCommit(tau=6), 10)
    with pytest.raises(ValueError):
        resolve_tau(ExploreThenCommit(tau=0), 10)
    with pytest.raises(ValueError):
        resolve_tau(ExploreThenCommit(), 1)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimationConfig(n=0, delta=0.1, estimator=Estimator.SAMPLE_MEAN, replicates=5, seed=0)
    with pytest.raises(ValueError):
        EstimationConfig(n=5, delta=-0.1, estimator=Estimator.SAMPLE_MEAN, replicates=5, seed=0)
    with pytest.raises(ValueError):
        EstimationConfig(n=5, delta=0.1, estimator=Estimator.SAMPLE_MEAN, replicates=0, seed=0)
    with pytest.raises(ValueError):
        BanditConfig(horizon=0, gap=0.1, policy=UCB(), replicates=5, seed=0)
    with pytest.raises(ValueError):
        BanditConfig(horizon=10, gap=0.0, policy=UCB(), replicates=5, seed=0)
    with pytest.raises(ValueError):
        BanditConfig(horizon=10, gap=0.1, policy=ExploreThenCommit(tau=8), replicates=5, seed=0)
    with pytest.raises(ValueError):
        BanditConfig(horizon=10, gap=0.1, policy=UCB(), replicates=5, seed=-3)


def test_policy_names():
    assert [policy_name(p) for p in ALL_POLICIES] == ["uniform", "etc", "ucb", "thompson"]


# -------------------------------------------------------------- estimation


def test_estimation_stream_layout():
    # replicate r: one integer for the sign, then n observation noises
    cfg = EstimationConfig(n=3, delta=0.5, estimator=Estimator.SAMPLE_MEAN, replicates=6, seed=9)
    batch = run_estimation(cfg)
    for r in range(6):
        rng = replicate_rng(9, r)
        theta = 0.5 if rng.integers(0, 2) == 1 else -0.5
        ybar = theta + rng.standard_normal(3).mean()
        assert batch.theta[r] == theta
        assert batch.theta_hat[r] == ybar


def test_estimation_prefix_stable():
    kw = dict(n=4, delta=0.2, estimator=Estimator.SAMPLE_MEAN, seed=3)
    short = run_estimation(EstimationConfig(replicates=10, **kw))
    long = run_estimation(EstimationConfig(replicates=25, **kw))
    assert np.array_equal(short.losses, long.losses[:10])


def test_estimator_behaviors():
    kw = dict(n=4, delta=0.25, replicates=400, seed=10)
    zero = run_estimation(EstimationConfig(estimator=Estimator.ALWAYS_ZERO, **kw))
    assert np.all(zero.theta_hat == 0.0)
    assert np.all(zero.losses == 0.25)  # |0 - theta| = delta, never clipped
    sign = run_estimation(EstimationConfig(estimator=Estimator.SIGN_COMMIT, **kw))
    assert set(np.unique(sign.theta_hat)) <= {-0.25, 0.25}
    assert set(np.unique(sign.losses)) <= {0.0, 0.5}
    mean = run_estimation(EstimationConfig(estimator=Estimator.SAMPLE_MEAN, **kw))
    assert np.all((mean.losses >= 0.0) & (mean.losses <= 0.5))
    assert np.all(np.abs(mean.theta) == 0.25)


def test_sign_commit_matches_exact_law():
    n, delta, reps = 4, 1.0 / 12.0, 20_000
    law = exact_sign_estimator_law(n, delta)
    p = dict(law.atoms)[2.0 * delta]
    assert p == pytest.approx(normal_upper_tail(math.sqrt(n) * delta), rel=1e-15)
    batch = run_estimation(
        EstimationConfig(n=n, delta=delta, estimator=Estimator.SIGN_COMMIT, replicates=reps, seed=5)
    )
    freq = float((batch.losses > delta).mean())
    assert abs(freq - p) <= 4.0 * math.sqrt(p * (1.0 - p) / reps)


def test_normal_upper_tail_values():
    assert normal_upper_tail(0.0) == pytest.approx(0.5, abs=1e-15)
    assert normal_upper_tail(1.0) == pytest.approx(0.15865525393145705, rel=1e-12)
    assert normal_upper_tail(1.0 / 6.0) == pytest.approx(0.43381616738909634, rel=1e-12)
    assert normal_upper_tail(-10.0) == pytest.approx(1.0, abs=1e-15)


def test_simulate_estimation_sampleset():
    cfg = EstimationConfig(n=2, delta=0.3, estimator=Estimator.SAMPLE_MEAN, replicates=50, seed=1)
    s = simulate_estimation(cfg)
    assert s.count == 50
    assert s.provenance["seed"] == 1
    assert s.provenance["problem"] == "estimation"
    assert np.all(np.diff(s.values) <= 0)


# ------------------------------------------------------------------ bandit


def test_bandit_deterministic_and_prefix_stable():
    for policy in ALL_POLICIES:
        kw = dict(horizon=40, gap=0.15, policy=policy, seed=12)
        one = run_bandit(BanditConfig(replicates=15, **kw))
        two = run_bandit(BanditConfig(replicates=15, **kw))
        longer = run_bandit(BanditConfig(replicates=40, **kw))
        assert np.array_equal(one.actions, two.actions)
        assert np.array_equal(one.losses, longer.losses[:15]), policy_name(policy)


def test_bandit_pair_identity():
    # pulls sum to T and regrets under the two models sum to g*T, per transcript
    for policy in ALL_POLICIES:
        batch = run_bandit(BanditConfig(horizon=30, gap=0.3, policy=policy, replicates=250, seed=3))
        pulls = batch.pulls()
        assert np.all(pulls.sum(axis=1) == 30)
        total = batch.regret_under(1) + batch.regret_under(2)
        assert np.allclose(total, 0.3 * 30, rtol=1e-12, atol=0.0)
        expect = np.where(batch.model_index == 1, batch.regret_under(1), batch.regret_under(2))
        assert np.array_equal(batch.losses, expect)
        assert np.all((batch.losses >= 0.0) & (batch.losses <= 0.3 * 30))


def test_transcript_accessor():
    batch = run_bandit(BanditConfig(horizon=12, gap=0.5, policy=UCB(), replicates=8, seed=2))
    tr = batch.transcript(3)
    assert tr.pulls[0] + tr.pulls[1] == 12
    assert tr.model_index in (1, 2)
    assert tr.loss == batch.losses[3]
    with pytest.raises(ValueError):
        batch.regret_under(3)


def test_etc_structure():
    # tau pulls of arm 1, tau of arm 2, then a constant committed arm
    tau = 4
    batch = run_bandit(
        BanditConfig(horizon=20, gap=0.4, policy=ExploreThenCommit(tau=tau), replicates=60, seed=7)
    )
    acts = batch.actions
    assert np.all(acts[:, :tau] == 1)
    assert np.all(acts[:, tau : 2 * tau] == 2)
    tail = acts[:, 2 * tau :]
    assert np.all(tail == tail[:, :1])  # committed


def test_ucb_forced_first_pulls():
    batch = run_bandit(BanditConfig(horizon=5, gap=0.4, policy=UCB(), replicates=30, seed=4))
    assert np.all(batch.actions[:, 0] == 1)
    assert np.all(batch.actions[:, 1] == 2)


def test_uniform_matches_exact_law():
    g, T, reps = 1.0, 8, 20_000
    law = exact_uniform_bandit_law(g, T)
    batch = run_bandit(BanditConfig(horizon=T, gap=g, policy=UniformRandom(), replicates=reps, seed=11))
    for value, p in law.atoms:
        freq = float((batch.losses == value).mean())
        assert abs(freq - p) <= 4.0 * math.sqrt(p * (1.0 - p) / reps), value


def test_exact_uniform_law_structure():
    law = exact_uniform_bandit_law(2.0, 1)
    assert law.atoms == ((0.0, 0.5), (2.0, 0.5))
    law4 = exact_uniform_bandit_law(1.0, 4)
    weights = [p for _, p in law4.atoms]
    assert weights == pytest.approx([1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16], abs=0.0)
    assert exact_cvar(law4, RiskLevel(0.5)) == pytest.approx(2.75, abs=1e-12)
    with pytest.raises(DomainError):
        exact_uniform_bandit_law(1.0, 65)
    with pytest.raises(ValueError):
        exact_uniform_bandit_law(0.0, 8)


def test_uniform_reconstructs_from_streams():
    # replicate r: model integer, T arm draws, then T reward noises
    cfg = BanditConfig(horizon=6, gap=0.7, policy=UniformRandom(), replicates=5, seed=21)
    batch = run_bandit(cfg)
    for r in range(5):
        rng = replicate_rng(21, r)
        model = 1 + int(rng.integers(0, 2))
        arms = rng.integers(1, 3, size=6, dtype=np.int8)
        assert batch.model_index[r] == model
        assert np.array_equal(batch.actions[r], arms)
        n2 = int((arms == 2).sum())
        want = 0.7 * n2 if model == 1 else 0.7 * (6 - n2)
        assert batch.losses[r] == pytest.approx(want, abs=0.0)


def test_simulate_bandit_sampleset():
    cfg = BanditConfig(horizon=10, gap=0.2, policy=ThompsonGaussian(), replicates=64, seed=6)
    s = simulate_bandit(cfg)
    assert s.count == 64
    assert s.provenance["policy"] == "thompson"
    assert np.all(np.diff(s.values) <= 0)


# ----------------------------------------------------------- transcript KL


def test_mc_transcript_kl_hits_budget():
    target = 0.2 * 0.2 * 100 / 2.0
    for policy in ALL_POLICIES:
        cfg = BanditConfig(horizon=100, gap=0.2, policy=policy, replicates=4000, seed=1)
        est, stderr = mc_transcript_kl(cfg)
        assert stderr > 0.0
        assert abs(est - target) <= 4.0 * stderr, policy_name(policy)


def test_mc_transcript_kl_deterministic():
    cfg = BanditConfig(horizon=50, gap=0.3, policy=UCB(), replicates=2000, seed=77)
    assert mc_transcript_kl(cfg) == mc_transcript_kl(cfg)


def test_mc_transcript_kl_needs_replicates():
    cfg = BanditConfig(horizon=50, gap=0.3, policy=UCB(), replicates=999, seed=0)
    with pytest.raises(ValueError):
        mc_transcript_kl(cfg)
