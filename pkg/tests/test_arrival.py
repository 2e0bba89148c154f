import numpy as np
import pytest
from scipy import stats

from tanglesim import SimConfig, Simulation, next_interarrival, run_seed, run_simulation
from tanglesim.metrics import summarize_tips


def test_interarrival_mean_and_variance():
    rng = np.random.default_rng(0)
    x = np.array([next_interarrival(rng, 100.0) for _ in range(200_000)])
    assert abs(x.mean() - 0.01) / 0.01 < 0.01
    rng = np.random.default_rng(1)
    y = rng.exponential(1.0, 1_000_000)  # same law, vectorised for the 1e6 variance check
    assert abs(y.var() - 1.0) < 0.02


def test_interarrival_determinism_and_errors():
    a = [next_interarrival(np.random.default_rng(5), 3.0) for _ in range(3)]
    b = [next_interarrival(np.random.default_rng(5), 3.0) for _ in range(3)]
    assert a == b
    with pytest.raises(ValueError):
        next_interarrival(np.random.default_rng(0), 0.0)
    with pytest.raises(ValueError):
        next_interarrival(np.random.default_rng(0), -1.0)


@pytest.mark.parametrize("kw", [dict(lam=0), dict(lam=-3), dict(alpha=-0.1), dict(warmup=10, duration=5),
                                dict(selector="bogus"), dict(selector="urts", alpha=0.5)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SimConfig(**kw)


def test_degenerate_run_has_only_genesis():
    cfg = SimConfig(lam=1.0, duration=1e-9, warmup=0.0, seed=0)
    first = next_interarrival(np.random.default_rng(np.random.SeedSequence(0).spawn(3)[0]), 1.0)
    assert first > cfg.duration
    state, rec = run_simulation(cfg)
    assert state.n == 1
    assert len(rec.tip_counts) == 0 and len(rec.approval_times) == 0
    with pytest.raises(ValueError):
        summarize_tips(rec)


def test_issuance_count_is_poisson():
    """Issued transactions over duration T at lambda*T = 100, 1000 runs, chi-square at 1%."""
    counts = []
    for i in range(1000):
        cfg = SimConfig(lam=10.0, duration=10.0, warmup=0.0, seed=run_seed(123, i))
        sim = Simulation(cfg, record=False).advance(cfg.duration)
        counts.append(sim.state.n - 1)
    counts = np.array(counts)
    edges = np.arange(75, 127, 4)
    observed = np.histogram(counts, bins=np.concatenate([[-0.5], edges - 0.5, [1e9]]))[0]
    cdf = stats.poisson.cdf(np.concatenate([edges - 1, [np.inf]]), 100)
    expected = np.diff(np.concatenate([[0.0], cdf])) * len(counts)
    chi2 = ((observed - expected) ** 2 / expected).sum()
    assert stats.chi2.sf(chi2, len(observed) - 1) > 0.01


def test_parents_visible_at_issue():
    for sel, a in [("urts", 0.0), ("walk", 0.0), ("walk", 0.3)]:
        state, _ = run_simulation(SimConfig(lam=30, selector=sel, alpha=a, duration=15, warmup=0, seed=3))
        p = state.parent_array()[1:]
        issue = state.issue_times()[1:]
        reveal = state.reveal_times()
        assert np.all(reveal[p[:, 0]] <= issue) and np.all(reveal[p[:, 1]] <= issue)
        assert np.all(np.diff(state.issue_times()) >= 0)


def test_reproducible():
    cfg = SimConfig(lam=50, selector="walk", duration=20, warmup=5, seed=9)
    s1, r1 = run_simulation(cfg)
    s2, r2 = run_simulation(cfg)
    assert s1.dumps() == s2.dumps()
    assert np.array_equal(r1.tip_counts, r2.tip_counts)
    assert np.array_equal(r1.approval_times, r2.approval_times)


def test_observers_do_not_perturb():
    cfg = SimConfig(lam=40, selector="walk", alpha=0.01, duration=15, warmup=2, seed=4)
    seen = []
    s1, _ = run_simulation(cfg, observers=[lambda st, rec: seen.append(st.n)])
    s2, _ = run_simulation(cfg)
    assert seen == [s1.n]
    assert s1.dumps() == s2.dumps()


def test_staged_advance_equals_single_run():
    cfg = SimConfig(lam=40, selector="walk", duration=12, warmup=0, seed=8)
    sim = Simulation(cfg)
    for t in np.linspace(0.5, 12, 17):
        sim.advance(t)
    s2, _ = run_simulation(cfg)
    assert sim.state.dumps() == s2.dumps()


def test_transaction_cap_truncates():
    cfg = SimConfig(lam=100, duration=100, warmup=0, max_transactions=500, seed=0)
    state, rec = run_simulation(cfg)
    assert state.n == 500
    assert rec.truncated


def test_weight_policy():
    assert not SimConfig(selector="urts").weights_updated
    assert not SimConfig(selector="walk", alpha=0.0).weights_updated
    assert SimConfig(selector="walk", alpha=0.1).weights_updated
    assert SimConfig(selector="walk", alpha=0.0, update_weights=True).weights_updated
