import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DIAMOND, random_edges
from tanglesim import SimConfig, Simulation
from tanglesim.tangle import (GENESIS, ModelViolation, Tangle, add_transaction, build,
                              cumulative_weight_oracle, indirectly_approves, rescan_tips,
                              update_weights_incremental)


def test_first_transaction_on_genesis():
    t = Tangle(track_weights=True)
    x = add_transaction(t, (GENESIS, GENESIS), 0.5)
    assert x == 1
    assert t.tip_set() == {0}
    t.reveal_until(1.49)
    assert t.tip_set() == {0}
    t.reveal_until(1.5)
    assert t.tip_set() == {1}
    assert t.weight(GENESIS) == 2


def test_chain():
    k = 12
    t = build([(i, i) for i in range(k)])
    assert t.tip_set() == {k}
    assert t.weight(GENESIS) == k + 1
    assert [t.weight(i) for i in range(k + 1)] == list(range(k + 1, 0, -1))


def test_diamond_weights(diamond):
    assert diamond.weights().tolist() == [4, 2, 2, 1]
    assert [cumulative_weight_oracle(diamond, x) for x in range(4)] == [4, 2, 2, 1]
    assert diamond.tip_set() == {3}
    assert diamond.approvers(0) == [1, 2]


def test_incremental_update_counts():
    t = build([(0, 0)], track_weights=False)
    assert update_weights_incremental(t, 1) == 1
    d = build(DIAMOND, track_weights=False)
    assert update_weights_incremental(d, 3) == 3


def test_oracle_basics(diamond):
    assert cumulative_weight_oracle(diamond, 3) == 1
    assert cumulative_weight_oracle(diamond, 0) == diamond.n_revealed
    with pytest.raises(KeyError):
        cumulative_weight_oracle(diamond, 99)


def test_indirect_approval(diamond):
    assert all(indirectly_approves(diamond, y, GENESIS) for y in range(4))
    assert not indirectly_approves(diamond, 1, 2)
    assert indirectly_approves(diamond, 3, 1)
    assert indirectly_approves(diamond, 2, 2)
    with pytest.raises(KeyError):
        indirectly_approves(diamond, 5, 0)


def test_add_errors():
    t = Tangle()
    with pytest.raises(KeyError):
        t.add((0, 3), 0.1)
    x = t.add((0, 0), 0.2)
    with pytest.raises(ModelViolation):
        t.add((x, 0), 0.5)  # x is revealed only at 1.2
    with pytest.raises(ModelViolation):
        t.add((0, 0), 0.1)  # time runs backwards


def test_unrevealed_approval_keeps_parent_selectable():
    t = Tangle()
    t.add((0, 0), 0.1)
    t.add((0, 0), 0.3)
    t.reveal_until(1.0)
    assert t.tip_set() == {0}
    t.reveal_until(1.1)
    assert t.tip_set() == {1}


def test_random_200_weights_match_oracle():
    rng = np.random.default_rng(3)
    t = build(random_edges(rng, 200))
    w = t.weights()
    assert all(w[x] == cumulative_weight_oracle(t, x) for x in range(t.n))
    assert rescan_tips(t) == t.tip_set()


def test_transitive_closure_100():
    rng = np.random.default_rng(4)
    t = build(random_edges(rng, 100))
    n = t.n
    reach = np.eye(n, dtype=bool)
    for y, (a, b) in enumerate(t.parent_array()):
        if y:
            reach[y, a] = reach[y, b] = True
    # Floyd-Warshall closure over the boolean reachability matrix
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    for y in range(n):
        for x in range(n):
            assert indirectly_approves(t, y, x) == reach[y, x]


def test_every_event_keeps_caches_consistent():
    """Weights and tips equal their from-scratch versions after every event of a run."""
    cfg = SimConfig(lam=8, selector="walk", alpha=0.2, duration=40, warmup=0, seed=11)
    sim = Simulation(cfg)
    state = sim.state
    prev_w = state.weights()
    prev_total, prev_n_rev = 1, 1
    t = 0.0
    while t < cfg.duration:
        t += 0.37
        sim.advance(t)
        w = state.weights()
        rev = state.revealed_mask()
        assert np.all(w[: len(prev_w)] >= prev_w)
        assert rescan_tips(state) == state.tip_set()
        # each reveal adds the new transaction plus its past cone
        total = int(w[rev].sum())
        new = np.flatnonzero(rev)[prev_n_rev:]
        assert total - prev_total == len(new) + sum(len(_cone(state, x)) for x in new)
        prev_w, prev_total, prev_n_rev = w, total, int(rev.sum())
    assert state.n > 200
    w = state.weights()
    assert all(w[x] == cumulative_weight_oracle(state, x) for x in range(state.n))


def _cone(state, x):
    seen, stack = set(), [x]
    while stack:
        v = stack.pop()
        for p in state.parents(v):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def test_thousand_transaction_weights():
    cfg = SimConfig(lam=25, selector="urts", duration=45, warmup=0, seed=5, update_weights=True)
    sim = Simulation(cfg).advance(cfg.duration)
    state = sim.state
    assert state.n >= 1000
    w = state.weights()
    assert all(w[x] == cumulative_weight_oracle(state, x) for x in range(state.n))
    assert rescan_tips(state) == state.tip_set()


def test_recompute_matches_incremental():
    cfg = SimConfig(lam=30, selector="urts", duration=20, warmup=0, seed=2)
    state = Simulation(cfg).advance(cfg.duration).state
    assert not state.track_weights
    state.recompute_weights()
    w = state.weights()
    assert all(w[x] == cumulative_weight_oracle(state, x) for x in range(0, state.n, 7))


def test_dump_round_trip():
    cfg = SimConfig(lam=20, selector="urts", duration=10, warmup=0, seed=1)
    state = Simulation(cfg).advance(cfg.duration).state
    text = state.dumps()
    back = Tangle.loads(text, until=cfg.duration)
    assert back.dumps() == text
    assert back.tip_set() == state.tip_set()
    assert np.array_equal(back.parent_array(), state.parent_array())


def test_transaction_record(diamond):
    tx = diamond.transaction(3)
    assert tx.parents == (1, 2)
    assert tx.cumulative_weight == 1
    assert tx.reveal_time - tx.issue_time == 1.0
    assert tx.first_approval_time is None
    assert diamond.transaction(0).parents == ()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_random_dag_invariants(n, seed):
    t = build(random_edges(np.random.default_rng(seed), n))
    w = t.weights()
    assert w[GENESIS] == t.n_revealed
    assert all(w[x] == cumulative_weight_oracle(t, x) for x in range(t.n))
    assert rescan_tips(t) == t.tip_set()
    issue, reveal = t.issue_times(), t.reveal_times()
    p = t.parent_array()
    for y in range(1, t.n):
        assert p[y].max() < y
        assert reveal[p[y]].max() <= issue[y]
        assert reveal[y] - issue[y] == 1.0
        assert indirectly_approves(t, y, GENESIS)
