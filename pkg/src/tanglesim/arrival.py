"""Continuous-time driver: Poisson issuance, delayed reveals, warm-up.

Every transaction is revealed exactly one time unit after issuance and
issuance times increase, so pending reveals leave in issuance order and the
event queue reduces to a pointer into the transaction arrays plus the next
Poisson arrival time. A reveal scheduled at the same instant as an issuance is
processed first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np
from numba import njit

from .metrics import MetricsRecord, build_record
from .selector import SelectorKind, _select_pair
from .tangle import CNT, ISSUE_T, N, NEXT_REVEAL, N_TIPS, REVEAL_T, REVEALED, Tangle, _append, _reveal

DONE, NEED_CAPACITY, NEED_RECORD, CAPPED = range(4)


@dataclass(frozen=True)
class SimConfig:
    lam: float = 100.0
    alpha: float = 0.0
    selector: str = "urts"
    duration: float = 150.0
    warmup: float = 50.0
    seed: int = 0
    max_transactions: Optional[int] = None
    # None: maintain weights only when the selector reads them (alpha > 0)
    update_weights: Optional[bool] = None
    orphan_horizon: float = 20.0
    track: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.selector not in ("urts", "walk"):
            raise ValueError(f"selector must be 'urts' or 'walk', got {self.selector!r}")
        if self.selector == "urts" and self.alpha != 0:
            raise ValueError("alpha only applies to the walk selector")
        if not self.warmup < self.duration:
            raise ValueError(f"warmup ({self.warmup}) must be below duration ({self.duration})")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.max_transactions is not None and self.max_transactions < 1:
            raise ValueError("max_transactions must be >= 1")
        if self.orphan_horizon <= 0:
            raise ValueError("orphan_horizon must be positive")

    @property
    def kind(self) -> SelectorKind:
        return SelectorKind(self.selector, self.alpha)

    @property
    def weights_updated(self) -> bool:
        if self.update_weights is None:
            return self.kind.needs_weights
        return self.update_weights

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=int(seed))


def run_seed(seed: int, run_index: int) -> int:
    """Seed of run ``run_index`` in a batch rooted at ``seed``; rerunnable on its own."""
    return int(seed) + int(run_index)


def next_interarrival(rng: np.random.Generator, lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return float(rng.exponential(1.0 / lam))


@njit(cache=True)
def _advance(g, t_end, is_walk, alpha, track, lam, arr_rng, sel_rng,
             clock, max_n, warmup, record, rec_t, rec_l, rec_n):
    """Process events up to ``t_end``. clock = [next issuance time, now]."""
    cnt, reveal_t, revealed = g[CNT], g[REVEAL_T], g[REVEALED]
    cap = g[ISSUE_T].shape[0]
    scale = 1.0 / lam
    while True:
        if record and rec_n[0] == rec_t.shape[0]:
            return NEED_RECORD
        ptr = cnt[NEXT_REVEAL]
        while ptr < cnt[N] and revealed[ptr]:
            ptr += 1
        cnt[NEXT_REVEAL] = ptr
        t_issue = clock[0]
        if ptr < cnt[N] and reveal_t[ptr] <= t_issue:
            t = reveal_t[ptr]
            if t > t_end:
                clock[1] = t_end
                return DONE
            _reveal(g, ptr, track)
            cnt[NEXT_REVEAL] = ptr + 1
            clock[1] = t
            if record and t >= warmup:
                k = rec_n[0]
                rec_t[k] = t
                rec_l[k] = cnt[N_TIPS]
                rec_n[0] = k + 1
        else:
            if t_issue > t_end:
                clock[1] = t_end
                return DONE
            if cnt[N] >= max_n:
                return CAPPED
            if cnt[N] == cap:
                return NEED_CAPACITY
            a, b = _select_pair(g, is_walk, alpha, sel_rng)
            _append(g, a, b, t_issue)
            clock[1] = t_issue
            clock[0] = t_issue + arr_rng.exponential(scale)


class Simulation:
    """One Tangle grown under one configuration; can be advanced in stages.

    Randomness comes from three streams spawned from ``config.seed``: arrivals,
    uniform tip picks and walk steps. Recording and observers never draw from
    them, so they cannot perturb the trajectory.
    """

    def __init__(self, config: SimConfig, record: bool = True):
        self.config = config
        self.kind = config.kind
        arrivals, picks, walks = np.random.SeedSequence(config.seed).spawn(3)
        self.arrival_rng = np.random.default_rng(arrivals)
        self.select_rng = np.random.default_rng(walks if self.kind.is_walk else picks)
        expected = config.lam * config.duration * 1.1 + 64
        if config.max_transactions is not None:
            expected = min(expected, config.max_transactions + 1)
        self.state = Tangle(capacity=int(expected), track_weights=config.weights_updated)
        self.clock = np.array([next_interarrival(self.arrival_rng, config.lam), 0.0])
        self.record = record
        size = int(config.lam * max(config.duration - config.warmup, 0.0) * 1.2) + 64 if record else 1
        self._rec_t = np.zeros(size)
        self._rec_l = np.zeros(size, dtype=np.int64)
        self._rec_n = np.zeros(1, dtype=np.int64)
        self.truncated = False

    @property
    def now(self) -> float:
        return float(self.clock[1])

    def advance(self, t_end: float) -> "Simulation":
        """Process all events with time <= t_end (stops early at the transaction cap)."""
        cfg = self.config
        max_n = cfg.max_transactions if cfg.max_transactions is not None else np.iinfo(np.int64).max
        while not self.truncated:
            code = _advance(self.state.arrays, float(t_end), self.kind.is_walk, self.kind.alpha,
                            self.state.track_weights, cfg.lam, self.arrival_rng, self.select_rng,
                            self.clock, max_n, cfg.warmup, self.record, self._rec_t, self._rec_l, self._rec_n)
            if code == DONE:
                break
            if code == NEED_CAPACITY:
                self.state.reserve(self.state.capacity)
            elif code == NEED_RECORD:
                self._rec_t = np.concatenate([self._rec_t, np.zeros_like(self._rec_t)])
                self._rec_l = np.concatenate([self._rec_l, np.zeros_like(self._rec_l)])
            elif code == CAPPED:
                self.truncated = True
        self.state.now = max(self.state.now, self.now)
        return self

    def issue(self) -> int:
        """Issue one extra transaction now with the configured selector (e.g. an attacker's payment)."""
        from .selector import select_pair

        self.state.now = max(self.state.now, self.now)
        parents = select_pair(self.state, self.kind, self.select_rng)
        return self.state.add(parents, self.state.now)

    def metrics(self) -> MetricsRecord:
        k = int(self._rec_n[0])
        cfg = self.config
        end = self.now if self.truncated else max(self.now, cfg.duration)
        return build_record(self.state, cfg, self._rec_t[:k].copy(), self._rec_l[:k].copy(),
                            end=end, truncated=self.truncated)


Observer = Callable[[Tangle, MetricsRecord], None]


def run_simulation(config: SimConfig, observers: Iterable[Observer] = (), record: bool = True
                   ) -> tuple[Tangle, MetricsRecord]:
    """Grow a Tangle for ``config.duration`` and summarize it.

    Observers are called once with the final state and the record; they can
    derive extra metrics without touching the random streams.
    """
    sim = Simulation(config, record=record).advance(config.duration)
    rec = sim.metrics() if record else MetricsRecord.empty(config, end=sim.now, truncated=sim.truncated)
    for hook in observers:
        hook(sim.state, rec)
    return sim.state, rec
