"""Multi-run drivers: batches, scaling tables, exit profiles, attacks, timing.

Run ``i`` of a batch rooted at ``seed`` uses ``run_seed(seed, i)`` and is
therefore reproducible on its own. Besides the three simulation streams, each
run seed owns two more independent streams: one for exit-profile walks and one
for attack evaluation, so measuring a Tangle never perturbs how it grew.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .arrival import SimConfig, Simulation, run_seed, run_simulation
from .attack import (CUT_SET_CHAIN, TIP_FLOOD, ParasiteSpec, build_cut_set_chain, build_tip_flood,
                     evaluate_attack)
from .metrics import (ExitProfile, MetricsRecord, average_profiles, sorted_exit_vector,
                      summarize_approval_many, summarize_tips_many)
from .selector import SelectorKind, exit_counts

EXIT_STREAM = 3
ATTACK_STREAM = 4


def stream(seed: int, purpose: int, *sub: int) -> np.random.Generator:
    """Generator for an auxiliary purpose of the run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(purpose, *sub)))


def default_jobs() -> int:
    return os.cpu_count() or 1


def _map(fn, items, jobs):
    items = list(items)
    if jobs is None:
        jobs = default_jobs()
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def loglog_slope(x, y) -> float:
    """Slope of log(y) against log(x) by least squares."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("need at least two distinct x values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ------------------------------------------------------------------ batch


def _one_record(config: SimConfig) -> MetricsRecord:
    return run_simulation(config)[1]


def batch(config: SimConfig, runs: int, jobs: Optional[int] = 1) -> list[MetricsRecord]:
    """Records of ``runs`` independent runs (seeds ``config.seed + i``), in run order."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    configs = [config.with_seed(run_seed(config.seed, i)) for i in range(runs)]
    return _map(_one_record, configs, jobs)


@dataclass(frozen=True)
class RunSummary:
    run: int
    seed: int
    mean_tips: float
    std_tips: float
    mean_tA: float
    std_tA: float
    orphans: int
    n_transactions: int


def summarize_run(run: int, seed: int, rec: MetricsRecord) -> RunSummary:
    nan = float("nan")
    el, sd = summarize_tips_many([rec]) if len(rec.tip_counts) else (nan, nan)
    ta, sa = summarize_approval_many([rec]) if len(rec.approval_times) else (nan, nan)
    return RunSummary(run, seed, el, sd, ta, sa, rec.orphan_count, rec.n_transactions)


# ---------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingRow:
    lam: float
    selector: str
    alpha: float
    mean_tips: float
    std_tips: float
    mean_tA: float
    std_tA: float


def scaling_row(config: SimConfig, records: Sequence[MetricsRecord]) -> ScalingRow:
    el, sd = summarize_tips_many(records)
    ta, sa = summarize_approval_many(records)
    return ScalingRow(config.lam, config.selector, config.alpha, el, sd, ta, sa)


def scaling_study(base: SimConfig, lambdas: Sequence[float], runs: int,
                  jobs: Optional[int] = 1) -> list[ScalingRow]:
    """Pooled tip and approval statistics for each arrival rate."""
    rows = []
    for lam in lambdas:
        cfg = replace(base, lam=float(lam))
        rows.append(scaling_row(cfg, batch(cfg, runs, jobs)))
    return rows


# ----------------------------------------------------------- exit profile


def _one_profile(args) -> np.ndarray:
    config, walks = args
    state, _ = run_simulation(config, record=False)
    counts = exit_counts(state, config.kind, walks, stream(config.seed, EXIT_STREAM))
    return sorted_exit_vector(counts)


def exit_profile(config: SimConfig, runs: int, walks_per_run: int,
                 jobs: Optional[int] = 1) -> ExitProfile:
    """Average sorted, zero-padded exit-probability vector over independent Tangles.

    Each Tangle is grown under ``config`` and its final tip set is probed with
    ``walks_per_run`` selections of the same selector.
    """
    if runs < 1 or walks_per_run < 1:
        raise ValueError("runs and walks_per_run must be >= 1")
    items = [(config.with_seed(run_seed(config.seed, i)), int(walks_per_run)) for i in range(runs)]
    return average_profiles(_map(_one_profile, items, jobs), walks_per_run)


# ----------------------------------------------------------------- attack


@dataclass(frozen=True)
class AttackScenario:
    """How the attack is mounted on an honestly grown Tangle.

    The honest payment is issued ``lead`` time units before the end of the
    honest phase; afterwards honest issuance stops, pending transactions are
    revealed and the attacker publishes. A tip flood gets
    ``round(size_factor * L)`` tips unless ``size`` is given; for the chain
    ``size`` is the budget.
    """

    kind: str = TIP_FLOOD
    size: Optional[int] = None
    size_factor: float = 3.0
    kappa: float = 0.6
    evaluate: tuple[SelectorKind, ...] = (SelectorKind("urts"), SelectorKind("walk", 0.0))
    samples: int = 100_000
    lead: float = 10.0

    def __post_init__(self):
        if self.kind not in (TIP_FLOOD, CUT_SET_CHAIN):
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.size is not None and self.size < 1:
            raise ValueError(f"attacker size must be >= 1, got {self.size}")
        if self.size is None and not self.size_factor > 0:
            raise ValueError("size_factor must be positive")
        if not 0 < self.kappa < 1:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.evaluate:
            raise ValueError("nothing to evaluate")


@dataclass(frozen=True)
class AttackResult:
    kind: str
    selector: str
    alpha: float
    kappa: float
    attacker_size: int
    honest_tips: int
    confidence: float


def run_attack(config: SimConfig, scenario: AttackScenario) -> list[AttackResult]:
    if config.duration - scenario.lead < config.warmup:
        raise ValueError("duration too short for the attack lead time")
    sim = Simulation(config, record=False).advance(config.duration - scenario.lead)
    payment = sim.issue()
    state = sim.advance(config.duration).state
    state.mark_conflict(payment)
    state.drain()
    honest_tips = state.n_tips
    anchor = state.parents(payment)[0]
    if scenario.kind == TIP_FLOOD:
        size = scenario.size if scenario.size is not None else max(int(round(scenario.size_factor * honest_tips)), 1)
        ids = build_tip_flood(state, ParasiteSpec(TIP_FLOOD, size, anchor=anchor))
        double_spend, attacker_size = ids[0], size
    else:
        budget = scenario.size if scenario.size is not None else 100 * state.n
        chain = build_cut_set_chain(state, ParasiteSpec(CUT_SET_CHAIN, budget, kappa=scenario.kappa))
        double_spend, attacker_size = chain[0], len(chain)
    out = []
    for j, kind in enumerate(scenario.evaluate):
        conf = evaluate_attack(state, double_spend, kind, scenario.samples, stream(config.seed, ATTACK_STREAM, j))
        out.append(AttackResult(scenario.kind, kind.name, kind.alpha, scenario.kappa, attacker_size,
                                honest_tips, conf))
    return out


# ------------------------------------------------------------------ bench


@dataclass(frozen=True)
class BenchRow:
    selector: str
    alpha: float
    weights_updated: bool
    n: int
    seconds: float


def _bench_config(kind: SelectorKind, n: int, lam: float, update_weights, seed) -> SimConfig:
    # the transaction cap ends the run; the duration only has to be long enough to reach it
    return SimConfig(lam=lam, selector=kind.name, alpha=kind.alpha, duration=2.0 * n / lam + 10.0,
                     warmup=0.0, seed=seed, max_transactions=int(n), update_weights=update_weights)


def bench(kind: SelectorKind, tx_counts: Sequence[int], lam: float = 100.0,
          update_weights: Optional[bool] = None, seed: int = 0) -> list[BenchRow]:
    """Wall-clock seconds to grow a Tangle to each transaction count, recording disabled.

    A small run first compiles every kernel so the timings hold no JIT cost.
    """
    run_simulation(_bench_config(kind, 500, lam, update_weights, seed), record=False)
    rows = []
    for n in tx_counts:
        cfg = _bench_config(kind, n, lam, update_weights, seed)
        t0 = time.perf_counter()
        run_simulation(cfg, record=False)
        rows.append(BenchRow(kind.name, kind.alpha, cfg.weights_updated, int(n), time.perf_counter() - t0))
    return rows


def bench_exponent(rows: Sequence[BenchRow]) -> Optional[float]:
    """Log-log slope of seconds against n; None for fewer than two distinct sizes."""
    ns = [r.n for r in rows]
    if len(set(ns)) < 2:
        return None
    return loglog_slope(ns, [r.seconds for r in rows])
