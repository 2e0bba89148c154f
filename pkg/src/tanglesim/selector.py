"""Tip selection: uniform random tips (URTS) and random walks from genesis.

A walk moves from a transaction to one of its revealed direct approvers ``y``
with probability proportional to ``exp(alpha * H_y)``, ``H`` being the cached
cumulative weight. ``alpha = 0`` is the unbiased walk (URW), ``alpha > 0`` the
biased walk (BRW). The exponent is shifted by the largest weight among the
candidates so large ``alpha * H`` cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .tangle import (A0, ADJ, CNT, DEG, EDGES, GENESIS, INLINE, MORE, N_TIPS, NEXT, SRC,
                     TIPS, WEIGHT, Tangle)


@dataclass(frozen=True)
class SelectorKind:
    name: str = "urts"
    alpha: float = 0.0

    def __post_init__(self):
        if self.name not in ("urts", "walk"):
            raise ValueError(f"unknown selector {self.name!r}; expected 'urts' or 'walk'")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")

    @property
    def is_walk(self) -> bool:
        return self.name == "walk"

    @property
    def needs_weights(self) -> bool:
        return self.is_walk and self.alpha > 0

    @property
    def label(self) -> str:
        if not self.is_walk:
            return "URTS"
        return "URW" if self.alpha == 0 else f"BRW(alpha={self.alpha:g})"


URTS = SelectorKind("urts")
URW = SelectorKind("walk", 0.0)


def brw(alpha: float) -> SelectorKind:
    return SelectorKind("walk", float(alpha))


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _step_rows(adj, edges, weight, x, alpha, rng):
    d = adj[x, DEG]
    if d == 1:
        return adj[x, A0]
    if alpha == 0.0:
        k = int(rng.random() * d)
        if k < INLINE:
            return adj[x, A0 + k]
        e = adj[x, MORE]
        for _ in range(k - INLINE):
            e = edges[e, NEXT]
        return edges[e, SRC]
    # softmax over the approvers, shifted by the largest weight
    hmax = -1
    e = adj[x, MORE]
    for i in range(d):
        if i < INLINE:
            y = adj[x, A0 + i]
        else:
            y = edges[e, SRC]
            e = edges[e, NEXT]
        if weight[y] > hmax:
            hmax = weight[y]
    total = 0.0
    e = adj[x, MORE]
    for i in range(d):
        if i < INLINE:
            y = adj[x, A0 + i]
        else:
            y = edges[e, SRC]
            e = edges[e, NEXT]
        total += np.exp(alpha * (weight[y] - hmax))
    u = rng.random() * total
    acc = 0.0
    y = -1
    e = adj[x, MORE]
    for i in range(d):
        if i < INLINE:
            y = adj[x, A0 + i]
        else:
            y = edges[e, SRC]
            e = edges[e, NEXT]
        acc += np.exp(alpha * (weight[y] - hmax))
        if u < acc:
            return y
    return y


@njit(cache=True)
def _step(g, x, alpha, rng):
    return _step_rows(g[ADJ], g[EDGES], g[WEIGHT], x, alpha, rng)


@njit(cache=True)
def _walk(g, alpha, rng):
    adj, edges, weight = g[ADJ], g[EDGES], g[WEIGHT]
    x = GENESIS
    while adj[x, DEG] > 0:
        x = _step_rows(adj, edges, weight, x, alpha, rng)
    return x


@njit(cache=True)
def _walk_pair(g, alpha, rng):
    """Two independent walks advanced in lockstep.

    The walks only read the frozen state, so interleaving their steps leaves
    each one's law unchanged while letting their memory loads overlap.
    """
    adj, edges, weight = g[ADJ], g[EDGES], g[WEIGHT]
    a = GENESIS
    b = GENESIS
    while True:
        more_a = adj[a, DEG] > 0
        more_b = adj[b, DEG] > 0
        if not (more_a or more_b):
            return a, b
        if more_a:
            a = _step_rows(adj, edges, weight, a, alpha, rng)
        if more_b:
            b = _step_rows(adj, edges, weight, b, alpha, rng)


@njit(cache=True)
def _urts(g, rng):
    return g[TIPS][int(rng.random() * g[CNT][N_TIPS])]


@njit(cache=True)
def _select(g, is_walk, alpha, rng):
    if is_walk:
        return _walk(g, alpha, rng)
    return _urts(g, rng)


@njit(cache=True)
def _select_pair(g, is_walk, alpha, rng):
    if is_walk:
        return _walk_pair(g, alpha, rng)
    return _urts(g, rng), _urts(g, rng)


@njit(cache=True)
def _exit_counts(g, is_walk, alpha, rng, samples):
    counts = np.zeros(g[CNT][0], dtype=np.int64)
    for _ in range(samples):
        counts[_select(g, is_walk, alpha, rng)] += 1
    return counts


@njit(cache=True)
def _hits(g, is_walk, alpha, rng, samples, target):
    hits = 0
    for _ in range(samples):
        if target[_select(g, is_walk, alpha, rng)]:
            hits += 1
    return hits


# ------------------------------------------------------------- operations


def _require_weights(state: Tangle, alpha: float) -> None:
    if alpha > 0 and not state.track_weights:
        raise ValueError("biased walk needs cumulative weights; call state.recompute_weights() first")


def transition_probabilities(state: Tangle, x: int, alpha: float) -> tuple[list[int], np.ndarray]:
    """Approvers of ``x`` and the probability of stepping to each."""
    ys = state.approvers(x)
    if not ys:
        raise ValueError(f"transaction {x} has no revealed approver")
    h = np.array([state.weight(y) for y in ys], dtype=float)
    z = np.exp(alpha * (h - h.max()))
    return ys, z / z.sum()


def select_urts(state: Tangle, rng: np.random.Generator) -> int:
    if state.n_tips == 0:
        raise ValueError("empty tip set")
    return int(_urts(state.arrays, rng))


def walk_step(state: Tangle, x: int, alpha: float, rng: np.random.Generator) -> int:
    x = state._check(x)
    if state.degree(x) == 0:
        raise ValueError(f"transaction {x} has no revealed approver; the walk stops here")
    _require_weights(state, alpha)
    return int(_step(state.arrays, x, float(alpha), rng))


def select_walk(state: Tangle, alpha: float, rng: np.random.Generator) -> int:
    _require_weights(state, alpha)
    return int(_walk(state.arrays, float(alpha), rng))


def select(state: Tangle, kind: SelectorKind, rng: np.random.Generator) -> int:
    if kind.is_walk:
        return select_walk(state, kind.alpha, rng)
    return select_urts(state, rng)


def select_pair(state: Tangle, kind: SelectorKind, rng: np.random.Generator) -> tuple[int, int]:
    """Two independent selections on the same state (the parents of one new transaction)."""
    if kind.is_walk:
        _require_weights(state, kind.alpha)
    elif state.n_tips == 0:
        raise ValueError("empty tip set")
    a, b = _select_pair(state.arrays, kind.is_walk, float(kind.alpha), rng)
    return int(a), int(b)


def exit_counts(state: Tangle, kind: SelectorKind, samples: int, rng: np.random.Generator) -> dict[int, int]:
    """How often each current tip is returned over ``samples`` selections."""
    if kind.is_walk:
        _require_weights(state, kind.alpha)
    counts = _exit_counts(state.arrays, kind.is_walk, kind.alpha, rng, int(samples))
    return {int(t): int(counts[t]) for t in state.tips()}


def path_exit_probabilities(state: Tangle, alpha: float = 0.0) -> dict[int, float]:
    """Exact exit probabilities by enumerating every genesis-to-tip path.

    Multiplies step probabilities along each path; exponential in the DAG size,
    intended only as a test oracle on small graphs.
    """
    out: dict[int, float] = {}

    def visit(x, p):
        ys = state.approvers(x)
        if not ys:
            out[x] = out.get(x, 0.0) + float(p)
            return
        h = np.array([state.weight(y) for y in ys], dtype=float)
        z = np.exp(alpha * (h - h.max()))
        for y, q in zip(ys, z / z.sum()):
            visit(y, p * q)

    visit(GENESIS, 1.0)
    return out
