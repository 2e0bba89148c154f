"""The Tangle DAG: storage, visibility, tips and cumulative weights.

Transactions are dense integer ids in issuance order (genesis = 0) stored in
struct-of-arrays form so the numba kernels can work on them directly. A
transaction selects its parents among *revealed* transactions and becomes
revealed itself ``DELAY`` time units after issuance; only then do its approval
edges exist, its parents leave the tip set and (when tracked) the weights of
its past cone increase.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from numba import njit

DELAY = 1.0
GENESIS = 0

# Layout of the array tuple handed to kernels. Ids are int32 and per-node /
# per-edge fields that a walk step reads together share one row, which keeps
# the working set of the O(n^2) selectors small.
(PARENTS, ISSUE_T, REVEAL_T, REVEALED, WEIGHT, FIRST_APPR, ADJ, EDGES,
 TIPS, TPOS, MARK, CNT) = range(12)

# ADJ columns: number of revealed approvers, the first two approvers inline
# (most transactions never get more), and the first edge of a linked list
# holding the rest. A walk step thus usually touches a single row.
DEG, A0, A1, MORE = 0, 1, 2, 3
INLINE = 2
# EDGES columns: approving transaction, next edge in the overflow list.
SRC, NEXT = 0, 1

# Slots of the CNT counter array.
N, N_REVEALED, N_EDGES, N_TIPS, NEXT_REVEAL = range(5)

ID = np.int32


class ModelViolation(ValueError):
    """An operation that the arrival/visibility model forbids."""


@dataclass(frozen=True)
class Transaction:
    id: int
    issue_time: float
    reveal_time: float
    parents: tuple[int, int] | tuple[()]
    cumulative_weight: int
    first_approval_time: Optional[float]
    is_conflict_marker: bool
    revealed: bool


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _append(g, p0, p1, t_issue):
    parents, issue_t, reveal_t, revealed, weight, first_appr, adj = g[:7]
    tpos, cnt = g[TPOS], g[CNT]
    x = cnt[N]
    parents[x, 0] = p0
    parents[x, 1] = p1
    issue_t[x] = t_issue
    reveal_t[x] = t_issue + DELAY
    revealed[x] = False
    weight[x] = 1
    first_appr[x] = np.nan
    adj[x, DEG] = 0
    adj[x, A0] = -1
    adj[x, A1] = -1
    adj[x, MORE] = -1
    tpos[x] = -1
    cnt[N] = x + 1
    return x


@njit(cache=True)
def _increment_cone(g, x):
    """Add one to the weight of every transaction in the past cone of ``x``.

    Parents always have smaller ids than their children, so a single sweep
    downwards from ``x`` sees every cone member after all of its marked
    children; marks are cleared as they are consumed. Each member is visited
    once and memory is read in one direction, which is far cheaper than a
    stack-driven search once the DAG outgrows the cache.
    """
    parents, weight, mark = g[PARENTS], g[WEIGHT], g[MARK]
    if x == GENESIS:
        return 0
    pending = 0
    for k in range(2):
        p = parents[x, k]
        if mark[p] == 0:
            mark[p] = 1
            pending += 1
    v = max(parents[x, 0], parents[x, 1])
    visited = 0
    # Whether a parent is already marked is a coin flip, so the marking is
    # branch-free. Genesis has no parents and is handled after the loop.
    while pending > 0 and v > GENESIS:
        if mark[v]:
            mark[v] = 0
            weight[v] += 1
            visited += 1
            a = parents[v, 0]
            b = parents[v, 1]
            pending += 1 - mark[a]
            mark[a] = 1
            pending += 1 - mark[b]
            mark[b] = 1
            pending -= 1
        v -= 1
    if pending > 0:
        mark[GENESIS] = 0
        weight[GENESIS] += 1
        visited += 1
    return visited


@njit(cache=True)
def _reveal(g, x, track_weights):
    parents, reveal_t, revealed, first_appr = g[PARENTS], g[REVEAL_T], g[REVEALED], g[FIRST_APPR]
    adj, edges, tips, tpos, cnt = g[ADJ], g[EDGES], g[TIPS], g[TPOS], g[CNT]
    revealed[x] = True
    cnt[N_REVEALED] += 1
    if x != GENESIS:
        p0 = parents[x, 0]
        p1 = parents[x, 1]
        for k in range(2):
            p = p0 if k == 0 else p1
            if k == 1 and p1 == p0:
                break
            d = adj[p, DEG]
            if d < INLINE:
                adj[p, A0 + d] = x
            else:
                e = cnt[N_EDGES]
                edges[e, SRC] = x
                edges[e, NEXT] = adj[p, MORE]
                adj[p, MORE] = e
                cnt[N_EDGES] = e + 1
            adj[p, DEG] = d + 1
            if np.isnan(first_appr[p]):
                first_appr[p] = reveal_t[x]
            i = tpos[p]
            if i >= 0:
                last = tips[cnt[N_TIPS] - 1]
                tips[i] = last
                tpos[last] = i
                tpos[p] = -1
                cnt[N_TIPS] -= 1
    tips[cnt[N_TIPS]] = x
    tpos[x] = cnt[N_TIPS]
    cnt[N_TIPS] += 1
    if track_weights:
        _increment_cone(g, x)


@njit(cache=True)
def _reveal_until(g, t, track_weights):
    revealed, reveal_t, cnt = g[REVEALED], g[REVEAL_T], g[CNT]
    n = cnt[N]
    ptr = cnt[NEXT_REVEAL]
    count = 0
    while ptr < n:
        if revealed[ptr]:
            ptr += 1
            continue
        if reveal_t[ptr] > t:
            break
        _reveal(g, ptr, track_weights)
        ptr += 1
        count += 1
    cnt[NEXT_REVEAL] = ptr
    return count


@njit(cache=True)
def _future_mask(g, x):
    """Transactions that indirectly approve ``x`` (itself included), revealed only."""
    adj, edges, cnt = g[ADJ], g[EDGES], g[CNT]
    n = cnt[N]
    inside = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    inside[x] = True
    queue[0] = x
    lo, hi = 0, 1
    while lo < hi:
        v = queue[lo]
        lo += 1
        e = adj[v, MORE]
        for i in range(adj[v, DEG]):
            if i < INLINE:
                y = adj[v, A0 + i]
            else:
                y = edges[e, SRC]
                e = edges[e, NEXT]
            if not inside[y]:
                inside[y] = True
                queue[hi] = y
                hi += 1
    return inside


@njit(cache=True)
def _recompute_weights(g):
    revealed, weight, cnt = g[REVEALED], g[WEIGHT], g[CNT]
    n = cnt[N]
    for x in range(n):
        weight[x] = 1
    for x in range(n):
        if revealed[x]:
            _increment_cone(g, x)


# ------------------------------------------------------------------ state


class Tangle:
    """Append-only DAG with reveal-time visibility.

    ``track_weights`` controls whether each reveal walks the past cone of the new
    transaction to keep ``cumulative_weight`` current. Uniform and unbiased
    selectors never read weights, so simulations leave it off for them.
    """

    def __init__(self, capacity: int = 1024, track_weights: bool = False):
        capacity = max(int(capacity), 2)
        self.track_weights = track_weights
        self.now = 0.0
        self._alloc(capacity)
        self.conflict = np.zeros(capacity, dtype=np.bool_)
        g = self.arrays
        g[PARENTS][0] = (-1, -1)
        g[ISSUE_T][0] = 0.0
        g[REVEAL_T][0] = 0.0
        g[WEIGHT][0] = 1
        g[FIRST_APPR][0] = np.nan
        g[ADJ][0] = (0, -1, -1, -1)
        g[TPOS][0] = -1
        g[CNT][N] = 1
        g[CNT][NEXT_REVEAL] = 1
        _reveal(g, 0, False)

    def _alloc(self, cap):
        self.capacity = cap
        self.arrays = (
            np.zeros((cap, 2), dtype=ID),
            np.zeros(cap),
            np.zeros(cap),
            np.zeros(cap, dtype=np.bool_),
            np.ones(cap, dtype=ID),
            np.full(cap, np.nan),
            np.full((cap, 4), -1, dtype=ID),
            np.zeros((2 * cap, 2), dtype=ID),
            np.zeros(cap, dtype=ID),
            np.full(cap, -1, dtype=ID),
            np.zeros(cap, dtype=np.uint8),
            np.zeros(8, dtype=np.int64),
        )

    def reserve(self, extra: int) -> None:
        """Make room for ``extra`` more transactions."""
        need = self.n + extra
        if need <= self.capacity:
            return
        cap = self.capacity
        while cap < need:
            cap *= 2
        old, n, ne = self.arrays, self.n, self.arrays[CNT][N_EDGES]
        self._alloc(cap)
        for k, (new, prev) in enumerate(zip(self.arrays, old)):
            if k == CNT:
                new[:] = prev
            elif k == EDGES:
                new[:ne] = prev[:ne]
            else:
                new[:n] = prev[:n]
        conflict = np.zeros(cap, dtype=np.bool_)
        conflict[:n] = self.conflict[:n]
        self.conflict = conflict

    # -- sizes

    @property
    def n(self) -> int:
        return int(self.arrays[CNT][N])

    @property
    def n_revealed(self) -> int:
        return int(self.arrays[CNT][N_REVEALED])

    @property
    def n_tips(self) -> int:
        return int(self.arrays[CNT][N_TIPS])

    def __len__(self):
        return self.n

    # -- mutation

    def add(self, parents: tuple[int, int], issue_time: float, *, private: bool = False) -> int:
        """Append a transaction issued at ``issue_time`` approving ``parents``.

        With ``private=True`` parents only need to exist, which lets an attacker
        chain its own hidden transactions.
        """
        p0, p1 = (int(p) for p in parents)
        issue_time = float(issue_time)
        if issue_time < self.now:
            raise ModelViolation(f"issue_time {issue_time} is before now={self.now}")
        g = self.arrays
        for p in (p0, p1):
            if not 0 <= p < self.n:
                raise KeyError(f"unknown parent id {p}")
            if private:
                continue
            if not g[REVEALED][p] or g[REVEAL_T][p] > issue_time:
                raise ModelViolation(f"parent {p} is not revealed at t={issue_time}")
        self.reserve(1)
        g = self.arrays
        self.now = issue_time
        return int(_append(g, p0, p1, issue_time))

    def reveal_until(self, t: float) -> int:
        """Reveal every pending transaction with reveal_time <= t; advance ``now``."""
        count = int(_reveal_until(self.arrays, float(t), self.track_weights))
        self.now = max(self.now, float(t))
        return count

    def drain(self) -> int:
        """Reveal all pending transactions without issuing new ones."""
        if self.n == self.n_revealed:
            return 0
        return self.reveal_until(float(self.arrays[REVEAL_T][self.n - 1]))

    def recompute_weights(self) -> None:
        """Rebuild every cached weight from scratch and keep tracking from now on."""
        _recompute_weights(self.arrays)
        self.track_weights = True

    def mark_conflict(self, x: int, flag: bool = True) -> None:
        self._check(x)
        self.conflict[x] = flag

    # -- queries

    def _check(self, x: int) -> int:
        x = int(x)
        if not 0 <= x < self.n:
            raise KeyError(f"unknown transaction id {x}")
        return x

    def is_revealed(self, x: int) -> bool:
        return bool(self.arrays[REVEALED][self._check(x)])

    def parents(self, x: int) -> tuple[int, int] | tuple[()]:
        x = self._check(x)
        if x == GENESIS:
            return ()
        p = self.arrays[PARENTS][x]
        return int(p[0]), int(p[1])

    def approvers(self, x: int) -> list[int]:
        """Revealed direct approvers of ``x`` in reveal order (deduplicated)."""
        g = self.arrays
        adj, edges = g[ADJ], g[EDGES]
        row = adj[self._check(x)]
        out = [int(y) for y in row[A0:A0 + min(int(row[DEG]), INLINE)]]
        more = []
        e = row[MORE]
        while e >= 0:
            more.append(int(edges[e, SRC]))
            e = edges[e, NEXT]
        return out + more[::-1]

    def tips(self) -> np.ndarray:
        """Revealed tips in internal (swap-remove) order."""
        return self.arrays[TIPS][: self.n_tips].copy()

    def tip_set(self) -> set[int]:
        return set(self.tips().tolist())

    def weight(self, x: int) -> int:
        return int(self.arrays[WEIGHT][self._check(x)])

    def weights(self) -> np.ndarray:
        return self.arrays[WEIGHT][: self.n].astype(np.int64)

    def issue_times(self) -> np.ndarray:
        return self.arrays[ISSUE_T][: self.n].copy()

    def reveal_times(self) -> np.ndarray:
        return self.arrays[REVEAL_T][: self.n].copy()

    def first_approval_times(self) -> np.ndarray:
        return self.arrays[FIRST_APPR][: self.n].copy()

    def parent_array(self) -> np.ndarray:
        return self.arrays[PARENTS][: self.n].astype(np.int64)

    def degree(self, x: int) -> int:
        """Number of revealed direct approvers of ``x``."""
        return int(self.arrays[ADJ][self._check(x), DEG])

    def revealed_mask(self) -> np.ndarray:
        return self.arrays[REVEALED][: self.n].copy()

    def future_cone(self, x: int) -> np.ndarray:
        """Boolean mask of revealed transactions indirectly approving ``x``."""
        return _future_mask(self.arrays, self._check(x))

    def transaction(self, x: int) -> Transaction:
        x = self._check(x)
        g = self.arrays
        fa = g[FIRST_APPR][x]
        return Transaction(
            id=x,
            issue_time=float(g[ISSUE_T][x]),
            reveal_time=float(g[REVEAL_T][x]),
            parents=self.parents(x),
            cumulative_weight=int(g[WEIGHT][x]),
            first_approval_time=None if np.isnan(fa) else float(fa),
            is_conflict_marker=bool(self.conflict[x]),
            revealed=bool(g[REVEALED][x]),
        )

    def copy(self) -> "Tangle":
        other = Tangle.__new__(Tangle)
        other.track_weights = self.track_weights
        other.now = self.now
        other.capacity = self.capacity
        other.arrays = tuple(a.copy() for a in self.arrays)
        other.conflict = self.conflict.copy()
        return other

    # -- debug edge-list format: ``id issue_time reveal_time parent1 parent2``

    def dumps(self) -> str:
        buf = io.StringIO()
        g = self.arrays
        for x in range(self.n):
            p0, p1 = g[PARENTS][x]
            buf.write(f"{x} {float(g[ISSUE_T][x])!r} {float(g[REVEAL_T][x])!r} {p0} {p1}\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str, *, track_weights: bool = True, until: Optional[float] = None) -> "Tangle":
        """Rebuild a Tangle from ``dumps`` output, revealing up to ``until`` (default: all)."""
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        t = cls(capacity=len(rows) + 1, track_weights=track_weights)
        for row in rows[1:]:
            x, issue, _, p0, p1 = int(row[0]), float(row[1]), float(row[2]), int(row[3]), int(row[4])
            t.reveal_until(issue)
            if t.add((p0, p1), issue) != x:
                raise ValueError(f"ids must be contiguous, got {x}")
        if until is None:
            t.drain()
        else:
            t.reveal_until(until)
        return t


def build(edges: Iterable[tuple[int, int]], *, track_weights: bool = True) -> Tangle:
    """Small hand-built DAGs for tests and examples.

    Transaction ``i + 1`` approves ``edges[i]`` and is issued as soon as both
    parents are visible. Everything is revealed on return.
    """
    edges = list(edges)
    t = Tangle(capacity=len(edges) + 1, track_weights=track_weights)
    for p0, p1 in edges:
        issue = max(t.arrays[REVEAL_T][p0], t.arrays[REVEAL_T][p1], t.now)
        t.reveal_until(issue)
        t.add((p0, p1), issue)
    t.drain()
    return t


# ------------------------------------------------------------- operations


def add_transaction(state: Tangle, parents: tuple[int, int], issue_time: float) -> int:
    return state.add(parents, issue_time)


def update_weights_incremental(state: Tangle, new_tx: int) -> int:
    """Increment the weight of every transaction in the past cone of ``new_tx``.

    Returns the size of the cone (``new_tx`` itself excluded). Called on reveal
    when ``state.track_weights`` is set; exposed for callers that maintain
    weights themselves.
    """
    return int(_increment_cone(state.arrays, state._check(new_tx)))


def cumulative_weight_oracle(state: Tangle, x: int) -> int:
    """1 + number of revealed transactions that indirectly approve ``x``.

    Exhaustive forward sweep over parent edges; ignores cached weights and the
    approver lists.
    """
    x = state._check(x)
    parents = state.parent_array()
    revealed = state.revealed_mask()
    reaches = np.zeros(state.n, dtype=bool)
    reaches[x] = True
    count = 0
    for y in range(x + 1, state.n):
        p0, p1 = parents[y]
        if reaches[p0] or reaches[p1]:
            reaches[y] = True
            if revealed[y]:
                count += 1
    return 1 + count


def indirectly_approves(state: Tangle, y: int, x: int) -> bool:
    """True iff ``x`` is reachable from ``y`` by parent edges (``y == x`` counts)."""
    y, x = state._check(y), state._check(x)
    if y == x:
        return True
    parents = state.arrays[PARENTS]
    seen = {y}
    stack = [y]
    while stack:
        v = stack.pop()
        if v == GENESIS:
            continue
        for p in parents[v]:
            p = int(p)
            if p == x:
                return True
            if p > x and p not in seen:
                seen.add(p)
                stack.append(p)
    return False


def rescan_tips(state: Tangle) -> set[int]:
    """Tip set recomputed from scratch: revealed and not approved by anything revealed."""
    parents = state.parent_array()
    revealed = state.revealed_mask()
    approved = np.zeros(state.n, dtype=bool)
    rows = parents[revealed]
    rows = rows[rows[:, 0] >= 0]
    approved[rows.ravel()] = True
    return set(np.flatnonzero(revealed & ~approved).tolist())
