"""Parasite-chain double-spend attacks against URTS and unbiased walks.

Two constructions, both issued privately and revealed at once:

* tip flood: a double-spend ``y`` plus ``size`` attacker tips approving it.
  Uniform selection picks an attacker tip with probability size / (size + L).
* cut-set chain: a chain x0, x1, ... where every xi approves x(i-1) and one
  member of a cut set Y, until the chain holds more than ``kappa`` of the
  direct approvers of each member of Y. An unbiased walk that enters the chain
  can never leave it, so x0 ends up with confidence above ``kappa``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metrics import confidence_level
from .selector import SelectorKind
from .tangle import DELAY, GENESIS, Tangle

TIP_FLOOD = "tip_flood"
CUT_SET_CHAIN = "cut_set_chain"


@dataclass(frozen=True)
class ParasiteSpec:
    kind: str
    size: int
    anchor: Optional[int] = None
    kappa: float = 0.6
    cut_set: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in (TIP_FLOOD, CUT_SET_CHAIN):
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.size < 1:
            raise ValueError(f"attacker size must be >= 1, got {self.size}")
        if not 0 < self.kappa < 1:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")


def _check_anchor(state: Tangle, anchor: int) -> int:
    anchor = state._check(anchor)
    if not state.is_revealed(anchor):
        raise ValueError(f"anchor {anchor} is not revealed")
    return anchor


def build_tip_flood(state: Tangle, spec: ParasiteSpec, rng=None, reveal: bool = True) -> list[int]:
    """Issue the double-spend and ``spec.size`` tips approving it; returns [y, tips...].

    ``y`` approves the anchor (genesis by default), each attacker tip approves
    ``y`` twice, so honest tips are left untouched.
    """
    if spec.kind != TIP_FLOOD:
        raise ValueError("spec is not a tip flood")
    anchor = _check_anchor(state, GENESIS if spec.anchor is None else spec.anchor)
    t0 = state.now
    state.reserve(spec.size + 1)
    y = state.add((anchor, anchor), t0)
    state.mark_conflict(y)
    ids = [y] + [state.add((y, y), t0, private=True) for _ in range(spec.size)]
    if reveal:
        state.reveal_until(t0 + DELAY)
    return ids


def is_cut_set(state: Tangle, cut: Sequence[int]) -> bool:
    """Whether every genesis-to-tip path of revealed transactions meets ``cut``."""
    blocked = set(int(c) for c in cut)
    if GENESIS in blocked:
        return True
    seen = {GENESIS}
    stack = [GENESIS]
    while stack:
        ys = state.approvers(stack.pop())
        if not ys:
            return False
        for y in ys:
            if y not in blocked and y not in seen:
                seen.add(y)
                stack.append(y)
    return True


def _honest_approver_counts(state: Tangle, cut: Sequence[int]) -> dict[int, int]:
    return {int(y): state.degree(y) for y in cut}


def chain_share_needed(honest: int, kappa: float) -> int:
    """Smallest k with k / (k + honest) > kappa."""
    k = int(np.floor(kappa * honest / (1 - kappa)))
    while k <= kappa * (k + honest) or k == 0:
        k += 1
    return k


def build_cut_set_chain(state: Tangle, spec: ParasiteSpec, rng=None, reveal: bool = True) -> list[int]:
    """Issue the chain x0, x1, ... against the cut set; returns the chain (x0 first).

    The cut set defaults to the direct approvers of genesis. x0 approves the
    anchor (default: first member of the cut set) twice; each later link
    approves its predecessor and the cut member furthest from its quota. The
    whole plan is checked against ``spec.size`` before anything is issued.
    """
    if spec.kind != CUT_SET_CHAIN:
        raise ValueError("spec is not a cut-set chain")
    cut = list(spec.cut_set) if spec.cut_set is not None else state.approvers(GENESIS)
    if not cut:
        raise ValueError("empty cut set")
    for y in cut:
        _check_anchor(state, y)
    if not is_cut_set(state, cut):
        raise ValueError("the given set does not cut every genesis-to-tip path")
    anchor = _check_anchor(state, cut[0] if spec.anchor is None else spec.anchor)
    honest = _honest_approver_counts(state, cut)
    need = {y: chain_share_needed(honest[y], spec.kappa) for y in cut}
    if anchor in need:
        need[anchor] -= 1
    total = 1 + sum(need.values())
    if total > spec.size:
        raise ValueError(f"kappa={spec.kappa} needs a chain of {total} > budget {spec.size}")

    t0 = state.now
    state.reserve(total)
    x0 = state.add((anchor, anchor), t0)
    state.mark_conflict(x0)
    chain = [x0]
    order = {y: i for i, y in enumerate(cut)}
    while True:
        y = max(cut, key=lambda c: (need[c], -order[c]))
        if need[y] <= 0:
            break
        chain.append(state.add((chain[-1], y), t0, private=True))
        need[y] -= 1
    if reveal:
        state.reveal_until(t0 + DELAY)
    return chain


def evaluate_attack(state: Tangle, double_spend: int, kind: SelectorKind, samples: int,
                    rng: Optional[np.random.Generator] = None) -> float:
    """Confidence level of the attacker's double-spend under ``kind``.

    Weights are rebuilt first when a biased walk is evaluated on a Tangle that
    was grown without them.
    """
    if kind.needs_weights and not state.track_weights:
        state.recompute_weights()
    return confidence_level(state, double_spend, kind, samples, rng)
