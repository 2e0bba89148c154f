import numpy as np
import pytest

from tanglesim.tangle import build

# tx i+1 approves EDGES[i]
DIAMOND = [(0, 0), (0, 0), (1, 2)]
SEVEN = [(0, 0), (0, 0), (1, 2), (0, 1), (0, 2), (3, 3)]
TEN = [(0, 0), (0, 0), (1, 1), (1, 2), (2, 2), (3, 4), (4, 5), (3, 3), (5, 5)]


@pytest.fixture
def diamond():
    return build(DIAMOND)


@pytest.fixture
def seven():
    return build(SEVEN)


@pytest.fixture
def ten():
    return build(TEN)


def exit_mass_oracle(state, alpha=0.0):
    """Exit probabilities by pushing probability mass through the DAG in id order.

    Uses only the parent array and recomputed weights, never the approver lists
    or cached weights the selectors read.
    """
    parents = state.parent_array()
    revealed = state.revealed_mask()
    n = state.n
    children = [[] for _ in range(n)]
    for y in range(1, n):
        if revealed[y]:
            for p in dict.fromkeys(parents[y].tolist()):
                children[p].append(y)
    # weights from scratch: reverse topological accumulation of descendant sets
    desc = [set() for _ in range(n)]
    for x in range(n - 1, -1, -1):
        for y in children[x]:
            desc[x] |= desc[y] | {y}
    weight = np.array([1 + len(d) for d in desc], dtype=float)
    mass = np.zeros(n)
    mass[0] = 1.0
    out = {}
    for x in range(n):
        if not revealed[x] or mass[x] == 0:
            continue
        ys = children[x]
        if not ys:
            out[x] = mass[x]
            continue
        z = np.exp(alpha * (weight[ys] - weight[ys].max()))
        for y, q in zip(ys, z / z.sum()):
            mass[y] += mass[x] * q
    return out


def random_edges(rng, n):
    """Parent pairs for a random hand-built Tangle of n transactions after genesis."""
    out = []
    for i in range(1, n + 1):
        a = int(rng.integers(0, i))
        b = int(rng.integers(0, i)) if rng.random() < 0.8 else a
        # lean towards recent transactions so the DAG is not star-shaped
        if rng.random() < 0.7:
            a = max(a, i - 1 - int(rng.integers(0, min(i, 8))))
        out.append((a, b))
    return out
