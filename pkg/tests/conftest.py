import random

import pytest
from hypothesis import strategies as st

from dlwalks import tree as T
from dlwalks.dlgraph import compose, make_dl_vertex
from dlwalks.walks import step_support


def tree_vertices(q: int, max_depth: int = 6, hor_span: int = 4):
    """Hypothesis strategy for arbitrary T_q vertices (sparse word + horocycle)."""
    word = st.dictionaries(st.integers(0, max_depth), st.integers(1, q - 1), max_size=max_depth)
    return st.builds(lambda h, w: T.make_vertex(h, w),
                     st.integers(-hor_span, hor_span), word)


def dl_vertices(q: int, r: int, span: int = 4):
    """Hypothesis strategy for DL(q,r) vertices via a valid lamp configuration."""

    def build(pos, seeds):
        lamps = {}
        for m, s in zip(range(pos - span, pos + span + 1), seeds):
            limit = q if m <= pos else r
            lamps[m] = s % limit
        return make_dl_vertex(pos, lamps)

    return st.builds(build, st.integers(-3, 3),
                     st.lists(st.integers(0, 11), min_size=2 * span + 1, max_size=2 * span + 1))


def random_tree_vertex(rng: random.Random, q: int, max_up: int = 4, max_down: int = 8):
    v = T.ancestor(T.ROOT, rng.randrange(max_up + 1))
    for _ in range(rng.randrange(max_down + 1)):
        v = T.successor(v, rng.randrange(q))
    return v


def random_dl_vertex(rng: random.Random, q: int, r: int):
    x1 = random_tree_vertex(rng, q)
    x2 = random_tree_vertex(rng, r, max_up=4, max_down=4)
    # rebase tree-2 so the horocycles cancel
    x2 = T.make_vertex(-x1.hor, dict(x2.word))
    return compose(x1, x2)


def brute_force_step(walk, dist: dict) -> dict:
    """One exact matrix-power step over explicit vertices (oracle path)."""
    nxt = {}
    for x, p in dist.items():
        for y, py in step_support(walk, x):
            nxt[y] = nxt.get(y, 0.0) + p * py
    return nxt


def brute_force_dp(walk, x0, n: int) -> dict:
    dist = {x0: 1.0}
    for _ in range(n):
        dist = brute_force_step(walk, dist)
    return dist


@pytest.fixture
def rng():
    return random.Random(20240817)
