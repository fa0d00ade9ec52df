"""Simulation and exact dynamic-programming oracles.

Two independent routes to the same quantities live here.  The Monte Carlo
route simulates actual walk trajectories (vertex level, with every lamp /
word symbol realized) and estimates boundary-hit frequencies, harmonic
measures and return counts.  The exact route collapses the walk to its
up-class process - per-vertex n-step probabilities are constant on classes
by semi-isotropy, and the stabilizer symmetry makes the class process itself
Markov - and iterates it exactly, which yields n-step laws, partial Green
sums and Martin-kernel approximations without any sampling error.

Monte Carlo runs are embarrassingly parallel over independent streams seeded
as base_seed + run_index; aggregation uses compensated summation so results
do not depend on accumulation order.  Unconverged runs are counted and
reported, never silently resampled.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass

from . import tree as T
from .dlgraph import up_quadruple
from .errors import DepthExceeded
from .tree import ROOT, BoundaryPoint, ConeSpec, TreeVertex, geodesic_toward
from .walks import QuadrupleMeasure, TreeWalk, sample_step

MAX_CLASSES = 2_000_000


@dataclass(frozen=True)
class TrajectoryParams:
    """Stopping rule for boundary-limit detection.

    A trajectory is declared convergent once the confluent with each tracked
    reference vertex has been unchanged for `window` consecutive steps while
    the walker sits at least `depth_margin` levels below it.
    """

    steps: int = 10_000
    window: int = 50
    depth_margin: int = 30
    seed: int = 0


class _TreeSim:
    """Mutable tree-walk state with incremental confluent tracking.

    The word is kept as a stack (newest symbol last; symbols above the stored
    prefix are implicitly 0).  For each reference vertex we maintain the pair
    (k, r) = (up(ref, Z_n), up(Z_n, ref)); the confluent with ref is then
    ref's k-th ancestor.  Updates are O(step size) because a step only
    interacts with a reference's ancestor line when it climbs onto it, and
    from there the freshly drawn symbols decide where it leaves the line.
    """

    __slots__ = ("q", "cum", "moves", "word", "hor", "refs", "rng")

    def __init__(self, walk: TreeWalk, x0: TreeVertex, refs, rng):
        self.q = walk.q
        acc = 0.0
        self.cum = []
        self.moves = []
        for (k, r), m in walk.mu:
            acc += m
            self.cum.append(acc)
            self.moves.append((k, r))
        self.word = [x0.symbol(i) for i in range(x0.support_depth() - 1, -1, -1)]
        self.hor = x0.hor
        self.refs = []
        for v in refs:
            k, r = T.up_pair(v, x0)
            self.refs.append([dict(v.word), k, r])
        self.rng = rng

    def step(self):
        rng = self.rng
        q = self.q
        i = bisect_right(self.cum, rng.random())
        if i >= len(self.moves):
            i = len(self.moves) - 1
        kappa, rho = self.moves[i]
        word = self.word
        s_last = 0
        for _ in range(kappa):
            s_last = word.pop() if word else 0
        sigmas = ()
        if rho:
            if kappa:
                s = rng.randrange(q - 1)
                if s >= s_last:
                    s += 1
            else:
                s = rng.randrange(q)
            if rho > 1:
                sigmas = (s,) + tuple(rng.randrange(q) for _ in range(rho - 1))
            else:
                sigmas = (s,)
            word.extend(sigmas)
        self.hor += rho - kappa
        for ref in self.refs:
            line, k, r = ref
            if kappa < r:
                ref[2] = r - kappa + rho
            else:
                h = k + kappa - r
                d = 0
                for s in sigmas:
                    if d:
                        d += 1
                    elif h >= 1 and s == line.get(h - 1, 0):
                        h -= 1
                    else:
                        d = 1
                ref[1] = h
                ref[2] = d
        return kappa, rho, sigmas


@dataclass(frozen=True)
class Trajectory:
    """Recorded run: rows of (n, hor, up(o, Z_n), up(Z_n, o)) relative to the start."""

    rows: tuple
    seed: int


def simulate(walk, x0, params: TrajectoryParams) -> Trajectory:
    """Run `params.steps` steps from x0, deterministically in `params.seed`."""
    rng = random.Random(params.seed)
    rows = []
    if isinstance(walk, TreeWalk):
        sim = _TreeSim(walk, x0, [x0], rng)
        rows.append((0, sim.hor, 0, 0))
        for n in range(1, params.steps + 1):
            sim.step()
            _, k, r = sim.refs[0]
            rows.append((n, sim.hor, k, r))
    else:
        x = x0
        rows.append((0, x.pos, 0, 0))
        for n in range(1, params.steps + 1):
            x = sample_step(walk, x, rng)
            k1, l1, _, _ = up_quadruple(x0, x)
            rows.append((n, x.pos, k1, l1))
    return Trajectory(tuple(rows), params.seed)


@dataclass(frozen=True)
class BoundaryLimit:
    """Outcome of one boundary-convergence run."""

    converged: bool
    k: int | None
    steps: int


def boundary_limit(walk: TreeWalk, x0: TreeVertex, params: TrajectoryParams) -> BoundaryLimit:
    """Detect up(o, Z_infinity) for one trajectory via confluent stabilization."""
    rng = random.Random(params.seed)
    sim = _TreeSim(walk, x0, [ROOT], rng)
    ref = sim.refs[0]
    stable = 0
    last_k = ref[1]
    for n in range(1, params.steps + 1):
        sim.step()
        if ref[1] == last_k:
            stable += 1
        else:
            last_k = ref[1]
            stable = 1
        if stable >= params.window and ref[2] >= params.depth_margin:
            return BoundaryLimit(True, last_k, n)
    return BoundaryLimit(False, None, params.steps)


@dataclass(frozen=True)
class BoundaryTally:
    """Joint boundary-limit statistics over many runs.

    counts maps the tuple (up(ref_i, Z_infinity))_i to the number of
    convergent runs with that signature; unconverged runs are tallied apart.
    """

    runs: int
    converged: int
    unconverged: int
    counts: dict
    seed: int

    def frequency(self, predicate) -> tuple:
        """(freq, stderr) of the event `predicate(signature)` among convergent runs."""
        hits = sum(c for sig, c in self.counts.items() if predicate(sig))
        p = hits / self.converged
        return p, math.sqrt(p * (1.0 - p) / self.converged)

    def marginal(self, index: int, value: int) -> tuple:
        return self.frequency(lambda sig: sig[index] == value)


def boundary_tally(walk: TreeWalk, x0: TreeVertex, refs, runs: int,
                   params: TrajectoryParams) -> BoundaryTally:
    """Run `runs` independent boundary-limit trajectories tracking every ref."""
    counts = {}
    unconverged = 0
    window, margin, horizon = params.window, params.depth_margin, params.steps
    for run in range(runs):
        rng = random.Random(params.seed + run)
        sim = _TreeSim(walk, x0, refs, rng)
        states = sim.refs
        stable = 0
        last = tuple(st[1] for st in states)
        done = False
        for _ in range(horizon):
            sim.step()
            sig = tuple(st[1] for st in states)
            if sig == last:
                stable += 1
            else:
                last = sig
                stable = 1
            if stable >= window and all(st[2] >= margin for st in states):
                done = True
                break
        if done:
            counts[last] = counts.get(last, 0) + 1
        else:
            unconverged += 1
    return BoundaryTally(runs, runs - unconverged, unconverged, counts, params.seed)


def tally_rows(tally: BoundaryTally, j_max: int, ref_index: int = 0) -> list:
    """(j, count, freq, stderr) rows for one reference's boundary-hit marginals."""
    rows = []
    for j in range(j_max + 1):
        count = sum(c for sig, c in tally.counts.items() if sig[ref_index] == j)
        freq, se = tally.marginal(ref_index, j)
        rows.append((j, count, freq, se))
    return rows


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    stderr: float
    converged: int
    unconverged: int


def estimate_harmonic_measure(walk: TreeWalk, x: TreeVertex, k: int, l: int,
                              runs: int, params: TrajectoryParams) -> MeasureEstimate:
    """MC frequency, among walks started at x, of limits in Omega_k(o) * Omega_l(x).

    The ratio of this against the same estimate started at o approximates the
    Martin kernel on that cylinder.  Boundary limits exist in the positive
    drift case; for a negative-drift walk, simulate its conjugated version and
    multiply the ratio by e^{c0 hor(x)} to recover the kernel.
    """
    tally = boundary_tally(walk, x, [ROOT, x], runs, params)
    p, se = tally.frequency(lambda sig: sig == (k, l))
    return MeasureEstimate(p, se, tally.converged, tally.unconverged)


# ---------------------------------------------------------------------------
# Exact class-collapsed dynamic programming


@dataclass(frozen=True)
class ClassDistribution:
    """Per-vertex probabilities indexed by up-class at a fixed horizon."""

    horizon: int
    table: dict

    def mass(self, dp) -> float:
        return math.fsum(p * dp.class_size(c) for c, p in self.table.items())


class TreeClassDP:
    """Exact evolution of per-vertex probabilities on tree classes (k, r).

    Transitions are computed once per source class by enumerating the walk's
    step cones around an explicit class representative and classifying every
    target against the origin; the stabilizer symmetry makes the counts
    independent of the representative, which the brute-force oracle in the
    tests confirms.
    """

    def __init__(self, walk: TreeWalk):
        self.walk = walk
        self.q = walk.q
        self._trans = {}

    def origin_class(self):
        return (0, 0)

    def class_size(self, c) -> int:
        return T.cone_count(self.q, c[0], c[1])

    def class_of(self, x, y) -> tuple:
        return T.up_pair(x, y)

    def _representative(self, c) -> TreeVertex:
        k, r = c
        v = T.ancestor(ROOT, k)
        if r:
            v = T.successor(v, 1 if k >= 1 else 0)  # symbol 0 leads back toward o
            v = T.descend(v, (0,) * (r - 1))
        return v

    def transitions(self, c):
        """[(target class, lumped-chain probability, per-vertex DP factor)]."""
        cached = self._trans.get(c)
        if cached is not None:
            return cached
        if len(self._trans) >= MAX_CLASSES:
            raise DepthExceeded(f"transition cache exceeded {MAX_CLASSES} classes")
        y = self._representative(c)
        flow = {}
        for (kap, rho), mass in self.walk.mu:
            pv = mass / T.cone_count(self.q, kap, rho)
            for z in T.enumerate_cone(ConeSpec(y, kap, rho), self.q):
                c2 = T.up_pair(ROOT, z)
                flow[c2] = flow.get(c2, 0.0) + pv
        size = self.class_size(c)
        out = tuple((c2, f, f * size / self.class_size(c2)) for c2, f in flow.items())
        self._trans[c] = out
        return out

    def initial(self) -> ClassDistribution:
        return ClassDistribution(0, {self.origin_class(): 1.0})

    def step(self, dist: ClassDistribution) -> ClassDistribution:
        nxt = {}
        for c, p in dist.table.items():
            for c2, _, factor in self.transitions(c):
                nxt[c2] = nxt.get(c2, 0.0) + p * factor
        return ClassDistribution(dist.horizon + 1, nxt)


class DLClassDP(TreeClassDP):
    """Exact evolution on DL quadruple classes (k1, r1, k2, r2) relative to o."""

    def __init__(self, walk: QuadrupleMeasure):
        self.walk = walk
        self.q = walk.q
        self.r = walk.r
        self._trans = {}

    def origin_class(self):
        return (0, 0, 0, 0)

    def class_size(self, c) -> int:
        return T.cone_count(self.q, c[0], c[1]) * T.cone_count(self.r, c[2], c[3])

    def class_of(self, x, y) -> tuple:
        return up_quadruple(x, y)

    def _representative(self, c):
        k1, r1, k2, r2 = c
        rep = TreeClassDP._representative
        return rep(self, (k1, r1)), rep(self, (k2, r2))

    def transitions(self, c):
        cached = self._trans.get(c)
        if cached is not None:
            return cached
        if len(self._trans) >= MAX_CLASSES:
            raise DepthExceeded(f"transition cache exceeded {MAX_CLASSES} classes")
        y1, y2 = self._representative(c)
        flow = {}
        for (kap1, rho1, kap2, rho2), pv in self.walk.entries:
            cone1 = T.enumerate_cone(ConeSpec(y1, kap1, rho1), self.q)
            cone2 = T.enumerate_cone(ConeSpec(y2, kap2, rho2), self.r)
            pairs1 = [T.up_pair(ROOT, z) for z in cone1]
            pairs2 = [T.up_pair(ROOT, z) for z in cone2]
            for p1 in pairs1:
                for p2 in pairs2:
                    c2 = p1 + p2
                    flow[c2] = flow.get(c2, 0.0) + pv
        size = self.class_size(c)
        out = tuple((c2, f, f * size / self.class_size(c2)) for c2, f in flow.items())
        self._trans[c] = out
        return out


def class_dp(walk):
    return TreeClassDP(walk) if isinstance(walk, TreeWalk) else DLClassDP(walk)


def class_collapsed_step(dp, dist: ClassDistribution) -> ClassDistribution:
    return dp.step(dist)


class GreenTable:
    """Partial Green sums sum_{n <= N} p^(n)(o, .) per class, from one DP sweep."""

    def __init__(self, walk, n_max: int):
        self.walk = walk
        self.n_max = n_max
        self.dp = class_dp(walk)
        dist = self.dp.initial()
        sums = {self.dp.origin_class(): 1.0}
        for _ in range(n_max):
            dist = self.dp.step(dist)
            for c, p in dist.table.items():
                sums[c] = sums.get(c, 0.0) + p
        self.sums = sums
        self.last = dict(dist.table)

    def partial(self, x, y) -> float:
        return self.sums.get(self.dp.class_of(x, y), 0.0)

    def last_increment(self, x, y) -> float:
        return self.last.get(self.dp.class_of(x, y), 0.0)


_GREEN_CACHE: dict = {}


def green_table(walk, n_max: int) -> GreenTable:
    key = (walk, n_max)
    if key not in _GREEN_CACHE:
        if len(_GREEN_CACHE) > 8:
            _GREEN_CACHE.clear()
        _GREEN_CACHE[key] = GreenTable(walk, n_max)
    return _GREEN_CACHE[key]


def green_partial(walk, x, y, n_max: int) -> tuple:
    """(sum_{n <= n_max} p^(n)(x, y), final increment) by exact class DP.

    Semi-isotropy lets the start be relocated: the value depends on (x, y)
    only through their up-class.
    """
    table = green_table(walk, n_max)
    return table.partial(x, y), table.last_increment(x, y)


@dataclass(frozen=True)
class MartinRow:
    n: int
    k_hat: float
    rel_err: float


@dataclass(frozen=True)
class MartinReport:
    """Green-ratio approximations K_hat(x, y_n) along a ray toward xi, against
    the closed-form kernel value."""

    target: float
    n_max: int
    rows: tuple

    @property
    def final_rel_err(self) -> float:
        return self.rows[-1].rel_err

    def trending_down(self, floor: float = 1e-6) -> bool:
        """Non-increasing error sequence, up to an absolute noise floor.

        Once the ratio has converged to the truncation floor of the partial
        Green sums the residual errors fluctuate there; the floor keeps that
        regime from being misread as divergence.
        """
        return all(b.rel_err <= a.rel_err + floor for a, b in zip(self.rows, self.rows[1:]))


def martin_convergence_test(walk: TreeWalk, coeffs, x: TreeVertex, xi: BoundaryPoint,
                            depths, n_max: int) -> MartinReport:
    from .boundary import kernel_at  # local import to keep module layering simple

    target = kernel_at(coeffs, x, xi)
    table = green_table(walk, n_max)
    rows = []
    for n in sorted(depths):
        y = geodesic_toward(xi, n)
        k_hat = table.partial(x, y) / table.partial(ROOT, y)
        rows.append(MartinRow(n, k_hat, abs(k_hat - target) / target))
    return MartinReport(target, n_max, tuple(rows))


@dataclass(frozen=True)
class TransienceReport:
    """Mean number of returns to the start within nested horizons."""

    horizons: tuple
    mean_returns: tuple
    stderrs: tuple
    runs: int
    seed: int


def transience_diagnostic(walk, runs: int, steps: int, seed: int) -> TransienceReport:
    """Empirical expected returns to the start at horizons steps/4, steps/2, steps.

    For a transient walk the count stabilizes as the horizon doubles; it is
    directly comparable with green_partial(o, o, horizon) - 1.
    """
    horizons = tuple(h for h in (steps // 4, steps // 2, steps) if h > 0)
    per_run = [[] for _ in horizons]
    for run in range(runs):
        rng = random.Random(seed + run)
        counts = []
        if isinstance(walk, TreeWalk):
            sim = _TreeSim(walk, ROOT, [ROOT], rng)
            ref = sim.refs[0]
            c = 0
            for n in range(1, steps + 1):
                sim.step()
                if ref[1] == 0 and ref[2] == 0:
                    c += 1
                if n in horizons:
                    counts.append(c)
        else:
            from .dlgraph import ORIGIN

            x = ORIGIN
            c = 0
            for n in range(1, steps + 1):
                x = sample_step(walk, x, rng)
                if x == ORIGIN:
                    c += 1
                if n in horizons:
                    counts.append(c)
        for i, c in enumerate(counts):
            per_run[i].append(c)
    means, ses = [], []
    for vals in per_run:
        m = math.fsum(vals) / runs
        var = math.fsum((v - m) ** 2 for v in vals) / max(runs - 1, 1)
        means.append(m)
        ses.append(math.sqrt(var / runs))
    return TransienceReport(horizons, tuple(means), tuple(ses), runs, seed)
