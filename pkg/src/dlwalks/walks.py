"""Semi-isotropic transition measures on DL(q,r), T_q and Z.

A walk on DL(q,r) is semi-isotropic when p(x,y) depends only on the up
quadruple (up(x1,y1), up(y1,x1), up(x2,y2), up(y2,x2)); such a walk is
described by a measure on quadruples (k1,l1,k2,l2) with k1+k2 = l1+l2,
stored here per target vertex so that uniformity within a class is
structural.  Tree walks store class masses mu_{k,r} (total over T_{k,r}),
and Z walks the increment law mu_tilde of the horocycle projection.

Only finitely supported measures are accepted at the I/O boundary, so the
analytic functionals (phi, drift, moments, exponential moments) are finite
sums.  Measures are immutable after construction; sampling takes an
externally supplied random stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import tree as T
from .dlgraph import DLVertex, compose, project, up_quadruple
from .errors import NoBracket, NotStochastic, WalkSpecError
from .tree import ConeSpec, TreeVertex, ancestor, cone_count, descend, enumerate_cone, successor

MASS_TOL = 1e-12

C_SEARCH_LIMIT = 50.0


def _check_mass(total: float, what: str) -> None:
    if abs(total - 1.0) > MASS_TOL:
        raise WalkSpecError(f"{what}: total mass {total!r} is not 1")


@dataclass(frozen=True)
class ZWalk:
    """Finitely supported increment law on Z (the horocycle projection of a walk)."""

    law: tuple  # sorted ((n, prob), ...)

    @staticmethod
    def make(mapping) -> "ZWalk":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        law = tuple(sorted((int(n), float(p)) for n, p in items if p))
        for n, p in law:
            if p < 0:
                raise WalkSpecError(f"mu_tilde.{n!r}: negative probability {p!r}")
        _check_mass(math.fsum(p for _, p in law), "mu_tilde")
        return ZWalk(law)

    def as_dict(self) -> dict:
        return dict(self.law)

    def prob(self, n: int) -> float:
        return dict(self.law).get(n, 0.0)

    def support(self) -> list:
        return [n for n, _ in self.law]

    def is_irreducible(self) -> bool:
        """True when the support generates Z as a semigroup: both signs present
        and gcd of the support equal to 1."""
        pos = [n for n, _ in self.law if n > 0]
        neg = [n for n, _ in self.law if n < 0]
        if not pos or not neg:
            return False
        return math.gcd(*(abs(n) for n, _ in self.law if n)) == 1

    def phi(self, c: float) -> float:
        """Moment generating function phi(c) = sum mu_tilde(m) e^{cm}."""
        return math.fsum(p * math.exp(c * n) for n, p in self.law)

    def drift(self) -> float:
        return math.fsum(n * p for n, p in self.law)

    def reflected(self) -> "ZWalk":
        return ZWalk(tuple(sorted((-n, p) for n, p in self.law)))

    def find_c0(self, tol: float = 1e-12):
        """The nonzero root of phi(c) = 1, or None when c = 0 is a double root.

        phi is strictly convex with phi(0) = 1 and phi'(0) the drift, so the
        root (when the drift is nonzero) lies on the opposite side of 0 and is
        located by expanding a bracket geometrically, then bisecting.
        """
        alpha = self.drift()
        if alpha == 0.0:
            return None
        sign = -1.0 if alpha > 0 else 1.0
        hi = 1.0
        while self.phi(sign * hi) < 1.0:
            hi *= 2.0
            if hi > C_SEARCH_LIMIT:
                raise NoBracket(
                    f"no sign change of phi - 1 within |c| <= {C_SEARCH_LIMIT}"
                )
        lo = 0.0  # phi < 1 strictly between 0 and the root
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.phi(sign * mid) < 1.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16 * max(1.0, hi):
                break
        c0 = sign * 0.5 * (lo + hi)
        if abs(self.phi(c0) - 1.0) > tol:
            raise NoBracket(f"bisection stalled: |phi(c0) - 1| = {abs(self.phi(c0) - 1.0):.3e}")
        return c0


@dataclass(frozen=True)
class TreeWalk:
    """Semi-isotropic walk on T_q as class masses mu_{k,r} = total mass of T_{k,r}."""

    q: int
    mu: tuple  # sorted (((k, r), mass), ...)

    @staticmethod
    def make(q: int, mapping) -> "TreeWalk":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        mu = []
        for key, mass in items:
            k, r = int(key[0]), int(key[1])
            if k < 0 or r < 0:
                raise WalkSpecError(f"mu.{(k, r)!r}: negative class index")
            if mass < 0:
                raise WalkSpecError(f"mu.{(k, r)!r}: negative mass {mass!r}")
            if mass:
                mu.append(((k, r), float(mass)))
        _check_mass(math.fsum(m for _, m in mu), "tree walk")
        return TreeWalk(q, tuple(sorted(mu)))

    def classes(self) -> list:
        return [kr for kr, _ in self.mu]

    def mass(self, k: int, r: int) -> float:
        return dict(self.mu).get((k, r), 0.0)

    def per_vertex(self, k: int, r: int) -> float:
        m = self.mass(k, r)
        return m / cone_count(self.q, k, r) if m else 0.0

    def step_range(self) -> int:
        return max((k + r for (k, r), _ in self.mu), default=0)

    def project_to_z(self) -> ZWalk:
        law = {}
        for (k, r), m in self.mu:
            law[r - k] = law.get(r - k, 0.0) + m
        return ZWalk(tuple(sorted(law.items())))

    def moment(self, t: float) -> float:
        """m_t = sum_x d(o,x)^t p(o,x); class members sit at distance k + r."""
        return math.fsum(m * float(k + r) ** t for (k, r), m in self.mu if k + r)

    def conjugate(self, c0: float, tol: float = 1e-8) -> "TreeWalk":
        """Reweight by e^{c0 (hor(y) - hor(x))}: mu#_{k,r} = mu_{k,r} e^{c0 (r-k)}."""
        if abs(self.project_to_z().phi(c0) - 1.0) > tol:
            raise NotStochastic(f"phi(c0) = {self.project_to_z().phi(c0)!r} != 1")
        mu = tuple(sorted(((k, r), m * math.exp(c0 * (r - k))) for (k, r), m in self.mu))
        return TreeWalk(self.q, mu)

    def transition_prob(self, x: TreeVertex, y: TreeVertex) -> float:
        k, r = T.up_pair(x, y)
        return self.per_vertex(k, r)


@dataclass(frozen=True)
class QuadrupleMeasure:
    """Semi-isotropic walk on DL(q,r): per-vertex probabilities by up-quadruple."""

    q: int
    r: int
    entries: tuple  # sorted (((k1, l1, k2, l2), per_vertex_prob), ...)

    @staticmethod
    def make(q: int, r: int, mapping) -> "QuadrupleMeasure":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        entries = []
        total = []
        for key, p in items:
            k1, l1, k2, l2 = (int(v) for v in key)
            name = f"quadruple {(k1, l1, k2, l2)!r}"
            if min(k1, l1, k2, l2) < 0:
                raise WalkSpecError(f"{name}: negative index")
            if k1 + k2 != l1 + l2:
                raise WalkSpecError(f"{name}: k1 + k2 != l1 + l2")
            if p < 0:
                raise WalkSpecError(f"{name}: negative probability {p!r}")
            if p:
                entries.append(((k1, l1, k2, l2), float(p)))
                total.append(p * cone_count(q, k1, l1) * cone_count(r, k2, l2))
        _check_mass(math.fsum(total), "quadruple measure")
        return QuadrupleMeasure(q, r, tuple(sorted(entries)))

    def per_vertex(self, quad) -> float:
        return dict(self.entries).get(tuple(quad), 0.0)

    def class_size(self, quad) -> int:
        k1, l1, k2, l2 = quad
        return cone_count(self.q, k1, l1) * cone_count(self.r, k2, l2)

    def class_mass(self, quad) -> float:
        return self.per_vertex(quad) * self.class_size(quad)

    def quadruples(self) -> list:
        return [quad for quad, _ in self.entries]

    def transition_prob(self, x: DLVertex, y: DLVertex) -> float:
        return self.per_vertex(up_quadruple(x, y))

    def project_to_tree(self, side: int) -> TreeWalk:
        """Sum out the other tree coordinate; the result is again semi-isotropic."""
        if side not in (1, 2):
            raise ValueError(f"side must be 1 or 2, got {side}")
        q = self.q if side == 1 else self.r
        other = self.r if side == 1 else self.q
        mu = {}
        for (k1, l1, k2, l2), p in self.entries:
            k, l = (k1, l1) if side == 1 else (k2, l2)
            ko, lo = (k2, l2) if side == 1 else (k1, l1)
            mass = p * cone_count(other, ko, lo) * cone_count(q, k, l)
            mu[(k, l)] = mu.get((k, l), 0.0) + mass
        return TreeWalk.make(q, mu)

    def z_law(self, side: int = 1) -> ZWalk:
        law = {}
        for (k1, l1, k2, l2), p in self.entries:
            n = (l1 - k1) if side == 1 else (l2 - k2)
            law[n] = law.get(n, 0.0) + p * self.class_size((k1, l1, k2, l2))
        return ZWalk(tuple(sorted((n, m) for n, m in law.items() if m)))

    def moment(self, t: float) -> float:
        out = []
        for (k1, l1, k2, l2), p in self.entries:
            d = (k1 + l1) + (k2 + l2) - abs(l1 - k1)
            if d:
                out.append(p * self.class_size((k1, l1, k2, l2)) * float(d) ** t)
        return math.fsum(out)

    def exp_moment(self, c: float) -> float:
        """m^{(c)} = sum (d(o1,x1) e^{c+ hor(x1)} + d(o2,x2) e^{c- hor(x2)}) p(o,x)."""
        cp, cm = max(c, 0.0), min(c, 0.0)
        out = []
        for (k1, l1, k2, l2), p in self.entries:
            w = self.class_size((k1, l1, k2, l2)) * p
            out.append(w * ((k1 + l1) * math.exp(cp * (l1 - k1))
                            + (k2 + l2) * math.exp(cm * (l2 - k2))))
        return math.fsum(out)

    def conjugate(self, c0: float, tol: float = 1e-8) -> "QuadrupleMeasure":
        """Per-vertex entries reweighted by e^{c0 (l1 - k1)}; needs phi(c0) = 1."""
        if abs(self.z_law(1).phi(c0) - 1.0) > tol:
            raise NotStochastic(f"phi(c0) = {self.z_law(1).phi(c0)!r} != 1")
        entries = tuple(sorted(
            (quad, p * math.exp(c0 * (quad[1] - quad[0]))) for quad, p in self.entries
        ))
        return QuadrupleMeasure(self.q, self.r, entries)


def switch_walk(mu_tilde, q: int, r: int) -> QuadrupleMeasure:
    """The lamplighter switch-walk family: jump m along Z, re-randomizing all |m|
    traversed lamps uniformly in the color of the side they end up on.

    A jump m > 0 lands in the quadruple class (0, m, m, 0) with q^m equally
    likely targets, m < 0 in (|m|, 0, 0, |m|) with r^{|m|} targets, and m = 0
    is the lazy identity class (0, 0, 0, 0).
    """
    zw = mu_tilde if isinstance(mu_tilde, ZWalk) else ZWalk.make(mu_tilde)
    entries = {}
    for m, p in zw.law:
        if m > 0:
            entries[(0, m, m, 0)] = p / q**m
        elif m < 0:
            entries[(-m, 0, 0, -m)] = p / r ** (-m)
        else:
            entries[(0, 0, 0, 0)] = p
    return QuadrupleMeasure.make(q, r, entries)


def uniform_cone_member(base: TreeVertex, k: int, r: int, q: int, rng) -> TreeVertex:
    """Uniform draw from T_{k,r}(base) without enumerating the cone."""
    top = ancestor(base, k)
    if r == 0:
        return top
    if k >= 1:
        avoid = base.symbol(k - 1)
        s0 = rng.randrange(q - 1)
        if s0 >= avoid:
            s0 += 1
    else:
        s0 = rng.randrange(q)
    v = successor(top, s0)
    return descend(v, (rng.randrange(q) for _ in range(r - 1)))


def sample_step(walk, x, rng):
    """One step of the walk from x: draw a class by total mass, then a uniform
    member of the class (uniformity within classes is exactly semi-isotropy)."""
    u = rng.random()
    acc = 0.0
    if isinstance(walk, TreeWalk):
        for (k, r), m in walk.mu:
            acc += m
            if u < acc:
                return uniform_cone_member(x, k, r, walk.q, rng)
        k, r = walk.mu[-1][0]
        return uniform_cone_member(x, k, r, walk.q, rng)
    for quad, p in walk.entries:
        acc += p * walk.class_size(quad)
        if u < acc:
            break
    else:
        quad = walk.entries[-1][0]
    k1, l1, k2, l2 = quad
    y1 = uniform_cone_member(project(x, 1), k1, l1, walk.q, rng)
    y2 = uniform_cone_member(project(x, 2), k2, l2, walk.r, rng)
    return compose(y1, y2)


def step_support(walk, x):
    """All (y, p(x, y)) with positive probability; exact because supports are finite."""
    out = []
    if isinstance(walk, TreeWalk):
        for (k, r), _ in walk.mu:
            p = walk.per_vertex(k, r)
            for y in enumerate_cone(ConeSpec(x, k, r), walk.q):
                out.append((y, p))
        return out
    x1, x2 = project(x, 1), project(x, 2)
    for (k1, l1, k2, l2), p in walk.entries:
        cone1 = enumerate_cone(ConeSpec(x1, k1, l1), walk.q)
        cone2 = enumerate_cone(ConeSpec(x2, k2, l2), walk.r)
        for y1 in cone1:
            for y2 in cone2:
                out.append((compose(y1, y2), p))
    return out


@dataclass(frozen=True)
class WalkSpec:
    """A parsed walk specification file."""

    q: int
    r: int
    family: str
    mu_tilde: ZWalk | None
    measure: QuadrupleMeasure
    source: dict


def parse_walk_spec(obj) -> WalkSpec:
    if not isinstance(obj, dict):
        raise WalkSpecError("walk spec must be a JSON object")
    for field in ("q", "r"):
        if field not in obj:
            raise WalkSpecError(f"{field}: missing")
        if not isinstance(obj[field], int) or obj[field] < 2:
            raise WalkSpecError(f"{field}: must be an integer >= 2, got {obj[field]!r}")
    q, r = obj["q"], obj["r"]
    if "mu_tilde" in obj:
        family = obj.get("family", "switch-walk")
        if family != "switch-walk":
            raise WalkSpecError(f"family: unknown family {family!r}")
        raw = obj["mu_tilde"]
        if not isinstance(raw, dict) or not raw:
            raise WalkSpecError("mu_tilde: must be a non-empty object")
        law = {}
        for key, p in raw.items():
            try:
                n = int(key)
            except ValueError:
                raise WalkSpecError(f"mu_tilde.{key!r}: key is not an integer") from None
            if not isinstance(p, (int, float)) or p < 0:
                raise WalkSpecError(f"mu_tilde.{key!r}: invalid probability {p!r}")
            law[n] = float(p)
        if abs(math.fsum(law.values()) - 1.0) > MASS_TOL:
            raise WalkSpecError(f"mu_tilde: probabilities sum to {math.fsum(law.values())!r}, not 1")
        zw = ZWalk.make(law)
        return WalkSpec(q, r, "switch-walk", zw, switch_walk(zw, q, r), dict(obj))
    if "quadruples" in obj:
        raw = obj["quadruples"]
        if not isinstance(raw, list) or not raw:
            raise WalkSpecError("quadruples: must be a non-empty array")
        entries = {}
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise WalkSpecError(f"quadruples[{i}]: must be an object")
            try:
                quad = tuple(int(item[f]) for f in ("k1", "l1", "k2", "l2"))
                p = float(item["per_vertex_prob"])
            except KeyError as e:
                raise WalkSpecError(f"quadruples[{i}].{e.args[0]}: missing") from None
            if quad in entries:
                raise WalkSpecError(f"quadruples[{i}]: duplicate quadruple {quad!r}")
            entries[quad] = p
        try:
            qm = QuadrupleMeasure.make(q, r, entries)
        except WalkSpecError as e:
            raise WalkSpecError(f"quadruples: {e}") from None
        return WalkSpec(q, r, "quadruples", None, qm, dict(obj))
    raise WalkSpecError("walk spec needs either 'mu_tilde' or 'quadruples'")


def load_walk_spec(path) -> WalkSpec:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise WalkSpecError(f"invalid JSON: {e}") from None
    return parse_walk_spec(obj)
