"""Boundary coefficients, minimal harmonic kernels and their classification.

For a transient semi-isotropic walk on T_q there is (up to scalars) a unique
invariant measure nu on the boundary minus the reference end, determined by
the cylinder masses a_j = nu(Omega_j) where Omega_j = { ends xi with
up(o, xi) = j }.  The a_j solve a linear invariance system whose rows expand
mu * nu (Omega_j) over the walk's classes using equidistribution of nu on
each cone T_{k,r}.  The Martin kernel then has the closed form

    K(x, xi) = b(m) * (a_l / a_k) * q**(k - l + m) * (q/(q-1))**eps(k, l)

with k = up(o, xi), l = up(x, xi), m = hor(x), b(m) = 1 for non-negative
drift and b(m) = e^{c0 m} for the conjugated negative-drift case, and

    eps = +1 if k = 0 < l,   -1 if l = 0 < k,   0 otherwise.

The eps table is re-derived here from the harmonic-measure calculus (the
ratio nu_x / nu_o on each cylinder Omega_k(o) intersect Omega_l(x)); every
value is cross-checked in the tests against an independent first-passage
oracle for nearest-neighbour walks and against Monte Carlo cylinder
frequencies, and exact harmonicity of the resulting kernels is verified to
ten digits.

Solvers are single threaded and deterministic; the returned coefficient and
harmonic-function objects are immutable and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tree as T
from .dlgraph import (
    DLVertex,
    act_on_boundary,
    group_inverse,
    induced_tree_action,
    project,
)
from .errors import NoBracket, NoConvergence, TruncationExceeded, Unclassifiable
from .tree import ROOT, BoundaryPoint, TreeVertex, ancestor, descend, up_to_boundary
from .walks import QuadrupleMeasure, TreeWalk, ZWalk, step_support

ZERO_DRIFT_TOL = 1e-12


@dataclass(frozen=True)
class TreeCase:
    """Drift classification of a tree walk.

    kind is one of "positive-drift", "zero-drift", "negative-drift-conjugated";
    c0 is the nonzero root of phi when one exists (positive exactly in the
    conjugated case).
    """

    kind: str
    alpha: float
    c0: float | None = None

    @property
    def conjugated(self) -> bool:
        return self.kind == "negative-drift-conjugated"


def classify_tree_case(walk: TreeWalk) -> TreeCase:
    zw = walk.project_to_z()
    alpha = zw.drift()
    if abs(alpha) <= ZERO_DRIFT_TOL:
        return TreeCase("zero-drift", alpha, None)
    try:
        c0 = zw.find_c0()
    except NoBracket as e:
        if alpha < 0:
            raise Unclassifiable(f"drift {alpha} < 0 but no root c0 > 0 found: {e}") from e
        c0 = None  # the negative root is diagnostic only in the positive-drift case
    if alpha > 0:
        return TreeCase("positive-drift", alpha, c0)
    if c0 is None or c0 <= 0:
        raise Unclassifiable(f"drift {alpha} < 0 but no root c0 > 0 of phi(c) = 1")
    return TreeCase("negative-drift-conjugated", alpha, c0)


@dataclass(frozen=True)
class BoundaryCoefficients:
    """Solved cylinder masses a_j = nu(Omega_j), j = 0..J, plus provenance.

    walk_solved is the walk whose invariance system was solved: the original
    one in the non-negative-drift cases, the conjugated one in case
    "negative-drift-conjugated".
    """

    q: int
    a: tuple
    case: TreeCase
    normalization: str  # "total-mass-one" | "a0-one"
    residual: float
    walk_solved: TreeWalk = field(repr=False)

    @property
    def J(self) -> int:
        return len(self.a) - 1


def _system_matrix(walk: TreeWalk, J: int, affine_tail: bool) -> np.ndarray:
    """Rows j = 0..J of a = M a.

    Row j expands the invariance of nu over the walk's classes; references to
    a_{J+t} are closed out either as 0 (summable-tail cases) or by affine
    extrapolation (zero drift, where the true tail is asymptotically affine).
    """
    q = walk.q
    n = J + 1
    M = np.zeros((n, n))

    def add(row, col, val):
        if col <= J:
            M[row, col] += val
        elif affine_tail:
            t = col - J
            M[row, J] += (1 + t) * val
            M[row, J - 1] -= t * val

    for (k, r), m in walk.mu:
        if k >= 1 and r >= 1:
            add(0, r, m / ((q - 1) * q ** (k - 1)))
        elif k >= 1:
            add(0, 0, m / q**k)
        else:
            for i in range(r + 1):
                add(0, i, m)
    for j in range(1, n):
        for (k, r), m in walk.mu:
            if k <= j - 1:
                add(j, j + r - k, m)
            elif k >= j + 1 and r >= 1:
                add(j, r, m / q ** (k - j))
            elif r == 0:  # k >= j
                add(j, 0, m * (q - 1) / q ** (k - j + 1))
            else:  # k == j, r >= 1
                for i in range(r):
                    add(j, i, m)
                add(j, r, m * (q - 2) / (q - 1))
    return M


def solve_coefficients(walk: TreeWalk, J: int = 200, tol: float = 1e-8) -> BoundaryCoefficients:
    """Solve the truncated invariance system for (a_0 .. a_J).

    The system is linear with a one-dimensional positive solution ray, so it
    is solved directly as a least-squares null-vector problem with a
    normalization row.  Columns are pre-scaled by the expected geometric tail
    decay so that every coefficient is computed with uniform relative
    accuracy.  The residual reported (and checked against `tol`) is the
    maximum relative equation error over all rows that involve no tail
    closure.
    """
    if not walk.project_to_z().is_irreducible():
        raise Unclassifiable("coefficient solve requires an irreducible horocycle projection")
    case = classify_tree_case(walk)
    solved = walk.conjugate(case.c0) if case.conjugated else walk
    zero_drift = case.kind == "zero-drift"

    rho = 1.0  # column scale: expected geometric tail decay, conditioning only
    if not zero_drift:
        try:
            c0s = solved.project_to_z().find_c0()
        except NoBracket:
            c0s = None
        if c0s is not None and c0s < 0:
            rho = math.exp(c0s)

    n = J + 1
    M = _system_matrix(solved, J, affine_tail=zero_drift)
    s = rho ** np.arange(n)
    A = (M - np.eye(n)) * s[None, :] / s[:, None]
    rows = np.vstack([A, np.eye(1, n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    a = s * x

    if np.any(a <= 0):
        raise NoConvergence(float(np.max(np.abs(A @ x))), tol)
    reach = max(r for (k, r), _ in solved.mu)
    resid = M[: n - reach] @ a - a[: n - reach]
    residual = float(np.max(np.abs(resid) / a[: n - reach]))
    if residual > tol:
        raise NoConvergence(residual, tol)

    if zero_drift:
        normalization = "a0-one"
        a = a / a[0]
    else:
        normalization = "total-mass-one"
        a = a / math.fsum(a)
    return BoundaryCoefficients(walk.q, tuple(float(v) for v in a), case, normalization,
                                residual, solved)


def tail_recurrence_residual(coeffs: BoundaryCoefficients, j_lo: int, j_hi: int) -> float:
    """Max relative error of a_j = sum_n a_{j+n} mu_tilde(n) over j_lo <= j <= j_hi."""
    zw = coeffs.walk_solved.project_to_z()
    a = coeffs.a
    worst = 0.0
    for j in range(j_lo, j_hi + 1):
        pred = math.fsum(p * a[j + n] for n, p in zw.law)
        worst = max(worst, abs(pred - a[j]) / a[j])
    return worst


def equidistributed_cylinder_mass(coeffs: BoundaryCoefficients, k: int, r: int) -> float:
    """nu(Omega_0(y)) for y in T_{k,r}: a_k split equally over the cone."""
    return coeffs.a[k] / T.cone_count(coeffs.q, k, r)


def epsilon(k: int, l: int, m: int) -> int:
    """Exponent of q/(q-1) in the kernel: +1 iff k = 0 < l, -1 iff l = 0 < k."""
    if k < 0 or l < 0:
        raise ValueError("k and l must be >= 0")
    if k == 0 and l >= 1:
        return 1
    if l == 0 and k >= 1:
        return -1
    return 0


def kernel_value(coeffs: BoundaryCoefficients, k: int, l: int, m: int) -> float:
    """K at cylinder data (k, l, m); strictly positive."""
    if k > coeffs.J or l > coeffs.J:
        raise TruncationExceeded(f"kernel index {max(k, l)} beyond truncation J={coeffs.J}")
    q = float(coeffs.q)
    b = math.exp(coeffs.case.c0 * m) if coeffs.case.conjugated else 1.0
    return b * (coeffs.a[l] / coeffs.a[k]) * q ** (k - l + m) * (q / (q - 1.0)) ** epsilon(k, l, m)


def kernel_at(coeffs: BoundaryCoefficients, x: TreeVertex, xi: BoundaryPoint) -> float:
    """K(x, xi) = kernel_value at k = up(o, xi), l = up(x, xi), m = hor(x).

    Locally constant in xi on each cylinder Omega_k(o) intersect Omega_l(x);
    raises InsufficientDepth when the anchor of xi is too shallow for x.
    """
    k = up_to_boundary(ROOT, xi)
    l = up_to_boundary(x, xi)
    return kernel_value(coeffs, k, l, x.hor)


def minimal_z_harmonics(zw: ZWalk) -> list:
    """Exponents c with phi(c) = 1: the minimal positive harmonic functions of the
    Z projection are exactly m -> e^{cm} for these c (always including c = 0)."""
    out = [0.0]
    c0 = zw.find_c0()
    if c0 is not None:
        out.append(c0)
    return out


@dataclass(frozen=True)
class HarmonicFunction:
    """A positive harmonic function in closed form, evaluable on vertices.

    kind: "tree-kernel" (Martin kernel K(., xi)), "exponential" (e^{c hor}),
    "constant", or "mixture".  domain is "tree" or "dl"; DL evaluations of
    one-tree functions read the projection named by `side`.
    """

    kind: str
    domain: str
    side: int | None = None
    coeffs: BoundaryCoefficients | None = None
    xi: BoundaryPoint | None = None
    c: float = 0.0
    parts: tuple = ()

    @staticmethod
    def tree_kernel(coeffs, xi, domain="tree", side=None) -> "HarmonicFunction":
        return HarmonicFunction("tree-kernel", domain, side, coeffs, xi)

    @staticmethod
    def exponential(c, domain="tree", side=1) -> "HarmonicFunction":
        return HarmonicFunction("exponential", domain, side, c=c)

    @staticmethod
    def constant(domain="tree") -> "HarmonicFunction":
        return HarmonicFunction("constant", domain)

    @staticmethod
    def mixture(parts, domain) -> "HarmonicFunction":
        parts = tuple((float(w), h) for w, h in parts)
        if any(w <= 0 for w, _ in parts):
            raise ValueError("mixture weights must be positive")
        return HarmonicFunction("mixture", domain, parts=parts)

    def lift(self, side: int) -> "HarmonicFunction":
        """View a tree function as a DL function through the side projection."""
        if self.domain != "tree":
            raise ValueError("only tree functions can be lifted")
        if self.kind == "mixture":
            return HarmonicFunction("mixture", "dl",
                                    parts=tuple((w, h.lift(side)) for w, h in self.parts))
        return HarmonicFunction(self.kind, "dl", side, self.coeffs, self.xi, self.c, ())

    def _hor(self, v) -> int:
        if self.domain == "tree":
            return v.hor
        return v.pos if self.side == 1 else -v.pos

    def __call__(self, v) -> float:
        if self.kind == "constant":
            return 1.0
        if self.kind == "exponential":
            return math.exp(self.c * self._hor(v))
        if self.kind == "tree-kernel":
            x = v if self.domain == "tree" else project(v, self.side)
            return kernel_at(self.coeffs, x, self.xi)
        return math.fsum(w * h(v) for w, h in self.parts)


def lift_to_dl(h: HarmonicFunction, side: int) -> HarmonicFunction:
    return h.lift(side)


def harmonicity_residual(h, walk, points) -> float:
    """max over points of |Ph - h| / h, with Ph summed exactly over the finite
    step support (works for tree and DL walks alike)."""
    worst = 0.0
    for x in points:
        hx = h(x)
        px = math.fsum(p * h(y) for y, p in step_support(walk, x))
        worst = max(worst, abs(px - hx) / abs(hx))
    return worst


@dataclass(frozen=True)
class KernelFamily:
    """One side's family { K_side(., xi) lifted to DL : xi in the tree boundary }."""

    side: int
    q: int
    tree_case: TreeCase
    coeffs: BoundaryCoefficients

    def kernel(self, xi: BoundaryPoint) -> HarmonicFunction:
        return HarmonicFunction.tree_kernel(self.coeffs, xi, domain="dl", side=self.side)

    def tree_kernel(self, xi: BoundaryPoint) -> HarmonicFunction:
        return HarmonicFunction.tree_kernel(self.coeffs, xi, domain="tree")


@dataclass(frozen=True)
class ClassificationReport:
    """Minimal harmonic functions of a semi-isotropic DL walk.

    Case "I" (zero drift): both lifted kernel families plus the constant.
    Case "II" (nonzero root c0 with finite exponential moment): the two
    lifted kernel families only.
    """

    q: int
    r: int
    case: str
    alpha: float
    c0: float | None
    exp_moment: float | None
    families: tuple
    includes_constant: bool

    def all_sample_functions(self, xis_by_side) -> list:
        out = [fam.kernel(xi) for fam in self.families for xi in xis_by_side[fam.side]]
        if self.includes_constant:
            out.append(HarmonicFunction.constant("dl"))
        return out

    def to_jsonable(self) -> dict:
        return {
            "q": self.q,
            "r": self.r,
            "case": self.case,
            "alpha": self.alpha,
            "c0": self.c0,
            "exp_moment": self.exp_moment,
            "includes_constant": self.includes_constant,
            "families": [
                {
                    "side": fam.side,
                    "q": fam.q,
                    "tree_case": fam.tree_case.kind,
                    "tree_c0": fam.tree_case.c0,
                    "normalization": fam.coeffs.normalization,
                    "residual": fam.coeffs.residual,
                    "a_head": list(fam.coeffs.a[:12]),
                }
                for fam in self.families
            ],
        }


def enumerate_minimal_families(qm: QuadrupleMeasure, J: int = 200,
                               tol: float = 1e-8) -> ClassificationReport:
    """Classify a DL walk and solve the kernel data for both tree projections."""
    z1 = qm.z_law(1)
    alpha = z1.drift()
    if abs(alpha) <= ZERO_DRIFT_TOL:
        case, c0, mc = "I", None, None
    else:
        try:
            c0 = z1.find_c0()
        except NoBracket as e:
            raise Unclassifiable(f"drift {alpha} != 0 and no root of phi(c) = 1: {e}") from e
        if c0 is None:
            raise Unclassifiable(f"drift {alpha} != 0 but phi(c) = 1 has no nonzero root")
        case, mc = "II", qm.exp_moment(c0)
    families = []
    for side in (1, 2):
        tw = qm.project_to_tree(side)
        coeffs = solve_coefficients(tw, J, tol)
        families.append(KernelFamily(side, tw.q, coeffs.case, coeffs))
    return ClassificationReport(qm.q, qm.r, case, alpha, c0, mc,
                                tuple(families), includes_constant=(case == "I"))


@dataclass(frozen=True)
class CocycleReport:
    max_rel_dev: float
    samples: int


def cocycle_check(coeffs: BoundaryCoefficients, g: DLVertex, xi: BoundaryPoint,
                  xs, q: int, r: int, side: int = 1) -> CocycleReport:
    """Check K(x, g xi) = K(g^-1 x, xi) / K(g^-1 o, xi) exactly on the samples."""
    gxi = act_on_boundary(g, xi, side, q, r)
    ginv = group_inverse(g, q, r)
    denom = kernel_at(coeffs, induced_tree_action(ginv, ROOT, side, q, r), xi)
    worst = 0.0
    for x in xs:
        lhs = kernel_at(coeffs, x, gxi)
        rhs = kernel_at(coeffs, induced_tree_action(ginv, x, side, q, r), xi) / denom
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return CocycleReport(worst, len(xs))


def standard_boundary_points(ks=(0, 1, 2), depth: int = 16) -> list:
    """Boundary points with up(o, xi) = k for each requested k, anchored deep
    enough for kernel evaluation at vertices of moderate depth."""
    out = []
    for k in ks:
        if k == 0:
            path = (1,) + (0,) * (depth - 1)
            out.append(BoundaryPoint(descend(ROOT, path)))
        else:
            # branch off the ancestor line at o_k (symbol 0 leads back toward o)
            path = (1,) + (0,) * (depth - 1)
            out.append(BoundaryPoint(descend(ancestor(ROOT, k), path)))
    return out
