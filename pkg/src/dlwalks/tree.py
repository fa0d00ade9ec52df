"""Exact combinatorial geometry of the homogeneous tree T_q.

The tree of degree q+1 is drawn with a distinguished reference end omega at
the top, so that every vertex has one predecessor (upward, toward omega) and
q successors (downward).  A vertex is stored as a finitely supported word
over {0, ..., q-1} together with an integer horocycle index: word index 0 is
the most recent downward branching choice, and unstored indices are
implicitly 0.  The root ``o`` is the zero word on horocycle 0, and the k-th
iterated predecessor of ``o`` is the zero word on horocycle -k.

Horocycles increase downward: ``hor(predecessor(v)) = hor(v) - 1``.  The
confluent of two vertices is their maximal common ancestor; ``up(x, y)`` is
the number of upward steps from x to the confluent, so the graph distance is
``up(x, y) + up(y, x)``.

Boundary points are ends other than omega, represented by a finite anchor
vertex plus the canonical continuation that keeps appending symbol 0 below
the anchor.  Computations that would depend on anything below the anchor
other than that canonical continuation raise InsufficientDepth rather than
guessing.

All values are immutable and all operations are pure functions, so the
module is safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import InsufficientDepth


@dataclass(frozen=True)
class TreeVertex:
    """Vertex of T_q: sparse word (index, symbol) pairs, symbols nonzero, plus horocycle."""

    hor: int
    word: tuple = ()

    def symbol(self, m: int) -> int:
        for i, s in self.word:
            if i == m:
                return s
        return 0

    def support_depth(self) -> int:
        """One past the largest stored word index; 0 for the zero word."""
        return max((i + 1 for i, _ in self.word), default=0)

    def to_json(self) -> dict:
        return {"hor": self.hor, "word": {str(i): s for i, s in self.word}}

    @staticmethod
    def from_json(obj, q: int | None = None) -> "TreeVertex":
        if not isinstance(obj, dict) or "hor" not in obj:
            raise ValueError("tree vertex JSON must be an object with an 'hor' field")
        word = {}
        for key, sym in obj.get("word", {}).items():
            idx = int(key)
            if idx < 0:
                raise ValueError(f"word.{key!r}: negative index")
            if not isinstance(sym, int) or sym < 0 or (q is not None and sym >= q):
                raise ValueError(f"word.{key!r}: symbol {sym!r} outside alphabet")
            if sym:
                word[idx] = sym
        return TreeVertex(int(obj["hor"]), tuple(sorted(word.items())))


ROOT = TreeVertex(0, ())


def make_vertex(hor: int, word) -> TreeVertex:
    """Build a vertex from any index->symbol mapping, dropping zero symbols."""
    items = word.items() if isinstance(word, dict) else word
    return TreeVertex(hor, tuple(sorted((i, s) for i, s in items if s)))


def predecessor(v: TreeVertex) -> TreeVertex:
    """The unique neighbor one horocycle up: delete word index 0, shift the rest down."""
    return TreeVertex(v.hor - 1, tuple((i - 1, s) for i, s in v.word if i >= 1))


def ancestor(v: TreeVertex, steps: int) -> TreeVertex:
    if steps < 0:
        raise ValueError("ancestor steps must be >= 0")
    return TreeVertex(v.hor - steps, tuple((i - steps, s) for i, s in v.word if i >= steps))


def successor(v: TreeVertex, symbol: int) -> TreeVertex:
    shifted = tuple((i + 1, s) for i, s in v.word)
    if symbol:
        return TreeVertex(v.hor + 1, ((0, symbol),) + shifted)
    return TreeVertex(v.hor + 1, shifted)


def successors(v: TreeVertex, q: int) -> list:
    """The q neighbors one horocycle down, ordered by the new symbol."""
    _check_branching(q)
    return [successor(v, s) for s in range(q)]


def descend(v: TreeVertex, symbols) -> TreeVertex:
    for s in symbols:
        v = successor(v, s)
    return v


def neighbors(v: TreeVertex, q: int) -> list:
    return [predecessor(v)] + successors(v, q)


def _check_branching(q: int) -> None:
    if q < 2:
        raise ValueError(f"branching q must be >= 2, got {q}")


def _levels_match(x: TreeVertex, y: TreeVertex, level: int) -> bool:
    dx = x.hor - level
    dy = y.hor - level
    wx = {i - dx: s for i, s in x.word if i >= dx}
    wy = {i - dy: s for i, s in y.word if i >= dy}
    return wx == wy


def confluent(x: TreeVertex, y: TreeVertex) -> TreeVertex:
    """Maximal common ancestor: the deepest level where the shifted words agree."""
    level = min(x.hor, y.hor)
    floor = min(x.hor - x.support_depth(), y.hor - y.support_depth())
    while level > floor and not _levels_match(x, y, level):
        level -= 1
    return ancestor(x, x.hor - level)


def up_pair(x: TreeVertex, y: TreeVertex) -> tuple:
    """(up(x, y), up(y, x)) computed from a single confluent."""
    c = confluent(x, y)
    return x.hor - c.hor, y.hor - c.hor


def up(x: TreeVertex, y: TreeVertex) -> int:
    return x.hor - confluent(x, y).hor


def distance(x: TreeVertex, y: TreeVertex) -> int:
    a, b = up_pair(x, y)
    return a + b


def cone_count(q: int, k: int, r: int) -> int:
    """|T_{k,r}(x)|: vertices reached by k upward then r downward branching steps.

    Independent of x: 1 if r = 0, q**r if k = 0, else (q-1) * q**(r-1).
    Validated against full enumeration in the tests before use elsewhere.
    """
    _check_branching(q)
    if k < 0 or r < 0:
        raise ValueError(f"cone indices must be >= 0, got k={k}, r={r}")
    if r == 0:
        return 1
    if k == 0:
        return q**r
    return (q - 1) * q ** (r - 1)


@dataclass(frozen=True)
class ConeSpec:
    """The vertex set T_{k,r}(base) = { y : up(base, y) = k, up(y, base) = r }."""

    base: TreeVertex
    k: int
    r: int

    def __post_init__(self):
        if self.k < 0 or self.r < 0:
            raise ValueError("cone parameters k, r must be >= 0")


def enumerate_cone(spec: ConeSpec, q: int) -> list:
    """All members of T_{k,r}(base), in symbol-lexicographic order."""
    _check_branching(q)
    top = ancestor(spec.base, spec.k)
    if spec.r == 0:
        return [top]
    if spec.k >= 1:
        # first downward step must avoid the branch leading back to base
        avoid = spec.base.symbol(spec.k - 1)
        first = [s for s in range(q) if s != avoid]
    else:
        first = list(range(q))
    out = []
    for s0 in first:
        head = successor(top, s0)
        for rest in product(range(q), repeat=spec.r - 1):
            out.append(descend(head, rest))
    return out


def ball(center: TreeVertex, radius: int, q: int) -> list:
    """All vertices within graph distance `radius` of center (BFS order)."""
    seen = {center}
    frontier = [center]
    out = [center]
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for w in neighbors(v, q):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    out.append(w)
        frontier = nxt
    return out


@dataclass(frozen=True)
class BoundaryPoint:
    """An end of T_q other than omega: a finite anchor plus canonical zero continuation."""

    anchor: TreeVertex

    def to_json(self) -> dict:
        return {"anchor": self.anchor.to_json()}

    @staticmethod
    def from_json(obj, q: int | None = None) -> "BoundaryPoint":
        if not isinstance(obj, dict) or "anchor" not in obj:
            raise ValueError("boundary point JSON must be an object with an 'anchor' field")
        return BoundaryPoint(TreeVertex.from_json(obj["anchor"], q))


def boundary_through(v: TreeVertex) -> BoundaryPoint:
    return BoundaryPoint(v)


def geodesic_toward(xi: BoundaryPoint, n: int) -> TreeVertex:
    """The ray vertex n levels below the anchor on the geodesic from omega to xi."""
    if n < 0:
        raise ValueError("depth n must be >= 0")
    a = xi.anchor
    return TreeVertex(a.hor + n, tuple((i + n, s) for i, s in a.word))


def up_to_boundary(x: TreeVertex, xi: BoundaryPoint) -> int:
    """up(x, xi) = hor(x) - hor(x ^ xi), exact only while the confluent sits at or
    above the anchor; otherwise the value would hinge on the canonical continuation
    and InsufficientDepth is raised."""
    a = xi.anchor
    # deep enough that the confluent with the ray has stabilized
    y = geodesic_toward(xi, max(0, x.hor - a.hor) + 2)
    c = confluent(x, y)
    if c.hor > a.hor:
        raise InsufficientDepth(
            f"confluent at horocycle {c.hor} lies below the anchor (horocycle {a.hor})"
        )
    return x.hor - c.hor
