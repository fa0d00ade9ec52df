"""The Diestel-Leader graph DL(q,r) and the lamplighter group action for q = r.

A vertex is a lamplighter state (eta, k): a finitely supported configuration
of lamps sitting at edge midpoints of the two-way-infinite path, plus the
walker position k.  Lamp positions m - 1/2 are encoded by the integer m, so
the lamp "strictly left of k" condition reads m <= k.  Lamps left of the
walker hold one of q green states, lamps weakly right hold one of r red
states; state 0 means off in both colors, so dropping zero entries keeps the
encoding canonical.

Equivalently DL(q,r) is the horocyclic product of T_q and T_r: the pair
(pi1(x), pi2(x)) of tree projections satisfies hor(x1) + hor(x2) = 0, and
two DL vertices are adjacent exactly when both projections are adjacent.
The second tree carries negated horocycles, which is why its flag satisfies
fl2 = -hor(x2 ^ y2).

For q = r the graph is a Cayley graph of the wreath product Z_q wr Z with
group law (eta, k)(eta', k') = (eta + T_k eta', k + k'); left translations
act by graph automorphisms fixing both reference ends, and they induce
isometries on each tree factor.

Vertices are immutable values and every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ColorMismatch, HorocycleMismatch
from .tree import BoundaryPoint, TreeVertex, geodesic_toward, up_pair


@dataclass(frozen=True)
class DLVertex:
    """Lamplighter state: lamps is a sorted tuple of (m, state), state != 0."""

    pos: int
    lamps: tuple = ()

    def lamp(self, m: int) -> int:
        for i, s in self.lamps:
            if i == m:
                return s
        return 0

    def to_json(self) -> dict:
        return {"pos": self.pos, "lamps": {str(m): s for m, s in self.lamps}}

    @staticmethod
    def from_json(obj, q: int | None = None, r: int | None = None) -> "DLVertex":
        if not isinstance(obj, dict) or "pos" not in obj:
            raise ValueError("DL vertex JSON must be an object with a 'pos' field")
        pos = int(obj["pos"])
        lamps = {}
        for key, s in obj.get("lamps", {}).items():
            m = int(key)
            limit = q if (q is not None and m <= pos) else r
            if not isinstance(s, int) or s < 0 or (limit is not None and s >= limit):
                raise ValueError(f"lamps.{key!r}: state {s!r} outside alphabet")
            if s:
                lamps[m] = s
        return DLVertex(pos, tuple(sorted(lamps.items())))


ORIGIN = DLVertex(0, ())


def make_dl_vertex(pos: int, lamps) -> DLVertex:
    items = lamps.items() if isinstance(lamps, dict) else lamps
    return DLVertex(pos, tuple(sorted((m, s) for m, s in items if s)))


def validate_vertex(x: DLVertex, q: int, r: int) -> None:
    for m, s in x.lamps:
        limit = q if m <= x.pos else r
        if not 0 <= s < limit:
            raise ValueError(f"lamp at code {m}: state {s} outside alphabet of size {limit}")


def project(x: DLVertex, side: int) -> TreeVertex:
    """pi1(x) = (eta_k^-, k) reading lamps leftward; pi2(x) = (eta_k^+, -k) rightward."""
    _check_side(side)
    if side == 1:
        word = sorted((x.pos - m, s) for m, s in x.lamps if m <= x.pos)
        return TreeVertex(x.pos, tuple(word))
    word = sorted((m - x.pos - 1, s) for m, s in x.lamps if m >= x.pos + 1)
    return TreeVertex(-x.pos, tuple(word))


def compose(x1: TreeVertex, x2: TreeVertex) -> DLVertex:
    """Inverse of the projection pair; requires hor(x1) + hor(x2) = 0."""
    if x1.hor + x2.hor != 0:
        raise HorocycleMismatch(f"hor(x1) + hor(x2) = {x1.hor + x2.hor}, expected 0")
    k = x1.hor
    lamps = [(k - i, s) for i, s in x1.word] + [(k + i + 1, s) for i, s in x2.word]
    return DLVertex(k, tuple(sorted(lamps)))


def _with_lamp(x: DLVertex, m: int, state: int, new_pos: int) -> DLVertex:
    lamps = [(i, s) for i, s in x.lamps if i != m]
    if state:
        lamps.append((m, state))
    return DLVertex(new_pos, tuple(sorted(lamps)))


def neighbors(x: DLVertex, q: int, r: int) -> list:
    """q moves right (lamp at pos+1/2 reset to a green state) and r moves left."""
    out = [_with_lamp(x, x.pos + 1, s, x.pos + 1) for s in range(q)]
    out += [_with_lamp(x, x.pos, s, x.pos - 1) for s in range(r)]
    return out


@dataclass(frozen=True)
class FlagData:
    """Left/right flags of an ordered vertex pair and their increments from pos(x)."""

    fl1: int
    fl2: int
    up1: int
    up2: int


def flags(x: DLVertex, y: DLVertex) -> FlagData:
    """Flags by direct configuration scan.

    A differing lamp at code m (midpoint m - 1/2) forces the walker to visit
    both m-1 and m, so it pushes the left flag down to m-1 and the right flag
    up to m.  Lamps strictly between the two walker positions never move either
    flag, which is what makes the scan color-safe when q != r.
    """
    xl = dict(x.lamps)
    yl = dict(y.lamps)
    diffs = [m for m in set(xl) | set(yl) if xl.get(m, 0) != yl.get(m, 0)]
    fl1 = min([x.pos, y.pos] + [m - 1 for m in diffs])
    fl2 = max([x.pos, y.pos] + [m for m in diffs])
    return FlagData(fl1, fl2, x.pos - fl1, fl2 - x.pos)


def up_quadruple(x: DLVertex, y: DLVertex) -> tuple:
    """(up(x1,y1), up(y1,x1), up(x2,y2), up(y2,x2)) via the tree projections."""
    k1, l1 = up_pair(project(x, 1), project(y, 1))
    k2, l2 = up_pair(project(x, 2), project(y, 2))
    return k1, l1, k2, l2


def dl_distance(x: DLVertex, y: DLVertex) -> int:
    """d(x1,y1) + d(x2,y2) - |hor(x1) - hor(y1)|."""
    k1, l1, k2, l2 = up_quadruple(x, y)
    return (k1 + l1) + (k2 + l2) - abs(x.pos - y.pos)


def _check_side(side: int) -> None:
    if side not in (1, 2):
        raise ValueError(f"side must be 1 or 2, got {side}")


def _check_group(q: int, r: int) -> None:
    if q != r:
        raise ColorMismatch(f"lamplighter group structure needs q = r, got q={q}, r={r}")


def group_multiply(x: DLVertex, y: DLVertex, q: int, r: int) -> DLVertex:
    """(eta, k)(eta', k') = (eta + T_k eta', k + k') in Z_q wr Z; needs q = r."""
    _check_group(q, r)
    lamps = dict(x.lamps)
    for m, s in y.lamps:
        mm = m + x.pos
        v = (lamps.get(mm, 0) + s) % q
        if v:
            lamps[mm] = v
        else:
            lamps.pop(mm, None)
    return DLVertex(x.pos + y.pos, tuple(sorted(lamps.items())))


def group_inverse(x: DLVertex, q: int, r: int) -> DLVertex:
    _check_group(q, r)
    lamps = tuple(sorted((m - x.pos, (-s) % q) for m, s in x.lamps))
    return DLVertex(-x.pos, tuple((m, s) for m, s in lamps if s))


def induced_tree_action(g: DLVertex, v: TreeVertex, side: int, q: int, r: int) -> TreeVertex:
    """The isometry of T_q induced on the side projection by left translation by g.

    Well defined because pi_side(g (x1 x2)) depends on x only through x_side;
    it fixes omega and shifts horocycles by +pos(g) (side 1) or -pos(g) (side 2).
    """
    _check_group(q, r)
    _check_side(side)
    glamps = dict(g.lamps)
    if side == 1:
        # word index i of the image reads the g-lamp at code g.pos + hor(v) - i
        hor = v.hor + g.pos
        indices = {i for i, _ in v.word} | {g.pos + v.hor - m for m in glamps}
        code = lambda i: g.pos + v.hor - i
    else:
        hor = v.hor - g.pos
        indices = {i for i, _ in v.word} | {m - g.pos + v.hor - 1 for m in glamps}
        code = lambda i: g.pos - v.hor + i + 1
    word = {}
    for i in indices:
        if i < 0:
            continue
        s = (v.symbol(i) + glamps.get(code(i), 0)) % q
        if s:
            word[i] = s
    return TreeVertex(hor, tuple(sorted(word.items())))


def act_on_boundary(g: DLVertex, xi: BoundaryPoint, side: int, q: int, r: int) -> BoundaryPoint:
    """Image of a boundary point under the induced tree isometry.

    The anchor is first pushed deep enough that everything below its image is
    again the canonical zero continuation, so the result is exact.
    """
    _check_group(q, r)
    _check_side(side)
    a = xi.anchor
    depth = 0
    if g.lamps:
        if side == 1:
            # appended symbol at level L picks up the g-lamp at code g.pos + L
            max_code = max(m for m, _ in g.lamps)
            depth = max(0, max_code - g.pos - a.hor)
        else:
            min_code = min(m for m, _ in g.lamps)
            depth = max(0, g.pos - min_code - a.hor + 1)
    anchor = induced_tree_action(g, geodesic_toward(xi, depth), side, q, r)
    return BoundaryPoint(anchor)


def dl_ball(center: DLVertex, radius: int, q: int, r: int) -> list:
    """All DL vertices within graph distance `radius` of center (BFS order)."""
    seen = {center}
    frontier = [center]
    out = [center]
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for w in neighbors(v, q, r):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    out.append(w)
        frontier = nxt
    return out
