"""The lattice-path engine.

Mikhalkin's correspondence for points in Mikhalkin position: order the
reduced points by the injective functional lambda(x, y) = x - epsilon*y.
Curves through the configuration correspond to lambda-increasing lattice
paths from the lambda-minimal vertex p of the Newton polygon to the
lambda-maximal vertex q, one marked step per reduced point, together with
a recursive division of the two regions between the path and the boundary
chains into triangles (curve vertices) and parallelograms (crossings).

Division of one side: repeatedly take the lambda-smallest corner denting
into the region and either (i) cut the triangle formed with its
neighbours, or (ii) jump to the fourth parallelogram point when it lies
in the polygon.  A branch terminates successfully when the region between
the current path and the boundary chain has zero area, and dies if
corners run out earlier.

Interior conjugate pairs (reduced double points) enter in two modes:

* mode E: their step has even lattice length, so the dual marked edge is
  even (a bounded edge or a weight-2 end);
* mode V: they occupy two consecutive steps forming a nondegenerate
  triangle -- the dual marked vertex.  The middle point is pre-cut: the
  first division move at that corner is forced to cut exactly this
  triangle, with no parallelogram alternative.

The mode-V step bookkeeping is validated against the brute-force oracle
and the invariance suite rather than taken on faith; see the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..lattice import LatticePolygon, add, cross, lattice_length, sub
from ..qpoly import QPoly, qproduct_to_poly
from ..tropcurve import (
    Cell,
    PlaneTropicalCurve,
    complex_weight,
    curve_from_subdivision,
    check_vanishing_conditions,
    mixed_marked_weight,
    parity_split,
    real_signed_weight,
    refined_weight,
)
from . import (
    BoundaryPair,
    BoundaryTangency,
    DimensionMismatch,
    EngineError,
    EnumerationResult,
    InteriorPair,
    InteriorSimple,
    MikhalkinConfig,
    fixed_end_weight,
    is_interior,
)

Vec = Tuple[int, int]


def lam_key(p: Vec) -> Tuple[int, int]:
    """Sort key realizing lambda = x - epsilon*y for all small epsilon > 0."""
    return (p[0], -p[1])


def _chains(polygon: LatticePolygon) -> Tuple[Vec, Vec, Tuple[Vec, ...], Tuple[Vec, ...]]:
    """(p, q, cw_chain, ccw_chain): boundary chains from p to q.

    Corners where the path turns left (positive cross) dent toward the
    region bounded by the clockwise chain.
    """
    verts = polygon.vertices
    n = len(verts)
    ip = min(range(n), key=lambda i: lam_key(verts[i]))
    iq = max(range(n), key=lambda i: lam_key(verts[i]))
    ccw = [verts[ip]]
    i = ip
    while i != iq:
        i = (i + 1) % n
        ccw.append(verts[i])
    cw = [verts[ip]]
    i = ip
    while i != iq:
        i = (i - 1) % n
        cw.append(verts[i])
    return verts[ip], verts[iq], tuple(cw), tuple(ccw)


def enumerate_paths(polygon: LatticePolygon, steps: int) -> Iterator[Tuple[Vec, ...]]:
    """All lambda-increasing lattice paths from p to q with ``steps`` steps."""
    if steps < 1:
        raise EngineError("need at least one step")
    pts = sorted(polygon.lattice_points(), key=lam_key)
    p, q, _, _ = _chains(polygon)
    order = {pt: i for i, pt in enumerate(pts)}

    def extend(path: List[Vec], remaining: int) -> Iterator[Tuple[Vec, ...]]:
        cur = path[-1]
        if remaining == 0:
            if cur == q:
                yield tuple(path)
            return
        for nxt in pts[order[cur] + 1 :]:
            path.append(nxt)
            yield from extend(path, remaining - 1)
            path.pop()

    yield from extend([p], steps)


# -- the division -------------------------------------------------------


def _corners(path: Tuple[Vec, ...], sign: int) -> List[int]:
    out = []
    for j in range(1, len(path) - 1):
        c = cross(sub(path[j], path[j - 1]), sub(path[j + 1], path[j]))
        if c * sign > 0:
            out.append(j)
    return out


def _zero_area(path: Tuple[Vec, ...], chain: Tuple[Vec, ...]) -> bool:
    loop = list(path) + list(reversed(chain))[1:-1]
    area2 = sum(cross(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop)))
    return area2 == 0


class _Divider:
    """Memoized one-sided division for a fixed polygon."""

    def __init__(self, polygon: LatticePolygon):
        self.polygon = polygon
        self.p, self.q, self.cw, self.ccw = _chains(polygon)
        self.memo: Dict[Tuple[Tuple[Vec, ...], int], Tuple[Tuple[Cell, ...], ...]] = {}

    def chain(self, sign: int) -> Tuple[Vec, ...]:
        return self.cw if sign > 0 else self.ccw

    def divide(
        self,
        path: Tuple[Vec, ...],
        sign: int,
        forced: Dict[Vec, Tuple[int, Tuple[Vec, Vec, Vec]]] = {},
    ) -> Tuple[Tuple[Cell, ...], ...]:
        """All tilings of the region between ``path`` and its ``sign`` chain.

        ``forced`` maps pre-cut corner points to (dent sign, expected
        triangle); such corners are pivoted first, cut-only.
        """
        pending = [
            j
            for j in _corners(path, sign)
            if path[j] in forced and forced[path[j]][0] == sign
        ]
        if pending:
            j = min(pending, key=lambda j: lam_key(path[j]))
            tri = (path[j - 1], path[j], path[j + 1])
            if tuple(sorted(tri)) != tuple(sorted(forced[path[j]][1])):
                return ()
            rest = {k: v for k, v in forced.items() if k != path[j]}
            shorter = path[:j] + path[j + 1 :]
            return tuple(
                tiling + (Cell("tri", tri),)
                for tiling in self.divide(shorter, sign, rest)
            )
        return self._standard(path, sign)

    def _standard(self, path: Tuple[Vec, ...], sign: int) -> Tuple[Tuple[Cell, ...], ...]:
        key = (path, sign)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        corners = _corners(path, sign)
        if not corners:
            result: Tuple[Tuple[Cell, ...], ...]
            result = ((),) if _zero_area(path, self.chain(sign)) else ()
        else:
            j = min(corners, key=lambda j: lam_key(path[j]))
            a, b, c = path[j - 1], path[j], path[j + 1]
            out: List[Tuple[Cell, ...]] = []
            shorter = path[:j] + path[j + 1 :]
            for tiling in self._standard(shorter, sign):
                out.append(tiling + (Cell("tri", (a, b, c)),))
            v = sub(add(a, c), b)
            if self.polygon.contains(v):
                jumped = path[:j] + (v,) + path[j + 1 :]
                for tiling in self._standard(jumped, sign):
                    out.append(tiling + (Cell("par", (a, b, c, v)),))
            result = tuple(out)
        self.memo[key] = result
        return result


def divide_path(
    path: Sequence[Vec], polygon: LatticePolygon
) -> List[Tuple[Cell, ...]]:
    """All full tilings produced by dividing ``path`` on both sides."""
    divider = _Divider(polygon)
    path = tuple(path)
    out = []
    for up in divider.divide(path, +1):
        for down in divider.divide(path, -1):
            out.append(up + down)
    return out


# -- condition-driven path construction ----------------------------------


@dataclass(frozen=True)
class _MarkedPath:
    path: Tuple[Vec, ...]
    # per original condition index: ("edge", (a, b)) or ("vertex", (a, b, c))
    marks: Tuple[Tuple[str, tuple], ...]
    forced: Tuple[Tuple[Vec, Tuple[int, Tuple[Vec, Vec, Vec]]], ...]


def _effective_order(config: MikhalkinConfig) -> List[Tuple[int, object]]:
    """Reduced conditions in path order: boundary conditions whose fixed
    direction has negative lambda come first, positive lambda last."""
    eps = config.epsilon
    starts, mids, ends = [], [], []
    for i, c in enumerate(config.conditions):
        if is_interior(c):
            mids.append((i, c))
            continue
        normal = config.polygon.outer_normal(c.side)
        lam_u = normal[0] - eps * normal[1]
        (starts if lam_u < 0 else ends).append((i, c))
    return starts + mids + ends


def _marked_paths(config: MikhalkinConfig) -> Iterator[_MarkedPath]:
    polygon = config.polygon
    pts = sorted(polygon.lattice_points(), key=lam_key)
    order_of = {pt: i for i, pt in enumerate(pts)}
    p, q, _, _ = _chains(polygon)
    conds = _effective_order(config)
    n = len(conds)
    marks: List[Optional[Tuple[str, tuple]]] = [None] * len(config.conditions)
    forced: List[Tuple[Vec, Tuple[int, Tuple[Vec, Vec, Vec]]]] = []

    def on_side(a: Vec, b: Vec, side: int) -> bool:
        return polygon.side_of(a, b) == side

    def emit(path: List[Vec]) -> _MarkedPath:
        return _MarkedPath(tuple(path), tuple(marks), tuple(forced))

    def extend(path: List[Vec], ci: int) -> Iterator[_MarkedPath]:
        cur = path[-1]
        if ci == n:
            if cur == q:
                yield emit(path)
            return
        orig_idx, cond = conds[ci]
        later = pts[order_of[cur] + 1 :]
        if isinstance(cond, InteriorSimple):
            for nxt in later:
                marks[orig_idx] = ("edge", (cur, nxt))
                path.append(nxt)
                yield from extend(path, ci + 1)
                path.pop()
            marks[orig_idx] = None
        elif isinstance(cond, InteriorPair):
            # mode E: one even step
            for nxt in later:
                if lattice_length(sub(nxt, cur)) % 2 == 0:
                    marks[orig_idx] = ("edge", (cur, nxt))
                    path.append(nxt)
                    yield from extend(path, ci + 1)
                    path.pop()
            # mode V: two steps through a pre-cut triangle
            for mid in later:
                for nxt in pts[order_of[mid] + 1 :]:
                    tri = (cur, mid, nxt)
                    dent = cross(sub(mid, cur), sub(nxt, mid))
                    if dent == 0:
                        continue
                    marks[orig_idx] = ("vertex", tri)
                    forced.append((mid, (1 if dent > 0 else -1, tri)))
                    path.append(mid)
                    path.append(nxt)
                    yield from extend(path, ci + 1)
                    path.pop()
                    path.pop()
                    forced.pop()
            marks[orig_idx] = None
        else:
            m = fixed_end_weight(cond)
            for nxt in later:
                if lattice_length(sub(nxt, cur)) == m and on_side(cur, nxt, cond.side):
                    marks[orig_idx] = ("edge", (cur, nxt))
                    path.append(nxt)
                    yield from extend(path, ci + 1)
                    path.pop()
            marks[orig_idx] = None

    yield from extend([p], 0)


# -- assembly and filtering ----------------------------------------------


def enumerate_curves(config: MikhalkinConfig, scheme: str = "complex") -> EnumerationResult:
    """All curves through the configuration that the scheme counts.

    Schemes "complex"/"refined"/"real" keep connected curves of the right
    genus whose unmarked ends all have weight 1; "mixed" keeps connected
    curves satisfying the vanishing conditions.
    """
    config.validate()
    polygon = config.polygon
    divider = _Divider(polygon)
    pair_conds = config.pair_indices()
    boundary_conds = [i for i, c in enumerate(config.conditions) if not is_interior(c)]
    seen = set()
    result = EnumerationResult()

    for mp in _marked_paths(config):
        forced = dict(mp.forced)
        ups = divider.divide(mp.path, +1, forced)
        if not ups:
            continue
        downs = divider.divide(mp.path, -1, forced)
        if not downs:
            continue
        for up in ups:
            for down in downs:
                cells = up + down
                curve = _build_curve(polygon, cells, mp.marks)
                if curve is None:
                    continue
                if not _passes(curve, config, scheme, pair_conds, boundary_conds):
                    continue
                key = (
                    curve.subdivision.canonical_key(),
                    tuple(sorted((k, tuple(sorted(map(tuple, s))) if k == "edge" else tuple(sorted(s))) for k, s in mp.marks)),
                )
                if key in seen:
                    continue
                seen.add(key)
                result.curves.append(curve)
    result.curves.sort(key=lambda c: c.subdivision.canonical_key())
    return result


def _build_curve(polygon, cells, marks) -> Optional[PlaneTropicalCurve]:
    markings = []
    cell_list = list(cells)
    for kind, ref in marks:
        if kind == "edge":
            markings.append(("edge", ref))
        else:
            tri = tuple(sorted(ref))
            idx = next(
                (
                    i
                    for i, c in enumerate(cell_list)
                    if c.kind == "tri" and tuple(sorted(c.points)) == tri
                ),
                None,
            )
            if idx is None:
                return None
            markings.append(("vertex", idx))
    return curve_from_subdivision(polygon, cell_list, markings)


def _passes(curve, config, scheme, pair_conds, boundary_conds) -> bool:
    if not curve.is_connected():
        return False
    if scheme == "mixed":
        return check_vanishing_conditions(curve, config.genus, pair_conds).ok
    if curve.genus() != config.genus:
        return False
    marked_edges = {ref for kind, ref in curve.markings if kind == "edge"}
    fixed = {curve.markings[i][1] for i in boundary_conds}
    for i, e in curve.ends():
        if e.weight > 1 and i not in fixed:
            if i not in marked_edges:
                return False
            # an interior mark on a heavy end changes the genus; already
            # excluded above, but keep the guard explicit
            return False
    return True


def fixed_end_indices(curve: PlaneTropicalCurve, config: MikhalkinConfig) -> List[int]:
    return [
        curve.markings[i][1]
        for i, c in enumerate(config.conditions)
        if not is_interior(c)
    ]


def count(config: MikhalkinConfig, scheme: str):
    """Sum the per-curve weights of the scheme over the enumeration.

    Returns (value, curves): value is a Fraction for "complex", "real"
    and "mixed", a QPoly for "refined".
    """
    curves = enumerate_curves(config, scheme)
    if scheme == "complex":
        return sum((complex_weight(c) for c in curves), Fraction(0)), curves
    if scheme == "refined":
        total = QPoly.zero
        for c in curves:
            total = total + qproduct_to_poly(
                refined_weight(c, fixed_end_indices(c, config))
            )
        return total, curves
    if scheme == "real":
        return (
            sum((real_signed_weight(c, parity_split(c)) for c in curves), Fraction(0)),
            curves,
        )
    if scheme == "mixed":
        return (
            sum(
                (
                    mixed_marked_weight(c, config.genus, config.pair_indices())
                    for c in curves
                ),
                Fraction(0),
            ),
            curves,
        )
    raise EngineError(f"unknown scheme {scheme!r}")
