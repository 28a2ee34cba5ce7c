"""Combinatorial plane tropical curves and their per-curve weights.

A curve is a weighted balanced graph: trivalent vertices (dual to lattice
triangles), bounded edges, and unbounded ends whose outgoing primitive
directions form the degree.  Positions are optional; every weight below is
purely combinatorial.

Weights implemented here:

* complex weight            prod mu(V) / prod wt(end)
* refined weight            prod [mu(V)] / prod [wt(end)]   (a QProduct)
* signed real weight        parity-split formula with (-1)^Int(V) signs
* mixed marked weight       signed real weight with an extra mu(V) per
                            marked vertex, gated by five vanishing
                            conditions

The parity split divides edges into odd and even weight; the components K
of the even subgraph govern vanishing.  chi(K) counts finite vertices
minus bounded even edges -- ends are half-open and contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .lattice import (
    LatticePolygon,
    add,
    cross,
    lattice_length,
    primitive,
    sub,
    triangle_multiplicity,
)
from .qpoly import QProduct, eval_y1, limit_yneg1


class CurveError(ValueError):
    pass


class NotTrivalent(CurveError):
    pass


class FlatVertex(CurveError):
    pass


class EmptyRealPart(CurveError):
    pass


class UnfixedEndWeight(CurveError):
    pass


class VanishingConditionsUnmet(CurveError):
    pass


Vec = Tuple[int, int]
# marking: ("edge", edge_index) or ("vertex", vertex_id), one per condition
Mark = Tuple[str, int]


@dataclass(frozen=True)
class Edge:
    """u -> v with primitive direction and positive weight; v is None for ends.

    For bounded edges the direction points from u to v.  For ends it points
    outward.  An edge with u = None too is a free line (both tails
    unbounded); those only appear transiently inside the engines.
    """

    u: Optional[int]
    v: Optional[int]
    weight: int
    direction: Vec

    @property
    def is_end(self) -> bool:
        return self.v is None

    @property
    def is_even(self) -> bool:
        return self.weight % 2 == 0


@dataclass(frozen=True)
class Cell:
    """Dual subdivision cell: a triangle or a parallelogram (a crossing)."""

    kind: str  # "tri" | "par"
    points: Tuple[Vec, ...]

    def sides(self) -> List[Tuple[Vec, Vec]]:
        n = len(self.points)
        return [(self.points[i], self.points[(i + 1) % n]) for i in range(n)]

    def twice_area(self) -> int:
        pts = self.points
        return abs(
            sum(cross(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))
        )


@dataclass(frozen=True)
class DualSubdivision:
    polygon: LatticePolygon
    cells: Tuple[Cell, ...]
    # vertex_cell[i] = index into cells of the triangle dual to curve vertex i
    vertex_cell: Tuple[int, ...] = ()

    def canonical_key(self):
        return tuple(sorted((c.kind, tuple(sorted(c.points))) for c in self.cells))


class PlaneTropicalCurve:
    """Immutable combinatorial curve with optional positions and dual cells."""

    def __init__(
        self,
        num_vertices: int,
        edges: Sequence[Edge],
        markings: Sequence[Mark] = (),
        positions: Optional[Dict[int, Tuple[Fraction, Fraction]]] = None,
        subdivision: Optional[DualSubdivision] = None,
    ):
        self.num_vertices = num_vertices
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.markings: Tuple[Mark, ...] = tuple(markings)
        self.positions = dict(positions) if positions else None
        self.subdivision = subdivision
        self._germs: Optional[List[List[Tuple[int, Vec, int]]]] = None

    # -- basic structure ------------------------------------------------

    def germs(self) -> List[List[Tuple[int, Vec, int]]]:
        """Per vertex: list of (edge_index, outgoing direction, weight)."""
        if self._germs is None:
            g: List[List[Tuple[int, Vec, int]]] = [[] for _ in range(self.num_vertices)]
            for i, e in enumerate(self.edges):
                if e.u is not None:
                    g[e.u].append((i, e.direction, e.weight))
                if e.v is not None:
                    g[e.v].append((i, (-e.direction[0], -e.direction[1]), e.weight))
            self._germs = g
        return self._germs

    def is_balanced(self) -> bool:
        for germs in self.germs():
            sx = sum(d[0] * w for _, d, w in germs)
            sy = sum(d[1] * w for _, d, w in germs)
            if sx or sy:
                return False
        return True

    def is_trivalent(self) -> bool:
        return all(len(g) == 3 for g in self.germs())

    def has_flat_vertex(self) -> bool:
        for germs in self.germs():
            if len(germs) >= 2:
                d0 = germs[0][1]
                if all(cross(d0, d) == 0 for _, d, _ in germs[1:]):
                    return True
        return False

    def ends(self) -> List[Tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if e.is_end]

    def bounded(self) -> List[Tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if not e.is_end and e.u is not None]

    def num_components(self) -> int:
        parent = list(range(self.num_vertices))
        extra = 0

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            if e.u is None:
                extra += 1  # free line
            elif e.v is not None:
                ru, rv = find(e.u), find(e.v)
                if ru != rv:
                    parent[ru] = rv
        roots = {find(v) for v in range(self.num_vertices)}
        return len(roots) + extra

    def is_connected(self) -> bool:
        return self.num_components() == 1

    def genus(self) -> int:
        """First Betti number of the graph (meaningful when connected)."""
        eb = len(self.bounded())
        return eb - self.num_vertices + self.num_components()

    def degree(self) -> List[Tuple[Vec, int]]:
        return sorted((e.direction, e.weight) for e in self.edges if e.is_end)

    def newton_polygon(self) -> LatticePolygon:
        """Assemble the polygon induced by the degree (up to translation)."""
        import math

        by_dir: Dict[Vec, int] = {}
        for e in self.edges:
            if e.is_end:
                d = e.direction
                side = (-d[1], d[0])
                by_dir[side] = by_dir.get(side, 0) + e.weight
        vecs = sorted(
            ((d[0] * w, d[1] * w) for d, w in by_dir.items()),
            key=lambda v: math.atan2(v[1], v[0]),
        )
        pts = [(0, 0)]
        for v in vecs[:-1]:
            pts.append(add(pts[-1], v))
        return LatticePolygon(pts)

    def mu(self, vertex: int) -> int:
        germs = self.germs()[vertex]
        if len(germs) != 3:
            raise NotTrivalent(f"vertex {vertex} has valence {len(germs)}")
        (_, d1, w1), (_, d2, w2) = germs[0], germs[1]
        m = abs(cross((d1[0] * w1, d1[1] * w1), (d2[0] * w2, d2[1] * w2)))
        if m == 0:
            raise FlatVertex(f"vertex {vertex} is flat")
        return m

    def interior_points_of_vertex(self, vertex: int) -> int:
        """Int(V): interior lattice points of the dual triangle, via Pick."""
        germs = self.germs()[vertex]
        if len(germs) != 3:
            raise NotTrivalent(f"vertex {vertex} has valence {len(germs)}")
        m = self.mu(vertex)
        b = sum(w for _, _, w in germs)
        return (m - b + 2) // 2

    # -- marked structure ------------------------------------------------

    def marks_on_edge(self, edge_index: int) -> List[int]:
        return [i for i, (kind, ref) in enumerate(self.markings) if kind == "edge" and ref == edge_index]

    def marked_vertices(self) -> List[int]:
        return [ref for kind, ref in self.markings if kind == "vertex"]

    def serialize(self) -> dict:
        return {
            "num_vertices": self.num_vertices,
            "edges": [
                {"u": e.u, "v": e.v, "weight": e.weight, "direction": list(e.direction)}
                for e in self.edges
            ],
            "markings": [list(m) for m in self.markings],
        }


# -- validation ---------------------------------------------------------


@dataclass
class ValidationReport:
    balanced: bool
    trivalent: bool
    flat_vertices: bool
    regular: bool
    regularity_reason: str = ""
    # germ orientation: (vertex, edge_index) -> +1 outgoing / -1 incoming,
    # only filled when regular
    orientation: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.balanced and self.trivalent and not self.flat_vertices and self.regular


def _marked_pieces(curve: PlaneTropicalCurve):
    """Split the curve at its markings.

    Returns (nodes, pieces, tails): nodes are unmarked vertices ("v", id)
    and mark points ("m", cond); pieces are (node_a, node_b, edge_index)
    with None for a dangling side; tails are pieces with one side
    unbounded.  Marked vertices disconnect their germs.
    """
    marked_v = set(curve.marked_vertices())
    pieces = []
    for i, e in enumerate(curve.edges):
        marks = curve.marks_on_edge(i)
        endpoints: List = []
        if e.u is not None:
            endpoints.append(("v", e.u) if e.u not in marked_v else None)
        else:
            endpoints.append("inf")
        chain = [endpoints[0]] + [("m", c) for c in marks]
        if e.v is not None:
            chain.append(("v", e.v) if e.v not in marked_v else None)
        else:
            chain.append("inf")
        for a, b in zip(chain, chain[1:]):
            pieces.append((a, b, i))
    return pieces


def _regularity(curve: PlaneTropicalCurve):
    """Check regularity and build the regular orientation on germs.

    Regular: every component of the curve minus its marked points is a
    tree with exactly one unbounded end.  The regular orientation then
    points every piece toward its component's end.
    """
    pieces = _marked_pieces(curve)
    marked_v = set(curve.marked_vertices())

    def is_v(n):
        return isinstance(n, tuple) and n[0] == "v"

    nodes = sorted({n for a, b, _ in pieces for n in (a, b) if is_v(n)})
    idx = {n: i for i, n in enumerate(nodes)}
    parent = list(range(len(nodes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    vv_pieces = [(a, b, i) for a, b, i in pieces if is_v(a) and is_v(b)]
    for a, b, _ in vv_pieces:
        ra, rb = find(idx[a]), find(idx[b])
        if ra != rb:
            parent[ra] = rb

    comp_nodes: Dict[int, int] = {}
    for n in nodes:
        r = find(idx[n])
        comp_nodes[r] = comp_nodes.get(r, 0) + 1
    comp_edges: Dict[int, int] = {}
    for a, b, _ in vv_pieces:
        r = find(idx[a])
        comp_edges[r] = comp_edges.get(r, 0) + 1
    comp_tails: Dict[int, int] = {}
    floating = 0
    for a, b, i in pieces:
        if is_v(a) or is_v(b):
            if a == "inf" or b == "inf":
                r = find(idx[a if is_v(a) else b])
                comp_tails[r] = comp_tails.get(r, 0) + 1
        else:
            # no vertex on either side: only a tail past a mark is fine
            cut_sides = sum(1 for n in (a, b) if n != "inf")
            if cut_sides != 1:
                floating += 1

    if floating:
        return False, "a component without vertices has zero or two unbounded ends", {}
    for r in comp_nodes:
        if comp_edges.get(r, 0) >= comp_nodes[r]:
            return False, "a marked component contains a cycle", {}
        if comp_tails.get(r, 0) != 1:
            return False, "a marked component does not have exactly one unmarked end", {}

    # orientation: point every piece toward its component's unbounded end
    adjacency: Dict[Tuple[str, int], List[Tuple[Tuple[str, int], int]]] = {}
    for a, b, i in vv_pieces:
        adjacency.setdefault(a, []).append((b, i))
        adjacency.setdefault(b, []).append((a, i))

    orientation: Dict[Tuple[int, int], int] = {}
    for a, b, i in pieces:
        if (a == "inf" or b == "inf") and (is_v(a) or is_v(b)):
            tail_node = a if is_v(a) else b
            orientation[(tail_node[1], i)] = +1
            stack = [tail_node]
            seen = {tail_node}
            while stack:
                n = stack.pop()
                for nb, edge_idx in adjacency.get(n, ()):
                    if nb in seen:
                        continue
                    seen.add(nb)
                    orientation[(nb[1], edge_idx)] = +1
                    orientation[(n[1], edge_idx)] = -1
                    stack.append(nb)
    # leftovers: germs whose piece is cut by a mark before the next vertex
    for v in range(curve.num_vertices):
        for i, _, _ in curve.germs()[v]:
            if (v, i) not in orientation:
                # outgoing at a marked vertex, incoming stub otherwise
                orientation[(v, i)] = +1 if v in marked_v else -1
    return True, "", orientation


def validate(curve: PlaneTropicalCurve) -> ValidationReport:
    balanced = curve.is_balanced()
    trivalent = curve.is_trivalent()
    flat = curve.has_flat_vertex()
    regular, reason, orientation = _regularity(curve)
    return ValidationReport(balanced, trivalent, flat, regular, reason, orientation)


def moduli_dim(num_ends: int, genus: int, num_interior_conditions: int) -> int:
    """Dimension of the moduli cell: |Delta| + g - 1 + #{interior conditions}."""
    return num_ends + genus - 1 + num_interior_conditions


# -- parity split -------------------------------------------------------


@dataclass(frozen=True)
class EvenComponent:
    vertices: FrozenSet[int]
    bounded_edges: FrozenSet[int]
    end_edges: FrozenSet[int]
    chi: int
    re_contacts: int


@dataclass(frozen=True)
class ParitySplit:
    even_components: Tuple[EvenComponent, ...]
    re_vertices: FrozenSet[int]   # vertices with at least one odd germ
    im_vertices: FrozenSet[int]   # vertices with at least one even germ

    @property
    def has_even_part(self) -> bool:
        return bool(self.im_vertices) or bool(self.even_components)


def parity_split(curve: PlaneTropicalCurve) -> ParitySplit:
    re_v = set()
    im_v = set()
    for v in range(curve.num_vertices):
        for _, _, w in curve.germs()[v]:
            (im_v if w % 2 == 0 else re_v).add(v)

    parent: Dict[int, int] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    even_edges = [(i, e) for i, e in enumerate(curve.edges) if e.is_even]
    for i, e in even_edges:
        if e.u is not None:
            union(("v", e.u), ("e", i))
        if e.v is not None:
            union(("v", e.v), ("e", i))

    groups: Dict[int, List] = {}
    for i, e in even_edges:
        groups.setdefault(find(("e", i)), []).append((i, e))
    comps = []
    for members in groups.values():
        vs = set()
        bnd = set()
        ends = set()
        for i, e in members:
            if e.is_end:
                ends.add(i)
            else:
                bnd.add(i)
            for x in (e.u, e.v):
                if x is not None:
                    vs.add(x)
        chi = len(vs) - len(bnd)  # ends are half-open: no contribution
        re_contacts = sum(1 for v in vs if v in re_v)
        comps.append(
            EvenComponent(frozenset(vs), frozenset(bnd), frozenset(ends), chi, re_contacts)
        )
    comps.sort(key=lambda c: sorted(c.vertices))
    return ParitySplit(tuple(comps), frozenset(re_v), frozenset(im_v))


def even_part_vanishes(split: ParitySplit) -> bool:
    """True when some even component forces the signed count to zero."""
    return any(k.chi != 1 or k.re_contacts != 1 for k in split.even_components)


# -- weights ------------------------------------------------------------


def complex_weight(curve: PlaneTropicalCurve) -> Fraction:
    """prod mu(V) / prod wt(E) over ends (the complex per-curve count)."""
    if not curve.is_trivalent():
        raise NotTrivalent("complex weight needs a trivalent curve")
    w = Fraction(1)
    for v in range(curve.num_vertices):
        w *= curve.mu(v)
    for _, e in curve.ends():
        w /= e.weight
    return w


def refined_weight(curve: PlaneTropicalCurve, fixed_ends: Sequence[int] = ()) -> QProduct:
    """prod [mu(V)] / prod [wt(E)] over ends, as an unexpanded QProduct.

    ``fixed_ends`` lists edge indices of ends pinned by boundary
    conditions; all other ends must have weight 1.
    """
    if not curve.is_trivalent():
        raise NotTrivalent("refined weight needs a trivalent curve")
    fixed = set(fixed_ends)
    num = []
    den = []
    for v in range(curve.num_vertices):
        num.append(curve.mu(v))
    for i, e in curve.ends():
        if e.weight > 1 and i not in fixed:
            raise UnfixedEndWeight(f"unfixed end {i} has weight {e.weight}")
        den.append(e.weight)
    return QProduct(1, num, den)


def real_signed_weight(curve: PlaneTropicalCurve, split: Optional[ParitySplit] = None) -> Fraction:
    """Signed weight of the quotient curve for peripheral conjugate pairs.

    Zero when some even component K has chi(K) != 1 or more than one
    contact with the odd part; otherwise
    prod_{re} (-1)^Int(V) * prod_{im} mu(V)/2 * prod_{im-only} (-1)^(mu/4).
    """
    if not curve.is_trivalent():
        raise NotTrivalent("signed weight needs a trivalent curve")
    if split is None:
        split = parity_split(curve)
    if not split.re_vertices:
        raise EmptyRealPart("no odd edges: the signed formula does not apply")
    if even_part_vanishes(split):
        return Fraction(0)
    w = Fraction(1)
    for v in range(curve.num_vertices):
        if v in split.re_vertices:
            w *= (-1) ** curve.interior_points_of_vertex(v)
        if v in split.im_vertices:
            mu = curve.mu(v)
            w *= Fraction(mu, 2)
            if v not in split.re_vertices:
                w *= (-1) ** (mu // 4)
    return w


def yneg1_limit_matches_signed(curve: PlaneTropicalCurve) -> bool:
    """Cross-formula check: limit of the refined weight vs the signed weight."""
    split = parity_split(curve)
    lhs = limit_yneg1(refined_weight(curve))
    rhs = real_signed_weight(curve, split)
    return lhs == rhs


@dataclass
class VanishingReport:
    ok: bool
    reasons: List[str] = field(default_factory=list)


def check_vanishing_conditions(
    curve: PlaneTropicalCurve,
    genus: int,
    pair_conditions: Sequence[int],
) -> VanishingReport:
    """The five conditions under which a mixed signed count can be nonzero.

    ``pair_conditions`` lists the condition indices that are interior
    conjugate pairs (multiplicity-2 reduced points); all other markings
    are treated as multiplicity 1.
    """
    reasons: List[str] = []
    split = parity_split(curve)
    report = validate(curve)

    # (5) trivalent + regular + local parity/orientation restrictions
    if not report.trivalent:
        reasons.append("(5) curve is not trivalent")
    if not report.balanced:
        reasons.append("(5) curve is not balanced")
    if report.trivalent and report.balanced and not report.regular:
        reasons.append(f"(5) curve is not regular: {report.regularity_reason}")
    if report.ok:
        for v in range(curve.num_vertices):
            germs = curve.germs()[v]
            evens = [w for _, _, w in germs if w % 2 == 0]
            if len(evens) == 2:
                reasons.append(f"(5) vertex {v} has exactly 2 adjacent even edges")
            inc_odd = sum(
                1
                for i, _, w in germs
                if w % 2 == 1 and report.orientation.get((v, i)) == -1
            )
            out_even = sum(
                1
                for i, _, w in germs
                if w % 2 == 0 and report.orientation.get((v, i)) == +1
            )
            if inc_odd == 2 and out_even == 1:
                reasons.append(
                    f"(5) vertex {v} has 2 incoming odd edges and an outgoing even edge"
                )

    # (1) genus bookkeeping
    if report.trivalent and report.balanced:
        defect = sum(k.re_contacts - k.chi for k in split.even_components)
        if curve.genus() + defect != genus:
            reasons.append(
                f"(1) gen {curve.genus()} + even-part defect {defect} != g = {genus}"
            )

    # (2)/(3) marking positions
    pair_set = set(pair_conditions)
    for cond, (kind, ref) in enumerate(curve.markings):
        if cond in pair_set:
            if kind == "vertex":
                germs = curve.germs()[ref]
                if any(w % 2 == 0 for _, _, w in germs):
                    reasons.append(
                        f"(3) pair condition {cond} sits on a vertex touching the even part"
                    )
            else:
                if curve.edges[ref].weight % 2 == 1:
                    reasons.append(f"(3) pair condition {cond} sits on an odd edge")
        else:
            if kind == "vertex":
                reasons.append(f"(2) simple condition {cond} sits on a vertex")
            elif curve.edges[ref].weight % 2 == 0:
                reasons.append(f"(2) simple condition {cond} sits on an even edge")

    # (4) end weights
    for i, e in curve.ends():
        if e.weight > 2:
            reasons.append(f"(4) end {i} has weight {e.weight} > 2")

    return VanishingReport(not reasons, reasons)


def mixed_marked_weight(
    curve: PlaneTropicalCurve,
    genus: int,
    pair_conditions: Sequence[int],
) -> Fraction:
    """Signed weight with the extra mu(V) factor per marked vertex."""
    report = check_vanishing_conditions(curve, genus, pair_conditions)
    if not report.ok:
        raise VanishingConditionsUnmet("; ".join(report.reasons))
    split = parity_split(curve)
    w = Fraction(1)
    for kind, ref in curve.markings:
        if kind == "vertex":
            w *= curve.mu(ref)
    for v in range(curve.num_vertices):
        if v in split.re_vertices:
            w *= (-1) ** curve.interior_points_of_vertex(v)
        if v in split.im_vertices:
            mu = curve.mu(v)
            w *= Fraction(mu, 2)
            if v not in split.re_vertices:
                w *= (-1) ** (mu // 4)
    return w


def mixed_weight_or_zero(
    curve: PlaneTropicalCurve, genus: int, pair_conditions: Sequence[int]
) -> Fraction:
    report = check_vanishing_conditions(curve, genus, pair_conditions)
    if not report.ok:
        return Fraction(0)
    return mixed_marked_weight(curve, genus, pair_conditions)


# -- dual subdivision ---------------------------------------------------


def rotate90(v: Vec) -> Vec:
    return (-v[1], v[0])


def curve_from_subdivision(
    polygon: LatticePolygon,
    cells: Sequence[Cell],
    markings: Sequence[Tuple[str, object]] = (),
) -> PlaneTropicalCurve:
    """Build the dual curve of a subdivision of ``polygon``.

    ``markings`` entries are ("edge", segment) with segment a pair of
    lattice points that is a side of the subdivision, or ("vertex",
    cell_index) for a marked triangle.

    Triangles become trivalent vertices; parallelograms identify their
    opposite sides so the two dual edges pass through each other.
    """
    cells = list(cells)
    total = sum(c.twice_area() for c in cells)
    if total != polygon.twice_area():
        raise CurveError("cells do not tile the polygon (area mismatch)")

    def seg_key(a: Vec, b: Vec):
        return (a, b) if a <= b else (b, a)

    side_owners: Dict[Tuple[Vec, Vec], List[Tuple[int, int]]] = {}
    for ci, c in enumerate(cells):
        for si, (a, b) in enumerate(c.sides()):
            side_owners.setdefault(seg_key(a, b), []).append((ci, si))

    # face-to-face and boundary accounting
    for seg, owners in side_owners.items():
        a, b = seg
        on_boundary = polygon.side_of(a, b) is not None
        if len(owners) + (1 if on_boundary else 0) != 2:
            raise CurveError(f"side {seg} is shared by {len(owners)} cells")

    # merge sides across parallelograms (opposite sides = one curve edge)
    parent: Dict[Tuple[Vec, Vec], Tuple[Vec, Vec]] = {}

    def find(s):
        parent.setdefault(s, s)
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    def union(s, t):
        parent[find(s)] = find(t)

    for ci, c in enumerate(cells):
        if c.kind == "par":
            sides = c.sides()
            union(seg_key(*sides[0]), seg_key(*sides[2]))
            union(seg_key(*sides[1]), seg_key(*sides[3]))

    tri_of_cell: Dict[int, int] = {}
    n_vertices = 0
    for ci, c in enumerate(cells):
        if c.kind == "tri":
            tri_of_cell[ci] = n_vertices
            n_vertices += 1

    # per merged class: collect terminal attachments (triangle or boundary)
    classes: Dict[Tuple[Vec, Vec], List] = {}
    for seg, owners in side_owners.items():
        root = find(seg)
        lst = classes.setdefault(root, [])
        for ci, si in owners:
            if cells[ci].kind == "tri":
                lst.append(("tri", ci, seg))
        if polygon.side_of(*seg) is not None:
            lst.append(("bnd", None, seg))

    edges: List[Edge] = []
    class_edge: Dict[Tuple[Vec, Vec], int] = {}
    for root, attach in sorted(classes.items()):
        if len(attach) != 2:
            raise CurveError(f"edge class {root} has {len(attach)} attachments")
        (k1, c1, s1), (k2, c2, s2) = attach
        vec = sub(root[1], root[0])
        w = lattice_length(vec)
        d = primitive(rotate90(vec))
        if k1 == "tri" and k2 == "tri":
            # orient from c1: direction points away from c1's cell
            u, v = tri_of_cell[c1], tri_of_cell[c2]
            if _points_into(cells[c1], s1, d):
                d = (-d[0], -d[1])
            edges.append(Edge(u, v, w, d))
        elif k1 == "tri" or k2 == "tri":
            ci = c1 if k1 == "tri" else c2
            si = s1 if k1 == "tri" else s2
            if _points_into(cells[ci], si, d):
                d = (-d[0], -d[1])
            edges.append(Edge(tri_of_cell[ci], None, w, d))
        else:
            # a line with both tails unbounded
            edges.append(Edge(None, None, w, d))
        class_edge[root] = len(edges) - 1

    marks: List[Mark] = []
    for kind, ref in markings:
        if kind == "vertex":
            marks.append(("vertex", tri_of_cell[ref]))
        else:
            a, b = ref
            root = find(seg_key(tuple(a), tuple(b)))
            if root not in class_edge:
                raise CurveError(f"marked segment {ref} is not a subdivision side")
            marks.append(("edge", class_edge[root]))

    vertex_cell = tuple(ci for ci, _ in sorted(tri_of_cell.items(), key=lambda kv: kv[1]))
    sub_obj = DualSubdivision(polygon, tuple(cells), vertex_cell)
    return PlaneTropicalCurve(n_vertices, edges, marks, subdivision=sub_obj)


def _points_into(cell: Cell, seg: Tuple[Vec, Vec], d: Vec) -> bool:
    """True if direction d at side seg points into the cell's interior."""
    cx = sum(p[0] for p in cell.points)
    cy = sum(p[1] for p in cell.points)
    n = len(cell.points)
    mx = seg[0][0] + seg[1][0]
    my = seg[0][1] + seg[1][1]
    # compare d against the vector from the side midpoint to the centroid
    to_center = (cx * 2 - mx * n, cy * 2 - my * n)
    return d[0] * to_center[0] + d[1] * to_center[1] > 0


def dual_subdivision(curve: PlaneTropicalCurve) -> DualSubdivision:
    """Return the stored subdivision or reconstruct one by BFS placement."""
    if curve.subdivision is not None:
        return curve.subdivision
    if curve.has_flat_vertex():
        raise FlatVertex("flat vertices have no dual cell")
    if not curve.is_trivalent():
        raise NotTrivalent("dual subdivision needs a trivalent curve")

    import math

    placed: Dict[int, Tuple[Vec, ...]] = {}
    side_of_germ: Dict[Tuple[int, int], Tuple[Vec, Vec]] = {}

    def place(v: int, target: Optional[Tuple[int, Tuple[Vec, Vec]]]):
        # The triangle dual to v, sides in CCW order: one side per germ,
        # side vector = rotate90(weight * direction), chained by CCW angle.
        germs = sorted(curve.germs()[v], key=lambda g: math.atan2(g[1][1], g[1][0]))
        pts = [(0, 0)]
        for _, d, w in germs[:-1]:
            pts.append(add(pts[-1], rotate90((d[0] * w, d[1] * w))))
        sides = {
            gi: (pts[j], pts[(j + 1) % len(pts)])
            for j, (gi, _, _) in enumerate(germs)
        }
        if target is None:
            offset = (0, 0)
        else:
            gi, (ta, tb) = target
            la, lb = sides[gi]
            offset = sub(ta, la)
            if (add(la, offset), add(lb, offset)) != (ta, tb):
                raise CurveError("inconsistent gluing while placing dual cells")
        placed[v] = tuple(add(p, offset) for p in pts)
        for gi, (a, b) in sides.items():
            side_of_germ[(v, gi)] = (add(a, offset), add(b, offset))

    # BFS over bounded edges; a shared side is traversed oppositely by
    # the neighbouring cell
    place(0, None)
    seen = {0}
    queue = [0]
    while queue:
        v = queue.pop()
        for gi, d, w in curve.germs()[v]:
            e = curve.edges[gi]
            if e.is_end or e.u is None:
                continue
            other = e.v if e.u == v else e.u
            if other in seen:
                continue
            a, b = side_of_germ[(v, gi)]
            place(other, (gi, (b, a)))
            seen.add(other)
            queue.append(other)
    if len(seen) != curve.num_vertices:
        raise CurveError("curve is disconnected; no single dual subdivision")

    cells = [Cell("tri", placed[v]) for v in range(curve.num_vertices)]
    minx = min(p[0] for c in cells for p in c.points)
    miny = min(p[1] for c in cells for p in c.points)
    # translate to the induced Newton polygon anchored at the origin
    cells = [
        Cell("tri", tuple((p[0] - minx, p[1] - miny) for p in c.points)) for c in cells
    ]
    poly = curve.newton_polygon()
    pminx = min(p[0] for p in poly.vertices)
    pminy = min(p[1] for p in poly.vertices)
    poly = LatticePolygon([(p[0] - pminx, p[1] - pminy) for p in poly.vertices])
    total = sum(c.twice_area() for c in cells)
    if total != poly.twice_area():
        raise CurveError("dual cells overlap; positions needed to resolve crossings")
    return DualSubdivision(poly, tuple(cells), tuple(range(curve.num_vertices)))
