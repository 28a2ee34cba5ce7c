"""Exact lattice-polygon geometry on Z^2.

Points are plain ``(x, y)`` tuples of ints (or Fractions for curve
positions elsewhere); polygons are stored as canonical counterclockwise
vertex lists.  All counts (boundary points, interior points, triangle
multiplicity) are exact integer computations.
"""

from __future__ import annotations

from math import gcd
from typing import Iterable, List, Sequence, Tuple

Vec = Tuple[int, int]


class LatticeError(ValueError):
    pass


class DegeneratePolygon(LatticeError):
    pass


class DegenerateTriangle(LatticeError):
    pass


def lattice_length(v: Sequence[int]) -> int:
    """gcd(|x|, |y|); zero only for the zero vector."""
    return gcd(abs(v[0]), abs(v[1]))


def cross(a: Sequence[int], b: Sequence[int]):
    return a[0] * b[1] - a[1] * b[0]


def sub(a: Sequence[int], b: Sequence[int]) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def add(a: Sequence[int], b: Sequence[int]) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def primitive(v: Sequence[int]) -> Vec:
    g = lattice_length(v)
    if g == 0:
        raise LatticeError("zero vector has no primitive direction")
    return (v[0] // g, v[1] // g)


def triangle_multiplicity(tri: Sequence[Sequence[int]]) -> int:
    """Twice the Euclidean area: |det| of two edge vectors."""
    a, b, c = tri
    m = abs(cross(sub(b, a), sub(c, a)))
    if m == 0:
        raise DegenerateTriangle(f"collinear triangle {tuple(map(tuple, tri))}")
    return m


def triangle_boundary_points(tri: Sequence[Sequence[int]]) -> int:
    a, b, c = tri
    return (
        lattice_length(sub(b, a))
        + lattice_length(sub(c, b))
        + lattice_length(sub(a, c))
    )


def interior_points(tri: Sequence[Sequence[int]]) -> int:
    """Lattice points strictly inside a triangle, by Pick's identity.

    mult = 2*Area = 2*I + B - 2, so I = (mult - B + 2) / 2.
    """
    m = triangle_multiplicity(tri)
    b = triangle_boundary_points(tri)
    return (m - b + 2) // 2


def interior_points_by_scan(tri: Sequence[Sequence[int]]) -> int:
    """Independent bounding-box count; used to cross-check Pick."""
    a, b, c = tri
    triangle_multiplicity(tri)
    xs = [a[0], b[0], c[0]]
    ys = [a[1], b[1], c[1]]
    verts = [a, b, c]
    if cross(sub(b, a), sub(c, a)) < 0:
        verts = [a, c, b]
    count = 0
    for x in range(min(xs) + 0, max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            inside = True
            for i in range(3):
                p, q = verts[i], verts[(i + 1) % 3]
                if cross(sub(q, p), sub((x, y), p)) <= 0:
                    inside = False
                    break
            if inside:
                count += 1
    return count


class LatticePolygon:
    """Convex lattice polygon in canonical CCW form.

    Canonical form: counterclockwise, starting at the lexicographically
    smallest vertex, no three consecutive vertices collinear.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices: Iterable[Sequence[int]]):
        pts = [(int(p[0]), int(p[1])) for p in vertices]
        if len(pts) < 3:
            raise DegeneratePolygon("need at least 3 vertices")
        hull = _convex_hull(pts)
        if len(hull) < 3:
            raise DegeneratePolygon(f"vertices {pts} are collinear")
        for p in set(pts):
            if p not in hull and not _on_hull_boundary(hull, p):
                raise DegeneratePolygon(f"vertex {p} lies inside the hull")
        start = min(range(len(hull)), key=lambda i: hull[i])
        object.__setattr__(self, "vertices", tuple(hull[start:] + hull[:start]))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("LatticePolygon is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePolygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"LatticePolygon({list(self.vertices)})"

    def edges(self) -> List[Tuple[Vec, Vec]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def twice_area(self) -> int:
        v = self.vertices
        return sum(cross(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    def boundary_points(self) -> int:
        return sum(lattice_length(sub(b, a)) for a, b in self.edges())

    def num_interior_points(self) -> int:
        # Pick: 2A = 2I + B - 2
        return (self.twice_area() - self.boundary_points() + 2) // 2

    def contains(self, p: Sequence) -> bool:
        """Closed containment; works for Fraction coordinates too."""
        for a, b in self.edges():
            if cross(sub(b, a), (p[0] - a[0], p[1] - a[1])) < 0:
                return False
        return True

    def lattice_points(self) -> List[Vec]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return [
            (x, y)
            for x in range(min(xs), max(xs) + 1)
            for y in range(min(ys), max(ys) + 1)
            if self.contains((x, y))
        ]

    def side_of(self, a: Sequence[int], b: Sequence[int]) -> int | None:
        """Index of the polygon edge whose line contains segment ab, else None."""
        for i, (u, v) in enumerate(self.edges()):
            d = sub(v, u)
            if cross(d, sub(a, u)) == 0 and cross(d, sub(b, u)) == 0:
                return i
        return None

    def outer_normal(self, edge_index: int) -> Vec:
        a, b = self.edges()[edge_index]
        d = sub(b, a)
        return primitive((d[1], -d[0]))

    def to_text(self) -> str:
        d = _triangle_degree(self)
        if d is not None:
            return f"triangle:{d}"
        return "poly:" + ";".join(f"({x},{y})" for x, y in self.vertices)


def _convex_hull(pts: List[Vec]) -> List[Vec]:
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts
    lower: List[Vec] = []
    for p in pts:
        while len(lower) >= 2 and cross(sub(lower[-1], lower[-2]), sub(p, lower[-2])) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(sub(upper[-1], upper[-2]), sub(p, upper[-2])) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _on_hull_boundary(hull: List[Vec], p: Vec) -> bool:
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if cross(sub(b, a), sub(p, a)) == 0 and min(a, b) <= p <= max(a, b):
            if (
                min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
            ):
                return True
    return False


def _triangle_degree(poly: LatticePolygon) -> int | None:
    v = poly.vertices
    if len(v) != 3:
        return None
    for d in range(1, max(max(abs(c) for c in p) for p in v) + 1):
        if set(v) == {(0, 0), (d, 0), (0, d)}:
            return d
    return None


def triangle(d: int) -> LatticePolygon:
    """conv{(0,0), (d,0), (0,d)}: the Newton polygon of degree-d plane curves."""
    if d < 1:
        raise LatticeError(f"degree must be >= 1, got {d}")
    return LatticePolygon([(0, 0), (d, 0), (0, d)])


def parse_polygon(text: str) -> LatticePolygon:
    """Parse the CLI text form: "triangle:d" or "poly:(x1,y1);(x2,y2);...". """
    text = text.strip()
    if text.startswith("triangle:"):
        try:
            return triangle(int(text.split(":", 1)[1]))
        except ValueError as exc:
            raise LatticeError(f"bad triangle degree in {text!r}") from exc
    if text.startswith("poly:"):
        body = text.split(":", 1)[1]
        pts = []
        for chunk in body.split(";"):
            chunk = chunk.strip().lstrip("(").rstrip(")")
            x, y = chunk.split(",")
            pts.append((int(x), int(y)))
        return LatticePolygon(pts)
    raise LatticeError(f"cannot parse polygon {text!r}")
