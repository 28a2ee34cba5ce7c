"""Curve enumeration engines and their shared condition types.

Two engines live here:

* :mod:`tropcount.engines.paths` -- the lattice-path engine.  Works for
  any configuration in Mikhalkin position (only the order of the reduced
  points matters) and supports interior conjugate pairs.
* :mod:`tropcount.engines.brute` -- an exhaustive oracle for small
  polygons that enumerates dual subdivisions, solves the incidence
  constraints exactly over the rationals, and is completely independent
  of the path machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from ..lattice import LatticePolygon, lattice_length
from ..tropcurve import PlaneTropicalCurve


class EngineError(ValueError):
    pass


class DimensionMismatch(EngineError):
    pass


class DegenerateConfiguration(EngineError):
    pass


@dataclass(frozen=True)
class InteriorSimple:
    """One real point in the torus interior (u = 0, multiplicity 1)."""

    def weight_contribution(self, polygon):
        return 1


@dataclass(frozen=True)
class InteriorPair:
    """A conjugate pair in the interior; reduces to one double point."""

    def weight_contribution(self, polygon):
        return 2


@dataclass(frozen=True)
class BoundaryTangency:
    """Tangency of order ``order`` to the toric divisor of polygon side ``side``."""

    side: int
    order: int

    def weight_contribution(self, polygon):
        return self.order


@dataclass(frozen=True)
class BoundaryPair:
    """A conjugate pair on the divisor of ``side``; reduces to a weight-2 fixed end."""

    side: int

    def weight_contribution(self, polygon):
        return 2


Condition = object


def is_interior(c: Condition) -> bool:
    return isinstance(c, (InteriorSimple, InteriorPair))


def fixed_end_weight(c: Condition) -> Optional[int]:
    if isinstance(c, BoundaryTangency):
        return c.order
    if isinstance(c, BoundaryPair):
        return 2
    return None


def dimension_total(conditions: Sequence[Condition], polygon: LatticePolygon) -> int:
    return sum(c.weight_contribution(polygon) for c in conditions)


def check_dimension(conditions: Sequence[Condition], polygon: LatticePolygon, genus: int):
    total = dimension_total(conditions, polygon)
    expected = polygon.boundary_points() + genus - 1
    if total != expected:
        raise DimensionMismatch(
            f"conditions span {total}, need |bdP| + g - 1 = {expected}"
        )


@dataclass(frozen=True)
class MikhalkinConfig:
    """A configuration in Mikhalkin position.

    Every count depends only on the left-to-right order of the reduced
    points, which is the order of ``conditions``.  ``epsilon`` pins the
    tie-breaking functional lambda(x, y) = x - epsilon*y; any epsilon
    small enough to make lambda injective on the lattice points of the
    polygon yields the same order and hence the same counts.
    """

    polygon: LatticePolygon
    genus: int
    conditions: Tuple[Condition, ...]

    @property
    def epsilon(self) -> Fraction:
        span = _span(self.polygon)
        return Fraction(1, 2 * span * span + 1)

    def lam(self, p) -> Fraction:
        return p[0] - self.epsilon * p[1]

    def validate(self):
        check_dimension(self.conditions, self.polygon, self.genus)

    def pair_indices(self) -> List[int]:
        return [i for i, c in enumerate(self.conditions) if isinstance(c, InteriorPair)]


def _span(polygon: LatticePolygon) -> int:
    xs = [v[0] for v in polygon.vertices]
    ys = [v[1] for v in polygon.vertices]
    return max(max(xs) - min(xs), max(ys) - min(ys), 1)


@dataclass
class EnumerationResult:
    """Deduplicated curves through a configuration, with their markings."""

    curves: List[PlaneTropicalCurve] = field(default_factory=list)

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)
