"""
Building Module - Apartment-level spherical building and centres

Points of the building inside the base apartment are primitive rays. A
convex subset is a cone together with the Weyl elements known to stabilize
it. The centre pipeline builds Xi from the cone's averaged inequalities and
Upsilon from the averaged strict functional, optimizes, and returns the
optimal ray.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from cones import (
    Cone,
    cone_from_inequalities,
    contains_cone,
    intersect,
    is_linear_subspace,
    is_preserved_by,
    primitive_ray,
    subspace_witness,
)
from errors import InputError, NoCentreError
from optimize import POSITIVE, OptimalClass, family_max
from rootdatum import (
    Character,
    Cocharacter,
    ParabolicType,
    RootDatum,
    WeylElement,
    act,
    coroot_span_equations,
    face_points,
    identity_element,
    pairing,
)
from states import (
    QuasiStateFamily,
    average_over_group,
    check_closed,
    is_fixed_by,
    mu_at,
    state_from_cone,
    state_from_parabolic,
)

logger = logging.getLogger(__name__)

APARTMENT_SCOPE = "apartment model: the centre is fixed by the supplied stabilizer; no claim about the full building"


@dataclass(frozen=True)
class BuildingPoint:
    """zeta(lam) for some nonzero lam: a primitive integral ray."""

    ray: Cocharacter

    def __post_init__(self):
        ray = Cocharacter(self.ray)
        if ray.is_zero() or primitive_ray(ray) != ray:
            raise InputError(f"{ray} is not a primitive integral ray", field="centre")
        object.__setattr__(self, "ray", ray)

    def to_list(self) -> List[int]:
        return list(self.ray.as_ints())


def zeta(lam: Sequence) -> BuildingPoint:
    if not any(Cocharacter(lam)):
        raise InputError("0 has no building image", field="lambda")
    return BuildingPoint(primitive_ray(lam))


def opposite(p: BuildingPoint, q: BuildingPoint) -> bool:
    return q.ray == -p.ray


@dataclass(frozen=True)
class ConvexSubset:
    """
    A cone in the base apartment with a supplied stabilizer. The saturation
    and finite-type flags are recorded assertions, never checked.
    """

    cone: Cone
    stabilizer: Tuple[WeylElement, ...] = ()
    saturated: Optional[bool] = None
    finite_type: Optional[bool] = None

    def __post_init__(self):
        stabilizer = tuple(self.stabilizer) or (identity_element(self.cone.dim),)
        for w in stabilizer:
            if len(w.y_matrix) != self.cone.dim:
                raise InputError("stabilizer element of the wrong rank", field="stabilizer")
            if not is_preserved_by(self.cone, w):
                raise InputError(f"Weyl word {list(w.word)} does not preserve the cone", field="stabilizer")
        object.__setattr__(self, "stabilizer", stabilizer)


def simplex_cone(d: RootDatum, p: ParabolicType) -> Cone:
    """
    {nu : P <= P_nu}: nonnegative on every root of P (so zero on its Levi).
    The whole group gives back the central directions only.
    """
    return cone_from_inequalities([d.root(i) for i in sorted(p.nonneg_roots)], d.rank)


def is_cr_in_apartment(subset: ConvexSubset) -> bool:
    """Every point has its opposite in the subset."""
    return is_linear_subspace(subset.cone)


def cr_witness(subset: ConvexSubset) -> Optional[Cocharacter]:
    return subspace_witness(subset.cone)


def strict_functional(subset: ConvexSubset) -> Optional[Character]:
    """Sum of the defining inequalities that are positive on some generator."""
    if is_cr_in_apartment(subset):
        return None
    cone = subset.cone
    strict = [b for b in cone.inequalities if any(pairing(g, b) > 0 for g in cone.generators)]
    total = strict[0]
    for b in strict[1:]:
        total = total + b
    return total


@dataclass
class CentreReport:
    centre: BuildingPoint
    optimal_class: OptimalClass
    strict_functional: Character
    fixed_by_stabilizer: bool
    in_subset: bool
    scope: str = APARTMENT_SCOPE

    def to_dict(self) -> dict:
        return {
            "centre": self.centre.to_list(),
            "m_squared": str(self.optimal_class.m_squared),
            "parabolic": self.optimal_class.parabolic.to_dict(),
            "fixed_by_stabilizer": self.fixed_by_stabilizer,
            "in_subset": self.in_subset,
            "strict_functional": [str(x) for x in self.strict_functional],
            "scope": self.scope,
        }


def centre_in_apartment(subset: ConvexSubset, d: RootDatum) -> CentreReport:
    """Optimal ray of (Xi(C), Upsilon) with Upsilon the stabilizer-average of the strict functional."""
    if is_cr_in_apartment(subset):
        raise NoCentreError("no centre guaranteed: subset is completely reducible at apartment level", field="cone")
    check_closed(subset.stabilizer)
    xi = state_from_cone(subset.cone, subset.stabilizer)
    beta = strict_functional(subset)
    upsilon = average_over_group(subset.stabilizer, QuasiStateFamily.single([beta], subset.cone.dim))
    optimum = family_max([(xi.base.chars, upsilon.base.chars)], d.gram, d)
    if optimum.kind != POSITIVE:
        raise InputError("strict functional is not positive on the cone", field="cone")
    centre = zeta(optimum.ray)
    fixed = all(primitive_ray(act(w, centre.ray)) == centre.ray for w in subset.stabilizer)
    logger.info("centre %s, M^2=%s, fixed=%s", centre.ray, optimum.m_squared, fixed)
    return CentreReport(centre, optimum, beta, fixed, subset.cone.contains(centre.ray))


@dataclass
class CentreVerification:
    """Forward check: Upsilon from the centre's parabolic must be positive there and stabilizer-fixed."""

    centre: BuildingPoint
    failures: list = field(default_factory=list)
    mu: Optional[str] = None
    parabolic: Optional[ParabolicType] = None
    scope: str = APARTMENT_SCOPE

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "centre": self.centre.to_list(),
            "passed": self.passed,
            "failures": self.failures,
            "mu": self.mu,
            "parabolic": None if self.parabolic is None else self.parabolic.to_dict(),
            "scope": self.scope,
        }


def verify_centre(subset: ConvexSubset, centre: BuildingPoint, d: RootDatum) -> CentreVerification:
    report = CentreVerification(centre)
    if not subset.cone.contains(centre.ray):
        report.failures.append("not in subset")
    report.parabolic = d.parabolic_type(centre.ray)
    if not report.parabolic.is_proper:
        report.failures.append("parabolic of the centre is the whole group")
        return report
    upsilon = state_from_parabolic(d, report.parabolic)
    value = mu_at(upsilon, upsilon.base_index, centre.ray)
    report.mu = str(value)
    if not value.is_finite or value.value <= 0:
        report.failures.append("mu not positive")
    if not all(upsilon.index_action.covers(w) for w in subset.stabilizer):
        report.failures.append("stabilizer element outside the Weyl group")
    elif not all(is_fixed_by(upsilon, w) for w in subset.stabilizer):
        report.failures.append("state not stabilizer-fixed")
    return report


@dataclass
class SubcomplexReport:
    is_subcomplex: bool
    face: Optional[ParabolicType] = None
    inside: Optional[Cocharacter] = None
    outside: Optional[Cocharacter] = None

    def to_dict(self) -> dict:
        return {
            "is_subcomplex": self.is_subcomplex,
            "face": None if self.face is None else self.face.to_dict(),
            "inside": None if self.inside is None else [str(c) for c in self.inside],
            "outside": None if self.outside is None else [str(c) for c in self.outside],
        }


def is_subcomplex_in_apartment(subset: ConvexSubset, d: RootDatum) -> SubcomplexReport:
    """
    Whether the cone, cut down to the span of the coroots, is a union of
    closed faces of the Weyl fan. A face whose open part meets the cone but
    whose closure leaves it is reported with a point on each side.
    """
    equations = coroot_span_equations(d)
    span = cone_from_inequalities(list(equations) + [-e for e in equations], d.rank)
    restricted = intersect(subset.cone, span)
    seen = set()
    for point in face_points(d):
        p = d.parabolic_type(point)
        if p in seen:
            continue
        seen.add(p)
        face = intersect(simplex_cone(d, p), span)
        meet = intersect(face, restricted)
        interior = Cocharacter([sum(c) for c in zip(*(g.coords for g in meet.generators))]) if meet.generators else None
        if interior is None or any(pairing(interior, d.root(i)) <= 0 for i in p.ru_roots):
            continue
        if not contains_cone(restricted, face):
            outside = next(g for g in face.generators if not restricted.contains(g))
            return SubcomplexReport(False, p, interior, outside)
    return SubcomplexReport(True)
