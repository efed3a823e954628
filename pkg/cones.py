"""
Cones Module - Exact polyhedral cones in Y (x) Q

A cone carries both its inequality description and its generators. The
conversion is an incremental double description: lines are eliminated while
some line pairs nonzero with the new inequality, otherwise rays are split by
sign and adjacent positive/negative pairs are combined (combinatorial
adjacency on tight sets).

Output is canonical: inequalities are primitive, deduplicated and sorted;
generators are primitive, sorted, and the lineality space appears as +/- a
reduced basis, with rays reduced modulo that basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

from errors import InputError
from rootdatum import (
    Character,
    Cocharacter,
    WeylElement,
    act,
    act_char,
    as_vector,
    pairing,
    primitive_vector,
    to_fraction,
)

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]


@dataclass(frozen=True)
class Cone:
    """A polyhedral cone given by both descriptions."""

    dim: int
    inequalities: Tuple[Character, ...]
    generators: Tuple[Cocharacter, ...]
    lineality: Tuple[Cocharacter, ...] = ()
    # recorded assumptions; neither is checkable inside one apartment
    saturated: Optional[bool] = None
    finite_type: Optional[bool] = None

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.dim:
            raise InputError(f"expected a vector of length {self.dim}, got {len(v)}")
        return all(pairing(v, beta) >= 0 for beta in self.inequalities)

    @property
    def is_zero(self) -> bool:
        return not self.generators

    @property
    def is_full_space(self) -> bool:
        return len(self.lineality) == self.dim

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "inequalities": [[str(c) for c in b] for b in self.inequalities],
            "generators": [[str(c) for c in g] for g in self.generators],
        }


def primitive_ray(v: Sequence) -> Cocharacter:
    """Positive multiple of v with coprime integer entries."""
    if not any(as_vector(v)):
        raise InputError("the zero vector spans no ray", field="ray")
    return Cocharacter(primitive_vector(v))


def canonical_inequalities(inequalities: Iterable[Sequence], dim: int) -> Tuple[Character, ...]:
    seen = set()
    for beta in inequalities:
        coords = as_vector(beta)
        if len(coords) != dim:
            raise InputError(f"inequality of length {len(coords)} in a {dim}-dimensional cone", field="inequalities")
        if any(coords):
            seen.add(primitive_vector(coords))
    return tuple(Character(b) for b in sorted(seen))


# ---------------------------------------------------------------------------
# Double description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Ray:
    vector: IntVector
    tight: FrozenSet[int]


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _combine(a: int, u: IntVector, b: int, v: IntVector) -> IntVector:
    return tuple(a * x + b * y for x, y in zip(u, v))


def _double_description(inequalities: Sequence[IntVector], dim: int) -> Tuple[List[IntVector], List[IntVector]]:
    """Lines and extreme rays (modulo lines) of {v : <v, a> >= 0 for all a}."""
    lines: List[IntVector] = [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    rays: List[_Ray] = []
    for k, a in enumerate(inequalities):
        line_values = [_dot(line, a) for line in lines]
        pivot = next((i for i, value in enumerate(line_values) if value), None)
        if pivot is not None:
            l0, v0 = lines.pop(pivot), line_values.pop(pivot)
            if v0 < 0:
                l0, v0 = tuple(-x for x in l0), -v0
            lines = [
                primitive_vector(_combine(v0, line, -value, l0)) if value else line
                for line, value in zip(lines, line_values)
            ]
            rays = [
                _Ray(primitive_vector(_combine(v0, r.vector, -_dot(r.vector, a), l0)), r.tight | {k})
                for r in rays
            ]
            rays.append(_Ray(l0, frozenset(range(k))))
            continue

        values = [_dot(r.vector, a) for r in rays]
        positive = [(r, v) for r, v in zip(rays, values) if v > 0]
        negative = [(r, v) for r, v in zip(rays, values) if v < 0]
        updated = [r for r, _ in positive]
        updated += [_Ray(r.vector, r.tight | {k}) for r, v in zip(rays, values) if v == 0]
        for p, vp in positive:
            for q, vq in negative:
                common = p.tight & q.tight
                if any(r is not p and r is not q and common <= r.tight for r in rays):
                    continue
                updated.append(_Ray(primitive_vector(_combine(vp, q.vector, -vq, p.vector)), common | {k}))
        rays = updated
    return lines, [r.vector for r in rays]


def _canonical_generators(lines: List[IntVector], rays: List[IntVector], dim: int) -> Tuple[Tuple[Cocharacter, ...], Tuple[Cocharacter, ...]]:
    """
    Reduce the lineality basis to echelon form pivoting from the last
    coordinate, and zero every ray on those pivot coordinates.
    """
    basis: List[List[sp.Rational]] = []
    pivots: Tuple[int, ...] = ()
    if lines:
        reduced, pivots = sp.Matrix([list(reversed(line)) for line in lines]).rref()
        basis = [list(reduced.row(i)) for i in range(len(pivots))]

    def reduce(v: IntVector) -> IntVector:
        r = [sp.Integer(x) for x in reversed(v)]
        for row, p in zip(basis, pivots):
            c = r[p]
            if c != 0:
                r = [x - c * y for x, y in zip(r, row)]
        return primitive_vector([to_fraction(x) for x in reversed(r)])

    line_basis = [primitive_vector([to_fraction(x) for x in reversed(row)]) for row in basis]
    gens = set()
    for line in line_basis:
        gens.add(line)
        gens.add(tuple(-x for x in line))
    for ray in rays:
        gens.add(reduce(ray))
    return (
        tuple(Cocharacter(g) for g in sorted(gens)),
        tuple(Cocharacter(line) for line in sorted(line_basis)),
    )


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def _infer_dim(vectors: Sequence[Sequence], dim: Optional[int], name: str) -> int:
    dims = {len(v) for v in vectors}
    if dim is not None:
        dims.add(dim)
    if not dims:
        raise InputError("dimension cannot be inferred from an empty list", field=name)
    if len(dims) > 1:
        raise InputError(f"mixed dimensions {sorted(dims)}", field=name)
    result = dims.pop()
    if result < 1:
        raise InputError("dimension must be positive", field=name)
    return result


def cone_from_inequalities(inequalities: Sequence[Sequence], dim: Optional[int] = None) -> Cone:
    """The cone {v : <v, beta> >= 0 for every beta}; no inequalities gives the whole space."""
    dim = _infer_dim(inequalities, dim, "inequalities")
    canonical = canonical_inequalities(inequalities, dim)
    lines, rays = _double_description([b.as_ints() for b in canonical], dim)
    generators, lineality = _canonical_generators(lines, rays, dim)
    logger.info("DD: %d inequalities -> %d generators (lineality %d)", len(canonical), len(generators), len(lineality))
    return Cone(dim, canonical, generators, lineality)


def cone_from_generators(generators: Sequence[Sequence], dim: Optional[int] = None) -> Cone:
    """Nonnegative span of the generators; no (nonzero) generators gives the zero cone."""
    dim = _infer_dim(generators, dim, "generators")
    rays = canonical_inequalities(generators, dim)
    # the dual cone's generators are the inequalities of the cone itself
    lines, dual_rays = _double_description([g.as_ints() for g in rays], dim)
    dual_generators, _ = _canonical_generators(lines, dual_rays, dim)
    return cone_from_inequalities(dual_generators, dim)


def zero_cone(dim: int) -> Cone:
    return cone_from_generators([], dim)


def full_space(dim: int) -> Cone:
    return cone_from_inequalities([], dim)


def with_assumptions(cone: Cone, saturated: Optional[bool], finite_type: Optional[bool]) -> Cone:
    return Cone(cone.dim, cone.inequalities, cone.generators, cone.lineality, saturated, finite_type)


# ---------------------------------------------------------------------------
# Operations and predicates
# ---------------------------------------------------------------------------

def contains(cone: Cone, v: Sequence) -> bool:
    return cone.contains(v)


def intersect(first: Cone, second: Cone) -> Cone:
    if first.dim != second.dim:
        raise InputError(f"dimension mismatch: {first.dim} vs {second.dim}")
    return cone_from_inequalities(first.inequalities + second.inequalities, first.dim)


def negate(cone: Cone) -> Cone:
    return cone_from_inequalities([-b for b in cone.inequalities], cone.dim)


def subspace_witness(cone: Cone) -> Optional[Cocharacter]:
    """First generator whose negative lies outside the cone, if any."""
    for g in cone.generators:
        if not cone.contains(-g):
            return g
    return None


def is_linear_subspace(cone: Cone) -> bool:
    return subspace_witness(cone) is None


def contains_cone(outer: Cone, inner: Cone) -> bool:
    return all(outer.contains(g) for g in inner.generators)


def same_cone(first: Cone, second: Cone) -> bool:
    return contains_cone(first, second) and contains_cone(second, first)


def transform(cone: Cone, w: WeylElement) -> Cone:
    """w . C, described by the pushed-forward inequalities."""
    moved = cone_from_inequalities([act_char(w, b) for b in cone.inequalities], cone.dim)
    return Cone(moved.dim, moved.inequalities, moved.generators, moved.lineality, cone.saturated, cone.finite_type)


def is_preserved_by(cone: Cone, w: WeylElement) -> bool:
    # w has finite order, so w.C inside C already forces equality
    return all(cone.contains(act(w, g)) for g in cone.generators)
