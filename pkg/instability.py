"""
Instability Module - Hilbert-Mumford destabilization for split representations

A representation is a weight multiset with coordinate labels; vectors are
sparse label -> rational maps. Support states, limits and destabilizing
cones follow from the weights alone. Optimal (uniform) instability runs the
family optimizer over a supplied set of transforms of V, which stands in for
the search over maximal tori.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from cones import Cone, cone_from_inequalities
from errors import InputError, ResourceBudgetError
from optimize import OptimalClass, Pair, family_max, iter_lattice_ball
from rootdatum import (
    Character,
    Cocharacter,
    RootDatum,
    WeylElement,
    act_char,
    element_from_word,
    identity_element,
    pairing,
    sympy_matrix,
    to_fraction,
)
from states import QuasiStateFamily, StateComponent

logger = logging.getLogger(__name__)

SCOPE_TRANSFORMS = "transforms"
SCOPE_CERTIFIED = "certified_exact"


@dataclass(frozen=True)
class Representation:
    """T-weights of a finite-dimensional module, one per labelled coordinate."""

    weights: Tuple[Character, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Character(w) for w in self.weights))
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        if not self.weights:
            raise InputError("a representation needs at least one weight", field="weights")
        if len(self.weights) != len(self.labels):
            raise InputError("weights and labels must be parallel", field="labels")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("labels must be distinct", field="labels")
        if len({len(w) for w in self.weights}) != 1:
            raise InputError("weights have mixed lengths", field="weights")

    @property
    def rank(self) -> int:
        return len(self.weights[0])

    @property
    def size(self) -> int:
        return len(self.weights)

    def weight(self, label: str) -> Character:
        try:
            return self.weights[self.labels.index(label)]
        except ValueError:
            raise InputError(f"unknown coordinate {label!r}", field="vectors")

    def check_datum(self, d: RootDatum) -> None:
        if self.rank != d.rank:
            raise InputError(f"weights have length {self.rank}, datum has rank {d.rank}", field="weights")

    def to_dict(self) -> dict:
        return {"weights": [[str(x) for x in w] for w in self.weights], "labels": list(self.labels)}


@dataclass(frozen=True)
class WeightVector:
    """Sparse vector: sorted (label, value) pairs with zero entries removed."""

    coords: Tuple[Tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        cleaned = {}
        for label, value in self.coords:
            value = to_fraction(value)
            if value:
                cleaned[str(label)] = value
        object.__setattr__(self, "coords", tuple(sorted(cleaned.items())))

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "WeightVector":
        return cls(tuple(values.items()))

    def get(self, label: str) -> Fraction:
        return dict(self.coords).get(label, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self.coords

    def check(self, rep: Representation) -> "WeightVector":
        for label, _ in self.coords:
            rep.weight(label)
        return self

    def to_dict(self) -> Dict[str, str]:
        return {label: str(value) for label, value in self.coords}


def vector_of(rep: Representation, values: Sequence) -> WeightVector:
    """Dense coordinates in label order as a sparse vector."""
    if len(values) != rep.size:
        raise InputError(f"expected {rep.size} coordinates, got {len(values)}", field="vectors")
    return WeightVector(tuple(zip(rep.labels, values)))


# ---------------------------------------------------------------------------
# Standard representations
# ---------------------------------------------------------------------------

def natural_representation(n: int) -> Representation:
    """GL_n on K^n: weights e_1 .. e_n."""
    weights = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    return Representation(tuple(Character(w) for w in weights), tuple(f"e{i + 1}" for i in range(n)))


def adjoint_sl2() -> Representation:
    return Representation((Character((2,)), Character((0,)), Character((-2,))), ("e", "h", "f"))


def symmetric_power_sl2(degree: int) -> Representation:
    """Binary forms of the given degree; x^a y^b has weight a - b."""
    if degree < 0:
        raise InputError("degree must be nonnegative", field="degree")
    weights, labels = [], []
    for b in range(degree + 1):
        a = degree - b
        weights.append(Character((a - b,)))
        labels.append(f"x{a}y{b}")
    return Representation(tuple(weights), tuple(labels))


# ---------------------------------------------------------------------------
# Supports, limits, cones
# ---------------------------------------------------------------------------

def support_state(rep: Representation, x: WeightVector) -> StateComponent:
    """Weights whose coordinate in x is nonzero."""
    x.check(rep)
    return StateComponent(tuple(rep.weight(label) for label, _ in x.coords))


def limit(rep: Representation, x: WeightVector, lam: Sequence) -> Optional[WeightVector]:
    """
    lim_{a -> 0} lam(a) . x: None if a supported weight pairs negatively,
    otherwise the coordinates pairing to zero survive.
    """
    lam = Cocharacter(lam)
    if not lam.is_integral():
        raise InputError(f"{lam} is not integral; limits need a genuine cocharacter", field="lambda")
    if len(lam) != rep.rank:
        raise InputError(f"expected a cocharacter of length {rep.rank}", field="lambda")
    x.check(rep)
    kept = []
    for label, value in x.coords:
        p = pairing(lam, rep.weight(label))
        if p < 0:
            return None
        if p == 0:
            kept.append((label, value))
    return WeightVector(tuple(kept))


def theta(rep: Representation, vectors: Sequence[WeightVector]) -> StateComponent:
    """Union of the supports of every vector."""
    out = StateComponent()
    for x in vectors:
        out = out.union(support_state(rep, x))
    return out


def destab_cone(rep: Representation, vectors: Sequence[WeightVector]) -> Cone:
    """Cocharacters along which every vector has a limit."""
    if not vectors:
        raise InputError("at least one vector is required", field="vectors")
    return cone_from_inequalities(theta(rep, vectors).chars, rep.rank)


# ---------------------------------------------------------------------------
# Transforms and optimal instability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transform:
    """An invertible rational matrix on V, optionally realizing a Weyl element."""

    matrix: Tuple[Tuple[Fraction, ...], ...]
    weyl_word: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(to_fraction(x) for x in row) for row in self.matrix))
        if self.weyl_word is not None:
            object.__setattr__(self, "weyl_word", tuple(int(k) for k in self.weyl_word))

    @classmethod
    def identity(cls, size: int) -> "Transform":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(size)) for i in range(size)), ())

    def is_identity(self) -> bool:
        size = len(self.matrix)
        return self.matrix == Transform.identity(size).matrix

    def inverse(self) -> "Transform":
        m = sympy_matrix(self.matrix)
        if m.rows != m.cols or m.det() == 0:
            raise InputError("transform is singular", field="transforms")
        inv = m.inv()
        rows = tuple(tuple(to_fraction(inv[i, j]) for j in range(inv.cols)) for i in range(inv.rows))
        return Transform(rows, None if self.weyl_word is None else tuple(reversed(self.weyl_word)))

    def apply(self, rep: Representation, x: WeightVector) -> WeightVector:
        if len(self.matrix) != rep.size or any(len(row) != rep.size for row in self.matrix):
            raise InputError(f"transform must be {rep.size}x{rep.size}", field="transforms")
        dense = [x.get(label) for label in rep.labels]
        image = [sum((a * b for a, b in zip(row, dense)), Fraction(0)) for row in self.matrix]
        return vector_of(rep, image)

    def to_dict(self) -> dict:
        return {
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "weyl_word": None if self.weyl_word is None else list(self.weyl_word),
        }


def weyl_transform(rep: Representation, d: RootDatum, w: WeylElement) -> Transform:
    """
    Permutation matrix sending the k-th coordinate of weight chi to the k-th
    coordinate of weight w_! chi.
    """
    rep.check_datum(d)
    positions: Dict[Character, List[int]] = {}
    for j, chi in enumerate(rep.weights):
        positions.setdefault(chi, []).append(j)
    seen: Dict[Character, int] = {}
    matrix = [[0] * rep.size for _ in range(rep.size)]
    for j, chi in enumerate(rep.weights):
        k = seen.get(chi, 0)
        seen[chi] = k + 1
        image = act_char(w, chi)
        targets = positions.get(image)
        if targets is None or len(targets) != len(positions[chi]):
            raise InputError(f"weights are not stable under Weyl word {list(w.word)}", field="weights")
        matrix[targets[k]][j] = 1
    return Transform(tuple(tuple(row) for row in matrix), tuple(w.word))


def instability_pairs(
    rep: Representation,
    vectors: Sequence[WeightVector],
    d: RootDatum,
    upsilon: Optional[QuasiStateFamily] = None,
    transforms: Sequence[Transform] = (),
    equations: Sequence[Sequence] = (),
) -> Tuple[List[Pair], List[WeylElement]]:
    """
    One (A_g, B_g) pair per transform g (identity first): A_g is the union of
    supports of g^-1 U plus +/- each equation, B_g is that union again in
    null-cone mode (upsilon None) or the matching upsilon component. Each
    pair is identified with the base torus through the transform's Weyl word.
    """
    rep.check_datum(d)
    if not vectors:
        raise InputError("at least one vector is required", field="vectors")
    vectors = [x.check(rep) for x in vectors]
    chosen = [Transform.identity(rep.size)] + [g for g in transforms if not g.is_identity()]
    if upsilon is not None and len(upsilon) not in (1, len(chosen)):
        raise InputError("upsilon needs one component, or one per transform", field="upsilon")

    eqs = [Character(e) for e in equations]
    pairs, identifications = [], []
    for i, g in enumerate(chosen):
        g_inv = g.inverse()
        support = theta(rep, [g_inv.apply(rep, x) for x in vectors])
        a = list(support.chars) + eqs + [-e for e in eqs]
        if upsilon is None:
            b = list(support.chars)
        else:
            b = list(upsilon.components[0 if len(upsilon) == 1 else i].chars)
        pairs.append((a, b))
        identifications.append(element_from_word(d, g.weyl_word) if g.weyl_word is not None else identity_element(d.rank))
    return pairs, identifications


def optimal_instability(
    rep: Representation,
    vectors: Sequence[WeightVector],
    d: RootDatum,
    upsilon: Optional[QuasiStateFamily] = None,
    transforms: Sequence[Transform] = (),
    equations: Sequence[Sequence] = (),
    certified_exact: bool = False,
) -> OptimalClass:
    """Optimal class over the supplied transforms; exact over all tori only when certified."""
    pairs, identifications = instability_pairs(rep, vectors, d, upsilon, transforms, equations)
    logger.info("instability search over %d transforms", len(pairs))
    result = family_max(pairs, d.gram, d, identifications)
    result.search_scope = SCOPE_CERTIFIED if certified_exact else SCOPE_TRANSFORMS
    return result


@dataclass
class HilbertMumfordResult:
    # None when the lattice ball exceeded the point budget
    unstable: Optional[bool]
    witness: Optional[Cocharacter] = None
    points_scanned: int = 0
    radius: int = 0
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "unstable": self.unstable,
            "witness": None if self.witness is None else [str(c) for c in self.witness],
            "points_scanned": self.points_scanned,
            "radius": self.radius,
            "error": self.error,
        }


def hilbert_mumford_check(
    rep: Representation,
    x: WeightVector,
    d: RootDatum,
    radius: int,
    equations: Sequence[Sequence] = (),
    budget: Optional[int] = None,
) -> HilbertMumfordResult:
    """First lattice point (lexicographically) driving x to zero, if any in the ball."""
    rep.check_datum(d)
    scanned = 0
    for lam in iter_lattice_ball(d.gram, radius, equations, budget):
        scanned += 1
        if not any(lam):
            continue
        lim = limit(rep, x, lam)
        if lim is not None and lim.is_zero:
            return HilbertMumfordResult(True, Cocharacter(lam), scanned, radius)
    return HilbertMumfordResult(False, None, scanned, radius)


def scan_vectors(
    rep: Representation,
    vectors: Sequence[WeightVector],
    d: RootDatum,
    radius: int,
    equations: Sequence[Sequence] = (),
    budget: Optional[int] = None,
) -> List[HilbertMumfordResult]:
    """hilbert_mumford_check per vector; a budget overrun is reported, not raised."""
    results = []
    for x in vectors:
        try:
            results.append(hilbert_mumford_check(rep, x, d, radius, equations, budget))
        except ResourceBudgetError as e:
            logger.warning("Hilbert-Mumford scan skipped: %s", e)
            results.append(HilbertMumfordResult(None, radius=radius, error=str(e)))
    return results
