"""
States Module - Bounded quasi-states as finite indexed families

A quasi-state over all maximal tori is held as its finite restriction data:
one character set per index, a Weyl action permuting the indices, and a base
index standing for the reference torus. Pushforward, union and averaging act
on these families; the numerical function mu is the minimum pairing.
"""

from __future__ import annotations

import functools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from cones import Cone, cone_from_inequalities, is_preserved_by
from errors import InputError
from rootdatum import (
    Character,
    Cocharacter,
    ParabolicType,
    RootDatum,
    WeylElement,
    act,
    act_char,
    compose,
    face_points,
    identity_element,
    pairing,
    positive_roots,
    root_permutation,
    to_fraction,
    weyl_group,
)

logger = logging.getLogger(__name__)

NEG_INF = "neg_inf"
FINITE = "finite"
POS_INF = "pos_inf"

ADMISSIBILITY_CAVEAT = (
    "necessary condition only: Weyl-accessible torus changes were sampled; "
    "conjugation by unipotent elements of P_lambda is not tested"
)


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@functools.total_ordering
@dataclass(frozen=True)
class ExtendedValue:
    """A rational extended by -inf and +inf."""

    tag: str
    value: Optional[Fraction] = None

    def __post_init__(self):
        if self.tag not in (NEG_INF, FINITE, POS_INF):
            raise InputError(f"unknown tag {self.tag!r}", field="tag")
        if (self.tag == FINITE) != (self.value is not None):
            raise InputError("value is present exactly when the tag is finite", field="value")
        if self.value is not None:
            object.__setattr__(self, "value", to_fraction(self.value))

    @classmethod
    def finite(cls, value) -> "ExtendedValue":
        return cls(FINITE, to_fraction(value))

    @classmethod
    def pos_inf(cls) -> "ExtendedValue":
        return cls(POS_INF)

    @classmethod
    def neg_inf(cls) -> "ExtendedValue":
        return cls(NEG_INF)

    @property
    def is_finite(self) -> bool:
        return self.tag == FINITE

    def sign(self) -> int:
        if self.tag == POS_INF:
            return 1
        if self.tag == NEG_INF:
            return -1
        return (self.value > 0) - (self.value < 0)

    def _key(self) -> Tuple[int, Fraction]:
        return ({NEG_INF: -1, FINITE: 0, POS_INF: 1}[self.tag], self.value or Fraction(0))

    def __lt__(self, other: "ExtendedValue") -> bool:
        return self._key() < other._key()

    def __str__(self) -> str:
        if self.tag == POS_INF:
            return "+inf"
        if self.tag == NEG_INF:
            return "-inf"
        return str(self.value)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "value": None if self.value is None else str(self.value)}


# ---------------------------------------------------------------------------
# Components and index actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateComponent:
    """A finite, deduplicated, sorted set of characters (possibly empty)."""

    chars: Tuple[Character, ...] = ()

    def __post_init__(self):
        unique = {Character(c) for c in self.chars}
        object.__setattr__(self, "chars", tuple(sorted(unique, key=lambda c: c.coords)))

    @property
    def is_empty(self) -> bool:
        return not self.chars

    def union(self, other: "StateComponent") -> "StateComponent":
        return StateComponent(self.chars + other.chars)

    def pushforward(self, w: WeylElement) -> "StateComponent":
        return StateComponent(tuple(act_char(w, c) for c in self.chars))

    def to_list(self) -> List[List[str]]:
        return [[str(x) for x in c] for c in self.chars]


def mu(component: StateComponent, lam: Sequence) -> ExtendedValue:
    """min over the component of <lam, chi>; +inf on the empty set."""
    if component.is_empty:
        return ExtendedValue.pos_inf()
    return ExtendedValue.finite(min(pairing(lam, c) for c in component.chars))


def _check_perm(perm: Sequence[int], size: int) -> Tuple[int, ...]:
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(size)):
        raise InputError(f"{list(perm)} is not a permutation of {size} indices", field="index_action")
    return perm


def _invert_perm(perm: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(perm)
    for i, j in enumerate(perm):
        out[j] = i
    return tuple(out)


@dataclass(frozen=True)
class IndexAction:
    """
    Permutations of the index set attached to Weyl elements; perm(w)[i] is the
    index reached from i by w. An empty table is the trivial action.
    """

    size: int
    table: Tuple[Tuple[WeylElement, Tuple[int, ...]], ...] = ()

    @classmethod
    def trivial(cls, size: int) -> "IndexAction":
        return cls(size)

    @classmethod
    def generate(cls, d: RootDatum, size: int, generators: Sequence[Tuple[WeylElement, Sequence[int]]]) -> "IndexAction":
        """Close generator permutations into a group action, checking consistency."""
        elements = {w: w for w in weyl_group(d)}
        gens = [(g, _check_perm(p, size)) for g, p in generators]
        e = identity_element(d.rank)
        known: Dict[WeylElement, Tuple[int, ...]] = {e: tuple(range(size))}
        queue = deque([e])
        while queue:
            w = queue.popleft()
            p = known[w]
            for g, q in gens:
                u = compose(w, g)
                if u not in elements:
                    raise InputError(f"Weyl word {list(g.word)} is not in the generated group", field="index_action")
                image = tuple(p[q[i]] for i in range(size))
                if u in known:
                    if known[u] != image:
                        raise InputError("permutations do not define a group action", field="index_action")
                    continue
                known[u] = image
                queue.append(u)
        table = sorted(((elements[w], p) for w, p in known.items()), key=lambda item: (len(item[0].word), item[0].word))
        return cls(size, tuple(table))

    @classmethod
    def regular(cls, elements: Sequence[WeylElement]) -> "IndexAction":
        """Left multiplication of a group on its own element list."""
        position = {w: i for i, w in enumerate(elements)}
        table = []
        for v in elements:
            perm = []
            for w in elements:
                u = compose(v, w)
                if u not in position:
                    raise InputError("element list is not closed under composition", field="index_action")
                perm.append(position[u])
            table.append((v, tuple(perm)))
        return cls(len(elements), tuple(table))

    @property
    def is_trivial(self) -> bool:
        return not self.table

    def covers(self, w: WeylElement) -> bool:
        return self.is_trivial or any(u == w for u, _ in self.table)

    def perm(self, w: WeylElement) -> Tuple[int, ...]:
        if self.is_trivial:
            return tuple(range(self.size))
        for u, p in self.table:
            if u == w:
                return p
        raise InputError(f"Weyl word {list(w.word)} has no recorded index permutation", field="index_action")

    def to_list(self) -> List[dict]:
        return [{"weyl_word": list(w.word), "perm": list(p)} for w, p in self.table]


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuasiStateFamily:
    components: Tuple[StateComponent, ...]
    dim: int
    index_action: Optional[IndexAction] = None
    base_index: int = 0

    def __post_init__(self):
        comps = tuple(c if isinstance(c, StateComponent) else StateComponent(tuple(c)) for c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InputError("a family needs at least one component", field="components")
        for c in comps:
            if any(len(chi) != self.dim for chi in c.chars):
                raise InputError(f"character of the wrong length in a {self.dim}-dimensional family", field="components")
        if self.index_action is None:
            object.__setattr__(self, "index_action", IndexAction.trivial(len(comps)))
        if self.index_action.size != len(comps):
            raise InputError("index action size does not match the number of components", field="index_action")
        if not 0 <= self.base_index < len(comps):
            raise InputError(f"base index {self.base_index} out of range", field="base")

    @classmethod
    def single(cls, chars: Iterable[Sequence], dim: int) -> "QuasiStateFamily":
        return cls((StateComponent(tuple(Character(c) for c in chars)),), dim)

    def __len__(self) -> int:
        return len(self.components)

    def component(self, i: int) -> StateComponent:
        if not 0 <= i < len(self.components):
            raise InputError(f"index {i} out of range", field="index")
        return self.components[i]

    @property
    def base(self) -> StateComponent:
        return self.components[self.base_index]

    def to_dict(self) -> dict:
        return {
            "components": [{"index": i, "chars": c.to_list()} for i, c in enumerate(self.components)],
            "index_action": self.index_action.to_list(),
            "base": self.base_index,
        }


def mu_at(family: QuasiStateFamily, index: int, lam: Sequence) -> ExtendedValue:
    return mu(family.component(index), lam)


def pushforward(w: WeylElement, family: QuasiStateFamily) -> QuasiStateFamily:
    """(w_* F)[i] = w_!(F[perm_w^-1(i)])."""
    back = _invert_perm(family.index_action.perm(w))
    comps = tuple(family.components[back[i]].pushforward(w) for i in range(len(family)))
    return QuasiStateFamily(comps, family.dim, family.index_action, family.base_index)


def union(families: Sequence[QuasiStateFamily]) -> QuasiStateFamily:
    if not families:
        raise InputError("nothing to unite", field="families")
    first = families[0]
    for f in families[1:]:
        if f.dim != first.dim or len(f) != len(first) or f.index_action != first.index_action or f.base_index != first.base_index:
            raise InputError("families have different index structure", field="families")
    comps = tuple(
        reduce(StateComponent.union, (f.components[i] for f in families))
        for i in range(len(first))
    )
    return QuasiStateFamily(comps, first.dim, first.index_action, first.base_index)


def check_closed(elements: Sequence[WeylElement]) -> None:
    members = set(elements)
    if not members:
        raise InputError("group element list is empty", field="stabilizer")
    for a in members:
        for b in members:
            if compose(a, b) not in members:
                raise InputError(f"not closed: word {list(a.word)} composed with {list(b.word)}", field="stabilizer")


def average_over_group(elements: Sequence[WeylElement], family: QuasiStateFamily) -> QuasiStateFamily:
    """Union of h_* F over a finite subgroup H; every h in H fixes the result."""
    check_closed(elements)
    return union([pushforward(h, family) for h in elements])


def zero_set(family: QuasiStateFamily, index: int) -> Cone:
    """Z at one index: the cone where mu >= 0."""
    return cone_from_inequalities(family.component(index).chars, family.dim)


def is_fixed_by(family: QuasiStateFamily, w: WeylElement) -> bool:
    return pushforward(w, family).components == family.components


def state_from_cone(cone: Cone, stabilizer: Sequence[WeylElement]) -> QuasiStateFamily:
    """Average the defining inequalities over a subgroup preserving the cone."""
    for w in stabilizer:
        if not is_preserved_by(cone, w):
            raise InputError(f"Weyl word {list(w.word)} does not preserve the cone", field="stabilizer")
    return average_over_group(stabilizer, QuasiStateFamily.single(cone.inequalities, cone.dim))


def state_from_parabolic(d: RootDatum, p: ParabolicType) -> QuasiStateFamily:
    """
    One index per chamber w of the base apartment under the regular Weyl
    action. The component at w holds the roots of R_u(P) when the Borel
    w_!(positive roots) lies in P, and is empty otherwise.
    """
    if not p.is_proper:
        raise InputError("parabolic is the whole group", field="parabolic")
    elements = weyl_group(d)
    positive = positive_roots(d)
    ru = StateComponent(tuple(d.root(i) for i in p.ru_roots))
    comps = []
    base = None
    for i, w in enumerate(elements):
        perm = root_permutation(d, w)
        inside = all(perm[r] in p.nonneg_roots for r in positive)
        comps.append(ru if inside else StateComponent())
        if inside and base is None:
            base = i
    if base is None:
        raise InputError("no chamber of the base apartment lies in the parabolic", field="parabolic")
    return QuasiStateFamily(tuple(comps), d.rank, IndexAction.regular(elements), base)


def scale_to_integral(family: QuasiStateFamily) -> Tuple[QuasiStateFamily, int]:
    """Multiply every character by the lcm of all denominators."""
    factor = reduce(
        math.lcm,
        (x.denominator for c in family.components for chi in c.chars for x in chi),
        1,
    )
    comps = tuple(StateComponent(tuple(chi.scale(factor) for chi in c.chars)) for c in family.components)
    return QuasiStateFamily(comps, family.dim, family.index_action, family.base_index), factor


def orbit_character_count(family: QuasiStateFamily, d: RootDatum) -> int:
    """Size of the union of all Weyl pushforwards of all components."""
    chars = set()
    for w in weyl_group(d):
        for c in family.components:
            chars.update(act_char(w, chi) for chi in c.chars)
    return len(chars)


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    """Outcome of a sampled admissibility check."""

    mode: str
    samples_checked: int = 0
    comparisons: int = 0
    failures: list = field(default_factory=list)
    caveat: str = ADMISSIBILITY_CAVEAT

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "samples_checked": self.samples_checked,
            "comparisons": self.comparisons,
            "failures": self.failures,
            "caveat": self.caveat,
        }


def _compare_at(family: QuasiStateFamily, lam: Cocharacter, d: RootDatum, quasi: bool, report: AdmissibilityReport) -> None:
    for w in weyl_group(d):
        if w.is_identity() or act(w, lam) != lam or not family.index_action.covers(w):
            continue
        perm = family.index_action.perm(w)
        for i in range(len(family)):
            j = perm[i]
            if i == j:
                continue
            a, b = mu_at(family, i, lam), mu_at(family, j, lam)
            report.comparisons += 1
            if quasi:
                bad = (a >= ExtendedValue.finite(0)) != (b >= ExtendedValue.finite(0))
            else:
                bad = a != b
            if bad:
                report.failures.append(
                    f"lambda={lam} word={list(w.word)}: mu at index {i} is {a}, at index {j} is {b}"
                )


def check_admissible_at(family: QuasiStateFamily, lam: Sequence, d: RootDatum, quasi: bool = False) -> AdmissibilityReport:
    report = AdmissibilityReport("quasi-admissible" if quasi else "admissible", samples_checked=1)
    _compare_at(family, Cocharacter(lam), d, quasi, report)
    return report


def admissibility_samples(family: QuasiStateFamily, d: RootDatum, extra: Sequence[Sequence] = ()) -> List[Cocharacter]:
    """User points, then generators of every zero set, then face points; deduplicated in that order."""
    ordered: List[Cocharacter] = [Cocharacter(lam) for lam in extra]
    for i in range(len(family)):
        ordered.extend(zero_set(family, i).generators)
    ordered.extend(face_points(d))
    seen, samples = set(), []
    for lam in ordered:
        if lam not in seen:
            seen.add(lam)
            samples.append(lam)
    return samples


def check_quasi_admissible(
    family: QuasiStateFamily,
    d: RootDatum,
    samples: Sequence[Sequence] = (),
    quasi: bool = True,
) -> AdmissibilityReport:
    """
    Compare mu across indices related by Weyl elements fixing the sampled
    point. Sign changes fail quasi-admissibility; any change fails
    admissibility (quasi=False).
    """
    report = AdmissibilityReport("quasi-admissible" if quasi else "admissible")
    points = admissibility_samples(family, d, samples)
    for lam in points:
        _compare_at(family, lam, d, quasi, report)
    report.samples_checked = len(points)
    logger.info("admissibility: %d samples, %d comparisons, %d failures", len(points), report.comparisons, len(report.failures))
    return report
