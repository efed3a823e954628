"""
Root Datum Module - Exact torus combinatorics of split reductive groups

Lattices are ambient Z^n (GL-style). Cocharacters and characters are tuples of
Fractions, the pairing is the ambient dot product and the norm is an explicit,
validated integer Gram matrix. Weyl elements are carried as a pair of integer
matrices (on Y and, contragrediently, on X) together with a reduced word.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

import config
from errors import InputError, ResourceBudgetError

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]
IntMatrix = Tuple[Tuple[int, ...], ...]


# ---------------------------------------------------------------------------
# Exact conversion helpers
# ---------------------------------------------------------------------------

def as_vector(values: Iterable) -> Vector:
    """Coerce ints, Fractions or "p/q" strings into a tuple of Fractions."""
    try:
        return tuple(to_fraction(v) for v in values)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise InputError(f"not a rational vector ({e})")


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, sp.Basic):
        r = sp.Rational(value)
        return Fraction(int(r.p), int(r.q))
    return Fraction(value)


def to_sympy(value: Fraction) -> sp.Rational:
    return sp.Rational(value.numerator, value.denominator)


def sympy_matrix(rows: Sequence[Sequence], ncols: Optional[int] = None) -> sp.Matrix:
    if not rows:
        return sp.zeros(0, ncols or 0)
    return sp.Matrix([[to_sympy(to_fraction(x)) for x in row] for row in rows])


def primitive_vector(values: Sequence) -> Tuple[int, ...]:
    """Positive rational multiple of a nonzero vector with coprime integer entries."""
    coords = as_vector(values)
    if not any(coords):
        raise InputError("the zero vector has no primitive multiple")
    denominator = reduce(math.lcm, (c.denominator for c in coords), 1)
    ints = [int(c * denominator) for c in coords]
    g = reduce(math.gcd, (abs(x) for x in ints), 0)
    return tuple(x // g for x in ints)


# ---------------------------------------------------------------------------
# Lattice vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _LatticeVector:
    coords: Vector

    def __post_init__(self):
        object.__setattr__(self, "coords", as_vector(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def as_ints(self) -> Tuple[int, ...]:
        if not self.is_integral():
            raise InputError(f"{self} is not integral")
        return tuple(int(c) for c in self.coords)

    def scale(self, c) -> "_LatticeVector":
        c = to_fraction(c)
        return type(self)(tuple(c * x for x in self.coords))

    def __add__(self, other: "_LatticeVector") -> "_LatticeVector":
        _check_dims(self, other)
        return type(self)(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "_LatticeVector") -> "_LatticeVector":
        _check_dims(self, other)
        return type(self)(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "_LatticeVector":
        return type(self)(tuple(-x for x in self.coords))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


class Cocharacter(_LatticeVector):
    """An element of Y_T(Q); integral iff it is a genuine cocharacter."""


class Character(_LatticeVector):
    """An element of X_T(Q)."""


def _check_dims(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")


def pairing(lam: Sequence, beta: Sequence) -> Fraction:
    """The pairing <lam, beta> in ambient coordinates."""
    _check_dims(lam, beta)
    return sum((to_fraction(a) * to_fraction(b) for a, b in zip(lam, beta)), Fraction(0))


def norm_sq(lam: Sequence, gram: Sequence[Sequence]) -> Fraction:
    """lam^T * gram * lam."""
    if len(gram) != len(lam):
        raise InputError(f"dimension mismatch: gram is {len(gram)}x{len(gram)}, vector has {len(lam)}")
    v = [to_fraction(x) for x in lam]
    total = Fraction(0)
    for i, row in enumerate(gram):
        if v[i]:
            total += v[i] * sum((to_fraction(g) * x for g, x in zip(row, v)), Fraction(0))
    return total


def is_symmetric(gram: Sequence[Sequence]) -> bool:
    n = len(gram)
    return all(gram[i][j] == gram[j][i] for i in range(n) for j in range(n))


def is_positive_definite(gram: Sequence[Sequence]) -> bool:
    """Symmetric with all leading principal minors positive."""
    n = len(gram)
    if n == 0 or any(len(row) != n for row in gram) or not is_symmetric(gram):
        return False
    m = sympy_matrix(gram)
    return all(m[:k, :k].det() > 0 for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# Parabolic types and Weyl elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParabolicType:
    """Root-index description of P_lambda, its Levi L_lambda and R_u(P_lambda)."""

    nonneg_roots: FrozenSet[int]
    levi_roots: FrozenSet[int]
    ru_roots: FrozenSet[int]

    @property
    def is_proper(self) -> bool:
        # roots are closed under negation, so some root pairs negatively iff one pairs positively
        return bool(self.ru_roots)

    def permuted(self, perm: Sequence[int]) -> "ParabolicType":
        return ParabolicType(
            frozenset(perm[i] for i in self.nonneg_roots),
            frozenset(perm[i] for i in self.levi_roots),
            frozenset(perm[i] for i in self.ru_roots),
        )

    def to_dict(self) -> dict:
        return {
            "nonneg_roots": sorted(self.nonneg_roots),
            "levi_roots": sorted(self.levi_roots),
            "ru_roots": sorted(self.ru_roots),
            "proper": self.is_proper,
        }


@dataclass(frozen=True)
class WeylElement:
    """
    A Weyl group element as its action on Y (y_matrix) and the contragredient
    action on X (x_matrix), so that <w.lam, w_!beta> = <lam, beta>.

    Equality and hashing only look at y_matrix; the word is bookkeeping.
    """

    y_matrix: IntMatrix
    x_matrix: IntMatrix = field(compare=False)
    word: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def length(self) -> int:
        return len(self.word)

    def is_identity(self) -> bool:
        return self.y_matrix == _identity_matrix(len(self.y_matrix))


def _identity_matrix(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def _transpose(a: IntMatrix) -> IntMatrix:
    return tuple(zip(*a))


def _apply(matrix: IntMatrix, coords: Sequence[Fraction]) -> Vector:
    _check_dims(matrix, coords)
    return tuple(sum((m * c for m, c in zip(row, coords)), Fraction(0)) for row in matrix)


def act(w: WeylElement, lam: Sequence) -> Cocharacter:
    """w . lam."""
    return Cocharacter(_apply(w.y_matrix, as_vector(lam)))


def act_char(w: WeylElement, beta: Sequence) -> Character:
    """w_! beta."""
    return Character(_apply(w.x_matrix, as_vector(beta)))


def identity_element(rank: int) -> WeylElement:
    e = _identity_matrix(rank)
    return WeylElement(e, e, ())


def compose(a: WeylElement, b: WeylElement) -> WeylElement:
    """The element acting as a after b."""
    return WeylElement(_matmul(a.y_matrix, b.y_matrix), _matmul(a.x_matrix, b.x_matrix), a.word + b.word)


def inverse(w: WeylElement) -> WeylElement:
    # y^T x = I, so y^-1 = x^T and x^-1 = y^T
    return WeylElement(_transpose(w.x_matrix), _transpose(w.y_matrix), tuple(reversed(w.word)))


# ---------------------------------------------------------------------------
# Root datum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootDatum:
    """
    Ambient lattices Y = X = Z^rank with the dot-product pairing, a root list
    closed under negation, a base (simple_indices into roots), parallel
    coroots and a positive definite, Weyl-invariant integer Gram matrix.
    """

    rank: int
    roots: Tuple[Tuple[int, ...], ...]
    simple_indices: Tuple[int, ...]
    coroots: Tuple[Tuple[int, ...], ...]
    gram: IntMatrix

    def __post_init__(self):
        try:
            object.__setattr__(self, "rank", int(self.rank))
            object.__setattr__(self, "roots", tuple(tuple(int(x) for x in r) for r in self.roots))
            object.__setattr__(self, "simple_indices", tuple(int(i) for i in self.simple_indices))
            object.__setattr__(self, "coroots", tuple(tuple(int(x) for x in r) for r in self.coroots))
            object.__setattr__(self, "gram", tuple(tuple(int(x) for x in r) for r in self.gram))
        except (TypeError, ValueError) as e:
            raise InputError(f"root datum entries must be integers ({e})")

    def root(self, i: int) -> Character:
        return Character(self.roots[i])

    def coroot(self, i: int) -> Cocharacter:
        return Cocharacter(self.coroots[i])

    @property
    def simple_roots(self) -> List[Character]:
        return [self.root(i) for i in self.simple_indices]

    def pairing(self, lam: Sequence, beta: Sequence) -> Fraction:
        self._check(lam)
        self._check(beta)
        return pairing(lam, beta)

    def norm_sq(self, lam: Sequence) -> Fraction:
        self._check(lam)
        return norm_sq(lam, self.gram)

    def parabolic_type(self, lam: Sequence) -> ParabolicType:
        self._check(lam)
        values = [pairing(lam, root) for root in self.roots]
        nonneg = frozenset(i for i, v in enumerate(values) if v >= 0)
        levi = frozenset(i for i, v in enumerate(values) if v == 0)
        return ParabolicType(nonneg, levi, nonneg - levi)

    def root_index(self, beta: Sequence) -> Optional[int]:
        key = tuple(as_vector(beta))
        for i, r in enumerate(self.roots):
            if tuple(Fraction(x) for x in r) == key:
                return i
        return None

    def _check(self, v: Sequence) -> None:
        if len(v) != self.rank:
            raise InputError(f"expected a vector of length {self.rank}, got {len(v)}")

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "roots": [list(r) for r in self.roots],
            "simple": list(self.simple_indices),
            "coroots": [list(r) for r in self.coroots],
            "gram": [list(r) for r in self.gram],
        }


def simple_reflection(d: RootDatum, k: int) -> WeylElement:
    if not 0 <= k < len(d.simple_indices):
        raise InputError(f"no simple reflection with index {k}", field="weyl_word")
    a = d.roots[d.simple_indices[k]]
    c = d.coroots[d.simple_indices[k]]
    n = d.rank
    y = tuple(tuple((1 if i == j else 0) - c[i] * a[j] for j in range(n)) for i in range(n))
    x = tuple(tuple((1 if i == j else 0) - a[i] * c[j] for j in range(n)) for i in range(n))
    return WeylElement(y, x, (k,))


def element_from_word(d: RootDatum, word: Sequence[int]) -> WeylElement:
    """s_{word[0]} s_{word[1]} ... as a single element."""
    w = identity_element(d.rank)
    for k in word:
        w = compose(w, simple_reflection(d, int(k)))
    return w


def weyl_group(d: RootDatum, bound: Optional[int] = None) -> Tuple[WeylElement, ...]:
    """
    Closure of the simple reflections, sorted by length then by word. Each
    element carries its lexicographically smallest reduced word.
    """
    return _weyl_closure(d, bound or config.WEYL_GROUP_BOUND)


@lru_cache(maxsize=64)
def _weyl_closure(d: RootDatum, bound: int) -> Tuple[WeylElement, ...]:
    generators = [simple_reflection(d, k) for k in range(len(d.simple_indices))]
    e = identity_element(d.rank)
    seen = {e: e}
    level = [e]
    # breadth-first by length; within a level words are generated in lexicographic order
    while level:
        next_level = []
        for w in level:
            for g in generators:
                u = compose(w, g)
                if u in seen:
                    continue
                if len(seen) >= bound:
                    raise ResourceBudgetError(f"Weyl group closure exceeded {bound} elements")
                seen[u] = u
                next_level.append(u)
        level = next_level
    elements = tuple(sorted(seen.values(), key=lambda w: (len(w.word), w.word)))
    logger.info("Weyl group of rank-%d datum has %d elements", d.rank, len(elements))
    return elements


def canonical(d: RootDatum, w: WeylElement) -> WeylElement:
    """The group element equal to w, carrying its canonical reduced word."""
    for u in weyl_group(d):
        if u == w:
            return u
    raise InputError("element is not in the generated Weyl group", field="weyl_word")


def root_permutation(d: RootDatum, w: WeylElement) -> Tuple[int, ...]:
    """perm with w_!(root i) = root perm[i]."""
    lookup = {r: i for i, r in enumerate(d.roots)}
    perm = []
    for r in d.roots:
        image = act_char(w, r).as_ints()
        if image not in lookup:
            raise InputError(f"roots are not stable under Weyl word {list(w.word)}", field="roots")
        perm.append(lookup[image])
    return tuple(perm)


# ---------------------------------------------------------------------------
# Chambers and faces
# ---------------------------------------------------------------------------

def _particular_solution(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> Vector:
    if not rows:
        return tuple(Fraction(0) for _ in range(ncols))
    a = sympy_matrix(rows)
    b = sp.Matrix([to_sympy(to_fraction(x)) for x in rhs])
    try:
        solution, params = a.gauss_jordan_solve(b)
    except ValueError:
        raise InputError("inconsistent linear system", field="simple")
    solution = solution.subs({p: 0 for p in params})
    return tuple(to_fraction(x) for x in solution)


def base_chamber_point(d: RootDatum) -> Cocharacter:
    """A cocharacter rho with <rho, alpha_i> = 1 on every simple root."""
    simple = [d.roots[i] for i in d.simple_indices]
    return Cocharacter(_particular_solution(simple, [1] * len(simple), d.rank))


def positive_roots(d: RootDatum) -> FrozenSet[int]:
    rho = base_chamber_point(d)
    return frozenset(i for i, r in enumerate(d.roots) if pairing(rho, r) > 0)


def face_points(d: RootDatum) -> Tuple[Cocharacter, ...]:
    """
    Barycentre-style points of every face of the Weyl fan: for each proper
    subset J of simple roots the point vanishing on J and equal to 1 on the
    rest, together with its Weyl orbit.
    """
    r = len(d.simple_indices)
    simple = [d.roots[i] for i in d.simple_indices]
    group = weyl_group(d)
    points = set()
    for size in range(r):
        for subset in itertools.combinations(range(r), size):
            rhs = [0 if k in subset else 1 for k in range(r)]
            base = Cocharacter(_particular_solution(simple, rhs, d.rank))
            for w in group:
                points.add(act(w, base))
    return tuple(sorted(points, key=lambda p: p.coords))


def coroot_span_equations(d: RootDatum) -> Tuple[Character, ...]:
    """Primitive characters vanishing exactly on the span of the coroots."""
    if d.coroots:
        m = sympy_matrix(d.coroots)
    else:
        m = sp.zeros(1, d.rank)
    return tuple(Character(primitive_vector([to_fraction(x) for x in v])) for v in m.nullspace())


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatumViolation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"

    def to_dict(self) -> dict:
        return {"field": self.field, "message": self.message}


def validate_datum(d: RootDatum) -> List[DatumViolation]:
    """Every violated RootDatum invariant; an empty list means the datum is valid."""
    out: List[DatumViolation] = []
    n = d.rank
    if n < 1:
        return [DatumViolation("rank", "must be a positive integer")]
    if len(d.gram) != n or any(len(row) != n for row in d.gram):
        out.append(DatumViolation("gram", f"must be a {n}x{n} matrix"))
    if any(len(r) != n for r in d.roots):
        out.append(DatumViolation("roots", f"every root must have length {n}"))
    if any(len(r) != n for r in d.coroots):
        out.append(DatumViolation("coroots", f"every coroot must have length {n}"))
    if len(d.roots) != len(d.coroots):
        out.append(DatumViolation("coroots", "must be parallel to roots"))
    if any(not 0 <= i < len(d.roots) for i in d.simple_indices) or len(set(d.simple_indices)) != len(d.simple_indices):
        out.append(DatumViolation("simple", "indices must be distinct and index into roots"))
    if out:
        return out

    if not is_symmetric(d.gram):
        out.append(DatumViolation("gram", "not symmetric"))
    elif not is_positive_definite(d.gram):
        out.append(DatumViolation("gram", "not positive definite"))

    for i, (root, coroot) in enumerate(zip(d.roots, d.coroots)):
        value = pairing(coroot, root)
        if value != 2:
            out.append(DatumViolation("coroots", f"coroot {i} pairs to {value} with its root, expected 2"))

    root_set = set(d.roots)
    if any(tuple(-x for x in r) not in root_set for r in d.roots):
        out.append(DatumViolation("roots", "not closed under negation"))

    base_ok = True
    simple = [d.roots[i] for i in d.simple_indices]
    if simple and sympy_matrix(simple).rank() != len(simple):
        out.append(DatumViolation("simple", "simple roots are linearly dependent"))
        base_ok = False
    for a in d.simple_indices:
        for b in d.simple_indices:
            if a != b and pairing(d.coroots[a], d.roots[b]) > 0:
                out.append(DatumViolation("simple", "Cartan matrix has a positive off-diagonal entry"))
                base_ok = False
                break
        if not base_ok:
            break
    generators = [simple_reflection(d, k) for k in range(len(d.simple_indices))]
    for g in generators:
        if any(act_char(g, r).as_ints() not in root_set for r in d.roots):
            out.append(DatumViolation("roots", "not stable under the simple reflections"))
            base_ok = False
            break

    gram = d.gram
    def invariant(w: WeylElement) -> bool:
        return _matmul(_matmul(_transpose(w.y_matrix), gram), w.y_matrix) == gram

    if base_ok:
        try:
            elements = weyl_group(d)
        except ResourceBudgetError as e:
            out.append(DatumViolation("simple", str(e)))
            elements = generators
    else:
        elements = generators
    if not all(invariant(w) for w in elements):
        out.append(DatumViolation("gram", "not Weyl-invariant"))
    return out


def symmetrize_gram(d: RootDatum, form: Sequence[Sequence[int]]) -> IntMatrix:
    """
    Sum over W of w^T (F + F^T) w: an integral, symmetric, Weyl-invariant form,
    equal to 2|W| times the Weyl average of the symmetric part of F.
    """
    n = d.rank
    if len(form) != n or any(len(row) != n for row in form):
        raise InputError(f"must be a {n}x{n} matrix", field="gram")
    f = tuple(tuple(int(form[i][j]) + int(form[j][i]) for j in range(n)) for i in range(n))
    total = [[0] * n for _ in range(n)]
    for w in weyl_group(d):
        term = _matmul(_matmul(_transpose(w.y_matrix), f), w.y_matrix)
        for i in range(n):
            for j in range(n):
                total[i][j] += term[i][j]
    return tuple(tuple(row) for row in total)


# ---------------------------------------------------------------------------
# Standard data
# ---------------------------------------------------------------------------

def general_linear(n: int) -> RootDatum:
    """GL_n ambient datum: roots e_i - e_j, simple roots e_i - e_{i+1}, gram I."""
    if n < 1:
        raise InputError("rank must be positive", field="rank")
    pairs = list(itertools.combinations(range(n), 2))

    def diff(i, j):
        return tuple((1 if k == i else 0) - (1 if k == j else 0) for k in range(n))

    positives = [diff(i, j) for i, j in pairs]
    roots = positives + [tuple(-x for x in r) for r in positives]
    simple = tuple(pairs.index((i, i + 1)) for i in range(n - 1))
    return RootDatum(n, tuple(roots), simple, tuple(roots), _identity_matrix(n))


def special_linear_2() -> RootDatum:
    """Rank-one SL_2: Y = X = Z, alpha = 2, alpha^vee = 1."""
    return RootDatum(1, ((2,), (-2,)), (0,), ((1,), (-1,)), ((1,),))


def torus(n: int) -> RootDatum:
    return RootDatum(n, (), (), (), _identity_matrix(n))


def direct_sum(*data: RootDatum) -> RootDatum:
    rank = sum(d.rank for d in data)
    roots, coroots, simple = [], [], []
    gram = [[0] * rank for _ in range(rank)]
    offset = 0
    for d in data:
        def pad(v, offset=offset, d=d):
            return (0,) * offset + tuple(v) + (0,) * (rank - offset - d.rank)
        simple.extend(len(roots) + i for i in d.simple_indices)
        roots.extend(pad(r) for r in d.roots)
        coroots.extend(pad(c) for c in d.coroots)
        for i in range(d.rank):
            for j in range(d.rank):
                gram[offset + i][offset + j] = d.gram[i][j]
        offset += d.rank
    return RootDatum(rank, tuple(roots), tuple(simple), tuple(coroots), tuple(tuple(r) for r in gram))
