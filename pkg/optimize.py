"""
Optimize Module - Exact optimal destabilizing directions

For a pair (A, B) of character lists and a Gram matrix, maximizes
mu(B, lam) / ||lam|| over the cone {<lam, alpha> >= 0 : alpha in A}. The
positive case is solved as the norm minimization
    minimize v^T G v  subject to  <v, beta> >= 1 (beta in B), <v, alpha> >= 0
by an exact primal active-set method; M^2 = 1 / ||v*||^2 and the optimal ray is
the primitive multiple of v*. Irrational M is never formed: only its sign
and square are carried.

Families of pairs are aggregated into an optimal class; a brute-force
lattice scan serves as an oracle for every optimum.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterator, List, Optional, Sequence, Tuple

import sympy as sp

import config
from cones import Cone, cone_from_inequalities, primitive_ray
from errors import InputError, ResourceBudgetError
from rootdatum import (
    Cocharacter,
    ParabolicType,
    RootDatum,
    WeylElement,
    act,
    act_char,
    as_vector,
    identity_element,
    inverse,
    is_positive_definite,
    norm_sq,
    pairing,
    sympy_matrix,
    to_fraction,
)
from states import NEG_INF, POS_INF, ExtendedValue, QuasiStateFamily

logger = logging.getLogger(__name__)

POSITIVE = "positive"
ZERO = "zero"
NEGATIVE = "negative"

AGREE = "AGREE"
DISAGREE = "DISAGREE"
ORACLE_BOUND_ONLY = "ORACLE_BOUND_ONLY"

UNIPOTENT_CAVEAT = "simple transitivity of R_u(P) on the optimal class is not representable; only parabolic equality is checked"

_ACTIVE_SET_STEPS_PER_ROW = 20

_KIND_RANK = {NEG_INF: -2, NEGATIVE: -1, ZERO: 0, POSITIVE: 1, POS_INF: 2}


def _order_key(kind: str, m_squared: Optional[Fraction]) -> Tuple[int, Fraction]:
    return _KIND_RANK[kind], m_squared if kind == POSITIVE else Fraction(0)


def _signed_value(kind: str, m_squared: Optional[Fraction]) -> Optional[ExtendedValue]:
    if kind == POS_INF:
        return ExtendedValue.pos_inf()
    if kind == NEG_INF:
        return ExtendedValue.neg_inf()
    if kind == POSITIVE:
        return ExtendedValue.finite(m_squared)
    if kind == ZERO:
        return ExtendedValue.finite(0)
    # M < 0: only the sign is determined
    return None


@dataclass
class OptimumReport:
    """Maximum of mu(B, .)/||.|| on one cone."""

    kind: str
    feasible: bool
    m_squared: Optional[Fraction] = None
    ray: Optional[Cocharacter] = None
    minimizer: Optional[Cocharacter] = None
    active_constraints: Tuple[Tuple[str, int], ...] = ()
    certificate: Optional[dict] = None

    @property
    def sign(self) -> int:
        return (_KIND_RANK[self.kind] > 0) - (_KIND_RANK[self.kind] < 0)

    @property
    def m_squared_signed(self) -> Optional[ExtendedValue]:
        return _signed_value(self.kind, self.m_squared)

    def order_key(self) -> Tuple[int, Fraction]:
        return _order_key(self.kind, self.m_squared)

    def to_dict(self) -> dict:
        signed = self.m_squared_signed
        return {
            "kind": self.kind,
            "sign": self.sign,
            "feasible": self.feasible,
            "m_squared": None if self.m_squared is None else str(self.m_squared),
            "m_squared_signed": None if signed is None else signed.to_dict(),
            "ray": None if self.ray is None else [str(c) for c in self.ray],
            "minimizer": None if self.minimizer is None else [str(c) for c in self.minimizer],
            "active_constraints": [[k, i] for k, i in self.active_constraints],
            "certificate": self.certificate,
        }


@dataclass
class OptimalClass:
    """Aggregate over a family of pairs: M, all witnesses and their common parabolic."""

    kind: str
    m_squared: Optional[Fraction] = None
    witnesses: Tuple[Tuple[int, Cocharacter], ...] = ()
    parabolic: Optional[ParabolicType] = None
    consistent: bool = True
    per_index: Tuple[OptimumReport, ...] = ()
    diagnostics: list = field(default_factory=list)
    search_scope: Optional[str] = None

    @property
    def sign(self) -> int:
        return (_KIND_RANK[self.kind] > 0) - (_KIND_RANK[self.kind] < 0)

    @property
    def ray(self) -> Optional[Cocharacter]:
        return self.witnesses[0][1] if self.witnesses else None

    @property
    def m_squared_signed(self) -> Optional[ExtendedValue]:
        return _signed_value(self.kind, self.m_squared)

    def order_key(self) -> Tuple[int, Fraction]:
        return _order_key(self.kind, self.m_squared)

    def to_dict(self) -> dict:
        signed = self.m_squared_signed
        return {
            "kind": self.kind,
            "sign": self.sign,
            "m_squared": None if self.m_squared is None else str(self.m_squared),
            "m_squared_signed": None if signed is None else signed.to_dict(),
            "witnesses": [{"index": i, "ray": [str(c) for c in ray]} for i, ray in self.witnesses],
            "parabolic": None if self.parabolic is None else self.parabolic.to_dict(),
            "consistent": self.consistent,
            "per_index": [r.to_dict() for r in self.per_index],
            "diagnostics": self.diagnostics,
            "search_scope": self.search_scope,
            "caveat": UNIPOTENT_CAVEAT,
        }


# ---------------------------------------------------------------------------
# Single cone
# ---------------------------------------------------------------------------

def _vectors(chars: Sequence[Sequence], dim: int, name: str) -> List[Tuple[Fraction, ...]]:
    out = []
    for c in chars:
        v = as_vector(c)
        if len(v) != dim:
            raise InputError(f"expected length {dim}, got {len(v)}", field=name)
        out.append(v)
    return out


def _check_gram(gram: Sequence[Sequence]) -> int:
    if not is_positive_definite(gram):
        raise InputError("not positive definite", field="gram")
    return len(gram)


def _nonnegative_cone_certificate(A: Sequence[Sequence], B: Sequence[Sequence], dim: int) -> dict:
    rows = list(A) + list(B)
    return {
        "nonnegative_cone": "zero",
        "rows": [[str(c) for c in r] for r in rows],
        "rank": int(sympy_matrix(rows, dim).rank()),
    }


def _classify(A: Sequence[Sequence], B: Sequence[Sequence], dim: int, k: Cone) -> Tuple[bool, Optional[dict], bool]:
    if k.is_zero:
        return False, _nonnegative_cone_certificate(A, B, dim), True
    for i, beta in enumerate(B):
        if all(pairing(g, beta) == 0 for g in k.generators):
            return False, {"refuted_b_index": i, "cone_generators": [[str(c) for c in g] for g in k.generators]}, False
    return True, None, False


def feasibility(A: Sequence[Sequence], B: Sequence[Sequence], dim: int) -> Tuple[bool, Optional[dict], bool]:
    """
    Decide whether some lam satisfies <lam, alpha> >= 0 and <lam, beta> > 0.

    Returns (feasible, certificate, nonneg_cone_is_zero). When the cone
    {alpha >= 0, beta >= 0} is zero the certificate lists its rows and their
    rank; otherwise it names a beta vanishing on the whole cone.
    """
    return _classify(A, B, dim, cone_from_inequalities(list(A) + list(B), dim))


def _start_point(k: Cone, B: Sequence[Sequence]) -> sp.Matrix:
    """Sum of the generators of {alpha >= 0, beta >= 0}, scaled so min <x, beta> = 1."""
    total = [sum((to_fraction(g[i]) for g in k.generators), Fraction(0)) for i in range(k.dim)]
    scale = min(pairing(total, beta) for beta in B)
    return sympy_matrix([[x / scale] for x in total])


def _equality_qp(h: sp.Matrix, c: sp.Matrix, working: List[int], rhs: List[int]) -> Tuple[sp.Matrix, sp.Matrix]:
    """Minimizer of v^T G v on {c_i . v = rhs_i : i in working} and its multipliers."""
    dim = h.shape[0]
    if not working:
        return sp.zeros(dim, 1), sp.zeros(0, 1)
    rows = c.extract(working, list(range(dim)))
    z = (rows * h * rows.T).LUsolve(sp.Matrix([rhs[i] for i in working]))
    return h * rows.T * z, z


def _active_set_loop(
    h: sp.Matrix, c: sp.Matrix, rhs: List[int], x: sp.Matrix, smallest_index: bool = False
) -> Optional[sp.Matrix]:
    """
    Primal active-set iterations from a feasible x.

    A negative multiplier leaves the working set: the most negative one, or
    with smallest_index the one of lowest row index. Blocking ties go to the
    lowest row index. Returns the minimizer, or None if a (working set,
    point) pair repeats or the step limit is reached.
    """
    n_rows = c.shape[0]
    working: List[int] = []
    seen = set()
    for step in range(_ACTIVE_SET_STEPS_PER_ROW * (n_rows + h.shape[0])):
        key = (tuple(sorted(working)), tuple(x))
        if key in seen:
            logger.warning("QP: active set cycled after %d steps", step)
            return None
        seen.add(key)
        try:
            target, z = _equality_qp(h, c, working, rhs)
        except (ValueError, ZeroDivisionError):
            logger.warning("QP: singular working set %s", sorted(working))
            return None
        p = target - x
        if not any(p):
            negative = [(z[pos], working[pos]) for pos in range(len(working)) if z[pos] < 0]
            if not negative:
                logger.debug("QP: converged in %d steps, working set %s", step, sorted(working))
                return x
            working.remove(min(j for _, j in negative) if smallest_index else min(negative)[1])
            continue
        step_length, blocking = sp.Integer(1), None
        for j in range(n_rows):
            if j in working:
                continue
            slope = (c.row(j) * p)[0]
            if slope < 0:
                t = (rhs[j] - (c.row(j) * x)[0]) / slope
                if t < step_length:
                    step_length, blocking = t, j
        x = x + step_length * p
        if blocking is not None:
            working.append(blocking)
    logger.warning("QP: active set step limit reached")
    return None


def _enumerate_active_sets(h: sp.Matrix, c: sp.Matrix, rhs: List[int], n_b: int) -> Optional[sp.Matrix]:
    """Exhaustive search for the KKT point over candidate active sets."""
    dim = h.shape[0]
    k = c * h * c.T
    n_rows = c.shape[0]
    for size in range(1, min(dim, n_rows) + 1):
        for subset in itertools.combinations(range(n_rows), size):
            if subset[0] >= n_b:
                continue
            try:
                z = k.extract(list(subset), list(subset)).LUsolve(sp.Matrix([rhs[i] for i in subset]))
            except (ValueError, ZeroDivisionError):
                continue
            if any(x < 0 for x in z):
                continue
            v = h * c.extract(list(subset), list(range(dim))).T * z
            values = c * v
            if all(values[i] >= rhs[i] for i in range(n_rows)):
                return v
    return None


def kempf_qp(A: Sequence[Sequence], B: Sequence[Sequence], gram: Sequence[Sequence]) -> OptimumReport:
    """Exact norm minimization over {<v, beta> >= 1, <v, alpha> >= 0}."""
    dim = _check_gram(gram)
    a_vecs = _vectors(A, dim, "A")
    b_vecs = _vectors(B, dim, "B")
    if not b_vecs:
        raise InputError("B must be non-empty for the quadratic program", field="B")

    k = cone_from_inequalities(a_vecs + b_vecs, dim)
    feasible, certificate, zero_cone = _classify(a_vecs, b_vecs, dim, k)
    if not feasible:
        return OptimumReport(NEGATIVE if zero_cone else ZERO, False, certificate=certificate)

    labels = [("B", i) for i in range(len(b_vecs))]
    labels += [("A", i) for i, a in enumerate(a_vecs) if any(a)]
    rows = b_vecs + [a for a in a_vecs if any(a)]
    rhs = [1] * len(b_vecs) + [0] * (len(rows) - len(b_vecs))

    h = sympy_matrix(gram).inv()
    c = sympy_matrix(rows)
    start = _start_point(k, b_vecs)
    v = _active_set_loop(h, c, rhs, start)
    if v is None:
        v = _active_set_loop(h, c, rhs, start, smallest_index=True)
    if v is None:
        logger.warning("QP: falling back to active-set enumeration")
        v = _enumerate_active_sets(h, c, rhs, len(b_vecs))
    if v is None:
        # unreachable for a feasible program with a positive definite Gram matrix
        raise InputError("no KKT point found", field="gram")

    values = c * v
    minimizer = Cocharacter([to_fraction(x) for x in v])
    m_squared = 1 / norm_sq(minimizer, gram)
    active = tuple(labels[i] for i in range(len(rows)) if values[i] == rhs[i])
    logger.info("QP: optimum with %d active constraints, M^2=%s", len(active), m_squared)
    return OptimumReport(
        POSITIVE,
        True,
        m_squared=m_squared,
        ray=primitive_ray(minimizer),
        minimizer=minimizer,
        active_constraints=active,
    )


def torus_max(A: Sequence[Sequence], B: Sequence[Sequence], gram: Sequence[Sequence]) -> OptimumReport:
    """M(T): -inf on the zero cone, +inf for empty B, else the sign/square of the maximum."""
    dim = _check_gram(gram)
    a_vecs = _vectors(A, dim, "A")
    b_vecs = _vectors(B, dim, "B")
    if cone_from_inequalities(a_vecs, dim).is_zero:
        return OptimumReport(NEG_INF, False)
    if not b_vecs:
        return OptimumReport(POS_INF, True)
    return kempf_qp(a_vecs, b_vecs, gram)


def functoriality_holds(A: Sequence[Sequence], B: Sequence[Sequence], gram: Sequence[Sequence], w: WeylElement) -> bool:
    """The optimum of (w_!A, w_!B) is w applied to the optimum of (A, B)."""
    before = torus_max(A, B, gram)
    after = torus_max([act_char(w, a) for a in A], [act_char(w, b) for b in B], gram)
    if before.kind != after.kind or before.m_squared != after.m_squared:
        return False
    if before.ray is None:
        return after.ray is None
    return after.ray == primitive_ray(act(w, before.ray))


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

Pair = Tuple[Sequence[Sequence], Sequence[Sequence]]


def family_max(
    pairs: Sequence[Pair],
    gram: Sequence[Sequence],
    datum: Optional[RootDatum] = None,
    identifications: Optional[Sequence[WeylElement]] = None,
) -> OptimalClass:
    """
    Maximum over indices with finite M(T). Witness rays are moved into base
    coordinates by the identification of their index before their parabolic
    types are compared.
    """
    if not pairs:
        raise InputError("at least one pair is required", field="pairs")
    if identifications is not None and len(identifications) != len(pairs):
        raise InputError("one identification per pair is required", field="identifications")

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
        reports = tuple(executor.map(lambda p: torus_max(p[0], p[1], gram), pairs))

    finite = [r for r in reports if r.kind != POS_INF]
    if not finite:
        return OptimalClass(POS_INF, per_index=reports)
    best = max(finite, key=OptimumReport.order_key)
    if best.kind != POSITIVE:
        return OptimalClass(best.kind, per_index=reports)

    witnesses = tuple(
        (i, r.ray) for i, r in enumerate(reports) if r.kind == POSITIVE and r.m_squared == best.m_squared
    )
    parabolic, consistent, diagnostics = None, True, []
    if datum is not None:
        types = []
        for i, ray in witnesses:
            w = identifications[i] if identifications is not None else identity_element(datum.rank)
            types.append((i, datum.parabolic_type(act(w, ray))))
        parabolic = types[0][1]
        for i, p in types[1:]:
            if p != parabolic:
                consistent = False
                diagnostics.append(f"witness at index {i} has a different parabolic type than index {types[0][0]}")
        if not consistent:
            logger.warning("inconsistent optimal class: %s", "; ".join(diagnostics))
    return OptimalClass(
        POSITIVE,
        m_squared=best.m_squared,
        witnesses=witnesses,
        parabolic=parabolic,
        consistent=consistent,
        per_index=reports,
        diagnostics=diagnostics,
    )


def family_pairs(xi: QuasiStateFamily, upsilon: QuasiStateFamily) -> Tuple[List[Pair], List[WeylElement]]:
    """
    Pairs (Xi[i], Upsilon[i]) with, for each index, the inverse of the first
    recorded Weyl element carrying the base index there.
    """
    if len(xi) != len(upsilon) or xi.index_action != upsilon.index_action or xi.base_index != upsilon.base_index:
        raise InputError("families must share their index structure", field="upsilon")
    if xi.dim != upsilon.dim:
        raise InputError("families have different dimensions", field="upsilon")
    pairs = [(xi.components[i].chars, upsilon.components[i].chars) for i in range(len(xi))]
    identity = identity_element(xi.dim)
    identifications = [identity] * len(xi)
    for w, perm in reversed(xi.index_action.table):
        identifications[perm[xi.base_index]] = inverse(w)
    identifications[xi.base_index] = identity
    return pairs, identifications


# ---------------------------------------------------------------------------
# Lattice oracle
# ---------------------------------------------------------------------------

def iter_lattice_ball(
    gram: Sequence[Sequence],
    radius: int,
    equations: Sequence[Sequence] = (),
    budget: Optional[int] = None,
) -> Iterator[Tuple[int, ...]]:
    """Integral lam with lam^T G lam <= radius^2 and <lam, e> = 0 for every equation, in lexicographic order."""
    if radius < 1:
        raise InputError("radius must be at least 1", field="radius")
    dim = _check_gram(gram)
    budget = budget or config.POINT_BUDGET
    h = sympy_matrix(gram).inv()
    bounds = [math.isqrt(math.floor(to_fraction(h[i, i]) * radius * radius)) for i in range(dim)]
    box = reduce(lambda acc, k: acc * (2 * k + 1), bounds, 1)
    if box > budget:
        raise ResourceBudgetError(f"lattice scan of {box} points exceeds the budget of {budget}")
    logger.info("lattice scan: box of %d points, radius %d", box, radius)
    ints_gram = [[int(x) for x in row] for row in gram]
    eqs = [_vectors([e], dim, "equations")[0] for e in equations]
    limit = radius * radius
    for lam in itertools.product(*(range(-k, k + 1) for k in bounds)):
        if any(pairing(lam, e) for e in eqs):
            continue
        n2 = sum(lam[i] * sum(g * x for g, x in zip(ints_gram[i], lam)) for i in range(dim) if lam[i])
        if n2 <= limit:
            yield lam


@dataclass
class OracleResult:
    """Best lattice point of a bounded scan."""

    kind: str
    ratio_squared: Optional[Fraction] = None  # sign(mu) * mu^2 / ||lam||^2
    best: Optional[Cocharacter] = None
    index: Optional[int] = None
    points_scanned: int = 0
    radius: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ratio_squared": None if self.ratio_squared is None else str(self.ratio_squared),
            "best": None if self.best is None else [str(c) for c in self.best],
            "index": self.index,
            "points_scanned": self.points_scanned,
            "radius": self.radius,
        }


def _integral_rows(chars: Sequence[Tuple[Fraction, ...]]) -> Tuple[List[Tuple[int, ...]], int]:
    scale = reduce(math.lcm, (x.denominator for c in chars for x in c), 1)
    return [tuple(int(x * scale) for x in c) for c in chars], scale


def oracle_lattice_max(
    A: Sequence[Sequence],
    B: Sequence[Sequence],
    gram: Sequence[Sequence],
    radius: int,
    budget: Optional[int] = None,
) -> OracleResult:
    """
    Exhaustive scan of the lattice ball for the maximum of sign(mu) mu^2/||lam||^2
    over nonzero lam in the A-cone; the lexicographically first maximizer wins.
    """
    dim = _check_gram(gram)
    if not B:
        # same precedence as torus_max: an empty cone beats an empty B
        if cone_from_inequalities(_vectors(A, dim, "A"), dim).is_zero:
            return OracleResult(NEG_INF, radius=radius)
        return OracleResult(POS_INF, radius=radius)
    a_rows, _ = _integral_rows(_vectors(A, dim, "A"))
    b_rows, scale = _integral_rows(_vectors(B, dim, "B"))
    ints_gram = [[int(x) for x in row] for row in gram]

    best, best_num, best_den = None, 0, 0
    scanned = 0
    for lam in iter_lattice_ball(gram, radius, budget=budget):
        scanned += 1
        if not any(lam):
            continue
        if any(sum(a * x for a, x in zip(row, lam)) < 0 for row in a_rows):
            continue
        m = min(sum(b * x for b, x in zip(row, lam)) for row in b_rows)
        num = m * abs(m)
        den = sum(lam[i] * sum(g * x for g, x in zip(ints_gram[i], lam)) for i in range(dim) if lam[i])
        if best is None or num * best_den > best_num * den:
            best, best_num, best_den = lam, num, den
    if best is None:
        return OracleResult(NEG_INF, points_scanned=scanned, radius=radius)
    ratio = Fraction(best_num, best_den * scale * scale)
    kind = POSITIVE if ratio > 0 else ZERO if ratio == 0 else NEGATIVE
    return OracleResult(kind, ratio, Cocharacter(best), points_scanned=scanned, radius=radius)


def oracle_family_max(pairs: Sequence[Pair], gram: Sequence[Sequence], radius: int, budget: Optional[int] = None) -> OracleResult:
    """Best oracle value over the indices whose B is non-empty."""
    results = [oracle_lattice_max(a, b, gram, radius, budget) for a, b in pairs]
    best = None
    for i, r in enumerate(results):
        if r.kind == POS_INF:
            continue
        key = _order_key(r.kind, r.ratio_squared if r.kind == POSITIVE else None)
        if best is None or key > best[0]:
            best = (key, i, r)
    scanned = sum(r.points_scanned for r in results)
    if best is None:
        return OracleResult(POS_INF, points_scanned=scanned, radius=radius)
    _, i, r = best
    return OracleResult(r.kind, r.ratio_squared, r.best, i, scanned, radius)


def compare_with_oracle(exact, oracle: OracleResult, gram: Sequence[Sequence], radius: int) -> str:
    """
    AGREE / DISAGREE / ORACLE_BOUND_ONLY for an OptimumReport or OptimalClass.
    The oracle can only confirm a positive optimum whose ray fits in the ball;
    otherwise a value not exceeding the exact one is a bound, not a verdict.
    """
    if exact.kind in (POS_INF, NEG_INF):
        return AGREE if oracle.kind == exact.kind else DISAGREE
    if exact.kind == NEGATIVE:
        return AGREE if oracle.kind in (NEGATIVE, NEG_INF) else DISAGREE
    value = oracle.ratio_squared
    if exact.kind == ZERO:
        if oracle.kind in (POSITIVE, POS_INF):
            return DISAGREE
        return AGREE if oracle.kind == ZERO else ORACLE_BOUND_ONLY
    if oracle.kind == POS_INF or (value is not None and value > exact.m_squared):
        return DISAGREE
    fits = norm_sq(exact.ray, gram) <= radius * radius
    if value == exact.m_squared:
        return AGREE
    return DISAGREE if fits else ORACLE_BOUND_ONLY
