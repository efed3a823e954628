"""Tests for the root datum module."""

from fractions import Fraction

import pytest

from errors import InputError, ResourceBudgetError
from rootdatum import (
    Character,
    Cocharacter,
    RootDatum,
    act,
    act_char,
    base_chamber_point,
    compose,
    coroot_span_equations,
    element_from_word,
    face_points,
    identity_element,
    inverse,
    is_positive_definite,
    norm_sq,
    pairing,
    positive_roots,
    primitive_vector,
    root_permutation,
    symmetrize_gram,
    torus,
    validate_datum,
    weyl_group,
)


class TestPairingAndNorm:
    """Pairing and Gram norm in ambient coordinates."""

    def test_pairing_examples(self):
        """Dot product of cocharacter and character."""
        assert pairing((2, 1, -3), (0, 1, 0)) == 1
        assert pairing((0, 0, 0), (5, -7, 2)) == 0
        assert pairing((1, 0, -1), (1, 0, -1)) == 2

    def test_pairing_is_exact(self):
        """Rational coordinates stay rational."""
        assert pairing(Cocharacter(("1/2", 0)), Character((1, 3))) == Fraction(1, 2)

    def test_pairing_dimension_mismatch(self):
        """Vectors of different lengths are rejected."""
        with pytest.raises(InputError):
            pairing((1, 2), (1, 2, 3))

    def test_norm_examples(self, a2):
        """lam^T G lam with G = I."""
        assert a2.norm_sq((2, 1, -3)) == 14
        assert a2.norm_sq((0, 0, 0)) == 0
        assert a2.norm_sq((1, 1, -2)) == 6

    def test_norm_with_nontrivial_gram(self):
        """Off-diagonal Gram entries count twice."""
        assert norm_sq((1, 1), ((2, 1), (1, 2))) == 6

    def test_datum_rejects_wrong_length(self, a2):
        """The datum checks vector lengths against its rank."""
        with pytest.raises(InputError):
            a2.pairing((1, 0), (1, 0, 0))


class TestValidateDatum:
    """Structured violation reports."""

    def test_standard_data_are_valid(self, a2, a1, a1xa1, toy_plane):
        """Builders produce valid data."""
        for d in (a2, a1, a1xa1, toy_plane):
            assert validate_datum(d) == []

    def test_negative_gram(self, a1):
        """A1 with gram (-1) is not positive definite."""
        bad = RootDatum(1, a1.roots, a1.simple_indices, a1.coroots, ((-1,),))
        messages = [str(v) for v in validate_datum(bad)]
        assert "gram: not positive definite" in messages

    def test_gram_not_weyl_invariant(self, a2):
        """diag(1, 2, 3) is not fixed by permutations."""
        bad = RootDatum(3, a2.roots, a2.simple_indices, a2.coroots, ((1, 0, 0), (0, 2, 0), (0, 0, 3)))
        messages = [str(v) for v in validate_datum(bad)]
        assert messages == ["gram: not Weyl-invariant"]

    def test_asymmetric_gram(self, a1xa1):
        """Symmetry is reported before definiteness."""
        bad = RootDatum(2, a1xa1.roots, a1xa1.simple_indices, a1xa1.coroots, ((1, 1), (0, 1)))
        assert "gram: not symmetric" in [str(v) for v in validate_datum(bad)]

    def test_bad_coroot_pairing(self, a1):
        """A coroot must pair to 2 with its root."""
        bad = RootDatum(1, a1.roots, a1.simple_indices, ((2,), (-2,)), a1.gram)
        violations = validate_datum(bad)
        assert any(v.field == "coroots" and "expected 2" in v.message for v in violations)

    def test_roots_not_closed_under_negation(self):
        """A lone root has no negative."""
        bad = RootDatum(1, ((2,),), (0,), ((1,),), ((1,),))
        assert "roots: not closed under negation" in [str(v) for v in validate_datum(bad)]

    def test_shape_errors_stop_early(self):
        """Shape problems are reported without further checks."""
        bad = RootDatum(2, ((1, 0, 0),), (), ((1, 0),), ((1, 0), (0, 1)))
        fields = {v.field for v in validate_datum(bad)}
        assert "roots" in fields
        assert "gram" not in fields

    def test_rank_must_be_positive(self):
        """Rank zero is a single violation."""
        assert [v.field for v in validate_datum(RootDatum(0, (), (), (), ()))] == ["rank"]

    def test_positive_definite_helper(self):
        """Leading minors decide definiteness."""
        assert is_positive_definite(((2, -1), (-1, 2)))
        assert not is_positive_definite(((1, 2), (2, 1)))
        assert not is_positive_definite(())


class TestWeylGroup:
    """Closure of simple reflections."""

    def test_orders(self, a2, a1, a1xa1, toy_plane):
        """|S3| = 6, |A1| = 2, |A1 x A1| = 4."""
        assert len(weyl_group(a2)) == 6
        assert len(weyl_group(a1)) == 2
        assert len(weyl_group(a1xa1)) == 4
        assert len(weyl_group(toy_plane)) == 2

    def test_identity_first_and_sorted(self, a2):
        """Elements come sorted by length, then word."""
        group = weyl_group(a2)
        assert group[0].is_identity()
        assert [w.length for w in group] == [0, 1, 1, 2, 2, 3]
        keys = [(len(w.word), w.word) for w in group]
        assert keys == sorted(keys)

    def test_words_reproduce_elements(self, a2):
        """Each recorded word multiplies out to its element."""
        for w in weyl_group(a2):
            assert element_from_word(a2, w.word) == w

    def test_torus_group_is_trivial(self):
        """No roots: only the identity."""
        assert len(weyl_group(torus(2))) == 1

    def test_closure_bound(self, a2):
        """Exceeding the bound raises a budget error."""
        with pytest.raises(ResourceBudgetError):
            weyl_group(a2, bound=3)

    def test_unknown_simple_reflection(self, a2):
        """Words may only use indices of simple roots."""
        with pytest.raises(InputError):
            element_from_word(a2, [5])


class TestAction:
    """Weyl action on cocharacters and characters."""

    def test_transposition(self, swap12):
        """(1 2) swaps the first two coordinates."""
        assert act(swap12, (2, 1, -3)).coords == (1, 2, -3)
        assert act_char(swap12, (1, 0, 0)).coords == (0, 1, 0)

    def test_identity(self, a2):
        """The identity fixes everything."""
        e = identity_element(3)
        assert act(e, (2, 1, -3)).coords == (2, 1, -3)

    def test_adjointness_example(self, swap13):
        """<w.lam, w_!beta> = <lam, beta>."""
        lam, beta = (1, 0, -1), (1, -1, 0)
        assert act(swap13, lam).coords == (-1, 0, 1)
        assert pairing(act(swap13, lam), act_char(swap13, beta)) == pairing(lam, beta) == 1

    def test_inverse_and_compose(self, a2):
        """w composed with its inverse is the identity."""
        for w in weyl_group(a2):
            assert compose(w, inverse(w)).is_identity()
            assert compose(inverse(w), w).is_identity()

    def test_root_permutation(self, a2, swap12):
        """(1 2) swaps e1 - e3 and e2 - e3 and negates e1 - e2."""
        perm = root_permutation(a2, swap12)
        assert perm[0] == 3
        assert perm[1] == 2
        assert perm[2] == 1


class TestParabolicType:
    """Sign partition of the roots."""

    def test_borel(self, a2):
        """A regular dominant cocharacter gives the Borel."""
        p = a2.parabolic_type((1, 0, -1))
        assert p.ru_roots == frozenset({0, 1, 2})
        assert p.levi_roots == frozenset()
        assert p.is_proper

    def test_zero_is_whole_group(self, a2):
        """lambda = 0 puts every root in the Levi."""
        p = a2.parabolic_type((0, 0, 0))
        assert p.levi_roots == frozenset(range(6))
        assert not p.is_proper

    def test_maximal_parabolic(self, a2):
        """(1, 1, -2) pairs 0, 3, 3 with the positive roots."""
        p = a2.parabolic_type((1, 1, -2))
        assert p.levi_roots == frozenset({0, 3})
        assert p.ru_roots == frozenset({1, 2})
        assert p.nonneg_roots == p.levi_roots | p.ru_roots

    def test_to_dict(self, a2):
        """Sorted index lists plus the proper flag."""
        d = a2.parabolic_type((1, 1, -2)).to_dict()
        assert d == {"nonneg_roots": [0, 1, 2, 3], "levi_roots": [0, 3], "ru_roots": [1, 2], "proper": True}


@pytest.mark.acceptance
class TestEquivariance:
    """Pairing, norm and parabolic identities over random (w, lam, beta)."""

    def test_random_triples(self, a2, a1xa1, rng):
        """500 triples over A2 and A1 x A1."""
        for trial in range(500):
            d = a2 if trial % 2 == 0 else a1xa1
            w = rng.choice(weyl_group(d))
            lam = tuple(rng.randint(-5, 5) for _ in range(d.rank))
            beta = tuple(rng.randint(-5, 5) for _ in range(d.rank))
            w_lam = act(w, lam)
            assert pairing(w_lam, act_char(w, beta)) == pairing(lam, beta)
            assert d.norm_sq(w_lam) == d.norm_sq(lam)
            moved = d.parabolic_type(lam).permuted(root_permutation(d, w))
            assert d.parabolic_type(w_lam) == moved

    def test_parabolic_scale_invariance(self, a2, rng):
        """Positive scaling does not change the parabolic."""
        for _ in range(50):
            lam = tuple(rng.randint(-4, 4) for _ in range(3))
            k = rng.randint(1, 5)
            assert a2.parabolic_type(lam) == a2.parabolic_type(tuple(k * x for x in lam))


class TestChambersAndFaces:
    """Positive roots, chamber points and face samples."""

    def test_positive_roots(self, a2):
        """The base chamber sees e_i - e_j with i < j as positive."""
        assert positive_roots(a2) == frozenset({0, 1, 2})

    def test_base_chamber_point(self, a2):
        """rho pairs to 1 with every simple root."""
        rho = base_chamber_point(a2)
        assert all(pairing(rho, r) == 1 for r in a2.simple_roots)

    def test_face_points(self, a2):
        """Six chamber points and three points on each wall type."""
        points = face_points(a2)
        assert len(points) == 12
        assert Cocharacter((2, 1, 0)) in points
        assert Cocharacter((1, 1, 0)) in points
        assert Cocharacter((1, 0, 0)) in points

    def test_coroot_span_equations(self, a2, a1):
        """Trace zero cuts out the coroot span of GL3; SL2 needs nothing."""
        assert coroot_span_equations(a2) == (Character((1, 1, 1)),)
        assert coroot_span_equations(a1) == ()

    def test_symmetrize_gram(self, a2):
        """Summing 2I over S3 gives 12 I."""
        assert symmetrize_gram(a2, ((1, 0, 0), (0, 1, 0), (0, 0, 1))) == ((12, 0, 0), (0, 12, 0), (0, 0, 12))

    def test_symmetrized_gram_is_invariant(self, a2):
        """Any integer form symmetrizes to a valid Gram matrix once positive."""
        gram = symmetrize_gram(a2, ((1, 0, 0), (0, 2, 0), (0, 0, 3)))
        d = RootDatum(3, a2.roots, a2.simple_indices, a2.coroots, gram)
        assert validate_datum(d) == []


class TestBuilders:
    """Standard data."""

    def test_general_linear_layout(self, a2):
        """Positive roots in lexicographic pair order, then their negatives."""
        assert a2.roots[:3] == ((1, -1, 0), (1, 0, -1), (0, 1, -1))
        assert a2.roots[3:] == ((-1, 1, 0), (-1, 0, 1), (0, -1, 1))
        assert a2.simple_indices == (0, 2)

    def test_direct_sum(self, a1xa1):
        """Blocks are padded and simple indices shifted."""
        assert a1xa1.roots == ((2, 0), (-2, 0), (0, 2), (0, -2))
        assert a1xa1.simple_indices == (0, 2)
        assert a1xa1.gram == ((1, 0), (0, 1))

    def test_primitive_vector(self):
        """Clears denominators and divides by the gcd."""
        assert primitive_vector((4, 2, -6)) == (2, 1, -3)
        assert primitive_vector(("1/2", 0, "-1/2")) == (1, 0, -1)
        with pytest.raises(InputError):
            primitive_vector((0, 0))

    def test_to_dict(self, a1):
        """Datum serializes with the payload keys."""
        assert a1.to_dict() == {"rank": 1, "roots": [[2], [-2]], "simple": [0], "coroots": [[1], [-1]], "gram": [[1]]}
