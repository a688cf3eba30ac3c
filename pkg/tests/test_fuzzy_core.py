import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from memfuzz.fuzzy_core import (
    INF,
    UNIVERSAL,
    FuzzyMultiset,
    FuzzySubsetOfNat,
    GradeSet,
    as_grade,
    ext_add,
    ext_sub,
    join,
    level_sum,
    levels_equal,
    t_level,
)

HALF = F(1, 2)
I3 = GradeSet([0, HALF, 1])
I5 = GradeSet([0, F(1, 4), HALF, F(3, 4), 1])

grades5 = st.sampled_from(I5.positive)
fuzzy_nat = st.dictionaries(st.integers(0, 8), st.sampled_from(I5.grades)).map(FuzzySubsetOfNat)
counts = st.one_of(st.integers(0, 6), st.just(INF))
multisets = st.dictionaries(
    st.tuples(st.sampled_from("vw"), grades5), counts
).map(FuzzyMultiset)


class TestGrades:
    def test_exact_parsing(self):
        assert as_grade("1/2") == HALF
        assert as_grade(1) == 1

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            as_grade(0.5)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            as_grade("3/2")

    def test_gradeset_requires_bounds(self):
        with pytest.raises(ValueError):
            GradeSet([HALF, 1])
        with pytest.raises(ValueError):
            GradeSet([0, HALF])

    def test_successor(self):
        assert I5.successor(F(1, 4)) == HALF
        assert I5.successor(F(3, 4)) == 1
        with pytest.raises(ValueError):
            I5.successor(F(1))
        with pytest.raises(ValueError):
            I5.successor(F(1, 3))

    @given(grades5)
    def test_successor_is_next(self, t):
        if t == 1:
            return
        s = I5.successor(t)
        assert t < s and not any(t < g < s for g in I5)

    def test_positive(self):
        assert I3.positive == (HALF, 1)


class TestExtNat:
    small = [0, 1, 2, 5, INF]

    def test_inf_absorbs(self):
        assert ext_add(INF, 3) == INF
        assert ext_sub(INF, 3) == INF

    def test_underflow_is_error(self):
        with pytest.raises(ValueError):
            ext_sub(1, 2)

    def test_cannot_subtract_inf(self):
        with pytest.raises(ValueError):
            ext_sub(INF, INF)

    def test_laws_exhaustive(self):
        for a, b, c in itertools.product(self.small, repeat=3):
            assert ext_add(a, b) == ext_add(b, a)
            assert ext_add(ext_add(a, b), c) == ext_add(a, ext_add(b, c))
            assert a <= INF
            if b != INF:
                assert ext_sub(ext_add(a, b), b) == a


class TestFuzzyMultiset:
    def test_level_sum_examples(self):
        Fm = FuzzyMultiset({("v", HALF): 1, ("v", 1): 1})
        assert level_sum(Fm, "v", HALF, I3) == 2
        assert level_sum(FuzzyMultiset(), "v", F(1), I3) == 0
        assert level_sum(FuzzyMultiset({("v", HALF): INF}), "v", HALF, I3) == INF

    def test_level_sum_checks_grade(self):
        with pytest.raises(ValueError):
            level_sum(FuzzyMultiset(), "v", F(0), I3)
        with pytest.raises(ValueError):
            level_sum(FuzzyMultiset(), "v", F(1, 3), I3)

    def test_grade_zero_rejected(self):
        with pytest.raises(ValueError):
            FuzzyMultiset({("v", 0): 1})

    def test_zero_counts_dropped(self):
        assert FuzzyMultiset({("v", 1): 0}) == FuzzyMultiset()

    def test_updated(self):
        Fm = FuzzyMultiset({("v", 1): 2, ("w", HALF): INF})
        G = Fm.updated({("v", 1): -2, ("w", HALF): -5, ("u", 1): 1})
        assert G == FuzzyMultiset({("w", HALF): INF, ("u", 1): 1})
        with pytest.raises(ValueError):
            Fm.updated({("v", 1): -3})

    @given(multisets, st.sampled_from("vw"))
    def test_level_sum_antitone(self, Fm, v):
        sums = [Fm.level_sum(v, t) for t in I5.positive]
        assert all(a >= b for a, b in zip(sums, sums[1:]))
        total = 0
        for t in I5.positive:
            total = ext_add(total, Fm.count(v, t))
        assert sums[0] == total


class TestFuzzySets:
    phi = FuzzySubsetOfNat({2: HALF, 3: 1})

    def test_t_level_examples(self):
        assert t_level(self.phi, F(1)) == {3}
        assert t_level(self.phi, HALF) == {2, 3}
        assert t_level(self.phi, F(0)) is UNIVERSAL
        assert 10**9 in UNIVERSAL

    def test_levels_equal_examples(self):
        assert levels_equal(FuzzySubsetOfNat(), FuzzySubsetOfNat(), I3)
        assert not levels_equal(FuzzySubsetOfNat({1: HALF}), FuzzySubsetOfNat({1: 1}), I3)
        assert levels_equal(FuzzySubsetOfNat({1: HALF}), FuzzySubsetOfNat({1: HALF}), I3)

    def test_levels_equal_rejects_foreign_values(self):
        with pytest.raises(ValueError):
            levels_equal(FuzzySubsetOfNat({1: F(1, 3)}), FuzzySubsetOfNat(), I3)

    def test_join_examples(self):
        assert join(FuzzySubsetOfNat({1: HALF}), FuzzySubsetOfNat({1: 1})) == {1: 1}
        assert join(FuzzySubsetOfNat(), self.phi) == self.phi
        assert join(
            FuzzySubsetOfNat({1: HALF, 2: 1}), FuzzySubsetOfNat({2: HALF, 3: HALF})
        ) == {1: HALF, 2: 1, 3: HALF}

    def test_zero_membership_not_stored(self):
        assert FuzzySubsetOfNat({4: 0}) == FuzzySubsetOfNat()
        assert FuzzySubsetOfNat({4: 0})[4] == 0

    def test_restrict_positive(self):
        assert FuzzySubsetOfNat({0: 1, 2: HALF}).restrict_positive() == {2: HALF}

    @given(fuzzy_nat)
    def test_level_monotone(self, phi):
        levels = [t_level(phi, t) for t in I5.positive]
        assert all(a >= b for a, b in zip(levels, levels[1:]))

    @given(fuzzy_nat, fuzzy_nat)
    def test_levels_equal_iff_maps_equal(self, phi, psi):
        assert levels_equal(phi, psi, I5) == (dict(phi) == dict(psi))

    @given(fuzzy_nat, fuzzy_nat, fuzzy_nat)
    def test_join_laws(self, a, b, c):
        assert join(a, a) == a
        assert join(a, b) == join(b, a)
        assert join(join(a, b), c) == join(a, join(b, c))
        assert join(a, FuzzySubsetOfNat()) == a
        for n in set(a) | set(b):
            assert join(a, b)[n] == max(a[n], b[n])
