from fractions import Fraction as F

import pytest

from builders import finite_set_generator
from conftest import load
from oracles import CrispOracle

from memfuzz.constructions import (
    ConstructionError,
    alpha_markers,
    compose,
    embed,
    expand_rule,
    overgraded_alphas,
    slice_system,
    tag,
    untag,
)
from memfuzz.engine import explore
from memfuzz.fuzzy_core import INF, GradeSet, t_level
from memfuzz.outputs import gen
from memfuzz.system_model import ENV, Rule, check_theorem1_shape, validate

HALF = F(1, 2)
ONE = F(1)
I3 = GradeSet([0, HALF, 1])
I4 = GradeSet([0, F(1, 3), F(2, 3), 1])


def test_tags_round_trip():
    assert tag("v", HALF) == "v@1/2"
    assert untag("v@1/2") == ("v", HALF)
    assert untag("a@b@1") == ("a@b", ONE)
    with pytest.raises(ValueError):
        untag("v")


class TestEmbed:
    def test_contents_and_thresholds(self):
        s = load("competition.psys")
        e = embed(s)
        assert dict(e.initial[1]) == {("a", ONE): 3}
        (anti, *_) = embed(load("shuttle.psys")).rules_of(1)
        assert (anti.threshold_in("b"), anti.threshold_out("t"), anti.threshold_in("t")) == (1, 1, 0)
        assert all(t == 1 for rs in e.rules.values() for r in rs for t in r.grades())

    def test_env_replicated(self):
        e = embed(load("shuttle.psys"), I3)
        assert e.initial[ENV].count("b", HALF) == e.initial[ENV].count("b", ONE) == INF
        assert validate(e) == []

    def test_rejects_fuzzy_input(self):
        with pytest.raises(ConstructionError):
            embed(load("toy.psys"))

    def test_rejects_invalid(self):
        s = load("shuttle.psys")
        broken = type(s)(**{**s.__dict__, "output_membrane": 9})
        with pytest.raises(ConstructionError):
            embed(broken)

    @pytest.mark.parametrize("name", ["competition.psys", "shuttle.psys", "gen24.psys"])
    def test_larger_grade_set_same_positive_gen(self, name):
        s = load(name)
        assert gen(embed(s, I3)).positive() == gen(embed(s)).positive()


class TestSlice:
    def test_expand_examples(self):
        assert expand_rule(Rule({"v": 1}, {}, {"v": HALF}, {}), I3) == sorted(
            [Rule.crisp({"v@1/2": 1}), Rule.crisp({"v@1": 1})]
        )
        assert expand_rule(Rule({"v": 2}, {}, {"v": 1}, {}), I3) == [Rule.crisp({"v@1": 2})]
        assert len(expand_rule(Rule({"v": 1}, {"w": 1}, {"v": HALF}, {"w": 1}), I3)) == 2

    def test_expansion_dedups_permutations(self):
        # grade choices for vv over {1/2, 1}: (1/2,1/2), (1/2,1), (1,1)
        assert len(expand_rule(Rule({"v": 2}, {}, {"v": HALF}, {}), I3)) == 3

    def test_slices_differ_only_in_outputs(self):
        fam = slice_system(load("toy.psys"))
        assert set(fam) == {HALF, ONE}
        a, b = fam[HALF], fam[ONE]
        assert a.output_reactives == ("v@1/2",) and b.output_reactives == ("v@1",)
        assert (a.rules, a.initial, a.structure, a.reactives) == (b.rules, b.initial, b.structure, b.reactives)
        assert validate(a) == []

    def test_configuration_totals_preserved(self):
        s = load("ladder.psys")
        fam = slice_system(s)
        sl = fam[ONE]
        for m in s.structure.regions:
            for (v, t), n in s.initial[m].items():
                assert sl.initial[m].count(tag(v, t), ONE) == n

    def test_rule_cap(self):
        with pytest.raises(ConstructionError):
            slice_system(load("ladder.psys"), max_rules=2)

    def test_slice_transitions_biject(self):
        s = load("grade_sort.psys")
        fam = slice_system(s)
        fuzzy = explore(s)
        crisp = explore(fam[ONE])
        assert fuzzy.visited_count == crisp.visited_count
        assert len(fuzzy.halting) == len(crisp.halting)


class TestCompose:
    def family(self):
        return {HALF: finite_set_generator({1, 2}), ONE: finite_set_generator({1})}

    def test_structure(self):
        c = compose(self.family(), I3)
        assert c.structure.membranes == (1, 2, 3) and c.output_membrane == 2
        (burial,) = c.rules_of(3)
        assert burial.incoming == (("alpha@1/2", 1),) and burial.threshold_in("alpha@1/2") == 1
        assert validate(c) == []

    def test_thresholds(self):
        c = compose(self.family(), I3)
        for m in (1, 2):
            for r in c.rules_of(m):
                for v, _ in r.incoming + r.outgoing:
                    base, t = untag(v)
                    expected = t if base == "alpha" else ONE
                    tau = r.threshold_in(v) if dict(r.incoming).get(v) else r.threshold_out(v)
                    assert tau == expected

    def test_no_initial_alpha(self):
        c = compose(self.family(), I3)
        for t, a in alpha_markers(c).items():
            for m in (1, 2, 3):
                assert c.initial[m].level_sum(a, F(0)) == 0
        assert c.initial[ENV].count("alpha@1/2", ONE) == INF

    def test_successor_in_burial(self):
        fam = {F(1, 3): finite_set_generator({1}), F(2, 3): finite_set_generator({1}), ONE: finite_set_generator({1})}
        c = compose(fam, I4)
        taus = sorted(r.threshold_in(r.incoming[0][0]) for r in c.rules_of(3))
        assert taus == [F(2, 3), ONE]

    def test_single_grade_degenerates(self):
        g = finite_set_generator({2})
        c = compose({ONE: g}, GradeSet.crisp())
        assert c.rules_of(3) == ()
        assert gen(c).positive() == gen(embed(g)).positive() == {2: 1}

    def test_rejects_bad_inputs(self):
        with pytest.raises(ConstructionError):
            compose({ONE: finite_set_generator({1})}, I3)
        with pytest.raises(ConstructionError):
            compose({HALF: load("shuttle.psys"), ONE: finite_set_generator({1})}, I3)
        unannotated = finite_set_generator({1})
        unannotated = type(unannotated)(**{**unannotated.__dict__, "roles": {}})
        with pytest.raises(ConstructionError):
            compose({HALF: unannotated, ONE: finite_set_generator({1})}, I3)

    def test_interval_family_levels(self):
        c = compose(self.family(), I3)
        report = gen(c)
        assert report.exhausted
        g = report.positive()
        assert t_level(g, ONE) == {1} and t_level(g, HALF) == {1, 2}
        for H in report.exploration.halting_configurations:
            assert overgraded_alphas(c, H) == []

    def test_gaps_are_filled_from_below(self):
        # Copies of the half-grade marker pulled at grade 1 are buried, so the
        # half-grade slice also yields every count below each value it generates.
        fam = {HALF: finite_set_generator({2, 4}), ONE: finite_set_generator({2})}
        for g in fam.values():
            assert check_theorem1_shape(g).ok
        assert CrispOracle(fam[HALF]).gen() == {2, 4}
        report = gen(compose(fam, I3))
        assert report.exhausted
        assert t_level(report.positive(), ONE) == {2}
        assert t_level(report.positive(), HALF) == {1, 2, 3, 4}

    def test_slice_generators_verified(self):
        for values in [{1}, {1, 2}, {2, 4}, {1, 2, 3}]:
            g = finite_set_generator(values)
            assert CrispOracle(g).gen() == values == set(gen(g).positive())
