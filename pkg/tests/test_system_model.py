import random
from fractions import Fraction as F

import pytest

from builders import finite_set_generator
from conftest import load
from oracles import random_system

from memfuzz.constructions import embed
from memfuzz.engine import Bounds, explore
from memfuzz.fuzzy_core import INF, GradeSet
from memfuzz.system_model import (
    ENV,
    Configuration,
    MembraneStructure,
    PSystem,
    Rule,
    check_theorem1_shape,
    reachable_reactive_grades,
    validate,
)

HALF = F(1, 2)
I3 = GradeSet([0, HALF, 1])


def system(rules, initial=None, grades=I3, parent=None, outputs=("v",), out=1, V=("v", "w")):
    return PSystem(
        reactives=V,
        output_reactives=outputs,
        structure=MembraneStructure(parent or {1: ENV}),
        output_membrane=out,
        grades=grades,
        initial=Configuration(initial or {}),
        rules=rules,
    )


def codes(s):
    return {v.code for v in validate(s)}


class TestStructure:
    def test_linear(self):
        st = MembraneStructure.linear(3)
        assert st.outside(3) == 2 and st.children(1) == (2,)
        assert st.is_elementary(3) and not st.is_elementary(2)
        assert st.regions == (ENV, 1, 2, 3)
        assert st.problems() == []

    def test_bad_trees(self):
        assert MembraneStructure({2: ENV}).problems()
        assert MembraneStructure({1: ENV, 2: ENV}).problems()
        assert MembraneStructure({1: ENV, 2: 3, 3: 2}).problems()
        assert MembraneStructure({1: ENV, 2: 7}).problems()


class TestRule:
    def test_crisp_rule_thresholds(self):
        r = Rule.crisp({"a": 1, "b": 1}, {"c": 1})
        assert r.threshold_in("a") == r.threshold_in("b") == r.threshold_out("c") == 1
        assert r.threshold_in("c") == 0 and r.kind == "antiport"

    def test_word_forms(self):
        assert Rule.crisp("aab").incoming == (("a", 2), ("b", 1))
        assert Rule.crisp([("a", 2)]).incoming == (("a", 2),)
        assert Rule.crisp({"a": 2}) == Rule.crisp("aa")

    def test_zero_thresholds_not_stored(self):
        assert Rule({"v": 1}, {}, {"v": 1, "w": 0}, {}).tau_in == (("v", F(1)),)

    def test_rules_canonical_in_system(self):
        r1, r2 = Rule.crisp({"v": 1}), Rule.crisp(outgoing={"w": 1})
        a = system({1: (r1, r2, r1)})
        b = system({1: (r2, r1)})
        assert a.rules == b.rules and len(a.rules[1]) == 2


class TestValidate:
    def test_toy_is_valid(self):
        assert validate(load("toy.psys")) == []

    def test_threshold_positivity(self):
        s = system({1: (Rule({"v": 2}, {}, {}, {}),)})
        assert "threshold-positivity" in codes(s)
        s = system({1: (Rule({"v": 1}, {}, {"v": 1, "w": HALF}, {}),)})
        assert "threshold-positivity" in codes(s)

    def test_env_homogeneity(self):
        s = system(
            {1: (Rule({"v": 1}, {"w": 1}, {"v": HALF}, {"w": 1}),)},
            {1: {("w", 1): 1}, ENV: {("v", HALF): INF}},
        )
        assert "env-homogeneity" in codes(s)
        s = system({}, {ENV: {("v", HALF): 3, ("v", 1): 3}})
        assert "env-homogeneity" in codes(s)

    def test_infinite_pull(self):
        s = system({1: (Rule.crisp({"v": 1}),)}, {ENV: {("v", HALF): INF, ("v", 1): INF}})
        assert "infinite-pull" in codes(s)

    def test_pull_with_finite_partner_is_fine(self):
        s = system(
            {1: (Rule({"v": 1, "w": 1}, {}, {"v": 1, "w": 1}, {}),)},
            {ENV: {("v", HALF): INF, ("v", 1): INF}},
        )
        assert validate(s) == []

    def test_misc_violations(self):
        s = system({1: (Rule(),)}, {1: {("u", 1): 1, ("v", HALF): INF}}, outputs=("z",), out=4)
        assert {"empty-rule", "undeclared-reactive", "infinite-count", "outputs", "output-membrane"} <= codes(s)

    def test_foreign_grades(self):
        s = system({1: (Rule({"v": 1}, {}, {"v": F(1, 3)}, {}),)}, {1: {("w", F(1, 4)): 1}})
        assert "grade" in codes(s)

    def test_idempotent_and_total(self):
        rng = random.Random(3)
        for _ in range(30):
            s = random_system(rng)
            assert validate(s) == validate(s) == []

    def test_valid_random_systems_simulate(self):
        rng = random.Random(5)
        for _ in range(30):
            explore(random_system(rng), Bounds(max_depth=3, max_configs=300))


class TestShape:
    def test_generator_passes(self):
        report = check_theorem1_shape(finite_set_generator({2, 4}))
        assert report.ok and report.alpha == "alpha" and report.hash == "hash"
        assert report.checks["alpha-sole-entrant"] == "assumed"

    def test_positive_naturals_generator(self):
        assert check_theorem1_shape(load("positive_naturals.psys")).ok

    def test_markers_inferred_without_roles(self):
        s = finite_set_generator({1})
        s = PSystem(**{**s.__dict__, "roles": {}})
        report = check_theorem1_shape(s)
        assert report.ok and report.alpha == "alpha"

    def test_antiport_fails(self):
        report = check_theorem1_shape(load("shuttle.psys"))
        assert report.checks["symport-only"] == "fail"
        assert any("symport-only" in n for n in report.notes)

    def test_three_membranes_fail(self):
        assert check_theorem1_shape(load("ladder.psys")).checks["two-membranes"] == "fail"

    def test_initial_alpha_fails(self):
        s = finite_set_generator({1})
        init = dict(s.initial.items())
        init[2] = {("alpha", 1): 1}
        s = PSystem(**{**s.__dict__, "initial": Configuration(init)})
        assert check_theorem1_shape(s).checks["no-initial-alpha"] == "fail"

    def test_shape_implies_two_membranes(self):
        for name in ["gen1.psys", "gen24.psys", "gen13_dead.psys", "toy.psys", "mixed.psys"]:
            s = load(name)
            if check_theorem1_shape(s).ok:
                assert s.structure.membranes == (1, 2) and s.structure.is_elementary(2)


class TestReachableGrades:
    def test_absent_reactive(self):
        s = system({}, {1: {("w", 1): 1}})
        assert reachable_reactive_grades(s)["v"] == set()

    def test_env_pull(self):
        assert reachable_reactive_grades(load("toy.psys"))["v"] == {HALF, F(1)}

    def test_embedded_crisp(self):
        s = embed(finite_set_generator({2}), I3)
        for grades in reachable_reactive_grades(s).values():
            assert grades in (set(), {F(1)})
