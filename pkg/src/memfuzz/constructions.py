"""System-to-system transformations.

* :func:`embed` turns a crisp system into a fuzzy one whose membranes only
  ever hold exact copies.
* :func:`slice_system` turns a fuzzy system into one crisp system per
  positive grade over the product alphabet ``reactive@grade``.
* :func:`compose` assembles a single fuzzy system from one normal-form crisp
  generator per positive grade, burying over-graded markers in a third
  membrane.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from .fuzzy_core import GradeSet, format_grade
from .system_model import (
    ENV,
    Configuration,
    MembraneStructure,
    PSystem,
    Rule,
    check_theorem1_shape,
    is_crisp,
    validate,
)

__all__ = [
    "ConstructionError",
    "SliceFamily",
    "tag",
    "untag",
    "embed",
    "expand_rule",
    "slice_system",
    "compose",
    "alpha_markers",
    "overgraded_alphas",
]


class ConstructionError(ValueError):
    pass


def tag(v: str, t: Fraction) -> str:
    """Composite reactive id ``v@t``."""
    return f"{v}@{format_grade(t)}"


def untag(name: str) -> tuple[str, Fraction]:
    base, _, g = name.rpartition("@")
    if not base:
        raise ValueError(f"{name!r} carries no grade tag")
    return base, Fraction(g)


def _require_valid(system: PSystem) -> None:
    problems = validate(system)
    if problems:
        raise ConstructionError(
            "invalid input system: " + "; ".join(str(p) for p in problems)
        )


def embed(system: PSystem, grades: GradeSet | None = None) -> PSystem:
    """Fuzzy system whose membranes start with exact copies and whose rules only admit them.

    With a grade set larger than ``{0, 1}`` the environment supply is
    replicated at every positive grade.
    """
    grades = grades or GradeSet.crisp()
    if not is_crisp(system):
        raise ConstructionError("embed expects a crisp system (grades {0, 1})")
    _require_valid(system)
    one = Fraction(1)
    contents = {}
    for m, F in system.initial.items():
        if m == ENV:
            contents[m] = {(v, t): n for (v, _), n in F.items() for t in grades.positive}
        else:
            contents[m] = {(v, one): n for (v, _), n in F.items()}
    rules = {
        m: tuple(Rule.crisp(dict(r.incoming), dict(r.outgoing)) for r in rs)
        for m, rs in system.rules.items()
    }
    return PSystem(
        reactives=system.reactives,
        output_reactives=system.output_reactives,
        structure=system.structure,
        output_membrane=system.output_membrane,
        grades=grades,
        initial=Configuration(contents),
        rules=rules,
        roles=system.roles,
        name=system.name,
    )


@dataclass
class SliceFamily:
    """One crisp system per positive grade; they differ only in output reactives."""

    slices: dict[Fraction, PSystem]

    def __getitem__(self, t) -> PSystem:
        return self.slices[Fraction(t)]

    def __iter__(self):
        return iter(self.slices)

    def __len__(self):
        return len(self.slices)


def _graded_words(word, tau, positive):
    per_reactive = []
    for v, n in word:
        allowed = [t for t in positive if t >= tau(v)]
        per_reactive.append(
            [
                {tag(v, t): combo.count(t) for t in set(combo)}
                for combo in itertools.combinations_with_replacement(allowed, n)
            ]
        )
    for parts in itertools.product(*per_reactive):
        merged: dict[str, int] = {}
        for p in parts:
            merged.update(p)
        yield merged


def expand_rule(rule: Rule, grades: GradeSet) -> list[Rule]:
    """Crisp rules over ``reactive@grade`` realizing every admissible grade choice."""
    pos = grades.positive
    out = {
        Rule.crisp(a, b)
        for a in _graded_words(rule.incoming, rule.threshold_in, pos)
        for b in _graded_words(rule.outgoing, rule.threshold_out, pos)
    }
    return sorted(out)


def slice_system(system: PSystem, max_rules: int = 100_000) -> SliceFamily:
    """Crisp systems over the product alphabet, one per output grade."""
    _require_valid(system)
    pos = system.grades.positive
    one = Fraction(1)
    reactives = [tag(v, t) for v in system.reactives for t in pos]
    contents = {
        m: {(tag(v, t), one): n for (v, t), n in F.items()}
        for m, F in system.initial.items()
    }
    rules: dict[int, list[Rule]] = {}
    total = 0
    for m, rs in system.rules.items():
        for i, r in enumerate(rs):
            expanded = expand_rule(r, system.grades)
            total += len(expanded)
            if total > max_rules:
                raise ConstructionError(
                    f"slicing exceeds {max_rules} rules at rule {i} of membrane {m}: {r}"
                )
            rules.setdefault(m, []).extend(expanded)
    initial = Configuration(contents)
    slices = {
        t: PSystem(
            reactives=reactives,
            output_reactives=[tag(v, t) for v in system.output_reactives],
            structure=system.structure,
            output_membrane=system.output_membrane,
            grades=GradeSet.crisp(),
            initial=initial,
            rules=rules,
            name=system.name,
        )
        for t in pos
    }
    return SliceFamily(slices)


def compose(slices: Mapping, grades: GradeSet, name: str = "composed") -> PSystem:
    """Three-membrane fuzzy system from one normal-form crisp generator per positive grade.

    Every input must carry explicit ``alpha`` and ``hash`` role annotations.
    Reactives of the generator for grade ``t`` are renamed ``v@t``.  The
    marker of grade ``t`` is admitted at grades ``>= t`` and, when ``t < 1``,
    a rule of membrane 3 buries copies graded at least the successor of ``t``.
    """
    slices = {Fraction(t): s for t, s in slices.items()}
    if set(slices) != set(grades.positive):
        raise ConstructionError(
            f"need exactly one generator per positive grade {list(map(format_grade, grades.positive))}"
        )
    one = Fraction(1)
    reactives: set[str] = set()
    roles: dict[str, str] = {}
    contents: dict = {1: {}, 2: {}, ENV: {}}
    rules: dict[int, list[Rule]] = {1: [], 2: [], 3: []}
    for t in sorted(slices):
        s = slices[t]
        _require_valid(s)
        if not s.role("alpha") or not s.role("hash"):
            raise ConstructionError(f"generator for grade {t} lacks alpha/hash annotations")
        report = check_theorem1_shape(s)
        if not report.ok:
            raise ConstructionError(
                f"generator for grade {t} is not in normal form: " + "; ".join(report.notes)
            )
        alpha = report.alpha
        names = {v: tag(v, t) for v in s.reactives}
        clash = reactives & set(names.values())
        if clash:
            raise ConstructionError(f"reactive names collide: {sorted(clash)}")
        reactives |= set(names.values())
        roles[names[alpha]] = "alpha"
        roles[names[report.hash]] = "hash"

        def threshold(v, t=t, alpha=alpha):
            return t if v == alpha else one

        for m in (1, 2):
            for (v, _), n in s.initial[m].items():
                contents[m][(names[v], one)] = n
            for r in s.rules_of(m):
                a = {names[v]: n for v, n in r.incoming}
                b = {names[v]: n for v, n in r.outgoing}
                rules[m].append(
                    Rule(
                        a,
                        b,
                        {names[v]: threshold(v) for v, _ in r.incoming},
                        {names[v]: threshold(v) for v, _ in r.outgoing},
                    )
                )
        for (v, _), n in s.initial[ENV].items():
            for t2 in grades.positive:
                contents[ENV][(names[v], t2)] = n
        if t != 1:
            marker = names[alpha]
            rules[3].append(Rule({marker: 1}, {}, {marker: grades.successor(t)}, {}))
    return PSystem(
        reactives=sorted(reactives),
        output_reactives=sorted(reactives),
        structure=MembraneStructure.linear(3),
        output_membrane=2,
        grades=grades,
        initial=Configuration(contents),
        rules={m: tuple(rs) for m, rs in rules.items()},
        roles=roles,
        name=name,
    )


def alpha_markers(system: PSystem) -> dict[Fraction, str]:
    """Grade -> marker reactive of a composed system, read from its role tags."""
    return {untag(v)[1]: v for v in system.role("alpha")}


def overgraded_alphas(system: PSystem, C: Configuration) -> list[tuple[str, Fraction, int]]:
    """Markers sitting in the output membrane at a grade above their own."""
    out = []
    F = C[system.output_membrane]
    for t, v in sorted(alpha_markers(system).items()):
        for s, n in sorted(F.grades_of(v).items()):
            if s > t and n:
                out.append((v, s, n))
    return out
