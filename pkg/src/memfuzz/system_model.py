"""Static description of (fuzzy) symport/antiport membrane systems."""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .fuzzy_core import INF, FuzzyMultiset, GradeSet, as_grade

__all__ = [
    "ENV",
    "Region",
    "region_key",
    "MembraneStructure",
    "Rule",
    "Configuration",
    "PSystem",
    "Violation",
    "ShapeReport",
    "validate",
    "is_crisp",
    "check_theorem1_shape",
    "reachable_reactive_grades",
]

ENV = "env"
Region = Union[int, str]


def region_key(m: Region) -> tuple[int, int]:
    """Sort key putting the environment first, then membranes by label."""
    return (0, 0) if m == ENV else (1, int(m))


@dataclass(frozen=True)
class MembraneStructure:
    """A rooted tree of membranes; ``parent[1]`` is :data:`ENV`."""

    parent: Mapping[int, Region]

    def __post_init__(self):
        object.__setattr__(self, "parent", dict(sorted(self.parent.items())))

    @classmethod
    def linear(cls, depth: int) -> "MembraneStructure":
        return cls({m: (ENV if m == 1 else m - 1) for m in range(1, depth + 1)})

    @property
    def membranes(self) -> tuple[int, ...]:
        return tuple(self.parent)

    @property
    def regions(self) -> tuple[Region, ...]:
        return (ENV,) + self.membranes

    def outside(self, m: int) -> Region:
        """The region directly surrounding membrane ``m``."""
        return self.parent[m]

    def children(self, m: Region) -> tuple[int, ...]:
        return tuple(c for c, p in self.parent.items() if p == m)

    def is_elementary(self, m: int) -> bool:
        return not self.children(m)

    def problems(self) -> list[str]:
        out = []
        if 1 not in self.parent:
            out.append("skin membrane 1 is missing")
        elif self.parent[1] != ENV:
            out.append("membrane 1 must sit directly in env")
        for m, p in self.parent.items():
            if isinstance(m, bool) or not isinstance(m, int) or m < 1:
                out.append(f"membrane label {m!r} is not a positive integer")
            if m != 1 and p == ENV:
                out.append(f"only the skin may sit in env, not membrane {m}")
            elif p != ENV and p not in self.parent:
                out.append(f"membrane {m} has unknown parent {p!r}")
        for m in self.parent:
            seen = {m}
            p = self.parent[m]
            while p != ENV and p in self.parent:
                if p in seen:
                    out.append(f"membrane {m} lies on a cycle")
                    break
                seen.add(p)
                p = self.parent[p]
        return out


def _counts(word) -> tuple[tuple[str, int], ...]:
    if word is None:
        return ()
    items = word.items() if isinstance(word, Mapping) else _letters(word)
    acc: dict[str, int] = {}
    for v, n in items:
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ValueError(f"bad multiplicity {n!r} for {v!r}")
        if n:
            acc[str(v)] = acc.get(str(v), 0) + n
    return tuple(sorted(acc.items()))


def _letters(word: Iterable):
    # either a string of single letters, names, or (name, count) pairs
    for v in word:
        if isinstance(v, tuple):
            yield v
        else:
            yield v, 1


def _thresholds(tau) -> tuple[tuple[str, Fraction], ...]:
    if not tau:
        return ()
    out = {str(v): as_grade(t) for v, t in tau.items()}
    return tuple(sorted((v, t) for v, t in out.items() if t != 0))


@dataclass(frozen=True, order=True)
class Rule:
    """``((a, in; b, out), tau_in, tau_out)`` attached to some membrane.

    Words are stored as sorted count maps; thresholds of 0 are not stored.
    """

    incoming: tuple[tuple[str, int], ...] = ()
    outgoing: tuple[tuple[str, int], ...] = ()
    tau_in: tuple[tuple[str, Fraction], ...] = ()
    tau_out: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "incoming", _counts(self.incoming))
        object.__setattr__(self, "outgoing", _counts(self.outgoing))
        object.__setattr__(self, "tau_in", _thresholds(dict(self.tau_in)))
        object.__setattr__(self, "tau_out", _thresholds(dict(self.tau_out)))

    @classmethod
    def crisp(cls, incoming=None, outgoing=None) -> "Rule":
        """A rule whose thresholds are 1 on every moved reactive."""
        a, b = _counts(incoming), _counts(outgoing)
        return cls(a, b, {v: 1 for v, _ in a}, {v: 1 for v, _ in b})

    @property
    def kind(self) -> str:
        if self.incoming and self.outgoing:
            return "antiport"
        if self.incoming:
            return "symport-in"
        if self.outgoing:
            return "symport-out"
        return "empty"

    def count_in(self, v: str) -> int:
        return dict(self.incoming).get(v, 0)

    def count_out(self, v: str) -> int:
        return dict(self.outgoing).get(v, 0)

    def threshold_in(self, v: str) -> Fraction:
        return dict(self.tau_in).get(v, Fraction(0))

    def threshold_out(self, v: str) -> Fraction:
        return dict(self.tau_out).get(v, Fraction(0))

    def reactives(self) -> set[str]:
        return {v for v, _ in self.incoming + self.outgoing + self.tau_in + self.tau_out}

    def grades(self) -> set[Fraction]:
        return {t for _, t in self.tau_in + self.tau_out}


class Configuration(Mapping):
    """Immutable family of region contents, one fuzzy multiset per region.

    Regions not listed are empty.  Equality and hashing ignore empty regions.
    """

    __slots__ = ("_contents", "_key")

    def __init__(self, contents: Mapping[Region, Union[FuzzyMultiset, Mapping]] = ()):
        items = dict(contents).items()
        data = {}
        for m, F in items:
            F = F if isinstance(F, FuzzyMultiset) else FuzzyMultiset(F)
            if len(F):
                data[m] = F
        self._contents = dict(sorted(data.items(), key=lambda kv: region_key(kv[0])))
        self._key = None

    def __getitem__(self, m: Region) -> FuzzyMultiset:
        return self._contents.get(m, _EMPTY)

    def __iter__(self):
        return iter(self._contents)

    def __len__(self) -> int:
        return len(self._contents)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._contents == other._contents
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return "Configuration(%r)" % (self._contents,)

    def key(self) -> tuple:
        """Canonical tuple sorted by (region, reactive, grade)."""
        if self._key is None:
            self._key = tuple(
                (m, tuple(F.items())) for m, F in self._contents.items()
            )
        return self._key

    def serialize(self) -> str:
        """Canonical text form; ``inf`` stands for an unbounded count."""
        parts = []
        for m, F in self._contents.items():
            body = ",".join(
                f"{v}@{t}:{'inf' if n == INF else n}" for (v, t), n in F.items()
            )
            parts.append(f"{m}[{body}]")
        return ";".join(parts)

    def replace(self, updates: Mapping[Region, FuzzyMultiset]) -> "Configuration":
        data = dict(self._contents)
        data.update(updates)
        return Configuration(data)


_EMPTY = FuzzyMultiset()


@dataclass(frozen=True)
class PSystem:
    """A fuzzy symport/antiport P-system.

    A crisp system is the special case whose grade set is ``{0, 1}``.
    ``roles`` optionally marks reactives as ``"alpha"`` or ``"hash"``.
    Rules are kept per membrane in a canonical sorted order without duplicates.
    """

    reactives: tuple[str, ...]
    output_reactives: tuple[str, ...]
    structure: MembraneStructure
    output_membrane: int
    grades: GradeSet
    initial: Configuration
    rules: Mapping[int, tuple[Rule, ...]]
    roles: Mapping[str, str] = field(default_factory=dict)
    name: str = "system"

    def __post_init__(self):
        object.__setattr__(self, "reactives", tuple(sorted(set(self.reactives))))
        object.__setattr__(self, "output_reactives", tuple(sorted(set(self.output_reactives))))
        if not isinstance(self.initial, Configuration):
            object.__setattr__(self, "initial", Configuration(self.initial))
        rules = {m: tuple(sorted(set(rs))) for m, rs in self.rules.items() if rs}
        object.__setattr__(self, "rules", dict(sorted(rules.items())))
        object.__setattr__(self, "roles", dict(sorted(self.roles.items())))

    def rules_of(self, m: int) -> tuple[Rule, ...]:
        return self.rules.get(m, ())

    def rule_refs(self) -> list[tuple[int, int]]:
        """All ``(membrane, rule_index)`` pairs in canonical order."""
        return [(m, i) for m in sorted(self.rules) for i in range(len(self.rules[m]))]

    def env_supplied(self) -> set[str]:
        """Reactives with an unbounded environment supply at some grade."""
        return {v for (v, _), n in self.initial[ENV].items() if n == INF}

    def role(self, name: str) -> list[str]:
        return [v for v, r in self.roles.items() if r == name]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def validate(system: PSystem) -> list[Violation]:
    """Check every well-formedness condition; an empty list means valid."""
    out: list[Violation] = []

    def bad(code, msg):
        out.append(Violation(code, msg))

    V = set(system.reactives)
    I = system.grades
    st = system.structure
    for p in st.problems():
        bad("structure", p)
    M = set(st.membranes)

    if system.output_membrane not in M:
        bad("output-membrane", f"output membrane {system.output_membrane!r} is not a membrane")
    for v in system.output_reactives:
        if v not in V:
            bad("outputs", f"output reactive {v!r} is not declared")
    for v, r in system.roles.items():
        if v not in V:
            bad("roles", f"role annotation on undeclared reactive {v!r}")
        if r not in ("alpha", "hash"):
            bad("roles", f"unknown role {r!r} on {v!r}")

    for m, F in system.initial.items():
        if m != ENV and m not in M:
            bad("unknown-region", f"initial contents given for unknown region {m!r}")
        for (v, t), n in F.items():
            if v not in V:
                bad("undeclared-reactive", f"{v!r} in initial contents of {m} is not declared")
            if t not in I:
                bad("grade", f"grade {t} of {v!r} in region {m} is not in {I!r}")
            if m != ENV and n == INF:
                bad("infinite-count", f"membrane {m} holds infinitely many {v}@{t}")

    env = system.initial[ENV]
    for v in sorted(env.reactives()):
        vals = {env.count(v, t) for t in I.positive}
        if vals != {INF}:
            bad(
                "env-homogeneity",
                f"env supply of {v!r} must be 0 at every grade or unbounded at every grade",
            )

    supplied = system.env_supplied()
    for m, rules in system.rules.items():
        if m not in M:
            bad("unknown-region", f"rules attached to unknown membrane {m!r}")
        for i, r in enumerate(rules):
            where = f"rule {i} of membrane {m}"
            if r.kind == "empty":
                bad("empty-rule", f"{where} moves nothing")
            for v in r.reactives():
                if v not in V:
                    bad("undeclared-reactive", f"{where} mentions undeclared {v!r}")
            for t in r.grades():
                if t not in I:
                    bad("grade", f"{where} uses threshold {t} outside {I!r}")
            for word, tau, side in (
                (r.incoming, r.tau_in, "in"),
                (r.outgoing, r.tau_out, "out"),
            ):
                moved = {v for v, _ in word}
                gated = {v for v, _ in tau}
                for v in sorted(moved - gated):
                    bad("threshold-positivity", f"{where}: tau_{side}({v}) must be > 0")
                for v in sorted(gated - moved):
                    bad("threshold-positivity", f"{where}: tau_{side}({v}) must be 0")
            if (
                m == 1
                and r.kind == "symport-in"
                and all(v in supplied for v, _ in r.incoming)
            ):
                bad(
                    "infinite-pull",
                    f"{where} pulls only env-unbounded reactives into the skin",
                )
    return out


def is_crisp(system: PSystem) -> bool:
    return system.grades == GradeSet.crisp()


@dataclass
class ShapeReport:
    """Outcome of the normal-form check for crisp generators.

    ``checks`` maps each condition to ``"pass"``, ``"fail"`` or ``"assumed"``.
    """

    checks: dict[str, str]
    notes: list[str]
    alpha: str | None = None
    hash: str | None = None

    @property
    def ok(self) -> bool:
        return all(v != "fail" for v in self.checks.values())

    def __bool__(self) -> bool:
        return self.ok


def _identify_markers(system: PSystem, rules: tuple[Rule, ...]):
    alphas, hashes = system.role("alpha"), system.role("hash")
    if len(alphas) > 1 or len(hashes) > 1:
        return None, None, "more than one alpha/hash annotation"
    # reactives moved alone, one copy at a time
    single_in = {r.incoming[0][0] for r in rules if len(r.incoming) == 1 and not r.outgoing and r.incoming[0][1] == 1}
    single_out = {r.outgoing[0][0] for r in rules if len(r.outgoing) == 1 and not r.incoming and r.outgoing[0][1] == 1}
    alpha = alphas[0] if alphas else None
    hash_ = hashes[0] if hashes else None
    if hash_ is None:
        both = sorted(single_in & single_out)
        hash_ = both[0] if len(both) == 1 else None
    if alpha is None:
        only_in = sorted(single_in - single_out - {hash_})
        alpha = only_in[0] if len(only_in) == 1 else None
    return alpha, hash_, None


def check_theorem1_shape(system: PSystem) -> ShapeReport:
    """Syntactic check of the normal form required of composable crisp generators.

    Conditions: crisp grades; exactly membranes 1 and 2 with 2 inside 1;
    output membrane 2 (the elementary one); symport rules only; every
    reactive is an output reactive; membrane 2 has exactly the rules
    ``(alpha, in)``, ``(hash, in)``, ``(hash, out)``; no initial alpha in
    membranes 1 and 2.  That alpha is the only reactive able to enter the
    output membrane in a halting computation is not decidable syntactically
    and is reported as ``"assumed"``.
    """
    checks: dict[str, str] = {}
    notes: list[str] = []

    def record(name, ok, why=""):
        checks[name] = "pass" if ok else "fail"
        if not ok and why:
            notes.append(f"{name}: {why}")

    record("crisp", is_crisp(system), f"grade set is {system.grades!r}")
    st = system.structure
    record(
        "two-membranes",
        set(st.membranes) == {1, 2} and st.parent.get(2) == 1,
        f"membranes {list(st.membranes)}",
    )
    record(
        "output-elementary",
        system.output_membrane == 2 and 2 in st.parent and st.is_elementary(2),
        f"output membrane is {system.output_membrane}",
    )
    non_symport = [
        (m, i) for m, rs in system.rules.items() for i, r in enumerate(rs) if r.kind == "antiport"
    ]
    record("symport-only", not non_symport, f"antiport rules at {non_symport}")
    record(
        "all-outputs",
        set(system.output_reactives) == set(system.reactives),
        "some reactives are not output reactives",
    )

    out_rules = system.rules_of(2)
    alpha, hash_, err = _identify_markers(system, out_rules)
    expected = None
    if alpha is not None and hash_ is not None and alpha != hash_:
        expected = {
            Rule.crisp(incoming={alpha: 1}),
            Rule.crisp(incoming={hash_: 1}),
            Rule.crisp(outgoing={hash_: 1}),
        }
    record(
        "output-rules",
        expected is not None and set(out_rules) == expected,
        err or "membrane 2 must carry exactly (alpha,in), (hash,in), (hash,out)",
    )
    no_alpha = alpha is not None and all(
        system.initial[m].level_sum(alpha, Fraction(0)) == 0 for m in (1, 2)
    )
    record("no-initial-alpha", no_alpha, "alpha occurs initially in membrane 1 or 2")
    checks["alpha-sole-entrant"] = "assumed"
    return ShapeReport(checks, notes, alpha, hash_)


def reachable_reactive_grades(system: PSystem) -> dict[str, set[Fraction]]:
    """Over-approximate the grades at which each reactive can occur inside membranes.

    Objects never change grade; they enter the membranes either from the
    initial contents or from the environment through a skin rule whose
    threshold admits them.
    """
    out: dict[str, set[Fraction]] = {v: set() for v in system.reactives}
    for m, F in system.initial.items():
        if m == ENV:
            continue
        for (v, t), _ in F.items():
            out.setdefault(v, set()).add(t)
    env = system.initial[ENV]
    for r in system.rules_of(1):
        for v, _ in r.incoming:
            tau = r.threshold_in(v)
            for (w, t), n in env.items():
                if w == v and t >= tau:
                    out.setdefault(v, set()).add(t)
    return out
