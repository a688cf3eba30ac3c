"""Maximal-parallel semantics of fuzzy symport/antiport systems.

A transition is a maximal family of rule instances (a multiset over the
rules of all membranes) together with, for every instance and every moved
reactive, a choice of how many of the moved copies are taken at each grade.

Families are tested against the aggregate level-sum inequalities: for every
region ``R``, reactive ``v`` and positive grade ``t``, the copies of ``v``
demanded from ``R`` by instances whose threshold for ``v`` is at least ``t``
must not exceed the copies of ``v`` in ``R`` with grade at least ``t``.
Because the admissible grade sets of the demands are nested up-sets of a
total order, those inequalities hold exactly when a per-grade allocation
exists (a Hall-type argument); the test suite checks that equivalence.
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .fuzzy_core import INF, FuzzyMultiset, ext_add
from .system_model import ENV, Configuration, PSystem, Region, Rule, region_key

log = logging.getLogger(__name__)

__all__ = [
    "Bounds",
    "Distribution",
    "RuleInstance",
    "TransitionChoice",
    "Edge",
    "ExplorationResult",
    "EngineError",
    "TransitionLimitExceeded",
    "InvariantViolation",
    "can_trigger",
    "is_halting",
    "enumerate_applications",
    "apply_one",
    "apply_choice",
    "satisfies_demand_bounds",
    "is_maximal",
    "enumerate_families",
    "enumerate_transitions",
    "check_edge",
    "explore",
]


class EngineError(Exception):
    pass


class TransitionLimitExceeded(EngineError):
    """More transitions than allowed leave one configuration.

    ``partial`` holds the transitions enumerated before the cap was hit.
    """

    def __init__(self, limit: int, partial: list):
        super().__init__(f"more than {limit} transitions from one configuration")
        self.limit = limit
        self.partial = partial


class InvariantViolation(EngineError):
    pass


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 64
    max_configs: int = 100_000
    max_transitions_per_config: int = 10_000


GradeMap = tuple[tuple[Fraction, int], ...]


@dataclass(frozen=True, order=True)
class Distribution:
    """Per-reactive grade choices for one rule application.

    ``enter`` and ``exit`` map each moved reactive to ``((grade, count), ...)``.
    """

    enter: tuple[tuple[str, GradeMap], ...] = ()
    exit: tuple[tuple[str, GradeMap], ...] = ()

    def enter_of(self, v: str) -> dict[Fraction, int]:
        return dict(dict(self.enter).get(v, ()))

    def exit_of(self, v: str) -> dict[Fraction, int]:
        return dict(dict(self.exit).get(v, ()))


@dataclass(frozen=True, order=True)
class RuleInstance:
    membrane: int
    rule_index: int
    distribution: Distribution


@dataclass(frozen=True)
class TransitionChoice:
    """A multiset of rule instances, stored sorted."""

    instances: tuple[RuleInstance, ...]

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(sorted(self.instances)))

    def family(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for inst in self.instances:
            key = (inst.membrane, inst.rule_index)
            out[key] = out.get(key, 0) + 1
        return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# static demand tables


@dataclass(frozen=True)
class _Demand:
    rule: int  # position in the system's canonical rule list
    source: Region
    target: Region
    reactive: str
    count: int
    threshold: Fraction
    side: str  # "in" or "out"


class _Tables:
    """Per-system lookup tables, built once and cached on the system object."""

    def __init__(self, system: PSystem):
        st = system.structure
        self.refs = system.rule_refs()
        self.rules: list[Rule] = [system.rules[m][i] for m, i in self.refs]
        self.demands: list[list[_Demand]] = []
        for j, ((m, _), r) in enumerate(zip(self.refs, self.rules)):
            outside = st.outside(m)
            ds = [_Demand(j, outside, m, v, n, r.threshold_in(v), "in") for v, n in r.incoming]
            ds += [_Demand(j, m, outside, v, n, r.threshold_out(v), "out") for v, n in r.outgoing]
            self.demands.append(ds)
        # one row per (region, reactive, grade): coefficients of the rules
        positive = system.grades.positive
        rows: dict[tuple, dict[int, int]] = {}
        for ds in self.demands:
            for d in ds:
                for t in positive:
                    if d.threshold >= t:
                        row = rows.setdefault((d.source, d.reactive, t), {})
                        row[d.rule] = row.get(d.rule, 0) + d.count
        self.rows = sorted(rows.items(), key=lambda kv: (region_key(kv[0][0]), kv[0][1], kv[0][2]))
        # demands grouped by the (region, reactive) they draw from
        groups: dict[tuple[Region, str], list[_Demand]] = {}
        for ds in self.demands:
            for d in ds:
                groups.setdefault((d.source, d.reactive), []).append(d)
        self.groups = sorted(groups.items(), key=lambda kv: (region_key(kv[0][0]), kv[0][1]))
        self.positive = positive


def _tables(system: PSystem) -> _Tables:
    tab = system.__dict__.get("_engine_tables")
    if tab is None:
        tab = _Tables(system)
        object.__setattr__(system, "_engine_tables", tab)
    return tab


def _rule_position(system: PSystem, m: int, r: int) -> int:
    if m not in system.structure.parent:
        raise EngineError(f"unknown membrane {m!r}")
    if not 0 <= r < len(system.rules_of(m)):
        raise EngineError(f"membrane {m} has no rule {r}")
    return _tables(system).refs.index((m, r))


# ---------------------------------------------------------------------------
# single rules


def can_trigger(system: PSystem, C: Configuration, m: int, r: int) -> bool:
    """Whether one instance of rule ``r`` of membrane ``m`` fits in ``C``."""
    j = _rule_position(system, m, r)
    for d in _tables(system).demands[j]:
        if C[d.source].level_sum(d.reactive, d.threshold) < d.count:
            return False
    return True


def is_halting(system: PSystem, C: Configuration) -> bool:
    return not any(can_trigger(system, C, m, r) for m, r in system.rule_refs())


def _compositions(total: int, options: Sequence[tuple[Fraction, float]]) -> Iterator[GradeMap]:
    """All ways to take ``total`` copies from ``(grade, available)`` cells.

    Yields ``((grade, n), ...)`` with positive ``n`` only, in a fixed order.
    """
    if total == 0:
        yield ()
        return
    if not options:
        return
    (t, cap), rest = options[0], options[1:]
    room = sum(c for _, c in rest)
    lo = max(0, total - room) if room != INF else 0
    hi = min(total, cap)
    for n in range(hi, lo - 1, -1):
        for tail in _compositions(total - n, rest):
            yield ((t, n),) + tail if n else tail


def _cells(F: FuzzyMultiset, v: str, threshold: Fraction, positive) -> list[tuple[Fraction, float]]:
    return [(t, F.count(v, t)) for t in positive if t >= threshold and F.count(v, t)]


def enumerate_applications(system: PSystem, C: Configuration, m: int, r: int) -> list[Distribution]:
    """Every grade distribution for one application of the rule, in canonical order."""
    if not can_trigger(system, C, m, r):
        raise EngineError(f"rule {r} of membrane {m} cannot be triggered")
    j = _rule_position(system, m, r)
    return _instance_options(system, C, j)


def _instance_options(system: PSystem, C: Configuration, j: int) -> list[Distribution]:
    tab = _tables(system)
    ins, outs = [], []
    for d in tab.demands[j]:
        cells = _cells(C[d.source], d.reactive, d.threshold, tab.positive)
        choices = [(d.reactive, g) for g in _compositions(d.count, cells)]
        (ins if d.side == "in" else outs).append(choices)
    result = [
        Distribution(tuple(a), tuple(b))
        for a in itertools.product(*ins)
        for b in itertools.product(*outs)
    ]
    return sorted(set(result))


def _instance_deltas(
    system: PSystem, inst: RuleInstance
) -> tuple[dict[tuple[Region, str, Fraction], int], dict]:
    """Per-cell draws and arrivals of one instance, after checking its shape."""
    rule = system.rules_of(inst.membrane)[inst.rule_index]
    outside = system.structure.outside(inst.membrane)
    draws: dict[tuple[Region, str, Fraction], int] = {}
    arrivals: dict[tuple[Region, str, Fraction], int] = {}
    for side, word, tau, src, dst, dist in (
        ("in", rule.incoming, rule.threshold_in, outside, inst.membrane, inst.distribution.enter),
        ("out", rule.outgoing, rule.threshold_out, inst.membrane, outside, inst.distribution.exit),
    ):
        dist_map = dict(dist)
        if set(dist_map) - {v for v, _ in word}:
            raise EngineError(f"distribution moves reactives the rule does not move ({side})")
        for v, n in word:
            gm = dict(dist_map.get(v, ()))
            if sum(gm.values()) != n:
                raise EngineError(f"distribution for {v} ({side}) must move exactly {n} copies")
            for t, k in gm.items():
                if k < 0 or t < tau(v) or t not in system.grades or t == 0:
                    raise EngineError(f"bad grade choice {t}:{k} for {v} ({side})")
                if k:
                    draws[(src, v, t)] = draws.get((src, v, t), 0) + k
                    arrivals[(dst, v, t)] = arrivals.get((dst, v, t), 0) + k
    return draws, arrivals


def _apply(C: Configuration, draws, arrivals) -> Configuration:
    for (m, v, t), k in draws.items():
        if C[m].count(v, t) < k:
            raise EngineError(f"region {m} has fewer than {k} copies of {v}@{t}")
    deltas: dict[Region, dict] = {}
    for (m, v, t), k in draws.items():
        deltas.setdefault(m, {})
        deltas[m][(v, t)] = deltas[m].get((v, t), 0) - k
    for (m, v, t), k in arrivals.items():
        deltas.setdefault(m, {})
        deltas[m][(v, t)] = deltas[m].get((v, t), 0) + k
    return C.replace({m: C[m].updated(d) for m, d in deltas.items()})


def apply_one(system: PSystem, C: Configuration, instance: RuleInstance) -> Configuration:
    """Result of applying a single rule instance to ``C``."""
    draws, arrivals = _instance_deltas(system, instance)
    return _apply(C, draws, arrivals)


def apply_choice(system: PSystem, C: Configuration, choice: TransitionChoice) -> Configuration:
    """Simultaneous application of all instances; every draw is taken from ``C``."""
    draws: dict = {}
    arrivals: dict = {}
    for inst in choice.instances:
        d, a = _instance_deltas(system, inst)
        for k, n in d.items():
            draws[k] = draws.get(k, 0) + n
        for k, n in a.items():
            arrivals[k] = arrivals.get(k, 0) + n
    return _apply(C, draws, arrivals)


# ---------------------------------------------------------------------------
# families


def _family_vector(system: PSystem, family) -> list[int]:
    tab = _tables(system)
    counts = [0] * len(tab.refs)
    items = family.items() if isinstance(family, Mapping) else ((ref, 1) for ref in family)
    for (m, r), k in items:
        counts[_rule_position(system, m, r)] += k
    return counts


def _residuals(system: PSystem, C: Configuration, counts: Sequence[int]) -> list[tuple[float, dict]]:
    out = []
    for (region, v, t), coeffs in _tables(system).rows:
        supply = C[region].level_sum(v, t)
        used = sum(c * counts[j] for j, c in coeffs.items())
        out.append((supply - used, coeffs))
    return out


def satisfies_demand_bounds(system: PSystem, C: Configuration, family) -> bool:
    """Aggregate level-sum feasibility of a family of rule instances.

    ``family`` is either a mapping ``(membrane, rule_index) -> multiplicity``
    or an iterable of ``(membrane, rule_index)`` pairs, one per instance.
    """
    counts = _family_vector(system, family)
    return all(res >= 0 for res, _ in _residuals(system, C, counts))


def is_maximal(system: PSystem, C: Configuration, family) -> bool:
    """Whether no further instance of any rule can join a feasible family."""
    counts = _family_vector(system, family)
    res = _residuals(system, C, counts)
    if any(r < 0 for r, _ in res):
        raise EngineError("family exceeds the available supply")
    for j in range(len(counts)):
        if all(r >= coeffs.get(j, 0) for r, coeffs in res):
            return False
    return True


def enumerate_families(system: PSystem, C: Configuration) -> list[dict[tuple[int, int], int]]:
    """All maximal feasible families, as ``(membrane, rule_index) -> k`` maps.

    A halting configuration yields the single empty family.
    """
    tab = _tables(system)
    n = len(tab.refs)
    supplies = [C[region].level_sum(v, t) for (region, v, t), _ in tab.rows]
    finite_rows = [i for i, s in enumerate(supplies) if s != INF]
    rows_of = [[i for i in finite_rows if j in tab.rows[i][1]] for j in range(n)]
    for j in range(n):
        if not rows_of[j]:
            m, r = tab.refs[j]
            raise EngineError(f"rule {r} of membrane {m} is not bounded by any finite supply")
    # a rule whose rows no later rule touches must be taken as often as possible
    later_rows = [set() for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        later_rows[j] = later_rows[j + 1] | set(rows_of[j])
    forced = [not (set(rows_of[j]) & later_rows[j + 1]) for j in range(n)]

    residual = list(supplies)
    counts = [0] * n
    found: list[tuple[int, ...]] = []

    def room(j):
        return min(residual[i] // tab.rows[i][1][j] for i in rows_of[j])

    def dfs(j):
        if j == n:
            if all(room(k) < 1 for k in range(n)):
                found.append(tuple(counts))
            return
        hi = int(room(j))
        choices = [hi] if forced[j] else range(hi, -1, -1)
        for k in choices:
            counts[j] = k
            for i in rows_of[j]:
                residual[i] -= k * tab.rows[i][1][j]
            dfs(j + 1)
            for i in rows_of[j]:
                residual[i] += k * tab.rows[i][1][j]
        counts[j] = 0

    dfs(0)
    found.sort()
    return [{tab.refs[j]: k for j, k in enumerate(vec) if k} for vec in found]


# ---------------------------------------------------------------------------
# transitions


def _allocations_for_family(system: PSystem, C: Configuration, counts: Sequence[int]):
    """Yield aggregated per-demand grade maps satisfying the per-grade supplies.

    Each item is a list aligned with the active demands: ``(demand, k, gradeMap)``
    where ``gradeMap`` distributes ``k * demand.count`` copies.
    """
    tab = _tables(system)
    per_group = []
    for (region, v), demands in tab.groups:
        active = [(d, counts[d.rule]) for d in demands if counts[d.rule]]
        if not active:
            continue
        F = C[region]
        supply = {t: F.count(v, t) for t in tab.positive}
        per_group.append(list(_group_allocations(active, supply, tab.positive)))
    for combo in itertools.product(*per_group):
        yield [item for group in combo for item in group]


def _group_allocations(active, supply, positive):
    if not active:
        yield []
        return
    (d, k), rest = active[0], active[1:]
    cells = [(t, supply[t]) for t in positive if t >= d.threshold and supply[t]]
    for gm in _compositions(k * d.count, cells):
        for t, n in gm:
            supply[t] -= n
        for tail in _group_allocations(rest, supply, positive):
            yield [(d, k, gm)] + tail
        for t, n in gm:
            supply[t] += n


def _split(gm: GradeMap, k: int, size: int) -> list[GradeMap]:
    """Cut an aggregated grade map into ``k`` maps of ``size`` copies each."""
    tokens = [t for t, n in gm for _ in range(n)]
    out = []
    for i in range(k):
        chunk = tokens[i * size:(i + 1) * size]
        out.append(tuple((t, chunk.count(t)) for t in sorted(set(chunk))))
    return out


def _choice_from_allocation(tab: _Tables, counts, allocation) -> TransitionChoice:
    per_rule: dict[int, dict[str, list]] = {}
    for d, k, gm in allocation:
        side = per_rule.setdefault(d.rule, {"in": [], "out": []})
        side[d.side].append((d.reactive, _split(gm, k, d.count)))
    instances = []
    for j, k in enumerate(counts):
        if not k:
            continue
        side = per_rule[j]
        m, r = tab.refs[j]
        for i in range(k):
            enter = tuple(sorted((v, parts[i]) for v, parts in side["in"]))
            exit_ = tuple(sorted((v, parts[i]) for v, parts in side["out"]))
            instances.append(RuleInstance(m, r, Distribution(enter, exit_)))
    return TransitionChoice(tuple(instances))


def _result_of_allocation(C: Configuration, allocation) -> Configuration:
    deltas: dict[Region, dict] = {}
    for d, _, gm in allocation:
        src = deltas.setdefault(d.source, {})
        dst = deltas.setdefault(d.target, {})
        for t, n in gm:
            src[(d.reactive, t)] = src.get((d.reactive, t), 0) - n
            dst[(d.reactive, t)] = dst.get((d.reactive, t), 0) + n
    return C.replace({m: C[m].updated(dl) for m, dl in deltas.items()})


def _choices_for_family(system: PSystem, C: Configuration, counts: Sequence[int]):
    """Every multiset of per-instance distributions that fits the supplies."""
    tab = _tables(system)
    per_rule = []
    for j, k in enumerate(counts):
        if not k:
            continue
        m, r = tab.refs[j]
        opts = _instance_options(system, C, j)
        per_rule.append(
            [tuple(RuleInstance(m, r, d) for d in combo)
             for combo in itertools.combinations_with_replacement(opts, k)]
        )
    for combo in itertools.product(*per_rule):
        choice = TransitionChoice(tuple(i for part in combo for i in part))
        try:
            yield choice, apply_choice(system, C, choice)
        except EngineError:
            continue


def enumerate_transitions(
    system: PSystem,
    C: Configuration,
    dedup_by_result: bool = True,
    limit: int | None = None,
) -> list[tuple[TransitionChoice, Configuration]]:
    """All transitions leaving ``C``; empty exactly when ``C`` is halting.

    With ``dedup_by_result`` (the default) one representative choice is kept
    per resulting configuration; otherwise every distinct choice is listed.
    Raises :class:`TransitionLimitExceeded` past ``limit`` entries.
    """
    tab = _tables(system)
    families = enumerate_families(system, C)
    if families == [{}]:
        return []
    out: list[tuple[TransitionChoice, Configuration]] = []
    seen: set = set()
    for fam in families:
        counts = _family_vector(system, fam)
        if dedup_by_result:
            pairs = (
                (alloc, _result_of_allocation(C, alloc))
                for alloc in _allocations_for_family(system, C, counts)
            )
            for alloc, result in pairs:
                if result in seen:
                    continue
                seen.add(result)
                out.append((_choice_from_allocation(tab, counts, alloc), result))
                if limit is not None and len(out) > limit:
                    raise TransitionLimitExceeded(limit, out[:limit])
        else:
            for choice, result in _choices_for_family(system, C, counts):
                out.append((choice, result))
                if limit is not None and len(out) > limit:
                    raise TransitionLimitExceeded(limit, out[:limit])
    return out


# ---------------------------------------------------------------------------
# exploration


def check_edge(system: PSystem, before: Configuration, after: Configuration) -> None:
    """Raise :class:`InvariantViolation` unless the step conserves objects.

    Per (reactive, grade): unbounded cells stay unbounded, finite totals are
    unchanged when no region holds that cell unboundedly, and no membrane
    other than the environment becomes unbounded.
    """
    cells = set()
    for C in (before, after):
        for m, F in C.items():
            if m != ENV and F.has_infinite():
                raise InvariantViolation(f"membrane {m} holds an unbounded count")
            cells.update(F.keys())
    for v, t in sorted(cells):
        inf_before = {m for m, F in before.items() if F.count(v, t) == INF}
        inf_after = {m for m, F in after.items() if F.count(v, t) == INF}
        if inf_before != inf_after:
            raise InvariantViolation(f"unbounded cells of {v}@{t} changed")
        if inf_before:
            continue
        tb = sum(F.count(v, t) for F in before.values())
        ta = sum(F.count(v, t) for F in after.values())
        if tb != ta:
            raise InvariantViolation(f"{v}@{t}: {tb} copies became {ta}")


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    choice: TransitionChoice


@dataclass
class ExplorationResult:
    """Breadth-first exploration of the computation tree.

    Configurations are numbered in discovery order; ``halting`` lists the ids
    of halting ones.  ``exhausted`` is true only when no bound was hit.
    """

    configurations: list[Configuration]
    halting: list[int]
    edges: list[Edge]
    exhausted: bool
    visited_count: int
    depth_reached: int
    truncation_reason: str | None
    bounds: Bounds
    depths: list[int] = field(default_factory=list)

    @property
    def halting_configurations(self) -> list[Configuration]:
        return [self.configurations[i] for i in self.halting]


def explore(
    system: PSystem,
    bounds: Bounds | None = None,
    dedup_by_result: bool = True,
    check_invariants: bool = True,
    record_edges: bool = True,
) -> ExplorationResult:
    """Breadth-first search from the initial configuration with memoization."""
    bounds = bounds or Bounds()
    start = system.initial
    configs = [start]
    depths = [0]
    index = {start: 0}
    halting: list[int] = []
    edges: list[Edge] = []
    reasons: list[str] = []
    queue = deque([0])

    def truncate(reason):
        if reason not in reasons:
            log.info("exploration truncated: %s", reason)
            reasons.append(reason)

    while queue:
        cid = queue.popleft()
        C, depth = configs[cid], depths[cid]
        if depth >= bounds.max_depth:
            if is_halting(system, C):
                halting.append(cid)
            else:
                truncate("max_depth")
            continue
        try:
            transitions = enumerate_transitions(
                system, C, dedup_by_result, limit=bounds.max_transitions_per_config
            )
        except TransitionLimitExceeded as exc:
            truncate("max_transitions_per_config")
            transitions = exc.partial
        if not transitions:
            halting.append(cid)
            continue
        for choice, nxt in transitions:
            if check_invariants:
                check_edge(system, C, nxt)
            tid = index.get(nxt)
            if tid is None:
                if len(configs) >= bounds.max_configs:
                    truncate("max_configs")
                    continue
                tid = len(configs)
                index[nxt] = tid
                configs.append(nxt)
                depths.append(depth + 1)
                queue.append(tid)
            if record_edges:
                edges.append(Edge(cid, tid, choice))

    halting.sort()
    return ExplorationResult(
        configurations=configs,
        halting=halting,
        edges=edges,
        exhausted=not reasons,
        visited_count=len(configs),
        depth_reached=max(depths),
        truncation_reason=",".join(reasons) or None,
        bounds=bounds,
        depths=depths,
    )
