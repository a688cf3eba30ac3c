"""Reading results off halting configurations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import Bounds, ExplorationResult, explore
from .fuzzy_core import INF, FuzzySubsetOfNat, GradeSet, join
from .system_model import Configuration, PSystem

__all__ = [
    "OutputHistogram",
    "GenReport",
    "histogram",
    "output_fuzzy_set",
    "gen",
    "gen_from_exploration",
    "gen_level_query",
]

# grade -> number of output-reactive copies at exactly that grade
OutputHistogram = dict


def histogram(system: PSystem, H: Configuration) -> OutputHistogram:
    """Copies of output reactives in the output membrane, per positive grade."""
    F = H[system.output_membrane]
    outs = set(system.output_reactives)
    h = {t: 0 for t in system.grades.positive}
    for (v, t), n in F.items():
        if v not in outs:
            continue
        if n == INF:
            raise ValueError("output membrane holds an unbounded count")
        h[t] += n
    return h


def output_fuzzy_set(h: OutputHistogram, grades: GradeSet) -> FuzzySubsetOfNat:
    """``n -> max{t | h(t) == n}`` over the positive grades (0 when none).

    Grades with a zero count contribute to ``n = 0``.
    """
    return FuzzySubsetOfNat((h.get(t, 0), t) for t in grades.positive)


@dataclass
class GenReport:
    gen: FuzzySubsetOfNat
    exhausted: bool
    histograms: list[tuple[int, OutputHistogram]] = field(default_factory=list)
    grades: GradeSet | None = None
    exploration: ExplorationResult | None = field(default=None, repr=False)

    def positive(self) -> FuzzySubsetOfNat:
        return self.gen.restrict_positive()


def gen_from_exploration(system: PSystem, result: ExplorationResult) -> GenReport:
    g = FuzzySubsetOfNat()
    hists = []
    for cid in result.halting:
        h = histogram(system, result.configurations[cid])
        hists.append((cid, h))
        g = join(g, output_fuzzy_set(h, system.grades))
    return GenReport(g, result.exhausted, hists, system.grades, result)


def gen(system: PSystem, bounds: Bounds | None = None) -> GenReport:
    """Join of the outputs of all halting computations found within ``bounds``.

    When the exploration is not exhausted the result is a pointwise lower bound.
    """
    return gen_from_exploration(system, explore(system, bounds))


def gen_level_query(report: GenReport, n: int, t0: Fraction) -> bool:
    """Whether some collected histogram has ``h(t) == n`` for some ``t >= t0``."""
    if report.grades is not None and (t0 not in report.grades or t0 == 0):
        raise ValueError(f"{t0} is not a positive grade")
    return any(c == n and t >= t0 for _, h in report.histograms for t, c in h.items())
