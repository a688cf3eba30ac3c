"""Fuzzy symport/antiport membrane systems.

Simulation of the nondeterministic maximal-parallel semantics, exhaustive
bounded exploration of computation trees, the generated fuzzy set of
naturals, and constructions relating crisp and fuzzy systems.
"""

__version__ = "0.1.0"

from .fuzzy_core import (  # noqa: E402
    INF,
    UNIVERSAL,
    FuzzyMultiset,
    FuzzySubsetOfNat,
    GradeSet,
    as_grade,
    join,
    level_sum,
    levels_equal,
    t_level,
)
from .system_model import (  # noqa: E402
    ENV,
    Configuration,
    MembraneStructure,
    PSystem,
    Rule,
    check_theorem1_shape,
    reachable_reactive_grades,
    validate,
)
from .engine import (  # noqa: E402
    Bounds,
    ExplorationResult,
    can_trigger,
    enumerate_applications,
    enumerate_families,
    enumerate_transitions,
    explore,
    is_maximal,
)
from .outputs import GenReport, gen, gen_level_query, histogram, output_fuzzy_set  # noqa: E402
from .constructions import compose, embed, slice_system  # noqa: E402
from .textio import parse, render  # noqa: E402

__all__ = [
    "INF", "UNIVERSAL", "FuzzyMultiset", "FuzzySubsetOfNat", "GradeSet", "as_grade",
    "join", "level_sum", "levels_equal", "t_level",
    "ENV", "Configuration", "MembraneStructure", "PSystem", "Rule",
    "check_theorem1_shape", "reachable_reactive_grades", "validate",
    "Bounds", "ExplorationResult", "can_trigger", "enumerate_applications",
    "enumerate_families", "enumerate_transitions", "explore", "is_maximal",
    "GenReport", "gen", "gen_level_query", "histogram", "output_fuzzy_set",
    "compose", "embed", "slice_system", "parse", "render",
]
