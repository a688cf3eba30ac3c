"""Hand-built crisp generators in the normal form accepted by ``compose``."""
from __future__ import annotations

from memfuzz.fuzzy_core import INF, GradeSet
from memfuzz.system_model import ENV, Configuration, MembraneStructure, PSystem, Rule


def finite_set_generator(values, name: str = "gen", dead_branch: bool = False) -> PSystem:
    """Symport-only two-membrane generator of the finite set ``values`` (all >= 1).

    The skin starts with a single ``go`` and one key ``k<n>`` per value.
    ``go`` leaves together with exactly one key; that key comes back with
    ``n`` copies of ``alpha``, which then drop into the output membrane.
    With ``dead_branch`` an extra key brings in ``hash``, which bounces
    across the output membrane forever.
    """
    values = sorted(set(values))
    if not values or min(values) < 1:
        raise ValueError("values must be positive integers")
    keys = [f"k{n}" for n in values]
    skin = []
    for n, k in zip(values, keys):
        skin.append(Rule.crisp(outgoing={"go": 1, k: 1}))
        skin.append(Rule.crisp({k: 1, "alpha": n}))
    env = {("alpha", 1): INF}
    if dead_branch:
        keys.append("kdead")
        skin.append(Rule.crisp(outgoing={"go": 1, "kdead": 1}))
        skin.append(Rule.crisp({"kdead": 1, "hash": 1}))
        env[("hash", 1)] = INF
    V = ["go", "alpha", "hash"] + keys
    contents = {1: {("go", 1): 1, **{(k, 1): 1 for k in keys}}, ENV: env}
    return PSystem(
        reactives=V,
        output_reactives=V,
        structure=MembraneStructure.linear(2),
        output_membrane=2,
        grades=GradeSet.crisp(),
        initial=Configuration(contents),
        rules={
            1: tuple(skin),
            2: (
                Rule.crisp({"alpha": 1}),
                Rule.crisp({"hash": 1}),
                Rule.crisp(outgoing={"hash": 1}),
            ),
        },
        roles={"alpha": "alpha", "hash": "hash"},
        name=name,
    )
