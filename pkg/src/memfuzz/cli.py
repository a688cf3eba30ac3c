"""Command-line driver.

Exit status: 0 on success, 1 when a system fails to parse, validate or pass
the normal-form check, 2 on usage errors.  Exploration bounds default to the
``MEMFUZZ_MAX_DEPTH``, ``MEMFUZZ_MAX_CONFIGS`` and ``MEMFUZZ_MAX_TRANS``
environment variables when set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .constructions import ConstructionError, compose, embed, slice_system
from .engine import Bounds, EngineError, enumerate_transitions, explore
from .fuzzy_core import GradeSet, format_grade
from .outputs import gen_from_exploration
from .system_model import check_theorem1_shape, validate
from .textio import DSLError, dump_trace, parse, render, report_document, trace_document

_BOUND_ENV = {
    "max_depth": "MEMFUZZ_MAX_DEPTH",
    "max_configs": "MEMFUZZ_MAX_CONFIGS",
    "max_transitions_per_config": "MEMFUZZ_MAX_TRANS",
}


class UsageError(Exception):
    pass


class Failure(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None
    if value < 0:
        raise UsageError(f"{name} must be non-negative")
    return value


def _bounds(args) -> Bounds:
    base = Bounds()
    values = {}
    for field, env in _BOUND_ENV.items():
        flag = getattr(args, field, None)
        values[field] = flag if flag is not None else _env_int(env, getattr(base, field))
    return Bounds(**values)


def _grades(text: str) -> GradeSet:
    try:
        return GradeSet(Fraction(tok) for tok in text.replace(",", " ").split())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad grade list {text!r}: {exc}") from None


def _load(path: str, require_valid: bool = True):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        system = parse(text)
    except DSLError as exc:
        raise Failure("\n".join(f"{path}:{issue}" for issue in exc.issues)) from None
    if require_valid:
        problems = validate(system)
        if problems:
            raise Failure("\n".join(f"{path}: {p.code}: {p.message}" for p in problems))
    return system


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    system = _load(args.file, require_valid=False)
    problems = validate(system)
    for p in problems:
        print(f"{args.file}: {p.code}: {p.message}")
    if problems:
        return 1
    print(f"{args.file}: ok")
    return 0


def cmd_step(args) -> int:
    system = _load(args.file)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    layer = [system.initial]
    seen = {system.initial}
    for depth in range(args.n):
        print(f"layer {depth}: {len(layer)} configuration(s)")
        nxt = []
        for C in layer:
            print(f"  from {C.serialize()}")
            transitions = enumerate_transitions(system, C)
            if not transitions:
                print("    halting")
            for choice, D in transitions:
                fam = ", ".join(f"{m}.{r}x{k}" for (m, r), k in choice.family().items())
                print(f"    [{fam}] -> {D.serialize()}")
                if D not in seen:
                    seen.add(D)
                    nxt.append(D)
        layer = nxt
        if not layer:
            break
    return 0


def cmd_explore(args) -> int:
    system = _load(args.file)
    result = explore(system, _bounds(args), dedup_by_result=not args.no_dedup)
    report = gen_from_exploration(system, result)
    doc = trace_document(system, result, report)
    if args.trace:
        Path(args.trace).write_text(dump_trace(doc), encoding="utf-8")
    summary = {
        "system": system.name,
        "visited_count": result.visited_count,
        "halting": len(result.halting),
        "depth_reached": result.depth_reached,
        "exhausted": result.exhausted,
        "truncation_reason": result.truncation_reason,
    }
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0


def cmd_gen(args) -> int:
    system = _load(args.file)
    result = explore(system, _bounds(args), record_edges=False)
    report = gen_from_exploration(system, result)
    doc = report_document(report, restrict_positive=args.restrict_positive)
    doc["system"] = system.name
    doc["tool_version"] = __version__
    print(json.dumps(doc, indent=1, sort_keys=True))
    return 0


def cmd_embed(args) -> int:
    system = _load(args.file)
    grades = _grades(args.grades) if args.grades else None
    _write(render(embed(system, grades)), args.out)
    return 0


def cmd_slice(args) -> int:
    system = _load(args.file)
    family = slice_system(system)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for t in family:
            path = out / f"{system.name}-slice-{format_grade(t).replace('/', '_')}.psys"
            path.write_text(render(family[t]), encoding="utf-8")
            print(path)
    else:
        for t in family:
            sys.stdout.write(f"# slice at grade {format_grade(t)}\n")
            sys.stdout.write(render(family[t]))
    return 0


def cmd_compose(args) -> int:
    grades = _grades(args.grades)
    if len(args.files) != len(grades.positive):
        raise UsageError(
            f"{len(grades.positive)} positive grades need as many files, got {len(args.files)}"
        )
    slices = {t: _load(f) for t, f in zip(grades.positive, args.files)}
    _write(render(compose(slices, grades, name=args.name)), args.out)
    return 0


def cmd_check_shape(args) -> int:
    system = _load(args.file)
    report = check_theorem1_shape(system)
    for name, status in report.checks.items():
        print(f"{name}: {status}")
    for note in report.notes:
        print(f"  {note}")
    return 0 if report.ok else 1


def _add_bounds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--max-configs", dest="max_configs", type=int)
    p.add_argument("--max-trans", dest="max_transitions_per_config", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memfuzz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"memfuzz {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check well-formedness")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("step", help="print breadth-first layers of transitions")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1, help="number of layers (default 1)")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("explore", help="explore the computation tree")
    p.add_argument("file")
    _add_bounds(p)
    p.add_argument("--trace", help="write the full trace document here")
    p.add_argument("--no-dedup", action="store_true", help="keep choices with equal results")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("gen", help="report the generated fuzzy set")
    p.add_argument("file")
    _add_bounds(p)
    p.add_argument("--restrict-positive", action="store_true", help="report n >= 1 only")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("embed", help="fuzzy system with exact copies from a crisp one")
    p.add_argument("file")
    p.add_argument("--grades", help="grade set such as '0,1/2,1' (default 0,1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("slice", help="one crisp system per positive grade")
    p.add_argument("file")
    p.add_argument("--out", help="directory for the slice files")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("compose", help="fuzzy system from one crisp generator per positive grade")
    p.add_argument("files", nargs="+", help="generators, for the positive grades in ascending order")
    p.add_argument("--grades", required=True)
    p.add_argument("--name", default="composed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("check-shape", help="check the composable normal form")
    p.add_argument("file")
    p.set_defaults(func=cmd_check_shape)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"memfuzz: {exc}", file=sys.stderr)
        return 2
    except Failure as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConstructionError, EngineError) as exc:
        print(f"memfuzz: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
