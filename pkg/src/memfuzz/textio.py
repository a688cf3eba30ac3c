"""Line-oriented text format for P-systems and JSON traces of explorations.

Grammar (``#`` starts a comment)::

    system NAME
    grades 0 1/2 1                      # ascending, must include 0 and 1
    reactives v w alpha:role=alpha hash:role=hash
    outputs v
    membrane 1 parent env
    membrane 2 parent 1 output
    init 1 { w@1 : 2 }                  # reactive@grade : count
    init env { v : inf }                # homogeneous env supply, grade omitted
    rule 1 antiport in { v:1 } out { w:1 } tin { v : 1/2 } tout { w : 1 }
    rule 2 symport-in in { alpha:1 } tin { alpha : 1/2 }

Inside braces entries are separated by commas or whitespace.  Reactive
names may themselves contain ``@``; in membrane ``init`` lines the grade is
the part after the last ``@``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .engine import ExplorationResult, TransitionChoice
from .fuzzy_core import INF, FuzzySubsetOfNat, GradeSet, format_grade, join
from .outputs import GenReport, output_fuzzy_set
from .system_model import ENV, Configuration, MembraneStructure, PSystem, Rule, region_key

__all__ = [
    "ParseIssue",
    "DSLError",
    "parse",
    "render",
    "TRACE_SCHEMA",
    "trace_document",
    "dump_trace",
    "load_trace",
    "summarize_trace",
    "report_document",
]

RULE_KINDS = ("antiport", "symport-in", "symport-out")
_TOKEN = re.compile(r"\s*(?:([{}:,])|([^\s{}:,]+))")


@dataclass(frozen=True)
class ParseIssue:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class DSLError(ValueError):
    def __init__(self, issues: list[ParseIssue]):
        self.issues = issues
        super().__init__("\n".join(str(i) for i in issues))


@dataclass
class _Tok:
    text: str
    col: int


class _LineError(Exception):
    def __init__(self, tok: _Tok | None, message: str, col: int = 1):
        self.col = tok.col if tok else col
        self.message = message


def _tokenize(line: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            break
        text = m.group(1) or m.group(2)
        toks.append(_Tok(text, m.start(1 if m.group(1) else 2) + 1))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], eol_col: int):
        self.toks = toks
        self.i = 0
        self.eol_col = eol_col

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise _LineError(None, f"expected {what}", self.eol_col)
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise _LineError(tok, f"expected {text!r}, found {tok.text!r}")
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise _LineError(tok, f"unexpected {tok.text!r}")


def _grade(tok: _Tok) -> Fraction:
    try:
        g = Fraction(tok.text)
    except (ValueError, ZeroDivisionError):
        raise _LineError(tok, f"{tok.text!r} is not a rational grade") from None
    return g


def _count(tok: _Tok):
    if tok.text == "inf":
        return INF
    if not tok.text.isdigit():
        raise _LineError(tok, f"{tok.text!r} is not a count (natural or inf)")
    return int(tok.text)


def _block(cur: _Cursor) -> list[tuple[_Tok, _Tok]]:
    cur.expect("{")
    out = []
    while True:
        tok = cur.next("'}'")
        if tok.text == "}":
            return out
        if tok.text == ",":
            continue
        if tok.text in "{:":
            raise _LineError(tok, f"unexpected {tok.text!r}")
        cur.expect(":")
        val = cur.next("a value")
        if val.text in "{}:,":
            raise _LineError(val, f"unexpected {val.text!r}")
        out.append((tok, val))


class _Parser:
    def __init__(self):
        self.issues: list[ParseIssue] = []
        self.name: str | None = None
        self.grades: GradeSet | None = None
        self.reactives: dict[str, str | None] = {}
        self.outputs: list[str] = []
        self.parent: dict[int, object] = {}
        self.output_membrane: int | None = None
        self.init: dict[object, dict] = {}
        self.rules: dict[int, list[Rule]] = {}
        self.header_tok: dict[str, int] = {}

    # helpers -------------------------------------------------------------
    def _membrane(self, tok: _Tok, allow_env: bool = False, known: bool = True):
        if tok.text == ENV:
            if allow_env:
                return ENV
            raise _LineError(tok, "env is not a membrane here")
        if not tok.text.isdigit() or int(tok.text) < 1:
            raise _LineError(tok, f"{tok.text!r} is not a membrane label")
        m = int(tok.text)
        if known and m not in self.parent:
            raise _LineError(tok, f"membrane {m} is not declared")
        return m

    def _reactive(self, tok: _Tok) -> str:
        if tok.text not in self.reactives:
            raise _LineError(tok, f"reactive {tok.text!r} is not declared")
        return tok.text

    def _declared_grade(self, tok: _Tok) -> Fraction:
        g = _grade(tok)
        if self.grades is None:
            raise _LineError(tok, "grades must be declared before use")
        if g not in self.grades:
            raise _LineError(tok, f"grade {tok.text} is not in the declared grade set")
        return g

    def _need(self, what: str, tok: _Tok):
        if what == "grades" and self.grades is None:
            raise _LineError(tok, "grades must be declared first")

    # statements ------------------------------------------------------------
    def statement(self, lineno: int, kw: _Tok, cur: _Cursor) -> None:
        k = kw.text
        if k != "system" and self.name is None:
            raise _LineError(kw, "missing system header")
        handler = getattr(self, "do_" + k.replace("-", "_"), None)
        if handler is None:
            raise _LineError(kw, f"unknown statement {k!r}")
        handler(kw, cur)
        cur.done()

    def do_system(self, kw, cur):
        if self.name is not None:
            raise _LineError(kw, "duplicate system header")
        self.name = cur.next("a system name").text

    def do_grades(self, kw, cur):
        if self.grades is not None:
            raise _LineError(kw, "duplicate grades declaration")
        gs = []
        while cur.peek() is not None:
            tok = cur.next("a grade")
            g = _grade(tok)
            if not 0 <= g <= 1:
                raise _LineError(tok, f"grade {tok.text} outside [0, 1]")
            if gs and g <= gs[-1]:
                raise _LineError(tok, "grades must be strictly ascending")
            gs.append(g)
        if not gs or gs[0] != 0 or gs[-1] != 1:
            raise _LineError(kw, "grade set must include 0 and 1")
        self.grades = GradeSet(gs)

    def do_reactives(self, kw, cur):
        while cur.peek() is not None:
            tok = cur.next("a reactive")
            if tok.text in "{},:":
                raise _LineError(tok, f"unexpected {tok.text!r}")
            role = None
            nxt = cur.peek()
            if nxt is not None and nxt.text == ":":
                cur.next(":")
                rt = cur.next("role=...")
                if not rt.text.startswith("role="):
                    raise _LineError(rt, "expected role=alpha or role=hash")
                role = rt.text[len("role="):]
                if role not in ("alpha", "hash"):
                    raise _LineError(rt, f"unknown role {role!r}")
            if tok.text in self.reactives:
                raise _LineError(tok, f"duplicate reactive {tok.text!r}")
            self.reactives[tok.text] = role

    def do_outputs(self, kw, cur):
        while cur.peek() is not None:
            tok = cur.next("a reactive")
            v = self._reactive(tok)
            if v in self.outputs:
                raise _LineError(tok, f"duplicate output reactive {v!r}")
            self.outputs.append(v)

    def do_membrane(self, kw, cur):
        mt = cur.next("a membrane label")
        m = self._membrane(mt, known=False)
        if m in self.parent:
            raise _LineError(mt, f"duplicate membrane {m}")
        cur.expect("parent")
        pt = cur.next("a parent")
        p = self._membrane(pt, allow_env=True)
        self.parent[m] = p
        if cur.peek() is not None:
            ot = cur.expect("output")
            if self.output_membrane is not None:
                raise _LineError(ot, "output membrane declared twice")
            self.output_membrane = m

    def do_init(self, kw, cur):
        rt = cur.next("a region")
        m = self._membrane(rt, allow_env=True)
        self._need("grades", kw)
        entries = self.init.setdefault(m, {})
        for key, val in _block(cur):
            n = _count(val)
            if m == ENV and key.text in self.reactives:
                cells = [(key.text, t) for t in self.grades.positive]
            else:
                base, at, g = key.text.rpartition("@")
                if not at:
                    raise _LineError(key, "membrane contents need reactive@grade")
                v = self._reactive(_Tok(base, key.col))
                t = self._declared_grade(_Tok(g, key.col + len(base) + 1))
                if t == 0:
                    raise _LineError(key, "contents cannot carry grade 0")
                cells = [(v, t)]
            for cell in cells:
                if cell in entries:
                    raise _LineError(key, f"duplicate entry for {key.text!r}")
                entries[cell] = n

    def do_rule(self, kw, cur):
        mt = cur.next("a membrane label")
        m = self._membrane(mt)
        kt = cur.next("a rule kind")
        if kt.text not in RULE_KINDS:
            raise _LineError(kt, f"rule kind must be one of {', '.join(RULE_KINDS)}")
        self._need("grades", kw)
        parts: dict[str, list] = {}
        while cur.peek() is not None:
            st = cur.next("in/out/tin/tout")
            if st.text not in ("in", "out", "tin", "tout"):
                raise _LineError(st, f"unexpected {st.text!r}")
            if st.text in parts:
                raise _LineError(st, f"duplicate {st.text!r} section")
            parts[st.text] = _block(cur)
        words = {}
        for sec in ("in", "out"):
            w: dict[str, int] = {}
            for key, val in parts.get(sec, []):
                v = self._reactive(key)
                n = _count(val)
                if n == INF or n == 0:
                    raise _LineError(val, "multiplicities must be positive naturals")
                if v in w:
                    raise _LineError(key, f"duplicate reactive {v!r}")
                w[v] = n
            words[sec] = w
        taus = {}
        for sec in ("tin", "tout"):
            tau: dict[str, Fraction] = {}
            for key, val in parts.get(sec, []):
                v = self._reactive(key)
                if v in tau:
                    raise _LineError(key, f"duplicate reactive {v!r}")
                tau[v] = self._declared_grade(val)
            taus[sec] = tau
        has_in, has_out = bool(words["in"]), bool(words["out"])
        expected = {"antiport": (True, True), "symport-in": (True, False), "symport-out": (False, True)}
        if (has_in, has_out) != expected[kt.text]:
            raise _LineError(kt, f"{kt.text} rule has the wrong in/out sections")
        self.rules.setdefault(m, []).append(Rule(words["in"], words["out"], taus["tin"], taus["tout"]))

    # result ---------------------------------------------------------------
    def finish(self, last_line: int) -> PSystem:
        where = ParseIssue(last_line, 1, "")
        if self.name is None:
            self.issues.append(ParseIssue(1, 1, "missing system header"))
        elif self.grades is None:
            self.issues.append(ParseIssue(where.line, 1, "missing grades declaration"))
        elif not self.parent:
            self.issues.append(ParseIssue(where.line, 1, "no membranes declared"))
        elif self.output_membrane is None:
            self.issues.append(ParseIssue(where.line, 1, "no output membrane declared"))
        if self.issues:
            raise DSLError(self.issues)
        return PSystem(
            reactives=list(self.reactives),
            output_reactives=self.outputs,
            structure=MembraneStructure(self.parent),
            output_membrane=self.output_membrane,
            grades=self.grades,
            initial=Configuration(self.init),
            rules={m: tuple(rs) for m, rs in self.rules.items()},
            roles={v: r for v, r in self.reactives.items() if r},
            name=self.name,
        )


def parse(text: str) -> PSystem:
    """Parse one system description; raises :class:`DSLError` listing every problem."""
    p = _Parser()
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokenize(line)
        if not toks:
            continue
        cur = _Cursor(toks[1:], len(line.rstrip()) + 1)
        try:
            p.statement(lineno, toks[0], cur)
        except _LineError as e:
            p.issues.append(ParseIssue(lineno, e.col, e.message))
    return p.finish(max(lineno, 1))


def _fmt_count(n) -> str:
    return "inf" if n == INF else str(n)


def _fmt_block(pairs) -> str:
    if not pairs:
        return "{ }"
    return "{ " + ", ".join(f"{k} : {v}" for k, v in pairs) + " }"


def render(system: PSystem) -> str:
    """Canonical text for ``system``; ``parse(render(s)) == s``."""
    lines = [f"system {system.name}", "grades " + " ".join(format_grade(g) for g in system.grades)]
    decl = [v + (f":role={system.roles[v]}" if v in system.roles else "") for v in system.reactives]
    lines.append("reactives " + " ".join(decl) if decl else "reactives")
    lines.append("outputs " + " ".join(system.output_reactives) if system.output_reactives else "outputs")
    for m, p in system.structure.parent.items():
        suffix = " output" if m == system.output_membrane else ""
        lines.append(f"membrane {m} parent {p}{suffix}")
    pos = system.grades.positive
    for m in sorted(system.initial, key=region_key):
        F = system.initial[m]
        pairs = []
        for v in sorted(F.reactives()):
            per = F.grades_of(v)
            if m == ENV and set(per) == set(pos) and len(set(per.values())) == 1:
                pairs.append((v, _fmt_count(per[pos[0]])))
            else:
                pairs.extend((f"{v}@{format_grade(t)}", _fmt_count(n)) for t, n in sorted(per.items()))
        lines.append(f"init {m} {_fmt_block(pairs)}")
    for m, rules in system.rules.items():
        for r in rules:
            parts = [f"rule {m} {r.kind}"]
            if r.incoming:
                parts.append("in " + _fmt_block(r.incoming))
            if r.outgoing:
                parts.append("out " + _fmt_block(r.outgoing))
            if r.tau_in:
                parts.append("tin " + _fmt_block([(v, format_grade(t)) for v, t in r.tau_in]))
            if r.tau_out:
                parts.append("tout " + _fmt_block([(v, format_grade(t)) for v, t in r.tau_out]))
            lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# traces

TRACE_SCHEMA = "memfuzz-trace/1"


def _config_doc(C: Configuration) -> dict:
    return {
        str(m): [[v, format_grade(t), _fmt_count(n)] for (v, t), n in F.items()]
        for m, F in C.items()
    }


def _config_from_doc(doc: dict) -> Configuration:
    contents = {}
    for m, cells in doc.items():
        region = ENV if m == ENV else int(m)
        contents[region] = {
            (v, Fraction(t)): (INF if n == "inf" else int(n)) for v, t, n in cells
        }
    return Configuration(contents)


def _grade_map_doc(gm) -> dict:
    return {format_grade(t): n for t, n in gm}


def _choice_doc(choice: TransitionChoice) -> list:
    return [
        {
            "membrane": inst.membrane,
            "rule": inst.rule_index,
            "enter": {v: _grade_map_doc(gm) for v, gm in inst.distribution.enter},
            "exit": {v: _grade_map_doc(gm) for v, gm in inst.distribution.exit},
        }
        for inst in choice.instances
    ]


def _hist_doc(h: dict) -> dict:
    return {format_grade(t): n for t, n in sorted(h.items())}


def _gen_doc(g: FuzzySubsetOfNat) -> dict:
    return {str(n): format_grade(t) for n, t in g.items()}


def report_document(report: GenReport, restrict_positive: bool = False) -> dict:
    g = report.positive() if restrict_positive else report.gen
    return {
        "gen": _gen_doc(g),
        "restrict_positive": restrict_positive,
        "exhausted": report.exhausted,
        "histograms": [{"config": f"c{cid}", "counts": _hist_doc(h)} for cid, h in report.histograms],
    }


def trace_document(system: PSystem, result: ExplorationResult, report: GenReport | None = None) -> dict:
    """Key-value tree describing an exploration (and optionally its Gen report)."""
    b = result.bounds
    doc = {
        "schema": TRACE_SCHEMA,
        "tool_version": __version__,
        "system": system.name,
        "grades": [format_grade(g) for g in system.grades],
        "output_membrane": system.output_membrane,
        "output_reactives": list(system.output_reactives),
        "bounds": {
            "max_depth": b.max_depth,
            "max_configs": b.max_configs,
            "max_transitions_per_config": b.max_transitions_per_config,
        },
        "exhausted": result.exhausted,
        "truncation_reason": result.truncation_reason,
        "visited_count": result.visited_count,
        "depth_reached": result.depth_reached,
        "configurations": {
            f"c{i}": {"depth": result.depths[i], "contents": _config_doc(C)}
            for i, C in enumerate(result.configurations)
        },
        "edges": [
            {"from": f"c{e.source}", "to": f"c{e.target}", "choice": _choice_doc(e.choice)}
            for e in result.edges
        ],
        "halting": [f"c{i}" for i in result.halting],
    }
    if report is not None:
        doc["report"] = report_document(report)
    return doc


def dump_trace(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def load_trace(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("schema") != TRACE_SCHEMA:
        raise ValueError(f"unsupported trace schema {doc.get('schema')!r}")
    return doc


def summarize_trace(doc: dict) -> FuzzySubsetOfNat:
    """Recompute the generated fuzzy set from the halting configurations of a trace."""
    grades = GradeSet(Fraction(g) for g in doc["grades"])
    m_out = doc["output_membrane"]
    outs = set(doc["output_reactives"])
    g = FuzzySubsetOfNat()
    for cid in doc["halting"]:
        C = _config_from_doc(doc["configurations"][cid]["contents"])
        h = {t: 0 for t in grades.positive}
        for (v, t), n in C[m_out].items():
            if v in outs:
                h[t] += n
        g = join(g, output_fuzzy_set(h, grades))
    return g
