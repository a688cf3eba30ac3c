"""Finite-valued fuzzy sets and fuzzy multisets.

Grades are exact rationals (:class:`fractions.Fraction`).  Object counts are
extended naturals: a plain ``int`` or the :data:`INF` marker.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction
from typing import Union

__all__ = [
    "INF",
    "ExtNat",
    "Grade",
    "GradeSet",
    "FuzzyMultiset",
    "FuzzySubsetOfNat",
    "UNIVERSAL",
    "as_grade",
    "format_grade",
    "ext_add",
    "ext_sub",
    "is_inf",
    "level_sum",
    "t_level",
    "levels_equal",
    "join",
]

Grade = Fraction

# float('inf') compares correctly against ints, which keeps the many
# "count <= supply" checks in the engine free of special cases.
INF = float("inf")
ExtNat = Union[int, float]


def is_inf(n: ExtNat) -> bool:
    return n == INF


def _check_ext(n: ExtNat) -> ExtNat:
    if n == INF:
        return INF
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"count must be an int or INF, got {n!r}")
    if n < 0:
        raise ValueError(f"count must be non-negative, got {n}")
    return n


def ext_add(a: ExtNat, b: ExtNat) -> ExtNat:
    """Saturating addition on naturals extended with infinity."""
    if a == INF or b == INF:
        return INF
    return a + b


def ext_sub(a: ExtNat, b: ExtNat) -> ExtNat:
    """``a - b`` where ``b`` is finite; ``INF - k == INF``.

    Raises ``ValueError`` when a finite ``b`` exceeds a finite ``a``.
    """
    if b == INF:
        raise ValueError("cannot subtract an infinite count")
    if a == INF:
        return INF
    if b > a:
        raise ValueError(f"count underflow: {a} - {b}")
    return a - b


def as_grade(x: Union[Fraction, int, str]) -> Fraction:
    """Parse a grade from an int, a Fraction or a string such as ``"1/2"``.

    Floats are rejected: level comparisons must be exact.
    """
    if isinstance(x, float):
        raise TypeError(f"grades must be exact rationals, not float {x!r}")
    g = Fraction(x)
    if not 0 <= g <= 1:
        raise ValueError(f"grade {g} outside [0, 1]")
    return g


def format_grade(t: Fraction) -> str:
    return str(Fraction(t))


class GradeSet:
    """A finite set of truth values containing 0 and 1."""

    __slots__ = ("grades", "_index")

    def __init__(self, grades: Iterable[Union[Fraction, int, str]]):
        gs = sorted({as_grade(g) for g in grades})
        if not gs or gs[0] != 0 or gs[-1] != 1:
            raise ValueError("a grade set must contain 0 and 1")
        self.grades: tuple[Fraction, ...] = tuple(gs)
        self._index = {g: i for i, g in enumerate(gs)}

    @classmethod
    def crisp(cls) -> "GradeSet":
        return cls([0, 1])

    @property
    def positive(self) -> tuple[Fraction, ...]:
        """The nonzero grades, ascending."""
        return self.grades[1:]

    def __contains__(self, t: object) -> bool:
        return t in self._index

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.grades)

    def __len__(self) -> int:
        return len(self.grades)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GradeSet) and self.grades == other.grades

    def __hash__(self) -> int:
        return hash(self.grades)

    def __repr__(self) -> str:
        return "GradeSet([%s])" % ", ".join(format_grade(g) for g in self.grades)

    def successor(self, t: Fraction) -> Fraction:
        """The least grade strictly greater than ``t`` (``t`` in I+ minus 1)."""
        i = self._index.get(t)
        if i is None or t == 0:
            raise ValueError(f"{t} is not a positive grade of {self!r}")
        if t == 1:
            raise ValueError("grade 1 has no successor")
        return self.grades[i + 1]

    def at_least(self, t: Fraction) -> tuple[Fraction, ...]:
        """Positive grades ``>= t``."""
        return tuple(g for g in self.positive if g >= t)


class FuzzyMultiset(Mapping):
    """Immutable map ``(reactive, grade) -> count`` with grades in ]0, 1].

    Zero counts are not stored; looking up an absent key yields 0.
    """

    __slots__ = ("_data", "_hash")

    def __init__(self, entries: Union[Mapping, Iterable, None] = None):
        data: dict[tuple[str, Fraction], ExtNat] = {}
        if entries is not None:
            items = entries.items() if isinstance(entries, Mapping) else entries
            for (v, t), n in items:
                t = as_grade(t)
                if t == 0:
                    raise ValueError("fuzzy multisets carry no grade-0 entries")
                n = _check_ext(n)
                if n:
                    key = (str(v), t)
                    data[key] = ext_add(data.get(key, 0), n)
        self._data = dict(sorted(data.items()))
        self._hash = None

    def __getitem__(self, key: tuple[str, Fraction]) -> ExtNat:
        return self._data.get(key, 0)

    def __contains__(self, key: object) -> bool:
        return key in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FuzzyMultiset):
            return self._data == other._data
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._data.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(
            f"{v}@{format_grade(t)}: {'inf' if n == INF else n}"
            for (v, t), n in self._data.items()
        )
        return "FuzzyMultiset({%s})" % body

    def count(self, v: str, t: Fraction) -> ExtNat:
        return self._data.get((v, t), 0)

    def reactives(self) -> set[str]:
        return {v for v, _ in self._data}

    def grades_of(self, v: str) -> dict[Fraction, ExtNat]:
        return {t: n for (w, t), n in self._data.items() if w == v}

    def level_sum(self, v: str, t: Fraction) -> ExtNat:
        total: ExtNat = 0
        for (w, s), n in self._data.items():
            if w == v and s >= t:
                total = ext_add(total, n)
        return total

    def total(self) -> ExtNat:
        total: ExtNat = 0
        for n in self._data.values():
            total = ext_add(total, n)
        return total

    def has_infinite(self) -> bool:
        return any(n == INF for n in self._data.values())

    def updated(self, deltas: Mapping[tuple[str, Fraction], int]) -> "FuzzyMultiset":
        """Return a copy with signed integer ``deltas`` added to the counts."""
        data = dict(self._data)
        for key, d in deltas.items():
            if d > 0:
                data[key] = ext_add(data.get(key, 0), d)
            elif d < 0:
                data[key] = ext_sub(data.get(key, 0), -d)
        return FuzzyMultiset(data)


def level_sum(F: FuzzyMultiset, v: str, t: Fraction, grades: GradeSet | None = None) -> ExtNat:
    """Number of copies of ``v`` in ``F`` with grade at least ``t``."""
    if grades is not None and (t not in grades or t == 0):
        raise ValueError(f"{t} is not a positive grade of {grades!r}")
    return F.level_sum(v, t)


class _Universal:
    """Stands for the whole of the naturals (the 0-level of any fuzzy set)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNIVERSAL"

    def __contains__(self, n: object) -> bool:
        return isinstance(n, int) and n >= 0


UNIVERSAL = _Universal()


class FuzzySubsetOfNat(Mapping):
    """Finitely supported map ``n -> grade``; absent naturals have grade 0."""

    __slots__ = ("_data",)

    def __init__(self, assignments: Union[Mapping, Iterable, None] = None):
        data: dict[int, Fraction] = {}
        if assignments is not None:
            items = assignments.items() if isinstance(assignments, Mapping) else assignments
            for n, t in items:
                if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                    raise ValueError(f"{n!r} is not a natural number")
                t = as_grade(t)
                if t > data.get(n, 0):
                    data[n] = t
        self._data = dict(sorted(data.items()))

    def __getitem__(self, n: int) -> Fraction:
        return self._data.get(n, Fraction(0))

    def __contains__(self, n: object) -> bool:
        return n in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FuzzySubsetOfNat):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self == FuzzySubsetOfNat(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._data.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{n}: {format_grade(t)}" for n, t in self._data.items())
        return "FuzzySubsetOfNat({%s})" % body

    def support(self) -> set[int]:
        return set(self._data)

    def image(self) -> set[Fraction]:
        return set(self._data.values())

    def restrict_positive(self) -> "FuzzySubsetOfNat":
        """Drop the entry for ``n = 0``."""
        return FuzzySubsetOfNat({n: t for n, t in self._data.items() if n >= 1})


def t_level(phi: FuzzySubsetOfNat, t: Fraction):
    """``{n | phi(n) >= t}``; :data:`UNIVERSAL` when ``t == 0``."""
    t = as_grade(t)
    if t == 0:
        return UNIVERSAL
    return {n for n, s in phi.items() if s >= t}


def levels_equal(phi: FuzzySubsetOfNat, psi: FuzzySubsetOfNat, grades: GradeSet) -> bool:
    """Compare two ``grades``-valued fuzzy sets level by level."""
    for f in (phi, psi):
        bad = f.image() - set(grades)
        if bad:
            raise ValueError(f"value(s) {sorted(bad)} outside {grades!r}")
    return all(t_level(phi, t) == t_level(psi, t) for t in grades.positive)


def join(phi: FuzzySubsetOfNat, psi: FuzzySubsetOfNat) -> FuzzySubsetOfNat:
    """Pointwise maximum."""
    return FuzzySubsetOfNat(list(phi.items()) + list(psi.items()))
