"""Exact scalars: rationals, geometric point families and index-affine expressions.

Everything here is exact ``Fraction`` arithmetic.  Floats appear only as
initial guesses for integer logarithms, and every guess is confirmed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable


class IndexBelowRange(ValueError):
    """Raised when a family member is requested below its first index."""


class Ordering(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def Q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    if any(c in text for c in ".eE") and "/" not in text:
        raise ValueError(f"decimal literals are not allowed, use p/q: {text!r}")
    return Fraction(text)


def fmt_rational(q: Fraction) -> str:
    """Canonical ``"p/q"`` text; integers keep the ``/1`` suffix."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_compare(a: Fraction, b: Fraction) -> Ordering:
    # cross multiplication on normalized fractions (denominators positive)
    lhs = a.numerator * b.denominator
    rhs = b.numerator * a.denominator
    if lhs < rhs:
        return Ordering.LESS
    if lhs > rhs:
        return Ordering.GREATER
    return Ordering.EQUAL


def sign(q) -> int:
    return (q > 0) - (q < 0)


def _log(q: Fraction) -> float:
    q = Fraction(q)
    return math.log(q.numerator) - math.log(q.denominator)


def int_log(r: Fraction, base: Fraction) -> int | None:
    """Return the integer n with ``base**n == r`` or None.  ``0 < base < 1``."""
    if r <= 0:
        return None
    guess = _log(r) / _log(base)
    n0 = round(guess)
    for n in (n0, n0 - 1, n0 + 1):
        if base**n == r:
            return n
    return None


def first_index_within(scale: Fraction, rho: Fraction, bound: Fraction, start: int) -> int:
    """Smallest n >= start with ``scale * rho**n < bound`` (scale, bound > 0)."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    n = start
    guess = (_log(bound) - _log(scale)) / _log(rho)
    if math.isfinite(guess):
        n = max(start, math.floor(guess) - 1)
    while scale * rho**n >= bound:
        n += 1
    while n > start and scale * rho ** (n - 1) < bound:
        n -= 1
    return n


@dataclass(frozen=True)
class GeometricFamily:
    """The points ``alpha + beta * rho**n`` for ``n >= n0``."""

    alpha: Fraction
    beta: Fraction
    rho: Fraction
    n0: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "rho"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if self.beta == 0:
            raise ValueError("beta must be nonzero")
        if not 0 < self.rho < 1:
            raise ValueError("rho must satisfy 0 < rho < 1")
        if not isinstance(self.n0, int) or self.n0 < 1:
            raise ValueError("n0 must be a positive integer")

    @property
    def side(self) -> str:
        """Which side of the limit the members lie on."""
        return "below" if self.beta < 0 else "above"

    def value(self, n: int) -> Fraction:
        if n < self.n0:
            raise IndexBelowRange(f"index {n} below first index {self.n0}")
        return self.alpha + self.beta * self.rho**n

    def index_of(self, v: Fraction) -> int | None:
        """Exact solve of ``alpha + beta * rho**n == v`` over admissible n."""
        n = int_log((Q(v) - self.alpha) / self.beta, self.rho)
        if n is None or n < self.n0:
            return None
        return n


def family_value(fam: GeometricFamily, n: int) -> Fraction:
    return fam.value(n)


def family_limit(fam: GeometricFamily) -> Fraction:
    return fam.alpha


@dataclass(frozen=True)
class Mobius:
    """Index sequence ``(p*n + q) / (r*n + s)``, used for harmonic segment families."""

    p: Fraction
    q: Fraction
    r: Fraction
    s: Fraction

    def __post_init__(self):
        for name in ("p", "q", "r", "s"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if self.r == 0:
            raise ValueError("Mobius sequence needs r != 0 to converge")

    def at(self, n: int) -> Fraction:
        den = self.r * n + self.s
        if den == 0:
            raise ZeroDivisionError(f"pole at n={n}")
        return (self.p * n + self.q) / den

    def limit(self) -> Fraction:
        return self.p / self.r

    def regular_from(self) -> int:
        # past the pole the distance to the limit is strictly decreasing
        return math.floor(-self.s / self.r) + 1

    def side_sign(self, n: int) -> int:
        return sign(self.at(n) - self.limit())

    def first_within(self, d: Fraction, start: int, strict: bool = True) -> int:
        """Smallest n >= start, past the pole, with |at(n) - limit| < d (or <= d)."""
        n = max(start, self.regular_from())
        c = abs(self.q * self.r - self.p * self.s)
        if c == 0:
            return n
        # |at(n) - L| = c / (|r| * |r n + s|) and |r n + s| = |r| n + sgn(r) s past the pole
        ar, ss = abs(self.r), self.s if self.r > 0 else -self.s
        bound = (c / (ar * d) - ss) / ar
        m = math.floor(bound) + 1 if strict else math.ceil(bound)
        return max(n, m)

    def settle_index(self, bound: Fraction, start: int) -> int:
        return self.first_within(bound, start)


@dataclass(frozen=True)
class Geometric:
    """Index sequence ``alpha + beta * rho**n`` (no range restriction)."""

    alpha: Fraction
    beta: Fraction
    rho: Fraction

    def __post_init__(self):
        for name in ("alpha", "beta", "rho"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if not 0 < self.rho < 1:
            raise ValueError("rho must satisfy 0 < rho < 1")

    def at(self, n: int) -> Fraction:
        return self.alpha + self.beta * self.rho**n

    def limit(self) -> Fraction:
        return self.alpha

    def regular_from(self) -> int:
        return -(10**9)

    def side_sign(self, n: int) -> int:
        return sign(self.beta)

    def first_within(self, d: Fraction, start: int, strict: bool = True) -> int:
        if self.beta == 0:
            return start
        n = first_index_within(abs(self.beta), self.rho, d, start)
        if not strict and n - 1 >= start and abs(self.beta) * self.rho ** (n - 1) == d:
            n -= 1
        return n

    def settle_index(self, bound: Fraction, start: int) -> int:
        return self.first_within(bound, start)


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Q(self.value))

    def at(self, n: int) -> Fraction:
        return self.value

    def limit(self) -> Fraction:
        return self.value

    def regular_from(self) -> int:
        return -(10**9)

    def side_sign(self, n: int) -> int:
        return 0

    def first_within(self, d: Fraction, start: int, strict: bool = True) -> int:
        return start

    def settle_index(self, bound: Fraction, start: int) -> int:
        return start


SeqExpr = Mobius | Geometric | Const


@dataclass(frozen=True)
class GeomExpr:
    """An exponential sum ``sum(c_b * b**L)`` in an integer variable L.

    Bases lie in (0, 1]; base 1 carries the constant term.  Every quantity
    attached to a partition tail at level L has this form, so identities and
    inequalities that must hold for all large L are decided exactly by
    :meth:`signs_from`.
    """

    terms: tuple[tuple[Fraction, Fraction], ...] = field(default=())

    @staticmethod
    def of(terms: dict | Iterable) -> "GeomExpr":
        acc: dict[Fraction, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for base, coef in items:
            base, coef = Q(base), Q(coef)
            if not 0 < base <= 1:
                raise ValueError(f"base {base} outside (0, 1]")
            acc[base] = acc.get(base, Fraction(0)) + coef
        return GeomExpr(tuple(sorted((b, c) for b, c in acc.items() if c != 0)))

    @staticmethod
    def const(v) -> "GeomExpr":
        return GeomExpr.of({Fraction(1): Q(v)})

    @staticmethod
    def member(fam: GeometricFamily, offset: int) -> "GeomExpr":
        """Value of ``fam`` at index ``L + offset`` as an expression in L."""
        return GeomExpr.of({Fraction(1): fam.alpha, fam.rho: fam.beta * fam.rho**offset})

    def __add__(self, other: "GeomExpr") -> "GeomExpr":
        return GeomExpr.of(list(self.terms) + list(other.terms))

    def __neg__(self) -> "GeomExpr":
        return GeomExpr(tuple((b, -c) for b, c in self.terms))

    def __sub__(self, other: "GeomExpr") -> "GeomExpr":
        return self + (-other)

    def at(self, L: int) -> Fraction:
        return sum((c * b**L for b, c in self.terms), Fraction(0))

    def limit(self) -> Fraction:
        return dict(self.terms).get(Fraction(1), Fraction(0))

    def signs_from(self, start: int, max_steps: int = 100_000) -> set[int]:
        """The set of signs of ``self.at(L)`` over all integers ``L >= start``."""
        if not self.terms:
            return {0}
        ordered = sorted(self.terms, key=lambda t: t[0], reverse=True)
        b0, c0 = ordered[0]
        rest = ordered[1:]
        stable = start
        while sum((abs(c) * (b / b0) ** stable for b, c in rest), Fraction(0)) >= abs(c0):
            stable += 1
            if stable - start > max_steps:
                raise RuntimeError("sign of exponential sum did not stabilize")
        found = {sign(self.at(L)) for L in range(start, stable)}
        found.add(sign(c0))
        return found

    def is_zero_from(self, start: int) -> bool:
        return self.signs_from(start) == {0}
