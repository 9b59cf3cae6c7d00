"""Permutation-symmetric tripartite binary distributions.

Every such distribution is fixed by three correlators::

    p(a, b, c) = [1 + (a+b+c) E1 + (ab+ac+bc) E2 + abc E3] / 8,   a, b, c in {+1, -1}

This module also evaluates the nested-radical constants of the distribution
studied throughout the package (E1C ~ 0.1753, E3C ~ -0.5260) and of its
triangle-local model (X_ROOT, Y_VALUE).

Outcome convention for bit-level work: ``+1 <-> bit 0``, ``-1 <-> bit 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import mpmath

from .lin import Poly2, to_fraction

OUTCOMES = (1, -1)
TRIPLES = tuple(itertools.product(OUTCOMES, repeat=3))

DEFAULT_PRECISION = 200
MIN_PRECISION = 64
DEFAULT_MAX_DENOMINATOR = 10**12

CONSTANT_TAGS = ("E1C", "E3C", "X_ROOT", "Y_VALUE")


def outcome_to_bit(a: int) -> int:
    if a == 1:
        return 0
    if a == -1:
        return 1
    raise ValueError(f"outcome must be +1 or -1, got {a!r}")


def bit_to_outcome(bit: int) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return 1 - 2 * bit


def _check_outcome(a):
    if a not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {a!r}")


def _weight(e1, e2, e3, a, b, c):
    return 1 + (a + b + c) * e1 + (a * b + a * c + b * c) * e2 + a * b * c * e3


@dataclass(frozen=True)
class SymmetricDist:
    """Correlators ``(e1, e2, e3)``; ``e3=None`` quantifies over all valid E3."""

    e1: Fraction
    e2: Fraction
    e3: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "e1", to_fraction(self.e1))
        object.__setattr__(self, "e2", to_fraction(self.e2))
        if self.e3 is not None:
            object.__setattr__(self, "e3", to_fraction(self.e3))
        for name in ("e1", "e2", "e3"):
            v = getattr(self, name)
            if v is not None and not -1 <= v <= 1:
                raise ValueError(f"{name}={v} outside [-1, 1]")
        if self.e3 is not None:
            for t in TRIPLES:
                if _weight(self.e1, self.e2, self.e3, *t) < 0:
                    raise ValueError(
                        f"(E1, E2, E3)=({self.e1}, {self.e2}, {self.e3}) gives negative p{t}")

    def prob(self, a: int, b: int, c: int) -> Fraction:
        return prob(self, a, b, c)

    def q1(self, a: int) -> Fraction:
        return marginal1(self)(a)

    def q2(self, a: int, b: int) -> Fraction:
        return marginal2(self)(a, b)


def prob(d: SymmetricDist, a: int, b: int, c: int) -> Fraction:
    if d.e3 is None:
        raise ValueError("prob needs E3; this distribution leaves it unspecified")
    for x in (a, b, c):
        _check_outcome(x)
    return Fraction(_weight(d.e1, d.e2, d.e3, a, b, c)) / 8


def marginal1(d: SymmetricDist) -> Callable[[int], Fraction]:
    """Single-party marginal ``q1(a) = (1 + a E1) / 2``."""
    e1 = d.e1

    def q1(a: int) -> Fraction:
        _check_outcome(a)
        return (1 + a * e1) / 2

    return q1


def marginal2(d: SymmetricDist) -> Callable[[int, int], Fraction]:
    """Two-party marginal ``q2(a, b) = (1 + (a+b) E1 + ab E2) / 4``."""
    e1, e2 = d.e1, d.e2

    def q2(a: int, b: int) -> Fraction:
        _check_outcome(a)
        _check_outcome(b)
        return (1 + (a + b) * e1 + a * b * e2) / 4

    return q2


def q1_poly(a: int) -> Poly2:
    """``q1(a)`` as a polynomial in (E1, E2)."""
    _check_outcome(a)
    return Poly2({(0, 0): Fraction(1, 2), (1, 0): Fraction(a, 2)})


def q2_poly(a: int, b: int) -> Poly2:
    _check_outcome(a)
    _check_outcome(b)
    return Poly2({(0, 0): Fraction(1, 4), (1, 0): Fraction(a + b, 4), (0, 1): Fraction(a * b, 4)})


class E3Interval(NamedTuple):
    lower: Fraction
    upper: Fraction

    @property
    def empty(self) -> bool:
        return self.lower > self.upper

    @property
    def width(self) -> Fraction:
        return max(self.upper - self.lower, Fraction(0))

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def __contains__(self, e3) -> bool:
        return self.lower <= to_fraction(e3) <= self.upper


def e3_interval(e1, e2) -> E3Interval:
    """Values of E3 making all eight probabilities nonnegative, clipped to [-1, 1].

    Empty (``lower > upper``) exactly on the region where no E3 works.
    """
    e1, e2 = to_fraction(e1), to_fraction(e2)
    lower, upper = Fraction(-1), Fraction(1)
    for a, b, c in TRIPLES:
        rest = 1 + (a + b + c) * e1 + (a * b + a * c + b * c) * e2
        if a * b * c == 1:
            lower = max(lower, -rest)
        else:
            upper = min(upper, rest)
    return E3Interval(lower, upper)


# ---------------------------------------------------------------------------
# closed-form constants


@dataclass(frozen=True)
class ExactConstant:
    tag: str
    precision: int
    value: mpmath.mpf
    rational: Fraction
    bound: mpmath.mpf
    """Exact ``|value - rational|`` (computed at ``precision`` bits)."""

    def __float__(self):
        return float(self.value)


def _cbrt(x):
    return mpmath.cbrt(x)


def _e1c():
    s41 = mpmath.sqrt(41)
    two53 = mpmath.mpf(2) ** (mpmath.mpf(5) / 3)
    u = _cbrt(3 * s41 + 25)
    v = _cbrt(21600 - 2592 * s41)
    t = 3 * two53 * u + v - 21
    inner = (34 / mpmath.sqrt(3 * t) - two53 * u / 9 - v / 27 - mpmath.mpf(14) / 9)
    return mpmath.mpf(1) / 2 - 1 / (6 * mpmath.sqrt(3 / t)) + mpmath.sqrt(inner) / 2


def _e3c():
    s41 = mpmath.sqrt(41)
    two53 = mpmath.mpf(2) ** (mpmath.mpf(5) / 3)
    u = _cbrt(3 * s41 + 25)
    v = _cbrt(21600 - 2592 * s41)
    w = two53 * u + v / 3 - 7
    inner = 102 / mpmath.sqrt(w) - two53 * u - v / 3 - 14
    return -mpmath.mpf(3) / 2 + mpmath.sqrt(w) / 2 - mpmath.sqrt(inner) / 2


def _x_root():
    s41 = mpmath.sqrt(41)
    c2 = _cbrt(2 / (s41 + 3))
    c3 = _cbrt((s41 + 3) / 2)
    den = 3 - 8 * c2 + mpmath.mpf(2) ** (mpmath.mpf(5) / 3) * _cbrt(s41 + 3)
    inner = mpmath.mpf(1) / 2 + 2 * c2 / 3 - c3 / 3 + 13 / (2 * mpmath.sqrt(3 * den))
    return mpmath.mpf(3) / 4 - mpmath.sqrt(inner) / 2 + 1 / (4 * mpmath.sqrt(3 / den))


def _y_value():
    x = _x_root()
    return 1 / (3 * (2 * x**2 - 2 * x + 1))


_FORMULAS = {"E1C": _e1c, "E3C": _e3c, "X_ROOT": _x_root, "Y_VALUE": _y_value}


def mpf_to_fraction(v) -> Fraction:
    """Exact value of a binary floating-point mpf."""
    sign, man, exp, _ = mpmath.mpf(v)._mpf_
    if not mpmath.isfinite(mpmath.mpf(v)):
        raise ValueError("cannot rationalize a non-finite value")
    man = -int(man) if sign else int(man)
    if exp >= 0:
        return Fraction(man * 2**exp)
    return Fraction(man, 2**-exp)


def rationalize(v, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """Closest rational to ``v`` with denominator at most ``max_denominator``."""
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    if isinstance(v, Fraction):
        exact = v
    elif isinstance(v, (int, str)):
        exact = to_fraction(v)
    else:
        exact = mpf_to_fraction(v)
    return exact.limit_denominator(max_denominator)


def constant(tag: str, precision: int = DEFAULT_PRECISION,
             max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> ExactConstant:
    """Evaluate one of ``E1C, E3C, X_ROOT, Y_VALUE`` at ``precision`` bits."""
    if tag not in _FORMULAS:
        raise ValueError(f"unknown constant {tag!r}; expected one of {CONSTANT_TAGS}")
    if precision < MIN_PRECISION:
        raise ValueError(f"precision {precision} bits is below the {MIN_PRECISION}-bit floor")
    with mpmath.workprec(precision):
        value = +_FORMULAS[tag]()
        rational = rationalize(value, max_denominator)
        bound = abs(value - mpmath.mpf(rational.numerator) / rational.denominator)
    return ExactConstant(tag, precision, value, rational, bound)


def quartic(x):
    """``3x^4 - 9x^3 + 9x^2 - 5x + 1``, whose root in (0, 1) is X_ROOT."""
    return (((3 * x - 9) * x + 9) * x - 5) * x + 1


def target_distribution(max_denominator: int = DEFAULT_MAX_DENOMINATOR,
                        precision: int = DEFAULT_PRECISION) -> SymmetricDist:
    """Rationalized ``(E1C, -1/3, E3)`` with E3 the forced value at that point."""
    e1 = constant("E1C", precision, max_denominator).rational
    e2 = Fraction(-1, 3)
    iv = e3_interval(e1, e2)
    if iv.empty:
        raise ValueError("rationalized E1C falls outside the valid region")
    return SymmetricDist(e1, e2, iv.midpoint)
