"""Exact rational linear algebra and bivariate polynomials in (E1, E2).

Rationals are :class:`fractions.Fraction`.  Sparse vectors are plain
``dict[int, Fraction]`` with no stored zeros; :class:`SparseMatrix` is a
row-major list of such dicts.  :class:`Poly2` holds right-hand sides of the
factorized inflation constraints and Farkas witnesses.

Dense square solves (used inside the simplex) go through python-flint.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import flint

from .errors import DegreeOverflowError, ModelFileError

DEFAULT_MAX_DEGREE = 40

SparseVec = dict  # dict[int, Fraction], zeros never stored


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions and decimal/``num/den`` strings exactly.

    Floats are refused: every number entering a certificate must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, flint.fmpq):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, flint.fmpz):
        return Fraction(int(value))
    raise TypeError(f"cannot convert {type(value).__name__} exactly to a rational")


def format_fraction(q: Fraction) -> str:
    """Always ``num/den``, also for integers."""
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# sparse vectors and matrices


def row_combine(rows: Iterable[tuple[Fraction, Mapping[int, Fraction]]],
                length: int | None = None) -> dict[int, Fraction]:
    """Exact linear combination ``sum(c * row)`` of sparse rows.

    If ``length`` is given every index must lie in ``range(length)``.
    """
    out: dict[int, Fraction] = {}
    for coeff, row in rows:
        if not coeff:
            continue
        for j, v in row.items():
            if length is not None and not 0 <= j < length:
                raise ValueError(f"index {j} outside a row of length {length}")
            s = out.get(j, 0) + coeff * v
            if s:
                out[j] = s
            else:
                out.pop(j, None)
    return out


def sparse_dot(row: Mapping[int, Fraction], x: Sequence) -> Fraction:
    return sum((v * x[j] for j, v in row.items()), Fraction(0))


class SparseMatrix:
    """Row-major sparse matrix of Fractions.

    Zero entries are never stored; ``set`` with a zero value deletes the entry.
    """

    __slots__ = ("n_rows", "n_cols", "_rows")

    def __init__(self, n_rows: int, n_cols: int, rows: Iterable[Mapping[int, Fraction]] | None = None):
        self.n_rows = n_rows
        self.n_cols = n_cols
        if rows is None:
            self._rows = [{} for _ in range(n_rows)]
        else:
            self._rows = []
            for r in rows:
                clean = {}
                for j, v in r.items():
                    if not 0 <= j < n_cols:
                        raise ValueError(f"column {j} out of range for {n_cols} columns")
                    v = to_fraction(v)
                    if v:
                        clean[j] = v
                self._rows.append(clean)
            if len(self._rows) != n_rows:
                raise ValueError(f"expected {n_rows} rows, got {len(self._rows)}")

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, Fraction]], n_cols: int) -> "SparseMatrix":
        return cls(len(rows), n_cols, rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._rows)

    def row(self, i: int) -> Mapping[int, Fraction]:
        return self._rows[i]

    def rows(self) -> Iterator[Mapping[int, Fraction]]:
        return iter(self._rows)

    def get(self, i: int, j: int) -> Fraction:
        return self._rows[i].get(j, Fraction(0))

    def set(self, i: int, j: int, value) -> None:
        if not 0 <= j < self.n_cols:
            raise IndexError(j)
        value = to_fraction(value)
        if value:
            self._rows[i][j] = value
        else:
            self._rows[i].pop(j, None)

    def entries(self) -> Iterator[tuple[int, int, Fraction]]:
        for i, r in enumerate(self._rows):
            for j in sorted(r):
                yield i, j, r[j]

    def dot(self, x: Sequence) -> list[Fraction]:
        if len(x) != self.n_cols:
            raise ValueError("dimension mismatch")
        return [sparse_dot(r, x) for r in self._rows]

    def rdot(self, y: Sequence) -> list[Fraction]:
        """``A^T y``."""
        if len(y) != self.n_rows:
            raise ValueError("dimension mismatch")
        out = [Fraction(0)] * self.n_cols
        for yi, r in zip(y, self._rows):
            if yi:
                for j, v in r.items():
                    out[j] += yi * v
        return out

    def columns(self) -> list[dict[int, Fraction]]:
        cols: list[dict[int, Fraction]] = [{} for _ in range(self.n_cols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __repr__(self):
        return f"SparseMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


def _fmpq(v) -> "flint.fmpq":
    q = to_fraction(v)
    return flint.fmpq(q.numerator, q.denominator)


def solve_square(columns: Sequence[Mapping[int, object]], rhs: Sequence, size: int,
                 transpose: bool = False) -> list[Fraction]:
    """Solve ``B z = rhs`` (or ``B^T z = rhs``) exactly.

    ``B`` is given by its sparse columns.  Raises ``ZeroDivisionError`` when
    ``B`` is singular.
    """
    B = flint.fmpq_mat(size, size)
    for j, col in enumerate(columns):
        for i, v in col.items():
            if transpose:
                B[j, i] = _fmpq(v)
            else:
                B[i, j] = _fmpq(v)
    z = B.solve(flint.fmpq_mat(size, 1, [_fmpq(v) for v in rhs]))
    return [Fraction(int(v.p), int(v.q)) for v in z.entries()]


# ---------------------------------------------------------------------------
# bivariate polynomials


class Poly2:
    """Polynomial in (E1, E2) with exact rational coefficients.

    Keys are ``(deg_e1, deg_e2)``.  Instances are treated as immutable.
    """

    __slots__ = ("_c", "max_degree")

    def __init__(self, coeffs: Mapping[tuple[int, int], object] | None = None,
                 max_degree: int = DEFAULT_MAX_DEGREE):
        self.max_degree = max_degree
        c = {}
        for (i, j), v in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            v = to_fraction(v)
            if v:
                c[(int(i), int(j))] = v
        if c and max(i + j for i, j in c) > max_degree:
            raise DegreeOverflowError(
                f"total degree {max(i + j for i, j in c)} exceeds bound {max_degree}")
        self._c = c

    @classmethod
    def const(cls, value) -> "Poly2":
        return cls({(0, 0): value})

    @classmethod
    def e1(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def e2(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @property
    def coeffs(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._c)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self._c), default=0)

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._c)

    def constant_term(self) -> Fraction:
        return self._c.get((0, 0), Fraction(0))

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        if isinstance(other, Poly2):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == Poly2.const(other)._c
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def _coerce(self, other):
        if isinstance(other, Poly2):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly2.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0) + v
        return Poly2(out, max(self.max_degree, other.max_degree))

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -v for k, v in self._c.items()}, self.max_degree)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly2({k: v * other for k, v in self._c.items()}, self.max_degree)
        if not isinstance(other, Poly2):
            return NotImplemented
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __call__(self, e1, e2) -> Fraction:
        return poly_eval(self, e1, e2)

    def terms(self) -> list[tuple[Fraction, int, int]]:
        """``(coeff, deg_e1, deg_e2)`` sorted by descending E1 then E2 degree."""
        return [(self._c[k], k[0], k[1]) for k in sorted(self._c, reverse=True)]

    def __repr__(self):
        if not self._c:
            return "Poly2(0)"
        parts = []
        for c, i, j in self.terms():
            mono = "".join(s for s in (
                "" if i == 0 else ("*E1" if i == 1 else f"*E1^{i}"),
                "" if j == 0 else ("*E2" if j == 1 else f"*E2^{j}")))
            parts.append(f"{c}{mono}")
        return "Poly2(" + " + ".join(parts) + ")"


def poly_mul(p: Poly2, q: Poly2) -> Poly2:
    bound = max(p.max_degree, q.max_degree)
    if p.degree + q.degree > bound and not (p.is_zero() or q.is_zero()):
        raise DegreeOverflowError(f"product degree {p.degree + q.degree} exceeds bound {bound}")
    out: dict[tuple[int, int], Fraction] = {}
    for (i1, j1), a in p._c.items():
        for (i2, j2), b in q._c.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + a * b
    return Poly2(out, bound)


def poly_eval(p: Poly2, e1, e2) -> Fraction:
    """Nested Horner evaluation: outer in E1, inner in E2."""
    e1 = to_fraction(e1)
    e2 = to_fraction(e2)
    if not p._c:
        return Fraction(0)
    by_e1: dict[int, dict[int, Fraction]] = {}
    for (i, j), c in p._c.items():
        by_e1.setdefault(i, {})[j] = c
    acc = Fraction(0)
    for i in range(max(by_e1), -1, -1):
        inner = Fraction(0)
        row = by_e1.get(i)
        if row:
            for j in range(max(row), -1, -1):
                inner = inner * e2 + row.get(j, 0)
        acc = acc * e1 + inner
    return acc


def dump_poly(p: Poly2) -> str:
    """One ``<num>/<den> <deg_E1> <deg_E2>`` line per nonzero term."""
    return "".join(f"{format_fraction(c)} {i} {j}\n" for c, i, j in p.terms())


def parse_poly(text: str, max_degree: int = DEFAULT_MAX_DEGREE) -> Poly2:
    coeffs: dict[tuple[int, int], Fraction] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ModelFileError(f"line {lineno}: expected '<num>/<den> <deg_E1> <deg_E2>'", "poly")
        try:
            c = Fraction(parts[0])
            i, j = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ModelFileError(f"line {lineno}: {exc}", "poly") from None
        if (i, j) in coeffs:
            raise ModelFileError(f"line {lineno}: duplicate monomial E1^{i} E2^{j}", "poly")
        coeffs[(i, j)] = c
    return Poly2(coeffs, max_degree)
