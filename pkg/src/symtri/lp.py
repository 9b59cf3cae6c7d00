"""Exact feasibility of ``{x >= 0 : A x = b}`` with Farkas certificates.

:func:`solve_feasibility` returns either a :class:`Feasible` point or an
:class:`Infeasible` dual vector ``y`` with ``A^T y <= 0`` and ``b^T y > 0``,
both in exact rationals.  The work is done by a phase-I revised simplex
(Dantzig pricing, Bland's rule once pivots stall) whose basis solves are
exact (python-flint).  For large systems
an optional floating-point HiGHS run supplies a starting basis; it is only a
hint, and the exact simplex takes over from it.

:func:`verify_certificate` re-checks an outcome with its own plain-Fraction
arithmetic and never calls into the solver.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import flint

from .errors import ModelFileError, ResourceLimitError
from .lin import SparseMatrix, format_fraction, to_fraction

log = logging.getLogger(__name__)

DEFAULT_PIVOT_LIMIT = 10**7
HINT_MIN_ROWS = 48
DEGENERATE_SWITCH = 20
EXTRA = -1      # column index of the warm-start repair column


@dataclass
class StandardLp:
    """Equality system ``A x = b`` over implicitly nonnegative variables."""

    A: SparseMatrix
    b: list[Fraction]

    def __post_init__(self):
        self.b = [to_fraction(v) for v in self.b]
        if len(self.b) != self.A.n_rows:
            raise ValueError(f"b has {len(self.b)} entries for {self.A.n_rows} rows")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class SolveStats:
    pivots: int = 0
    method: str = "simplex"
    rows: int = 0
    cols: int = 0
    active_rows: int = 0
    rounds: int = 0
    seconds: float = 0.0


@dataclass(frozen=True)
class Feasible:
    x: tuple[Fraction, ...]
    stats: SolveStats = field(default_factory=SolveStats, compare=False, repr=False)

    feasible = True


@dataclass(frozen=True)
class Infeasible:
    y: tuple[Fraction, ...]
    stats: SolveStats = field(default_factory=SolveStats, compare=False, repr=False)

    feasible = False


LpOutcome = Union[Feasible, Infeasible]


# ---------------------------------------------------------------------------
# presolve: primitive integer rows, duplicates removed


@dataclass
class _Canonical:
    cols: list[tuple[int, ...]]
    vals: list[tuple[int, ...]]
    rhs: list[int]
    scale: list[Fraction]       # canonical row = scale * original row
    origin: list[int]           # original row index


def _canonicalize(lp: StandardLp):
    """Return ``(_Canonical, None)`` or ``(None, y)`` for a trivially inconsistent row."""
    out = _Canonical([], [], [], [], [])
    seen: set = set()
    for i, row in enumerate(lp.A.rows()):
        r = lp.b[i]
        if not row:
            if r:
                y = [Fraction(0)] * lp.A.n_rows
                y[i] = Fraction(1 if r > 0 else -1)
                return None, y
            continue
        cols = tuple(sorted(row))
        den = r.denominator
        for j in cols:
            den = den * row[j].denominator // math.gcd(den, row[j].denominator)
        ints = [int(row[j] * den) for j in cols]
        rhs = int(r * den)
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        g = math.gcd(g, rhs)
        sign = 1
        if rhs < 0 or (rhs == 0 and ints[0] < 0):
            sign = -1
        ints = tuple(sign * v // g for v in ints)
        rhs = sign * rhs // g
        key = (cols, ints, rhs)
        if key in seen:
            continue
        seen.add(key)
        out.cols.append(cols)
        out.vals.append(ints)
        out.rhs.append(rhs)
        out.scale.append(Fraction(sign * den, g))
        out.origin.append(i)
    return out, None


# ---------------------------------------------------------------------------
# exact phase-I revised simplex


class _PhaseOne:
    """``min sum(a)`` s.t. ``sigma*(A_R x) + a = sigma*b_R``, ``x, a >= 0``.

    Column ``j < n`` is structural; column ``n + t`` is the artificial of the
    ``t``-th active row.  Column ``EXTRA`` is an optional cost-one column used
    to repair a warm basis that is slightly infeasible; it does not touch the
    structural columns, so the duals at an optimum still form a Farkas
    certificate.  Leaving: minimum ratio, ties broken by smallest basic column
    index.
    """

    def __init__(self, canon: _Canonical, rows: Sequence[int], sigma: Sequence[int],
                 n: int, pivot_limit: int, extra: dict[int, flint.fmpq] | None = None):
        self.n = n
        self.extra = extra or {}
        self.farkas = None
        self.k = len(rows)
        self.rows = list(rows)
        self.sigma = list(sigma)
        self.pivot_limit = pivot_limit
        self.pivots = 0
        self.b = [s * canon.rhs[i] for s, i in zip(self.sigma, self.rows)]
        cols: list[dict[int, int]] = [dict() for _ in range(n)]
        for t, (i, s) in enumerate(zip(self.rows, self.sigma)):
            for j, v in zip(canon.cols[i], canon.vals[i]):
                cols[j][t] = s * v
        self.cols = cols

    def column(self, j: int) -> dict:
        if j == EXTRA:
            return self.extra
        if j < self.n:
            return self.cols[j]
        return {j - self.n: 1}

    def cost(self, j: int) -> int:
        return 0 if 0 <= j < self.n else 1

    def _solve(self, basis, rhs, transpose=False):
        """Solve with the basis matrix or its transpose.

        Artificial columns are unit vectors, so only the block of structural
        columns against the rows without a basic artificial is factored.
        """
        k, n = self.k, self.n
        struct = [(p, j) for p, j in enumerate(basis) if j < n]
        art_pos = {j - n: p for p, j in enumerate(basis) if j >= n}
        free = [t for t in range(k) if t not in art_pos]
        if len(free) != len(struct):
            raise ZeroDivisionError("singular basis")
        s = len(struct)
        out = [flint.fmpq(0)] * k
        if transpose:
            u = {t: flint.fmpq(rhs[p]) for t, p in art_pos.items()}
            vec = []
            for p, j in struct:
                acc = flint.fmpq(rhs[p])
                for t, v in self.column(j).items():
                    if t in u:
                        acc -= v * u[t]
                vec.append(acc)
            if s:
                where = {t: q for q, t in enumerate(free)}
                M = flint.fmpq_mat(s, s)
                for q, (_, j) in enumerate(struct):
                    for t, v in self.column(j).items():
                        if t in where:
                            M[q, where[t]] = v
                sol = M.solve(flint.fmpq_mat(s, 1, vec)).entries()
                for q, t in enumerate(free):
                    u[t] = sol[q]
            for t, v in u.items():
                out[t] = v
            return out
        z = []
        if s:
            where = {t: q for q, t in enumerate(free)}
            M = flint.fmpq_mat(s, s)
            for q, (_, j) in enumerate(struct):
                for t, v in self.column(j).items():
                    if t in where:
                        M[where[t], q] = v
            z = M.solve(flint.fmpq_mat(s, 1, [flint.fmpq(rhs[t]) for t in free])).entries()
        for (p, _), v in zip(struct, z):
            out[p] = v
        acc = {t: flint.fmpq(rhs[t]) for t in art_pos}
        for (_, j), v in zip(struct, z):
            if v:
                for t, a in self.column(j).items():
                    if t in acc:
                        acc[t] -= a * v
        for t, p in art_pos.items():
            out[p] = acc[t]
        return out

    def start(self, basis: Sequence[int] | None):
        """Validate a warm basis, repairing small infeasibilities.

        If some basic values ``x_B`` are negative, ``d = B (x_B)^-`` (the
        negative part) replaces one offending column; with the column at 1 and
        the other negatives clamped to 0 the basis is feasible and stays
        nonsingular.  Falls back to the all-artificial basis otherwise.
        """
        if basis is not None and len(basis) == self.k and len(set(basis)) == self.k:
            try:
                xb = self._solve(basis, self.b)
            except ZeroDivisionError:
                log.debug("warm basis singular; cold start")
            else:
                negative = [p for p, v in enumerate(xb) if v < 0]
                if not negative:
                    return list(basis), xb
                # an infeasible warm basis may still carry exact Farkas duals
                u = self._duals(basis)
                if self._certifies(u):
                    self.farkas = u
                    return list(basis), xb
                if EXTRA not in basis:
                    log.debug("repairing %d negative basic values", len(negative))
                    d: dict[int, flint.fmpq] = {}
                    for p in negative:
                        for t, a in self.column(basis[p]).items():
                            d[t] = d.get(t, 0) + a * xb[p]
                    self.extra = {t: v for t, v in d.items() if v}
                    basis = list(basis)
                    basis[negative[0]] = EXTRA
                    xb = [v if v > 0 else flint.fmpq(0) for v in xb]
                    xb[negative[0]] = flint.fmpq(1)
                    return basis, xb
                log.debug("warm basis not primal feasible; cold start")
        basis = [self.n + t for t in range(self.k)]
        return basis, [flint.fmpq(v) for v in self.b]

    def _duals(self, basis):
        cb = [self.cost(j) for j in basis]
        if not any(cb):
            return [flint.fmpq(0)] * self.k
        return self._solve(basis, cb, transpose=True)

    def _certifies(self, u) -> bool:
        """``b.u > 0`` and ``u.A_j <= 0`` on every structural column."""
        zero = flint.fmpq(0)
        if sum((b * v for b, v in zip(self.b, u) if v), zero) <= 0:
            return False
        return all(sum((v * u[t] for t, v in col.items()), zero) <= 0 for col in self.cols)

    def _price(self, u, in_basis, bland: bool):
        """Entering column: most negative reduced cost, or the first one under Bland."""
        n, k = self.n, self.k
        zero = flint.fmpq(0)
        entering, best = None, zero
        for j in range(n):
            if j in in_basis:
                continue
            col = self.cols[j]
            if not col:
                continue
            d = -sum((v * u[t] for t, v in col.items()), zero)
            if d < best:
                entering, best = j, d
                if bland:
                    return entering
        for t in range(k):
            if n + t not in in_basis:
                d = 1 - u[t]
                if d < best:
                    entering, best = n + t, d
                    if bland:
                        return entering
        if self.extra and EXTRA not in in_basis:
            d = 1 - sum((v * u[t] for t, v in self.extra.items()), zero)
            if d < best:
                entering = EXTRA
        return entering

    def run(self, basis: Sequence[int] | None = None):
        basis, xb = self.start(basis)
        if self.farkas is not None:
            return basis, xb, self.farkas
        k = self.k
        degenerate = 0
        while True:
            u = self._duals(basis)
            # Dantzig pricing, with Bland's rule during long degenerate runs so
            # that no basis can repeat
            entering = self._price(u, set(basis), degenerate >= DEGENERATE_SWITCH)
            if entering is None:
                return basis, xb, u
            if self.pivots >= self.pivot_limit:
                raise ResourceLimitError(f"pivot limit {self.pivot_limit} reached")
            w = self._solve(basis, [self.column(entering).get(t, 0) for t in range(k)])
            leave = None
            best = None
            for p in range(k):
                if w[p] > 0:
                    ratio = xb[p] / w[p]
                    if (best is None or ratio < best
                            or (ratio == best and basis[p] < basis[leave])):
                        best, leave = ratio, p
            if leave is None:  # phase I is bounded below by zero
                raise AssertionError("unbounded phase-I direction")
            degenerate = degenerate + 1 if best == 0 else 0
            xb = [xb[p] - best * w[p] for p in range(k)]
            xb[leave] = best
            basis[leave] = entering
            self.pivots += 1


def _highs_hint(canon: _Canonical, n: int, scaled: bool | None = None):
    """Float phase-I run; returns (active rows, basis in local numbering) or None.

    Rows go to HiGHS as they are unless ``scaled`` is set; ``None`` retries
    with unit-scaled rows when the plain run fails.
    """
    if scaled is None:
        return _highs_hint(canon, n, False) or _highs_hint(canon, n, True)
    try:
        import highspy
        import numpy as np
        from scipy.sparse import coo_matrix
    except ImportError:  # pragma: no cover - optional dependency
        return None
    k = len(canon.rhs)
    r_idx, c_idx, vals = [], [], []
    try:
        rhs = np.empty(k)
        for t in range(k):
            # integer rows can carry huge entries
            big = max(max(abs(v) for v in canon.vals[t]), abs(canon.rhs[t])) if scaled else 1
            s = 1 if canon.rhs[t] >= 0 else -1
            for j, v in zip(canon.cols[t], canon.vals[t]):
                r_idx.append(t)
                c_idx.append(j)
                vals.append(float(Fraction(s * v, big)))
            r_idx.append(t)
            c_idx.append(n + t)
            vals.append(1.0)
            rhs[t] = float(Fraction(abs(canon.rhs[t]), big))
    except OverflowError:
        return None
    A = coo_matrix((vals, (r_idx, c_idx)), shape=(k, n + k)).tocsc()
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    h.setOptionValue("presolve", "off")
    h.setOptionValue("threads", 1)
    lp = highspy.HighsLp()
    lp.num_col_ = n + k
    lp.num_row_ = k
    lp.col_cost_ = np.r_[np.zeros(n), np.ones(k)]
    lp.col_lower_ = np.zeros(n + k)
    lp.col_upper_ = np.full(n + k, highspy.kHighsInf)
    lp.row_lower_ = rhs
    lp.row_upper_ = rhs
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = A.indptr
    lp.a_matrix_.index_ = A.indices
    lp.a_matrix_.value_ = A.data
    h.passModel(lp)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    bs = h.getBasis()
    basic = highspy.HighsBasisStatus.kBasic
    row_status = list(bs.row_status)    # the binding copies on every index
    col_status = list(bs.col_status)
    active = [t for t in range(k) if row_status[t] != basic]
    pos = {t: p for p, t in enumerate(active)}
    basis = [j for j in range(n) if col_status[j] == basic]
    basis += [n + pos[t] for t in active if col_status[n + t] == basic]
    if len(basis) > len(active):
        return None
    have = set(basis)
    for p in range(len(active)):
        if len(basis) == len(active):
            break
        if n + p not in have:
            basis.append(n + p)
    return active, basis


def solve_feasibility(lp: StandardLp, *, pivot_limit: int = DEFAULT_PIVOT_LIMIT,
                      hint: bool | None = None) -> LpOutcome:
    """Decide ``{x >= 0 : A x = b}`` exactly.

    ``hint=None`` uses the floating-point warm start only for systems with at
    least ``HINT_MIN_ROWS`` distinct rows; ``True``/``False`` force it.
    Raises :class:`ResourceLimitError` after ``pivot_limit`` exact pivots.
    """
    t0 = time.perf_counter()
    m, n = lp.shape
    stats = SolveStats(rows=m, cols=n)
    canon, y0 = _canonicalize(lp)
    if canon is None:
        stats.method = "presolve"
        stats.seconds = time.perf_counter() - t0
        return Infeasible(tuple(y0), stats)
    k = len(canon.rhs)
    if k == 0:
        stats.method = "presolve"
        stats.seconds = time.perf_counter() - t0
        return Feasible(tuple([Fraction(0)] * n), stats)

    use_hint = hint if hint is not None else k >= HINT_MIN_ROWS
    active, basis = list(range(k)), None
    if use_hint:
        h = _highs_hint(canon, n)
        if h is not None:
            active, basis = h
            stats.method = "hint+simplex"
    sigma = [1 if canon.rhs[i] >= 0 else -1 for i in active]
    pivots = 0
    extra = None
    while True:
        stats.rounds += 1
        simplex = _PhaseOne(canon, active, sigma, n, pivot_limit - pivots, extra)
        basis, xb, u = simplex.run(basis)
        pivots += simplex.pivots
        extra = simplex.extra
        # b.u equals the phase-I optimum, and is positive on an early Farkas exit
        bu = sum((bt * v for bt, v in zip(simplex.b, u) if v), flint.fmpq(0))
        if bu > 0:
            y = [Fraction(0)] * m
            for t, i in enumerate(active):
                if u[t]:
                    ut = Fraction(int(u[t].p), int(u[t].q))
                    y[canon.origin[i]] = sigma[t] * ut * canon.scale[i]
            stats.pivots = pivots
            stats.active_rows = len(active)
            stats.seconds = time.perf_counter() - t0
            return Infeasible(tuple(y), stats)
        x = [Fraction(0)] * n
        for p, j in enumerate(basis):
            if 0 <= j < n and xb[p]:
                x[j] = Fraction(int(xb[p].p), int(xb[p].q))
        in_active = set(active)
        violated = []
        for i in range(k):
            if i in in_active:
                continue
            lhs = sum((v * x[j] for j, v in zip(canon.cols[i], canon.vals[i])), Fraction(0))
            if lhs != canon.rhs[i]:
                violated.append((i, canon.rhs[i] - lhs))
        if not violated:
            stats.pivots = pivots
            stats.active_rows = len(active)
            stats.seconds = time.perf_counter() - t0
            return Feasible(tuple(x), stats)
        log.debug("%d dropped rows violated; extending the active set", len(violated))
        # artificials of new rows start basic at |residual|; old indices stay valid
        k0 = len(active)
        for i, residual in violated:
            active.append(i)
            sigma.append(1 if residual > 0 else -1)
        basis = basis + [n + t for t in range(k0, len(active))]


def verify_certificate(lp: StandardLp, out: LpOutcome) -> bool:
    """Exact, solver-independent check of an outcome's defining inequalities."""
    m, n = lp.shape
    rows = list(lp.A.rows())
    if isinstance(out, Feasible):
        x = out.x
        if len(x) != n:
            return False
        for v in x:
            if not isinstance(v, (int, Fraction)) or v < 0:
                return False
        for i in range(m):
            acc = Fraction(0)
            for j, a in rows[i].items():
                acc += a * x[j]
            if acc != lp.b[i]:
                return False
        return True
    if isinstance(out, Infeasible):
        y = out.y
        if len(y) != m:
            return False
        aty = [Fraction(0)] * n
        for i in range(m):
            yi = y[i]
            if not isinstance(yi, (int, Fraction)):
                return False
            if yi:
                for j, a in rows[i].items():
                    aty[j] += a * yi
        if any(v > 0 for v in aty):
            return False
        bty = Fraction(0)
        for i in range(m):
            bty += lp.b[i] * y[i]
        return bty > 0
    return False


# ---------------------------------------------------------------------------
# plain-text dump: "m n", then "row col num/den" triples, then m lines of b


def dump_lp(lp: StandardLp) -> str:
    m, n = lp.shape
    lines = [f"{m} {n}"]
    lines += [f"{i} {j} {format_fraction(v)}" for i, j, v in lp.A.entries()]
    lines += [format_fraction(v) for v in lp.b]
    return "\n".join(lines) + "\n"


def load_lp(text: str) -> StandardLp:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ModelFileError("empty LP dump", "header")
    try:
        m, n = (int(t) for t in lines[0].split())
    except ValueError:
        raise ModelFileError("header must be 'm_rows n_cols'", "header") from None
    if len(lines) < 1 + m:
        raise ModelFileError(f"expected {m} right-hand-side lines", "b")
    body, tail = lines[1:len(lines) - m], lines[len(lines) - m:]
    rows: list[dict[int, Fraction]] = [{} for _ in range(m)]
    for ln in body:
        parts = ln.split()
        if len(parts) != 3:
            raise ModelFileError(f"bad triple {ln!r}", "A")
        i, j, v = int(parts[0]), int(parts[1]), Fraction(parts[2])
        if not (0 <= i < m and 0 <= j < n):
            raise ModelFileError(f"entry ({i}, {j}) out of range", "A")
        if j in rows[i]:
            raise ModelFileError(f"duplicate entry ({i}, {j})", "A")
        rows[i][j] = v
    try:
        b = [Fraction(t) for t in tail]
    except ValueError as exc:
        raise ModelFileError(str(exc), "b") from None
    return StandardLp(SparseMatrix(m, n, rows), b)
