"""Linear constraints implied by a symmetric triangle realization.

If identical sources and identical measurement devices reproduce the
distribution in the triangle, the same components arranged in a ring of
``m`` nodes produce a cyclically invariant distribution ``p_m`` whose
marginals are pinned down by the observed ``q1``/``q2``.  The generators here
emit those constraints as rows over orbit variables (one variable per
rotation class, holding the common probability of its words):

``L1``
    ``sum_{a0,a2} p_m = q1(a1) * sum_{a0,a1,a2} p_m`` for every context on
    nodes ``3..m-1`` (ring sizes >= 5).
``L2``
    ``sum_{a0,a3} p_m = q2(a1,a2) * sum_{a0..a3} p_m`` for every context on
    nodes ``4..m-1`` (ring sizes >= 6).
``FACTORIZED``
    marginals over node sets whose surviving arcs have length 1 or 2 equal
    products of ``q1``/``q2``; the right-hand sides are polynomials in (E1, E2).
``DIRECT_MARGINAL``
    one-node and adjacent-pair marginals equal ``q1`` and ``q2``.
``COUPLING``
    a chain of ``m-2`` nodes has the same marginal in rings ``m`` and ``m-1``.
``NORMALIZATION``
    every ring distribution sums to one.

Only ``L1``/``L2`` put (E1, E2) into the coefficient matrix; systems built
from the other families have constant matrices and polynomial right-hand
sides, which is what makes witnesses valid away from the anchor point.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .dist import SymmetricDist, marginal1, marginal2, q1_poly, q2_poly
from .lin import Poly2, SparseMatrix, format_fraction, to_fraction
from .lp import StandardLp, dump_lp
from .symmetry import MAX_RING, OrbitTable, bits_of_word, build_orbit_table, rotate

MIN_INFLATION_RING = 4


class Family(str, Enum):
    L1 = "L1"
    L2 = "L2"
    FACTORIZED = "FACTORIZED"
    DIRECT_MARGINAL = "DIRECT_MARGINAL"
    COUPLING = "COUPLING"
    NORMALIZATION = "NORMALIZATION"

    def __str__(self):
        return self.value


LPI_FAMILIES = frozenset({Family.L1, Family.L2})
DEFAULT_FAMILIES = frozenset({Family.L1, Family.L2, Family.COUPLING, Family.NORMALIZATION})
CERTIFICATE_FAMILIES = frozenset(
    {Family.FACTORIZED, Family.DIRECT_MARGINAL, Family.COUPLING, Family.NORMALIZATION})
ALL_FAMILIES = frozenset(Family)


def parse_families(spec: str | Iterable) -> frozenset[Family]:
    """``"L1,L2"`` or an iterable of names; NORMALIZATION is always added."""
    if isinstance(spec, str):
        names = [s.strip() for s in spec.split(",") if s.strip()]
    else:
        names = list(spec)
    out = set()
    for name in names:
        if isinstance(name, Family):
            out.add(name)
            continue
        key = str(name).upper().replace("-", "_")
        aliases = {"F": "FACTORIZED", "FACT": "FACTORIZED", "DIRECT": "DIRECT_MARGINAL",
                   "C": "COUPLING", "NORM": "NORMALIZATION", "ALL": None}
        if key in aliases:
            if aliases[key] is None:
                out |= ALL_FAMILIES
                continue
            key = aliases[key]
        try:
            out.add(Family(key))
        except ValueError:
            raise ValueError(f"unknown constraint family {name!r}") from None
    out.add(Family.NORMALIZATION)
    return frozenset(out)


@dataclass(frozen=True)
class RingSpec:
    m: int

    def __post_init__(self):
        if not MIN_INFLATION_RING <= self.m <= MAX_RING:
            raise ValueError(f"ring size {self.m} outside [{MIN_INFLATION_RING}, {MAX_RING}]")

    @property
    def ring_sizes(self) -> tuple[int, ...]:
        return (self.m,)


@dataclass(frozen=True)
class HierarchyLevel:
    """Level ``n`` asks for rings of every size ``4 .. n+3`` at once."""

    n: int

    def __post_init__(self):
        if self.n < 1 or self.n + 3 > MAX_RING:
            raise ValueError(f"level {self.n} outside [1, {MAX_RING - 3}]")

    @property
    def ring_sizes(self) -> tuple[int, ...]:
        return tuple(range(MIN_INFLATION_RING, self.n + 4))


Target = Union[RingSpec, HierarchyLevel]


# ---------------------------------------------------------------------------
# helpers


def _bit(m: int, node: int) -> int:
    return m - 1 - node


def _spread(m: int, nodes: Sequence[int]) -> np.ndarray:
    """All words supported on ``nodes``, enumerated with ``nodes[0]`` most significant."""
    out = np.zeros(1 << len(nodes), dtype=np.int64)
    vals = np.arange(1 << len(nodes), dtype=np.int64)
    for pos, node in enumerate(nodes):
        bit = (vals >> (len(nodes) - 1 - pos)) & 1
        out |= bit << _bit(m, node)
    return out


def _index(table: OrbitTable | None, words: np.ndarray) -> np.ndarray:
    return words if table is None else table.index_of[words]


def _weighted_rows(cols: np.ndarray, coefs: Sequence[Fraction]) -> list[dict[int, Fraction]]:
    rows = []
    for r in cols.tolist():
        d: dict[int, Fraction] = {}
        for k, c in zip(r, coefs):
            s = d.get(k, 0) + c
            if s:
                d[k] = s
            else:
                d.pop(k, None)
        rows.append(d)
    return rows


def _count_rows(cols: np.ndarray) -> list[dict[int, Fraction]]:
    rows = []
    for r in cols:
        keys, counts = np.unique(r, return_counts=True)
        rows.append({int(k): Fraction(int(c)) for k, c in zip(keys, counts)})
    return rows


def _row_key(row) -> tuple:
    return tuple(sorted(row.items()))


def _dedupe(rows):
    seen = set()
    out = []
    for row in rows:
        key = _row_key(row)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out


def _dedupe_with_rhs(pairs):
    seen = set()
    out = []
    for row, rhs in pairs:
        key = (_row_key(row), rhs)
        if key not in seen:
            seen.add(key)
            out.append((row, rhs))
    return out


def _table(m: int, project: bool) -> OrbitTable | None:
    return build_orbit_table(m) if project else None


# ---------------------------------------------------------------------------
# generators


def gen_L1(m: int, d: SymmetricDist, project: bool = True) -> list[dict[int, Fraction]]:
    """Known single node 1, summed neighbours 0 and 2, context ``3..m-1``.

    Rows have right-hand side zero.  Keys are orbit indices, or words when
    ``project`` is false.  Empty for ``m < 5``.
    """
    if m < 5:
        return []
    table = _table(m, project)
    q1 = marginal1(d)
    ctx = _spread(m, range(3, m))
    slots = _spread(m, (0, 1, 2))              # (a0, b1, a2)
    b1 = (slots >> _bit(m, 1)) & 1
    rows = []
    for a1 in (1, -1):
        known = q1(a1)
        mine = 0 if a1 == 1 else 1
        coefs = [(1 if b == mine else 0) - known for b in b1.tolist()]
        words = ctx[:, None] | slots[None, :]
        rows += _weighted_rows(_index(table, words), coefs)
    return _dedupe(rows)


def gen_L2(m: int, d: SymmetricDist, project: bool = True) -> list[dict[int, Fraction]]:
    """Known adjacent pair (1, 2), summed nodes 0 and 3, context ``4..m-1``.

    Empty for ``m < 6``.
    """
    if m < 6:
        return []
    table = _table(m, project)
    q2 = marginal2(d)
    ctx = _spread(m, range(4, m))
    slots = _spread(m, (0, 1, 2, 3))           # (a0, b1, b2, a3)
    b1 = ((slots >> _bit(m, 1)) & 1).tolist()
    b2 = ((slots >> _bit(m, 2)) & 1).tolist()
    rows = []
    for a1, a2 in itertools.product((1, -1), repeat=2):
        known = q2(a1, a2)
        m1, m2 = (0 if a1 == 1 else 1), (0 if a2 == 1 else 1)
        coefs = [(1 if (x == m1 and y == m2) else 0) - known for x, y in zip(b1, b2)]
        words = ctx[:, None] | slots[None, :]
        rows += _weighted_rows(_index(table, words), coefs)
    return _dedupe(rows)


def surviving_arcs(mask: int, m: int) -> list[list[int]] | None:
    """Maximal cyclic runs of surviving nodes (bit set) if all have length 1 or 2.

    Returns None when the pattern is not a valid deletion set: nothing
    deleted, nothing surviving, or some run longer than two.
    """
    bits = bits_of_word(mask, m)
    if all(bits) or not any(bits):
        return None
    start = bits.index(0)
    arcs, cur = [], []
    for t in range(1, m + 1):
        i = (start + t) % m
        if bits[i]:
            cur.append(i)
        elif cur:
            arcs.append(cur)
            cur = []
    if cur:
        arcs.append(cur)
    if any(len(a) > 2 for a in arcs):
        return None
    return arcs


def deletion_patterns(m: int) -> list[int]:
    """Survivor masks of every valid deletion set, one per rotation class."""
    table = build_orbit_table(m)
    return [int(w) for w in table.reps if surviving_arcs(int(w), m) is not None]


def _arc_product(arcs, assignment) -> Poly2:
    rhs = Poly2.const(1)
    for arc in arcs:
        if len(arc) == 1:
            rhs = rhs * q1_poly(assignment[arc[0]])
        else:
            rhs = rhs * q2_poly(assignment[arc[0]], assignment[arc[1]])
    return rhs


def _marginal_rows(m, table, survivors, arcs):
    deleted = [i for i in range(m) if i not in set(survivors)]
    surv_words = _spread(m, survivors)
    del_words = _spread(m, deleted)
    words = surv_words[:, None] | del_words[None, :]
    rows = _count_rows(_index(table, words))
    out = []
    for row, w in zip(rows, surv_words.tolist()):
        assignment = {i: 1 - 2 * ((w >> _bit(m, i)) & 1) for i in survivors}
        out.append((row, _arc_product(arcs, assignment)))
    return out


def gen_factorized(m: int, project: bool = True) -> list[tuple[dict[int, Fraction], Poly2]]:
    """Marginals over every valid deletion pattern (up to rotation) as products.

    A row ``(coeffs, rhs)`` states ``sum_{deleted} p_m(.) = rhs(E1, E2)`` for
    one assignment of the surviving nodes.
    """
    if m < MIN_INFLATION_RING:
        return []
    table = _table(m, project)
    out = []
    for mask in deletion_patterns(m):
        arcs = surviving_arcs(mask, m)
        survivors = [i for arc in arcs for i in arc]
        survivors.sort()
        out += _marginal_rows(m, table, survivors, arcs)
    return _dedupe_with_rhs(out)


def gen_direct_marginals(m: int, project: bool = True) -> list[tuple[dict[int, Fraction], Poly2]]:
    """Node-0 marginal equals ``q1`` and pair-(0, 1) marginal equals ``q2``."""
    if m < MIN_INFLATION_RING:
        return []
    table = _table(m, project)
    out = _marginal_rows(m, table, [0], [[0]])
    out += _marginal_rows(m, table, [0, 1], [[0, 1]])
    return _dedupe_with_rhs(out)


def gen_coupling(m: int, project: bool = True) -> list[tuple[dict[int, Fraction], dict[int, Fraction]]]:
    """Pairs ``(upper, lower)`` meaning ``upper . x_m = lower . x_{m-1}``.

    For each assignment of nodes ``0..m-3``: the sum of ``p_m`` over its last
    two nodes equals the sum of ``p_{m-1}`` over its last node.
    """
    if m < MIN_INFLATION_RING + 1:
        return []
    big, small = _table(m, project), _table(m - 1, project)
    ctx = np.arange(1 << (m - 2), dtype=np.int64)
    upper = _count_rows(_index(big, (ctx[:, None] << 2) | np.arange(4, dtype=np.int64)[None, :]))
    lower = _count_rows(_index(small, (ctx[:, None] << 1) | np.arange(2, dtype=np.int64)[None, :]))
    seen = set()
    out = []
    for u, l in zip(upper, lower):
        key = (_row_key(u), _row_key(l))
        if key not in seen:
            seen.add(key)
            out.append((u, l))
    return out


def gen_normalization(m: int, project: bool = True) -> dict[int, Fraction]:
    if project:
        table = build_orbit_table(m)
        return {k: Fraction(int(s)) for k, s in enumerate(table.orbit_size.tolist())}
    return {w: Fraction(1) for w in range(1 << m)}


def gen_shift_equalities(m: int) -> list[dict[int, Fraction]]:
    """``x_w = x_rot(w)`` over raw words; only used without orbit reduction."""
    rows = []
    for w in range(1 << m):
        r = rotate(w, m, 1)
        if r != w:
            rows.append({w: Fraction(1), r: Fraction(-1)})
    return rows


# ---------------------------------------------------------------------------
# assembly


@dataclass
class InflationSystem:
    """Rows over the concatenated variables of several rings.

    ``rhs[i]`` is a polynomial in (E1, E2) (constant for most families).  When
    ``families`` contains L1 or L2 the matrix itself was built at ``anchor``
    and :meth:`lp_at` only accepts that point.
    """

    rings: tuple[int, ...]
    families: frozenset[Family]
    offsets: dict[int, int]
    n_cols: int
    rows: list[dict[int, Fraction]] = field(repr=False)
    rhs: list[Poly2] = field(repr=False)
    tags: list[tuple[Family, int]] = field(repr=False)
    anchor: tuple[Fraction, Fraction] | None = None
    projected: bool = True

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def matrix_is_constant(self) -> bool:
        return not (self.families & LPI_FAMILIES)

    def matrix(self) -> SparseMatrix:
        return SparseMatrix(len(self.rows), self.n_cols, self.rows)

    def lp_at(self, e1, e2) -> StandardLp:
        e1, e2 = to_fraction(e1), to_fraction(e2)
        if not self.matrix_is_constant and (e1, e2) != self.anchor:
            raise ValueError("L1/L2 rows depend on (E1, E2); rebuild the system at this point")
        return StandardLp(self.matrix(), [p(e1, e2) for p in self.rhs])

    def ring_slice(self, m: int) -> slice:
        start = self.offsets[m]
        width = len(build_orbit_table(m)) if self.projected else 1 << m
        return slice(start, start + width)

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for fam, _ in self.tags:
            out[fam.value] = out.get(fam.value, 0) + 1
        return out


def _shift(row, offset):
    return {k + offset: v for k, v in row.items()}


def build_system(rings: Sequence[int], families: Iterable, d: SymmetricDist | None = None,
                 project: bool = True) -> InflationSystem:
    """Concatenate ring variables and emit every enabled family.

    COUPLING links consecutive sizes present in ``rings``.  ``d`` is required
    when L1 or L2 is enabled.
    """
    fams = parse_families(families)
    rings = tuple(sorted(set(rings)))
    for m in rings:
        if m < MIN_INFLATION_RING or m > MAX_RING:
            raise ValueError(f"ring size {m} outside [{MIN_INFLATION_RING}, {MAX_RING}]")
    if fams & LPI_FAMILIES and d is None:
        raise ValueError("L1/L2 need the distribution's (E1, E2)")
    offsets, off = {}, 0
    for m in rings:
        offsets[m] = off
        off += len(build_orbit_table(m)) if project else 1 << m

    rows: list[dict[int, Fraction]] = []
    rhs: list[Poly2] = []
    tags: list[tuple[Family, int]] = []
    seen: set = set()
    zero = Poly2()

    def add(row, r, fam, m):
        key = (_row_key(row), r)
        if key in seen:
            return
        seen.add(key)
        rows.append(row)
        rhs.append(r)
        tags.append((fam, m))

    for m in rings:
        o = offsets[m]
        add(_shift(gen_normalization(m, project), o), Poly2.const(1), Family.NORMALIZATION, m)
        if not project:
            for row in gen_shift_equalities(m):
                add(_shift(row, o), zero, Family.NORMALIZATION, m)
        if Family.L1 in fams:
            for row in gen_L1(m, d, project):
                add(_shift(row, o), zero, Family.L1, m)
        if Family.L2 in fams:
            for row in gen_L2(m, d, project):
                add(_shift(row, o), zero, Family.L2, m)
        if Family.FACTORIZED in fams:
            for row, r in gen_factorized(m, project):
                add(_shift(row, o), r, Family.FACTORIZED, m)
        if Family.DIRECT_MARGINAL in fams:
            for row, r in gen_direct_marginals(m, project):
                add(_shift(row, o), r, Family.DIRECT_MARGINAL, m)
        if Family.COUPLING in fams and m - 1 in offsets:
            lo = offsets[m - 1]
            for upper, lower in gen_coupling(m, project):
                row = _shift(upper, o)
                for k, v in lower.items():
                    row[k + lo] = row.get(k + lo, 0) - v
                add(row, zero, Family.COUPLING, m)
    anchor = (d.e1, d.e2) if d is not None else None
    return InflationSystem(rings, fams, offsets, off, rows, rhs, tags, anchor, project)


def assemble(target: Target | Sequence[int], d: SymmetricDist,
             families: Iterable = DEFAULT_FAMILIES, *, symbolic: bool = False,
             project: bool = True) -> StandardLp | InflationSystem:
    """Build the feasibility LP for a ring or hierarchy level at ``d``.

    With ``symbolic=True`` return the :class:`InflationSystem` itself (rows
    plus polynomial right-hand sides); that is refused when L1/L2 are enabled
    because their coefficients tie the system to this single point.
    """
    fams = parse_families(families)
    rings = target.ring_sizes if isinstance(target, (RingSpec, HierarchyLevel)) else tuple(target)
    if symbolic and fams & LPI_FAMILIES:
        raise ValueError(
            "symbolic right-hand sides need an (E1, E2)-independent matrix; drop L1/L2")
    system = build_system(rings, fams, d, project)
    if symbolic:
        return system
    return system.lp_at(d.e1, d.e2)


def export_system(system: InflationSystem, e1, e2, lp_path, manifest_path=None) -> None:
    """Write the LP dump and a JSON sidecar naming rings, families and the point."""
    e1, e2 = to_fraction(e1), to_fraction(e2)
    lp = system.lp_at(e1, e2)
    with open(lp_path, "w") as fh:
        fh.write(dump_lp(lp))
    manifest_path = manifest_path or f"{lp_path}.manifest.json"
    manifest = {
        "rings": list(system.rings),
        "families": sorted(f.value for f in system.families),
        "e1": format_fraction(e1),
        "e2": format_fraction(e2),
        "rows": lp.A.n_rows,
        "cols": lp.A.n_cols,
        "projected": system.projected,
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
