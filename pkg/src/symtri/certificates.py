"""Polynomial witnesses and point classification.

For an inflation system whose matrix does not depend on (E1, E2), a Farkas
dual ``y`` found at one anchor point gives ``w(E1, E2) = sum_i y_i rhs_i``.
Any realizable point has some ``x >= 0`` with ``A x = b(E1, E2)``, so
``w = y.A x <= 0`` there.  A positive value therefore rules out symmetric
realizations at that point for every E3.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .dist import SymmetricDist, e3_interval
from .errors import CertificateError, ModelFileError
from .inflation import (CERTIFICATE_FAMILIES, DEFAULT_FAMILIES, HierarchyLevel, InflationSystem,
                        RingSpec, Target, assemble, build_system, parse_families)
from .lin import Poly2, dump_poly, format_fraction, parse_poly, to_fraction
from .lp import Infeasible, LpOutcome, SolveStats, solve_feasibility, verify_certificate

PAPER_APPENDIX_C = "PAPER_APPENDIX_C"
SELF_DERIVED = "SELF_DERIVED"

# Published witness, coefficients in units of 1e-4, keyed by (deg E1, deg E2).
_PUBLISHED = {
    (9, 0): 1843, (8, 0): -18290, (7, 1): -46758, (7, 0): -395446,
    (6, 2): -8972, (6, 1): -740838, (6, 0): -1162647,
    (5, 2): 105142, (5, 1): -2483040, (5, 0): -791817,
    (4, 3): -286167, (4, 2): -2383961, (4, 1): -5326388, (4, 0): -1530877,
    (3, 4): -33372, (3, 3): -434770, (3, 2): -4517175, (3, 1): -3086530, (3, 0): 329430,
    (2, 4): 185457, (2, 3): -734824, (2, 2): -4912832, (2, 1): -4505083, (2, 0): -1352657,
    (1, 5): 13657, (1, 4): -359763, (1, 3): -2251462, (1, 2): -3101144, (1, 1): -758387,
    (1, 0): 133812,
    (0, 6): -2856, (0, 5): -46748, (0, 4): -340812, (0, 3): -754711, (0, 2): -1232455,
    (0, 1): -794846, (0, 0): -165823,
}


@dataclass(frozen=True)
class Provenance:
    kind: str
    rings: tuple[int, ...] = ()
    families: tuple[str, ...] = ()
    anchor: tuple[Fraction, Fraction] | None = None

    def header(self) -> str:
        if self.kind == PAPER_APPENDIX_C:
            return f"# provenance: {PAPER_APPENDIX_C}"
        rings = ",".join(map(str, self.rings))
        fams = ",".join(self.families)
        e1, e2 = self.anchor
        return (f"# provenance: {SELF_DERIVED} rings={rings} families={fams} "
                f"anchor={format_fraction(e1)},{format_fraction(e2)}")

    @classmethod
    def from_header(cls, line: str) -> "Provenance":
        body = line.lstrip("#").strip()
        if not body.startswith("provenance:"):
            raise ModelFileError("first line must be '# provenance: ...'", "provenance")
        parts = body[len("provenance:"):].split()
        if not parts:
            raise ModelFileError("empty provenance", "provenance")
        kind = parts[0]
        if kind == PAPER_APPENDIX_C:
            return cls(kind)
        if kind != SELF_DERIVED:
            raise ModelFileError(f"unknown provenance {kind!r}", "provenance")
        fields = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        try:
            rings = tuple(int(r) for r in fields["rings"].split(","))
            families = tuple(fields["families"].split(","))
            e1, e2 = (Fraction(v) for v in fields["anchor"].split(","))
        except (KeyError, ValueError) as exc:
            raise ModelFileError(f"bad provenance fields: {exc}", "provenance") from None
        return cls(kind, rings, families, (e1, e2))


@dataclass(frozen=True)
class WitnessPolynomial:
    """``poly(E1, E2) > 0`` certifies that no symmetric realization exists."""

    poly: Poly2
    provenance: Provenance

    def __call__(self, e1, e2) -> Fraction:
        return self.poly(to_fraction(e1), to_fraction(e2))

    def certifies(self, e1, e2) -> bool:
        return self(e1, e2) > 0

    def dumps(self) -> str:
        return self.provenance.header() + "\n" + dump_poly(self.poly)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def loads_witness(text: str) -> WitnessPolynomial:
    lines = text.splitlines()
    if not lines:
        raise ModelFileError("empty witness file", "provenance")
    return WitnessPolynomial(parse_poly(text), Provenance.from_header(lines[0]))


def load_witness(path) -> WitnessPolynomial:
    with open(path) as fh:
        return loads_witness(fh.read())


def paper_witness() -> WitnessPolynomial:
    poly = Poly2({k: Fraction(v, 10_000) for k, v in _PUBLISHED.items()})
    return WitnessPolynomial(poly, Provenance(PAPER_APPENDIX_C))


def extract_witness(system: InflationSystem, y, anchor=None) -> WitnessPolynomial:
    """Combine the polynomial right-hand sides with a Farkas dual.

    ``y`` must be a certificate for ``system`` at ``anchor`` (default: the
    point the system was built at); otherwise CertificateError is raised and
    nothing is emitted.
    """
    if not system.matrix_is_constant:
        raise CertificateError("witnesses need an (E1, E2)-independent matrix; drop L1/L2")
    if anchor is None:
        anchor = system.anchor
    if anchor is None:
        raise CertificateError("no anchor point to verify the dual at")
    e1, e2 = (to_fraction(v) for v in anchor)
    y = [to_fraction(v) for v in y]
    if len(y) != system.n_rows:
        raise CertificateError(f"dual has {len(y)} entries, system has {system.n_rows} rows")
    lp = system.lp_at(e1, e2)
    if not verify_certificate(lp, Infeasible(y, SolveStats())):
        raise CertificateError("dual is not a Farkas certificate at the anchor")
    poly = Poly2()
    for yi, r in zip(y, system.rhs):
        if yi:
            poly = poly + r * yi
    value = poly(e1, e2)
    if value != sum((bi * yi for bi, yi in zip(lp.b, y)), Fraction(0)) or value <= 0:
        raise CertificateError("witness does not reproduce b.y at the anchor")
    prov = Provenance(SELF_DERIVED, system.rings,
                      tuple(sorted(f.value for f in system.families)), (e1, e2))
    return WitnessPolynomial(poly, prov)


def derive_witness(target: Target, e1, e2, families: Iterable = CERTIFICATE_FAMILIES):
    """Solve at ``(e1, e2)`` and return a witness, or None if the LP is feasible."""
    e1, e2 = to_fraction(e1), to_fraction(e2)
    system = assemble(target, SymmetricDist(e1, e2), families, symbolic=True)
    out = solve_feasibility(system.lp_at(e1, e2))
    if out.feasible:
        return None
    return extract_witness(system, out.y, (e1, e2))


class Verdict(str, Enum):
    INVALID_GRAY = "INVALID_GRAY"
    INFEASIBLE_SYMMETRIC = "INFEASIBLE_SYMMETRIC"
    UNDECIDED = "UNDECIDED"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PointResult:
    verdict: Verdict
    outcome: LpOutcome | None = None
    certified: bool | None = None


def check_point(e1, e2, target: Target, families: Iterable = DEFAULT_FAMILIES) -> PointResult:
    """Classify one point and keep the LP outcome for reporting.

    There is deliberately no "feasible" verdict: a feasible relaxation does
    not produce a realization.
    """
    e1, e2 = to_fraction(e1), to_fraction(e2)
    if e3_interval(e1, e2).empty:
        return PointResult(Verdict.INVALID_GRAY)
    lp = assemble(target, SymmetricDist(e1, e2), families)
    out = solve_feasibility(lp)
    ok = verify_certificate(lp, out)
    if not ok:
        raise CertificateError("solver outcome failed exact verification")
    verdict = Verdict.UNDECIDED if out.feasible else Verdict.INFEASIBLE_SYMMETRIC
    return PointResult(verdict, out, ok)


def classify_point(e1, e2, target: Target, families: Iterable = DEFAULT_FAMILIES) -> Verdict:
    return check_point(e1, e2, target, families).verdict


def make_target(level: int | None = None, ring: int | None = None) -> Target:
    if (level is None) == (ring is None):
        raise ValueError("give exactly one of level or ring")
    return HierarchyLevel(level) if level is not None else RingSpec(ring)


__all__ = [
    "PAPER_APPENDIX_C", "SELF_DERIVED", "Provenance", "WitnessPolynomial", "paper_witness",
    "extract_witness", "derive_witness", "Verdict", "PointResult", "check_point",
    "classify_point", "make_target", "load_witness", "loads_witness", "build_system",
    "parse_families",
]
