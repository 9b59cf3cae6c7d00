import random
from fractions import Fraction

import pytest

from symtri.certificates import (PAPER_APPENDIX_C, SELF_DERIVED, Provenance, Verdict,
                                 WitnessPolynomial, check_point, classify_point, derive_witness,
                                 extract_witness, load_witness, loads_witness, paper_witness)
from symtri.dist import SymmetricDist
from symtri.errors import CertificateError, ModelFileError
from symtri.inflation import (CERTIFICATE_FAMILIES, Family, HierarchyLevel, InflationSystem,
                              RingSpec, assemble, build_system)
from symtri.lin import Poly2
from symtri.localmodel import model_correlators, random_symmetric_model
from symtri.lp import solve_feasibility

THIRD = Fraction(-1, 3)
PROBES = [(Fraction(0), Fraction(0)), (Fraction(1656, 10000), THIRD),
          (Fraction(1753, 10000), THIRD), (Fraction(1), Fraction(1))]


def _toy_system():
    e1 = Poly2.e1()
    rhs = [-1 - e1 * e1]
    return InflationSystem((4,), frozenset({Family.FACTORIZED}), {4: 0}, 1,
                           [{0: Fraction(1)}], rhs, [(Family.FACTORIZED, 4)],
                           (Fraction(0), Fraction(0)))


def test_toy_witness_is_positive_everywhere():
    w = extract_witness(_toy_system(), [Fraction(-1)])
    assert w.poly == 1 + Poly2.e1() * Poly2.e1()
    assert w.provenance.kind == SELF_DERIVED


def test_extract_refuses_bad_dual():
    with pytest.raises(CertificateError):
        extract_witness(_toy_system(), [Fraction(1)])
    with pytest.raises(CertificateError):
        extract_witness(_toy_system(), [Fraction(-1), Fraction(0)])


def test_extract_refuses_lpi_systems():
    d = SymmetricDist(Fraction(1753, 10000), THIRD)
    s = build_system((7,), {"L1", "L2"}, d)
    out = solve_feasibility(s.lp_at(d.e1, d.e2))
    with pytest.raises(CertificateError):
        extract_witness(s, out.y)


def test_paper_witness_values():
    w = paper_witness()
    assert w.provenance.kind == PAPER_APPENDIX_C
    assert len(w.poly.coeffs) == 37
    assert w.poly.degree == 9
    assert w(0, 0) == Fraction(-165823, 10000)
    assert w(Fraction(1656, 10000), THIRD) > 0
    assert w(Fraction(1753, 10000), THIRD) > 0
    assert w(Fraction(158, 1000), THIRD) < 0


def test_paper_witness_sign_is_stable_under_small_perturbations():
    w = paper_witness()
    for e1, e2 in PROBES:
        value = w(e1, e2)
        slack = sum(abs(e1) ** i * abs(e2) ** j for (i, j) in w.poly.coeffs) * Fraction(1, 10**6)
        assert abs(value) > slack


def test_paper_witness_nonpositive_on_classical_models():
    w = paper_witness()
    rng = random.Random(5)
    for _ in range(200):
        e1, e2 = model_correlators(random_symmetric_model(rng))
        assert w(e1, e2) <= 0


def test_derive_round_trip():
    anchor = (Fraction(1, 4), THIRD)
    w = derive_witness(RingSpec(7), *anchor)
    assert w is not None and w(*anchor) > 0
    assert w(0, 0) <= 0
    others = [(Fraction(3, 10), THIRD), (Fraction(2, 5), THIRD), (Fraction(1, 4), Fraction(-3, 10))]
    positive = [pt for pt in others if w(*pt) > 0]
    assert len(positive) >= 2
    for e1, e2 in positive:
        lp = assemble(RingSpec(7), SymmetricDist(e1, e2), CERTIFICATE_FAMILIES)
        assert not solve_feasibility(lp).feasible


def test_derive_not_refuted_returns_none():
    assert derive_witness(RingSpec(7), Fraction(1656, 10000), THIRD) is None


def test_witness_file_round_trip(tmp_path):
    w = derive_witness(RingSpec(7), Fraction(1, 4), THIRD)
    path = tmp_path / "w.txt"
    w.save(path)
    back = load_witness(path)
    assert back == w
    assert back.provenance.anchor == (Fraction(1, 4), THIRD)
    assert loads_witness(paper_witness().dumps()) == paper_witness()


@pytest.mark.parametrize("text", ["", "1 0 0\n", "# provenance: MAGIC\n1 0 0\n",
                                  "# provenance: SELF_DERIVED rings=7\n1 0 0\n"])
def test_bad_witness_files(text):
    with pytest.raises(ModelFileError):
        loads_witness(text)


def test_provenance_header_round_trip():
    p = Provenance(SELF_DERIVED, (4, 5), ("COUPLING", "FACTORIZED"), (Fraction(1, 5), THIRD))
    assert Provenance.from_header(p.header()) == p


def test_classify_examples():
    assert classify_point(Fraction(9, 10), Fraction(0), HierarchyLevel(3)) is Verdict.INVALID_GRAY
    assert classify_point(Fraction(0), Fraction(0), HierarchyLevel(4)) is Verdict.UNDECIDED
    assert classify_point(Fraction(1753, 10000), THIRD, RingSpec(7), {"L1", "L2"}) \
        is Verdict.INFEASIBLE_SYMMETRIC
    res = check_point(Fraction(1753, 10000), THIRD, RingSpec(7), {"L1", "L2"})
    assert res.certified
    assert set(Verdict) == {Verdict.INVALID_GRAY, Verdict.INFEASIBLE_SYMMETRIC, Verdict.UNDECIDED}


def test_classical_points_are_undecided():
    rng = random.Random(11)
    for _ in range(5):
        e1, e2 = model_correlators(random_symmetric_model(rng))
        assert classify_point(e1, e2, HierarchyLevel(4)) is Verdict.UNDECIDED
