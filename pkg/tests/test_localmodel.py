import itertools
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symtri.dist import TRIPLES, constant
from symtri.errors import ModelFileError, WiringError
from symtri.localmodel import (APPENDIX_F_A, APPENDIX_F_B, APPENDIX_F_C, SymmetricClassicalModel,
                               TriangleLocalModel, Wiring, all_conventions, deterministic_model,
                               dumps_model, enumerate_symmetric_ring, loads_model,
                               model_correlators, random_symmetric_model, rational_appendix_model,
                               resolve_wiring, simulate_symmetric_ring, simulate_triangle,
                               symmetric_triangle, uniform_model)
from symtri.symmetry import rotate

seeds = st.integers(0, 10**6)


def test_convention_space_size():
    assert len(list(all_conventions())) == 96


def test_degenerate_triangle_is_deterministic():
    src = ((1, 0, 0),) * 3
    zero = ((0, 0, 0),) * 3
    model = TriangleLocalModel(src, (zero, zero, zero), Wiring(), (1, -1))
    dist = simulate_triangle(model)
    assert dist.p[(1, 1, 1)] == 1
    assert dist.correlators == (1, 1, 1)


def test_parity_model_is_symmetric():
    half = (Fraction(1, 2), Fraction(1, 2))
    parity = ((0, 1), (1, 0))
    model = TriangleLocalModel((half,) * 3, (parity,) * 3)
    dist = simulate_triangle(model)
    assert dist.total() == 1
    assert dist.permutation_defect() == 0


def test_resolve_wiring_unique_match():
    match = resolve_wiring()
    w = match.model.wiring
    assert w.opposite == (0, 1, 2)
    assert w.describe() == "f_a[β][γ], f_b[α][γ], f_c[α][β]"
    assert match.model.sign_map == (-1, 1)
    assert all(r < 1e-50 for r in match.residuals)
    with mpmath.workprec(200):
        assert match.distribution.permutation_defect() < mpmath.mpf(10) ** -50
        assert abs(match.distribution.total() - 1) < mpmath.mpf(10) ** -50


def test_perturbed_y_has_no_match():
    y = constant("Y_VALUE").value + mpmath.mpf("1e-3")
    with pytest.raises(WiringError):
        resolve_wiring(y=y)


def test_swapped_tables_still_reproduce_distribution():
    # the target is party symmetric, so swapping two tables only relabels parties
    match = resolve_wiring(tables=(APPENDIX_F_A, APPENDIX_F_C, APPENDIX_F_B))
    assert all(r < 1e-50 for r in match.residuals)


def test_rational_model_round_trip():
    model = rational_appendix_model()
    assert loads_model(dumps_model(model)) == model
    dist = simulate_triangle(model)
    assert abs(float(dist.e1) - 0.1753384958880923) < 1e-10
    assert dist.e2 + Fraction(1, 3) < Fraction(1, 10**9)


def test_ring_trivial_models():
    assert simulate_symmetric_ring(deterministic_model(), 5)[0] == 1
    u = simulate_symmetric_ring(uniform_model(), 4)
    assert u == [Fraction(1, 16)] * 16
    assert model_correlators(deterministic_model(-1)) == (-1, 1)


@given(seeds)
def test_transfer_matches_enumeration(seed):
    model = random_symmetric_model(random.Random(seed), k=2)
    for m in (3, 4):
        assert simulate_symmetric_ring(model, m) == enumerate_symmetric_ring(model, m)


@given(seeds)
def test_ring_is_cyclic_and_normalized(seed):
    model = random_symmetric_model(random.Random(seed))
    m = 6
    p = simulate_symmetric_ring(model, m)
    assert sum(p) == 1
    assert all(v >= 0 for v in p)
    assert all(p[w] == p[rotate(w, m, 1)] for w in range(2**m))


@given(seeds)
def test_ring_marginals_match_triangle(seed):
    model = random_symmetric_model(random.Random(seed))
    tri = symmetric_triangle(model)
    e1, e2 = model_correlators(model)
    assert e1 == tri.e1 and e2 == tri.e2
    p7 = simulate_symmetric_ring(model, 7)
    one = sum((1 - 2 * (w >> 6 & 1)) * v for w, v in enumerate(p7))
    two = sum((1 - 2 * (w >> 6 & 1)) * (1 - 2 * (w >> 5 & 1)) * v for w, v in enumerate(p7))
    assert (one, two) == (e1, e2)


def test_model_validation():
    with pytest.raises(ValueError):
        SymmetricClassicalModel(((Fraction(1, 2),),), ((Fraction(1, 2),),))
    with pytest.raises(ValueError):
        TriangleLocalModel(((1,),) * 3, (((2,),),) * 3)


@pytest.mark.parametrize("text,table", [
    ("kind triangle\nsources\n1/2 1/2\n1 0\n1 0\nf_a\n1 0\n0 0\nf_b\n1 0\n0 0\n", "f_c"),
    ("kind triangle\nsources\n1/2 1/3\n1 0\n1 0\nf_a\n1 0\n0 0\nf_b\n1 0\n0 0\nf_c\n0 0\n0 0\n",
     "sources"),
    ("kind triangle\nsources\n1 0\n1 0\n1 0\nf_a\n1 0\n0 2\nf_b\n1 0\n0 0\nf_c\n0 0\n0 0\n", "f_a"),
    ("kind symmetric\nsource\n1/2 x\n0 1/2\nresponse\n1 0\n0 1\n", "source"),
    ("kind symmetric\nsource\n1/2 0\n0 1/2\nresponse\n1 0\n0 3\n", "response"),
    ("kind cube\n", "header"),
])
def test_model_file_errors_name_the_table(text, table):
    with pytest.raises(ModelFileError) as exc:
        loads_model(text)
    assert exc.value.table == table


def test_symmetric_model_file_round_trip():
    model = random_symmetric_model(random.Random(3), k=3)
    assert loads_model(dumps_model(model)) == model
