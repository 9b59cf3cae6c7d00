from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symtri.errors import DegreeOverflowError, ModelFileError
from symtri.lin import (Poly2, SparseMatrix, dump_poly, format_fraction, parse_poly, poly_eval,
                        poly_mul, row_combine, solve_square, to_fraction)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=20)
polys = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 4)), fractions, max_size=6).map(Poly2)


def test_to_fraction_accepts_exact_inputs():
    assert to_fraction("1753/10000") == Fraction(1753, 10000)
    assert to_fraction("0.1753") == Fraction(1753, 10000)
    assert to_fraction(3) == 3


@pytest.mark.parametrize("bad", [0.5, True])
def test_to_fraction_rejects_floats_and_bools(bad):
    with pytest.raises(TypeError):
        to_fraction(bad)


def test_format_fraction():
    assert format_fraction(Fraction(-1, 3)) == "-1/3"
    assert format_fraction(Fraction(2)) == "2/1"


def test_row_combine_drops_cancelled_entries():
    out = row_combine([(Fraction(1), {0: Fraction(1), 1: Fraction(2)}),
                       (Fraction(-2), {1: Fraction(1)})])
    assert out == {0: 1}


def test_sparse_matrix_products():
    A = SparseMatrix(2, 3, [{0: Fraction(1), 2: Fraction(2)}, {1: Fraction(-1)}])
    assert A.shape == (2, 3)
    assert A.nnz == 3
    assert A.dot([1, 1, 1]) == [3, -1]
    assert A.rdot([1, 2]) == [1, -2, 2]
    A.set(0, 2, 0)
    assert A.get(0, 2) == 0 and A.nnz == 2
    assert list(A.entries()) == [(0, 0, 1), (1, 1, -1)]


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_rdot_is_transpose_of_dot(rows, y):
    A = SparseMatrix(3, 3, [{j: Fraction(v) for j, v in enumerate(r) if v} for r in rows])
    x = [Fraction(1), Fraction(-2), Fraction(5)]
    assert sum(a * b for a, b in zip(A.dot(x), y)) == sum(a * b for a, b in zip(x, A.rdot(y)))


def test_solve_square_small():
    cols = [{0: 2, 1: 1}, {0: 1, 1: 3}]
    sol = solve_square(cols, [3, 5], 2)
    assert sol == [Fraction(4, 5), Fraction(7, 5)]


def test_poly_basics():
    e1, e2 = Poly2.e1(), Poly2.e2()
    p = (1 + e1) * (1 - e2)
    assert p.degree == 2
    assert p(Fraction(1, 2), Fraction(1, 3)) == Fraction(3, 2) * Fraction(2, 3)
    assert p.constant_term() == 1
    assert (p - p).is_zero()
    assert Poly2.const(4).is_constant()


@given(polys, polys, polys)
def test_poly_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


@given(polys, polys, fractions, fractions)
def test_evaluation_is_a_homomorphism(p, q, a, b):
    assert (p * q)(a, b) == p(a, b) * q(a, b)
    assert (p + q)(a, b) == p(a, b) + q(a, b)
    assert poly_eval(p, a, b) == sum(c * a**i * b**j for (i, j), c in p.coeffs.items())
    assert poly_mul(p, q) == p * q


@given(polys)
def test_poly_text_round_trip(p):
    assert parse_poly(dump_poly(p)) == p


def test_degree_overflow():
    x = Poly2.e1()
    p = Poly2.const(1)
    with pytest.raises(DegreeOverflowError):
        for _ in range(50):
            p = p * x


@pytest.mark.parametrize("text", ["1/2 1", "a 1 1", "1 1 1\n2 1 1"])
def test_parse_poly_errors_name_the_table(text):
    with pytest.raises(ModelFileError) as exc:
        parse_poly(text)
    assert exc.value.table == "poly"


def test_parse_poly_skips_comments():
    p = parse_poly("# header\n-1/2 0 0\n3 2 1\n")
    assert p == Poly2({(0, 0): Fraction(-1, 2), (2, 1): 3})


def test_solve_square_singular_and_transpose():
    cols = [{0: Fraction(1, 2)}, {0: 1, 1: 1}]
    assert solve_square(cols, [1, 1], 2, transpose=True) == [2, -1]
    with pytest.raises(ZeroDivisionError):
        solve_square([{0: 1}, {0: 2}], [1, 1], 2)
