"""Every inflation constraint must hold on rings built from a symmetric classical model."""

import random
from fractions import Fraction

import pytest

from symtri.dist import SymmetricDist
from symtri.inflation import (ALL_FAMILIES, HierarchyLevel, assemble, build_system, gen_coupling,
                              gen_direct_marginals, gen_factorized, gen_L1, gen_L2)
from symtri.localmodel import model_correlators, random_symmetric_model, simulate_symmetric_ring
from symtri.lp import Feasible, SolveStats, solve_feasibility, verify_certificate
from symtri.symmetry import build_orbit_table

N_MODELS = 50
RINGS = range(4, 9)


def _models():
    rng = random.Random(20240611)
    return [random_symmetric_model(rng, k=2 if i % 2 else 3) for i in range(N_MODELS)]


MODELS = _models()


def _dot(row, p):
    return sum(c * p[w] for w, c in row.items())


@pytest.mark.parametrize("idx", range(N_MODELS))
def test_word_level_rows_hold(idx):
    model = MODELS[idx]
    e1, e2 = model_correlators(model)
    d = SymmetricDist(e1, e2)
    rings = {m: simulate_symmetric_ring(model, m) for m in range(3, 9)}
    for m in RINGS:
        p = rings[m]
        for row in gen_L1(m, d, project=False) + gen_L2(m, d, project=False):
            assert _dot(row, p) == 0
        for row, rhs in gen_factorized(m, project=False) + gen_direct_marginals(m, project=False):
            assert _dot(row, p) == rhs(e1, e2)
        for upper, lower in gen_coupling(m, project=False):
            assert _dot(upper, p) == _dot(lower, rings[m - 1])


@pytest.mark.parametrize("idx", range(N_MODELS))
def test_orbit_point_satisfies_system_and_lp_is_feasible(idx):
    model = MODELS[idx]
    e1, e2 = model_correlators(model)
    d = SymmetricDist(e1, e2)
    system = build_system(HierarchyLevel(5).ring_sizes, ALL_FAMILIES, d)
    x = []
    for m in system.rings:
        p = simulate_symmetric_ring(model, m)
        x += [p[int(r)] for r in build_orbit_table(m).reps]
    lp = system.lp_at(e1, e2)
    assert verify_certificate(lp, Feasible(tuple(x), SolveStats()))
    out = solve_feasibility(lp)
    assert out.feasible and verify_certificate(lp, out)


def test_models_cover_both_alphabets():
    assert {m.alphabet for m in MODELS} == {2, 3}
    assert len({model_correlators(m) for m in MODELS}) > 40
