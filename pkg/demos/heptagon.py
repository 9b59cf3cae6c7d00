"""Single-ring refutation near the local-model boundary.

Builds the symmetric ring-7 system with the two marginal-matching families,
solves it exactly and checks the Farkas dual independently.
"""

from fractions import Fraction

from symtri import RingSpec, SymmetricDist, assemble, solve_feasibility, verify_certificate
from symtri.inflation import build_system

E1, E2 = Fraction(1753, 10000), Fraction(-1, 3)

system = build_system(RingSpec(7).ring_sizes, {"L1", "L2"}, SymmetricDist(E1, E2))
print("rows per family:", system.family_counts())
lp = assemble(RingSpec(7), SymmetricDist(E1, E2), {"L1", "L2"})
out = solve_feasibility(lp)
print("shape", lp.A.shape, "feasible", out.feasible, out.stats)
print("certificate verified:", verify_certificate(lp, out))
if not out.feasible:
    support = sum(1 for v in out.y if v)
    print(f"dual support {support}, b.y = {sum(b * y for b, y in zip(lp.b, out.y))}")
