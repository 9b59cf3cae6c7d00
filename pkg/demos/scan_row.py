"""First refuting level along E2 = -1/3.

Walks the hierarchy upward for a few E1 values and prints where each point
first becomes infeasible.  Level 10 takes tens of seconds per point.
"""

import sys
import time
from fractions import Fraction

from symtri import HierarchyLevel, SymmetricDist, assemble, solve_feasibility

TOP = int(sys.argv[1]) if len(sys.argv) > 1 else 8
E2 = Fraction(-1, 3)

for e1 in (Fraction(16, 100), Fraction(17, 100), Fraction(1753, 10000), Fraction(2, 10)):
    t0 = time.perf_counter()
    first = None
    for n in range(1, TOP + 1):
        out = solve_feasibility(assemble(HierarchyLevel(n), SymmetricDist(e1, E2)))
        if not out.feasible:
            first = n
            break
    took = time.perf_counter() - t0
    print(f"E1={float(e1):.4f}  first refuting level: {first or f'> {TOP}'}  ({took:.1f}s)")
