"""Polynomial witnesses: the published one and one derived here.

A witness W(E1, E2) is nonpositive on every classically realizable point,
so W > 0 refutes a point without solving an LP.
"""

import random
from fractions import Fraction

from symtri.certificates import derive_witness, paper_witness
from symtri.inflation import Family, RingSpec
from symtri.localmodel import model_correlators, random_symmetric_model

w = paper_witness()
print("published witness, constant term", w(0, 0))
for e1 in (Fraction(1656, 10000), Fraction(1753, 10000), Fraction(1, 10)):
    print(f"  W({e1}, -1/3) = {float(w(e1, Fraction(-1, 3))):+.6f}")

rng = random.Random(0)
values = [w(*model_correlators(random_symmetric_model(rng, k=2))) for _ in range(20)]
print("max over 20 random classical models:", float(max(values)))

anchor = (Fraction(1, 4), Fraction(-1, 3))
mine = derive_witness(RingSpec(7), *anchor, families={Family.FACTORIZED, Family.DIRECT_MARGINAL})
print()
print(mine.dumps())
print("value at anchor:", mine(*anchor))
