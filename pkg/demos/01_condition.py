"""
Checking the local lemma condition exactly
==========================================

Every probability and weight is a Fraction, so a row of the condition
either holds or it does not; there is no rounding to argue about.
"""

from fractions import Fraction

from computable_lll import Event, FiniteInstance, Variable, check_lll
from computable_lll.cnf import uniform_condition

# A clause over uniform bits is violated by exactly one tuple.  Here a
# 4-literal clause shares one variable with each of four other clauses.
def clause(i, vs):
    return Event(i, tuple(vs), frozenset([(0,) * len(vs)]))

centre = clause(0, range(4))
leaves = [clause(k + 1, [k, 4 + 3 * k, 5 + 3 * k, 6 + 3 * k]) for k in range(4)]
bits = tuple(Variable.uniform(i) for i in range(16))
inst = FiniteInstance(bits, (centre, *leaves), {k: Fraction(1, 4) for k in range(5)},
                      epsilon=Fraction(1, 10))

report = check_lll(inst)
for row in report.rows:
    print(f"event {row.event}: {row.lhs} <= {row.rhs}  slack {row.slack}")
print("passes:", report.passed)

# The same row for an m-uniform family with its worst neighbour count.
# m = 3 fails once the (1 - eps) factor is included, and holds with
# equality without it.
for m in (3, 4, 5, 8):
    with_eps = uniform_condition(m, Fraction(1, 10))
    without = uniform_condition(m, 0)
    print(f"m={m}: eps=1/10 {with_eps.passed}, eps=0 {without.passed} "
          f"(lhs {with_eps.lhs}, rhs {float(with_eps.rhs):.5f})")
