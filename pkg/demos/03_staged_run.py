"""
The staged algorithm on an infinite chain
=========================================

Variables are P_0, P_1, ... and clause k covers P_{3k} .. P_{3k+3}.  Stage i
only looks at clauses ending at or before P_i, so the run can be cut at
any stage.  Later stages may still change earlier values; the
stabilisation bound says when that has become unlikely.
"""

from fractions import Fraction

from computable_lll import (RandomTape, StagedRun, chain_instance, reach,
                            stabilization_bound, stabilization_frequency, verify_prefix)

inst = chain_instance(4, 1)          # infinitely many clauses, x = 1/4, eps = 1/10
run = StagedRun(inst, RandomTape(1))
for snap in run.run_until(24):
    assert verify_prefix(inst, snap.values).ok
    print(f"stage {snap.stage:2d} after {snap.steps_elapsed} resamples:",
          "".join(map(str, snap.values)))

# How far can a resample that touches P_0 be caused from?
print("reach(0, m):", [reach(inst, 0, m) for m in range(6)])

b = stabilization_bound(inst, 0, Fraction(1, 10))
print(f"P_0 changes after step {b.steps} with probability < 1/10 "
      f"(m={b.reach_depth}, stages up to {b.reach_var})")

chk = stabilization_frequency(inst, 0, Fraction(1, 10), runs=300)
print(f"observed: {chk.changes} of {chk.runs} runs changed P_0 after step {b.steps}")
