"""
Resampling a finite chain of clauses
====================================

Twenty 4-literal clauses in a chain, each sharing one variable with its
neighbours.  The solver resamples the first violated clause until none is.
"""

from fractions import Fraction

from computable_lll import (RandomTape, build_dependency_graph, build_witness_tree,
                            chain_instance, resample_bound, resample_stats, solve_finite,
                            to_finite, tree_weight)

inst = to_finite(chain_instance(4, 1, 20))
values, log = solve_finite(inst, RandomTape(seed=1))
print("resamples:", len(log))
for rec in log.records:
    print(f"  step {rec.step}: clause {rec.event} {rec.before} -> {rec.after} ({rec.bits} bits)")

# the log replays to the final assignment
assert log.replay() == values

# Each resample has a witness tree, rebuilt by scanning the log backwards.
g = build_dependency_graph(inst)
for step in range(1, len(log) + 1):
    t = build_witness_tree(log, g, step)
    print(f"  tree of step {step}: {t.canonical()}  weight {tree_weight(t, inst)}")

# Over many seeds each clause is resampled far less than x/(1-x) = 1/3 times.
logs = [solve_finite(inst, RandomTape(s))[1] for s in range(500)]
stats = resample_stats(logs, [e.id for e in inst.events])
bound = resample_bound(Fraction(1, 4))
worst = max(stats.values(), key=lambda s: s.mean)
print(f"largest mean {worst.mean:.3f} (clause {worst.event}), bound {bound}")
