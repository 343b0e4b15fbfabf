"""
Extracting a computable prefix
==============================

The output of the staged run is random, but its distribution is
computable.  Enumerating every tape up to some depth gives exact lower
bounds on the probability of each output prefix; picking, position by
position, the smallest value with positive mass yields a prefix that is
reached with positive probability, and so satisfies the clauses it covers.
"""

from fractions import Fraction

from computable_lll import (EffectiveInstance, Event, chain_instance,
                            enumerate_exact_distribution, extract_computable_prefix,
                            verify_prefix)

# A single event forbidding P_0 = 1: every resample redraws P_0.
one = EffectiveInstance.from_events([Event(0, (0,), frozenset([(1,)]))], {0: Fraction(1, 2)})
for depth in (1, 3, 6):
    d = enumerate_exact_distribution(one, 0, depth)
    print(f"depth {depth}: masses {d.masses}, unresolved {d.unresolved}")

# On the clause chain, exact and sampled extraction agree.
inst = chain_instance(4, 1)
exact = extract_computable_prefix(inst, 6)
print("exact prefix:", exact.values)
for k, masses in enumerate(exact.masses):
    print(f"  position {k}: " + ", ".join(f"{v}: {w}" for v, w in masses.items()))
assert verify_prefix(inst, exact.values).ok

mc = extract_computable_prefix(inst, 6, "mc", replicas=1000)
print("sampled prefix:", mc.values, "confidence", mc.confidence)
