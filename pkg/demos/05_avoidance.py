"""
Words and blocks avoiding sparse patterns
=========================================

Forbid every run of zeros (one word per length) and every all-zero
rectangle (one pattern per shape).  Both sets are sparse, so past some
size N every long pattern can be avoided at once.
"""

from computable_lll import (avoid_patterns_2d, avoid_substrings, pattern_params, periodic,
                            zero_rectangles, zero_runs)

p = pattern_params(zero_runs().sparsity)
print(f"alpha={p.alpha}  alpha'={p.alpha_prime}  delta={p.delta}  N={p.N}")

res = avoid_substrings(zero_runs(), 120, seed=1)
print("word:", res.word)
print("longest zero run:", max(map(len, res.word.split("1"))), "< N =", res.N)

# Periodic words with period 1 or 2 are just as sparse.
res = avoid_substrings(periodic(2), 120, seed=1)
print("aperiodic-ish word:", res.word, "ok" if res.ok else "FAILED")

# Z^2, numbered along a square spiral from the origin.
blk = avoid_patterns_2d(zero_rectangles(), 5, seed=1)
for row in reversed(blk.block):
    print("".join(".#"[v] for v in row))
print("no all-zero rectangle of area >=", blk.N, ":", blk.ok)
