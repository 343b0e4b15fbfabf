"""Avoiding sparse sets of forbidden words and rectangular patterns.

Every placement of a forbidden pattern becomes a clause over the cells it
covers.  Cells of ``N`` (or ``Z`` via the zigzag order, or ``Z^2`` via the
square spiral) are the variables.  Clauses are trimmed so that each cell lies
in finitely many of them, and weighted by their trimmed size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor, isqrt, log2
from typing import Callable, Sequence

from .cnf import (Clause, ClauseFamily, CnfFamilyParams, min_clause_size,
                  varsize_cnf_instance)
from .core import InstanceError, as_fraction
from .infinite import (EffectiveInstance, StagedRun, extract_computable_prefix,
                       verify_prefix)
from .tape import RandomTape


# -- enumerations ------------------------------------------------------------

def pair(a: int, b: int) -> int:
    """Cantor pairing of two naturals."""
    return (a + b) * (a + b + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def zigzag(z: int) -> int:
    """0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ..."""
    return 2 * z if z >= 0 else -2 * z - 1


def unzigzag(i: int) -> int:
    return i // 2 if i % 2 == 0 else -(i + 1) // 2


def spiral_index(x: int, y: int) -> int:
    """Position of cell ``(x, y)`` on the square spiral around the origin.

    Ring ``r`` starts at ``(r, 1-r)``, goes up the right side, left along the
    top, down the left side and right along the bottom, ending at ``(r, -r)``.
    """
    r = max(abs(x), abs(y))
    if r == 0:
        return 0
    base = (2 * r - 1) ** 2
    if x == r and y > -r:
        return base + y + r - 1
    if y == r:
        return base + 2 * r + (r - 1 - x)
    if x == -r:
        return base + 4 * r + (r - 1 - y)
    return base + 6 * r + (x + r - 1)


def spiral_cell(i: int) -> tuple[int, int]:
    if i == 0:
        return 0, 0
    r = (isqrt(i) + 1) // 2
    off = i - (2 * r - 1) ** 2
    side, t = divmod(off, 2 * r)
    if side == 0:
        return r, t - r + 1
    if side == 1:
        return r - 1 - t, r
    if side == 2:
        return -r, r - 1 - t
    return t - r + 1, -r


# -- forbidden sets --------------------------------------------------------

@dataclass(frozen=True)
class ForbiddenSet:
    """A decidable set of binary words with at most ``2^(alpha n)`` words of length n."""

    decide: Callable[[str], bool]
    enumerate: Callable[[int], Sequence[str]]
    sparsity: Fraction
    name: str = "F"

    def words(self, n: int) -> tuple[str, ...]:
        return _checked_words(self, n)


@lru_cache(maxsize=None)
def _checked_words(F: ForbiddenSet, n: int) -> tuple[str, ...]:
    ws = tuple(F.enumerate(n))
    if len(ws) > 2 ** float(F.sparsity * n):
        raise InstanceError(f"{F.name}: {len(ws)} words of length {n} exceed 2^(alpha n)")
    for w in ws:
        if len(w) != n or not F.decide(w):
            raise InstanceError(f"{F.name}: enumerator and decider disagree on {w!r}")
    return ws


def zero_runs(alpha=Fraction(1, 4)) -> ForbiddenSet:
    return ForbiddenSet(lambda w: "1" not in w, lambda n: ["0" * n], as_fraction(alpha), "zero-runs")


def periodic(max_period: int = 2, alpha=Fraction(1, 4)) -> ForbiddenSet:
    """Words of length > ``max_period`` with some period ``q <= max_period``."""

    def decide(w):
        return len(w) > max_period and any(
            all(w[t] == w[t + q] for t in range(len(w) - q)) for q in range(1, max_period + 1))

    def enum(n):
        if n <= max_period:
            return []
        out = set()
        for q in range(1, max_period + 1):
            for seed in range(2 ** q):
                block = format(seed, f"0{q}b")
                out.add((block * (n // q + 1))[:n])
        return sorted(out)

    return ForbiddenSet(decide, enum, as_fraction(alpha), f"periodic-{max_period}")


def explicit_words(words: Sequence[str], alpha) -> ForbiddenSet:
    table: dict[int, list[str]] = {}
    for w in sorted(set(words)):
        if set(w) - {"0", "1"}:
            raise InstanceError(f"not a binary word: {w!r}")
        table.setdefault(len(w), []).append(w)
    members = set(words)
    return ForbiddenSet(members.__contains__, lambda n: table.get(n, []), as_fraction(alpha),
                        "explicit")


Grid = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class PatternSet:
    """A decidable set of rectangular 0/1 patterns, at most ``2^(alpha n)`` of area n."""

    decide: Callable[[Grid], bool]
    enumerate: Callable[[int], Sequence[Grid]]
    sparsity: Fraction
    name: str = "F2"

    def patterns(self, n: int) -> tuple[Grid, ...]:
        return _checked_patterns(self, n)


@lru_cache(maxsize=None)
def _checked_patterns(F: PatternSet, n: int) -> tuple[Grid, ...]:
    ps = tuple(F.enumerate(n))
    if len(ps) > 2 ** float(F.sparsity * n):
        raise InstanceError(f"{F.name}: {len(ps)} patterns of area {n} exceed 2^(alpha n)")
    for p in ps:
        if len(p) * len(p[0]) != n or not F.decide(p):
            raise InstanceError(f"{F.name}: enumerator and decider disagree")
    return ps


def zero_rectangles(alpha=Fraction(1, 4)) -> PatternSet:
    def enum(n):
        return [tuple((0,) * (n // h) for _ in range(h)) for h in range(1, n + 1) if n % h == 0]

    return PatternSet(lambda g: all(v == 0 for row in g for v in row), enum,
                      as_fraction(alpha), "zero-rectangles")


def explicit_patterns(patterns: Sequence[Grid], alpha) -> PatternSet:
    table: dict[int, list[Grid]] = {}
    members = {tuple(map(tuple, p)) for p in patterns}
    for p in sorted(members):
        table.setdefault(len(p) * len(p[0]), []).append(p)
    return PatternSet(lambda g: tuple(map(tuple, g)) in members, lambda n: table.get(n, []),
                      as_fraction(alpha), "explicit")


# -- parameters --------------------------------------------------------------

@dataclass(frozen=True)
class PatternParams:
    """Constants of a pattern construction.

    ``alpha`` is the sparsity of the patterns, ``alpha_prime`` absorbs the
    number of placements through a cell, ``alpha_trim`` the shrinking of
    clauses by trimming.  Clauses come from patterns of size at least ``N``;
    after trimming they have at least ``N_trim`` cells.
    """

    alpha: Fraction
    alpha_prime: Fraction
    alpha_trim: Fraction
    delta: Fraction
    epsilon: Fraction
    N: int
    N_trim: int

    @property
    def cnf(self) -> CnfFamilyParams:
        return CnfFamilyParams(self.alpha_trim, self.epsilon, self.N_trim)

    def trimmed_size(self, n: int) -> int:
        return n - floor(self.delta * n)


def _count_bound_holds(alpha, alpha_t, delta, k: int, n_min: int) -> bool:
    # placements through a cell whose trimmed size is k: sum of n * 2^(alpha n)
    total = 0.0
    n = max(k, n_min)
    while n - floor(delta * n) <= k:
        if n - floor(delta * n) == k:
            total += n * 2.0 ** float(alpha * n)
        n += 1
    return total <= 2.0 ** float(alpha_t * k)


def pattern_params(alpha, epsilon=Fraction(1, 10), delta=None) -> PatternParams:
    """Derive ``N`` so that every trimmed placement clause meets the slack condition.

    ``alpha' = alpha + (1-alpha)/4`` and ``delta = (1-alpha)/8`` by default;
    the trimmed sparsity is ``alpha' / (1-delta)``.  The trimmed threshold
    starts at :func:`min_clause_size` and is raised until the number of
    placements of trimmed size ``k`` through a cell is at most
    ``2^(alpha_trim k)`` for every ``k`` at or above it.
    """
    alpha = as_fraction(alpha)
    eps = as_fraction(epsilon)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    alpha_p = alpha + (1 - alpha) / 4
    delta = (1 - alpha) / 8 if delta is None else as_fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("delta must lie in (0, 1/2)")
    alpha_t = alpha_p / (1 - delta)
    if alpha_t >= 1:
        raise ValueError(f"trimmed sparsity {alpha_t} is not below 1; use a smaller delta")
    n_trim = min_clause_size(alpha_t, eps)
    # beyond k_star the analytic bound
    #   2 (k+1)/(1-delta) 2^(alpha (k+1)/(1-delta)) <= 2^(alpha_t k)
    # holds and keeps holding, since its log-gap grows with k
    gap = float((alpha_p - alpha) / (1 - delta))
    ad = float(alpha / (1 - delta))

    def analytic(k):
        return gap * k >= 1 + log2((k + 1) / float(1 - delta)) + ad

    k_star = max(n_trim, ceil(1 / (gap * 0.6931471805599453)))
    while not analytic(k_star):
        k_star += 1
    while True:
        n_min = min(n for n in range(n_trim, 2 * n_trim + 2) if n - floor(delta * n) >= n_trim)
        bad = [k for k in range(n_trim, k_star)
               if not _count_bound_holds(alpha, alpha_t, delta, k, n_min)]
        if not bad:
            break
        n_trim = bad[-1] + 1
    return PatternParams(alpha, alpha_p, alpha_t, delta, eps, n_min, n_trim)


# -- 1D words ----------------------------------------------------------------

class SubstringFamily(ClauseFamily):
    """One clause per (forbidden word, position), words of length >= ``N``.

    Clause ``pair(pair(n, w), p)`` forbids the ``w``-th word of length ``n``
    at position ``p``.  Positions are naturals, or integers numbered by
    :func:`zigzag` when ``bi_infinite``.
    """

    def __init__(self, F: ForbiddenSet, N: int, bi_infinite: bool = False):
        self.F, self.N, self.bi_infinite = F, N, bi_infinite

    def _var(self, pos: int) -> int:
        return zigzag(pos) if self.bi_infinite else pos

    def _pos(self, var: int) -> int:
        return unzigzag(var) if self.bi_infinite else var

    def _id(self, n, w, start):
        return pair(pair(n, w), self._var(start))

    def clause(self, j):
        nw, s = unpair(j)
        n, w = unpair(nw)
        if n < self.N:
            raise InstanceError(f"clause {j} is shorter than N={self.N}")
        word = self.F.words(n)[w]
        start = self._pos(s)
        return Clause(tuple((self._var(start + t), word[t] == "0") for t in range(n)))

    def clauses_of_size(self, i, n):
        if n < self.N:
            return []
        q = self._pos(i)
        starts = range(q - n + 1, q + 1)
        if not self.bi_infinite:
            starts = range(max(0, q - n + 1), q + 1)
        k = len(self.F.words(n))
        return [self._id(n, w, p) for p in starts for w in range(k)]

    def trimmed_clauses_of_size(self, i, n, delta):
        """Clauses of size ``n`` that still contain ``i`` after trimming."""
        if self.bi_infinite:
            return [j for j in self.clauses_of_size(i, n)
                    if i in self.clause(j).vars[floor(delta * n):]]
        if n < self.N:
            return []
        # naturals: trimming removes positions p .. p + floor(delta n) - 1
        k = len(self.F.words(n))
        starts = range(max(0, i - n + 1), i - floor(delta * n) + 1)
        return [self._id(n, w, p) for p in starts for w in range(k)]

    def clauses_ending_at(self, i):
        q = self._pos(i)
        if not self.bi_infinite:
            windows = [(q - n + 1, n) for n in range(self.N, q + 2)]
        elif q >= 0:
            # right end q, left end in [-q, q]
            windows = [(a, q - a + 1) for a in range(-q, q + 1)]
        else:
            # left end q, right end in [q, -q-1]
            windows = [(q, b - q + 1) for b in range(q, -q)]
        out = []
        for start, n in windows:
            if n >= self.N:
                out.extend(self._id(n, w, start) for w in range(len(self.F.words(n))))
        return out


def substring_cnf(F: ForbiddenSet, epsilon=Fraction(1, 10), delta=None,
                  bi_infinite: bool = False) -> tuple[EffectiveInstance, PatternParams]:
    """Effective instance forbidding every word of F of length >= N at every position."""
    params = pattern_params(F.sparsity, epsilon, delta)
    family = SubstringFamily(F, params.N, bi_infinite)
    inst = varsize_cnf_instance(family, _trimmed(params), name=f"avoid {F.name}")
    return inst, params


def _trimmed(params: PatternParams) -> CnfFamilyParams:
    return CnfFamilyParams(params.alpha_trim, params.epsilon, params.N_trim, params.delta)


def _prefix(inst: EffectiveInstance, s: int, mode: str, seed: int, **kw) -> tuple[int, ...]:
    if s < 0:
        return ()
    if mode == "run":
        run = StagedRun(inst, RandomTape(seed))
        run.run_until(s)
        return run.snapshot().values
    kw.setdefault("seed", seed)
    return extract_computable_prefix(inst, s, mode, **kw).values


@dataclass(frozen=True)
class AvoidanceResult:
    word: str
    N: int
    params: PatternParams
    violations: tuple  # placements found in F by the direct scan

    @property
    def ok(self) -> bool:
        return not self.violations


def scan_word(word: str, F: ForbiddenSet, N: int) -> tuple[tuple[int, int], ...]:
    """Every (start, length) window of length >= N whose content lies in F."""
    return tuple((a, n) for n in range(N, len(word) + 1)
                 for a in range(len(word) - n + 1) if F.decide(word[a:a + n]))


def avoid_substrings(F: ForbiddenSet, length: int, mode: str = "run", seed: int = 0,
                     epsilon=Fraction(1, 10), delta=None, bi_infinite: bool = False,
                     **extract_kw) -> AvoidanceResult:
    """A word of ``length`` cells with no factor of length >= N in F.

    For ``bi_infinite`` the word covers positions ``-h..h`` of a Z-indexed
    sequence, ``h = length // 2``.
    """
    inst, params = substring_cnf(F, epsilon, delta, bi_infinite)
    if bi_infinite:
        h = length // 2
        values = _prefix(inst, 2 * h, mode, seed, **extract_kw) if length else ()
        word = "".join(str(values[zigzag(p)]) for p in range(-h, h + 1)) if length else ""
    else:
        values = _prefix(inst, length - 1, mode, seed, **extract_kw)
        word = "".join(map(str, values))
    report = verify_prefix(inst, values)
    if not report.ok:
        raise AssertionError(f"extracted prefix violates clauses {report.violations[:5]}")
    return AvoidanceResult(word, params.N, params, scan_word(word, F, params.N))


# -- 2D patterns -------------------------------------------------------------

class RectangleFamily(ClauseFamily):
    """One clause per (pattern, placement) of area >= ``N`` in ``Z^2``.

    A pattern ``g`` placed at ``(x0, y0)`` puts ``g[r][c]`` on cell
    ``(x0 + c, y0 + r)``; clause id is ``pair(pair(n, p), spiral_index(x0, y0))``.
    """

    def __init__(self, F: PatternSet, N: int):
        self.F, self.N = F, N

    def clause(self, j):
        np_, anchor = unpair(j)
        n, p = unpair(np_)
        if n < self.N:
            raise InstanceError(f"clause {j} has area below N={self.N}")
        g = self.F.patterns(n)[p]
        x0, y0 = spiral_cell(anchor)
        return Clause(tuple((spiral_index(x0 + c, y0 + r), v == 0)
                            for r, row in enumerate(g) for c, v in enumerate(row)))

    def clauses_of_size(self, i, n):
        if n < self.N:
            return []
        x, y = spiral_cell(i)
        out = []
        for p, g in enumerate(self.F.patterns(n)):
            h, w = len(g), len(g[0])
            for y0 in range(y - h + 1, y + 1):
                for x0 in range(x - w + 1, x + 1):
                    out.append(pair(pair(n, p), spiral_index(x0, y0)))
        return out

    def clauses_ending_at(self, i):
        # the largest spiral index of a rectangle sits at one of its corners
        x, y = spiral_cell(i)
        r = max(abs(x), abs(y))
        side = 2 * r + 1
        out = set()
        for n in range(self.N, side * side + 1):
            for p, g in enumerate(self.F.patterns(n)):
                h, w = len(g), len(g[0])
                if h > side or w > side:
                    continue
                for x0 in {x, x - w + 1}:
                    if x0 < -r or x0 + w - 1 > r:
                        continue
                    for y0 in {y, y - h + 1}:
                        if y0 < -r or y0 + h - 1 > r:
                            continue
                        corners = (spiral_index(x0, y0), spiral_index(x0 + w - 1, y0),
                                   spiral_index(x0, y0 + h - 1),
                                   spiral_index(x0 + w - 1, y0 + h - 1))
                        if max(corners) == i:
                            out.add(pair(pair(n, p), spiral_index(x0, y0)))
        return sorted(out)


def rectangle_cnf(F2: PatternSet, epsilon=Fraction(1, 10), delta=None
                  ) -> tuple[EffectiveInstance, PatternParams]:
    params = pattern_params(F2.sparsity, epsilon, delta)
    inst = varsize_cnf_instance(RectangleFamily(F2, params.N), _trimmed(params),
                                name=f"avoid {F2.name}")
    return inst, params


@dataclass(frozen=True)
class BlockResult:
    block: Grid  # block[y + r][x + r]
    N: int
    params: PatternParams
    violations: tuple  # (x0, y0, h, w) placements found in F2

    @property
    def ok(self) -> bool:
        return not self.violations


def scan_block(block: Grid, F2: PatternSet, N: int) -> tuple[tuple[int, int, int, int], ...]:
    """Every placement of area >= N fully inside the block whose content is in F2."""
    size = len(block)
    bad = []
    for h in range(1, size + 1):
        for w in range(1, size + 1):
            if h * w < N:
                continue
            for y0 in range(size - h + 1):
                for x0 in range(size - w + 1):
                    sub = tuple(tuple(block[y0 + r][x0:x0 + w]) for r in range(h))
                    if F2.decide(sub):
                        bad.append((x0, y0, h, w))
    return tuple(bad)


def avoid_patterns_2d(F2: PatternSet, radius: int, mode: str = "run", seed: int = 0,
                      epsilon=Fraction(1, 10), delta=None, **extract_kw) -> BlockResult:
    """The ``(2r+1) x (2r+1)`` block around the origin of a configuration avoiding F2.

    The block is exactly spiral cells ``0 .. (2r+1)^2 - 1``.
    """
    inst, params = rectangle_cnf(F2, epsilon, delta)
    side = 2 * radius + 1
    values = _prefix(inst, side * side - 1, mode, seed, **extract_kw)
    report = verify_prefix(inst, values)
    if not report.ok:
        raise AssertionError(f"extracted prefix violates clauses {report.violations[:5]}")
    block = tuple(tuple(values[spiral_index(x, y)] for x in range(-radius, radius + 1))
                  for y in range(-radius, radius + 1))
    return BlockResult(block, params.N, params, scan_block(block, F2, params.N))
