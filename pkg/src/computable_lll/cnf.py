"""Infinite CNFs as effective instances.

A clause family enumerates clauses by id and lists, for a variable, the
clauses that use it.  Two weightings are provided: the m-uniform one
(``x = 2^(2-m)``) and the size-dependent one (``x = 2^(-beta k)``) together
with the minimal clause size that makes the latter work.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Mapping, Sequence

import mpmath

from .core import (ConditionFailed, ConditionReport, ConditionRow, Event, FiniteInstance,
                   InstanceError, Variable, as_fraction, condition_row)
from .infinite import EffectiveInstance

PRECISION = 60  # decimal digits for the irrational comparisons


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals ``(variable, polarity)``; polarity True means ``x_v``."""

    literals: tuple[tuple[int, bool], ...]

    def __post_init__(self):
        lits = tuple(sorted((int(v), bool(p)) for v, p in self.literals))
        if len({v for v, _ in lits}) != len(lits):
            raise InstanceError(f"clause repeats a variable: {lits}")
        if not lits:
            raise InstanceError("empty clause")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def positive(cls, variables: Iterable[int]) -> "Clause":
        return cls(tuple((v, True) for v in variables))

    @property
    def vars(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.literals)

    def __len__(self):
        return len(self.literals)

    def falsifying(self) -> tuple[int, ...]:
        return tuple(0 if p else 1 for _, p in self.literals)

    def to_event(self, id: int) -> Event:
        return Event(id, self.vars, frozenset([self.falsifying()]))

    def satisfied(self, values: Mapping[int, int]) -> bool:
        return any((values[v] == 1) == p for v, p in self.literals)


class ClauseFamily:
    """Interface for (possibly infinite) clause families.

    Subclasses implement ``clause`` and ``clauses_of``; ``clauses_ending_at``
    and ``clauses_of_size`` are optional accelerators / extensions.
    """

    num_variables: int | None = None

    def clause(self, j: int) -> Clause:
        raise NotImplementedError

    def clauses_of(self, i: int) -> Iterable[int]:
        raise NotImplementedError

    def clauses_ending_at(self, i: int) -> Iterable[int] | None:
        return None

    def clauses_of_size(self, i: int, n: int) -> Iterable[int]:
        return [j for j in self.clauses_of(i) if len(self.clause(j)) == n]


class ClauseList(ClauseFamily):
    """A finite CNF given explicitly."""

    def __init__(self, clauses: Sequence[Clause], num_variables: int | None = None):
        self.clauses = list(clauses)
        self._by_var: dict[int, list[int]] = {}
        for j, c in enumerate(self.clauses):
            for v in c.vars:
                self._by_var.setdefault(v, []).append(j)
        top = max((c.vars[-1] for c in self.clauses), default=-1) + 1
        self.num_variables = max(top, num_variables or 0)

    def clause(self, j):
        return self.clauses[j]

    def clauses_of(self, i):
        return self._by_var.get(i, [])


class ChainCNF(ClauseFamily):
    """Clause ``k`` is the positive clause on ``width`` consecutive variables
    starting at ``k * (width - overlap)``; neighbouring clauses share ``overlap``
    variables.  ``length`` clauses, or infinitely many if None.
    """

    def __init__(self, width: int = 4, overlap: int = 1, length: int | None = None):
        if not 0 <= overlap < width:
            raise ValueError("need 0 <= overlap < width")
        self.width, self.overlap, self.length = width, overlap, length
        self.step = width - overlap
        self.num_variables = None if length is None else (length - 1) * self.step + width

    def clause(self, j):
        if j < 0 or (self.length is not None and j >= self.length):
            raise InstanceError(f"chain has no clause {j}")
        start = j * self.step
        return Clause.positive(range(start, start + self.width))

    def clauses_of(self, i):
        hi = i // self.step
        lo = max(0, -(-(i - self.width + 1) // self.step))
        if self.length is not None:
            hi = min(hi, self.length - 1)
        return range(lo, hi + 1)

    def clauses_ending_at(self, i):
        k, r = divmod(i - self.width + 1, self.step)
        if k < 0 or r or (self.length is not None and k >= self.length):
            return ()
        return (k,)


def cnf_instance(family: ClauseFamily, weight, epsilon=Fraction(0),
                 name: str = "cnf") -> EffectiveInstance:
    """Wrap a clause family with uniform bits and per-clause weights."""
    ending = None
    if type(family).clauses_ending_at is not ClauseFamily.clauses_ending_at:
        ending = family.clauses_ending_at
    return EffectiveInstance(
        variable=lambda i: Variable.uniform(i, 2),
        events_of_variable=family.clauses_of,
        event=lambda j: family.clause(j).to_event(j),
        weight=weight,
        epsilon=epsilon,
        events_ending_at=ending,
        num_variables=family.num_variables,
        name=name,
    )


def to_finite(instance: EffectiveInstance, upto_var: int | None = None) -> FiniteInstance:
    """Materialise the events with largest variable at most ``upto_var``."""
    from .infinite import order_events

    if upto_var is None:
        if instance.num_variables is None:
            raise ValueError("infinite instance needs an explicit bound")
        upto_var = instance.num_variables - 1
    ids = order_events(instance, upto_var)
    return FiniteInstance(tuple(instance.variable(i) for i in range(upto_var + 1)),
                          tuple(instance.event(j) for j in ids),
                          {j: instance.weight(j) for j in ids}, instance.epsilon)


# -- m-uniform CNFs --------------------------------------------------------

def uniform_condition(m: int, epsilon, neighbors: int | None = None) -> ConditionRow:
    """The condition for one m-clause with the given (default: maximal) neighbour count."""
    eps = as_fraction(epsilon)
    x = Fraction(4, 2 ** m)
    if neighbors is None:
        neighbors = 2 ** (m - 2)
    return condition_row(-1, Fraction(1, 2 ** m), x, [x] * neighbors, 1 - eps)


def uniform_cnf_instance(family: ClauseFamily, m: int, epsilon=Fraction(1, 10)) -> EffectiveInstance:
    """Every clause has ``m`` literals and at most ``2^(m-2)`` neighbours; ``x = 2^(2-m)``.

    The worst case is checked up front; clause sizes and neighbour counts are
    checked whenever a clause's weight is queried.
    """
    eps = as_fraction(epsilon)
    if m < 3:
        raise InstanceError(f"m={m}: the weight 2^(2-m) must be below 1")
    worst = uniform_condition(m, eps)
    if not worst.passed:
        raise ConditionFailed(ConditionReport((worst,), True, eps),
                              f"m={m}, eps={eps}: {worst.lhs} > {worst.rhs}")
    x = Fraction(1, 2 ** (m - 2))
    cap = 2 ** (m - 2)

    def weight(j):
        size = len(inst.event(j).vars)
        if size != m:
            raise InstanceError(f"clause {j} has {size} variables, expected {m}")
        count = len(inst.neighbors(j))
        if count > cap:
            raise InstanceError(f"clause {j} has {count} neighbours, more than {cap}")
        return x

    inst = cnf_instance(family, weight, eps, name=f"{m}-uniform cnf")
    return inst


def chain_instance(width: int = 4, overlap: int = 1, length: int | None = None,
                   weight=None, epsilon=Fraction(1, 10)) -> EffectiveInstance:
    """The chain CNF; weight defaults to ``2^(2-width)`` for width >= 3, else 1/2."""
    family = ChainCNF(width, overlap, length)
    if weight is None:
        weight = Fraction(1, 2 ** (width - 2)) if width >= 3 else Fraction(1, 2)
    w = as_fraction(weight)
    return cnf_instance(family, lambda j: w, epsilon, name=f"chain cnf (width {width})")


# -- variable-size CNFs ----------------------------------------------------

@dataclass(frozen=True)
class CnfFamilyParams:
    alpha: Fraction
    epsilon: Fraction
    N: int
    delta: Fraction = Fraction(0)

    @property
    def beta(self) -> Fraction:
        return (1 + self.alpha) / 2


def _tail_condition(alpha, eps, N):
    """Both sides of ``(1-eps) 2^-beta (1 - sum_{m>=N} 2^{(alpha-beta) m}) >= 1/2``."""
    with mpmath.workdps(PRECISION):
        a = mpmath.mpf(alpha.numerator) / alpha.denominator
        e = mpmath.mpf(eps.numerator) / eps.denominator
        beta = (1 + a) / 2
        gamma = beta - a
        tail = mpmath.power(2, -gamma * N) / (1 - mpmath.power(2, -gamma))
        lhs = (1 - e) * mpmath.power(2, -beta) * (1 - tail)
        return lhs, mpmath.mpf(1) / 2


def threshold_holds(alpha, eps, N: int) -> bool:
    lhs, half = _tail_condition(as_fraction(alpha), as_fraction(eps), N)
    return lhs >= half


def min_clause_size(alpha, eps=Fraction(0)) -> int:
    """Smallest N with ``(1-eps) 2^-beta (1 - 2^{-gamma N} / (1 - 2^-gamma)) >= 1/2``,
    where ``beta = (1+alpha)/2`` and ``gamma = beta - alpha``.
    """
    alpha, eps = as_fraction(alpha), as_fraction(eps)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    with mpmath.workdps(PRECISION):
        beta = (1 + mpmath.mpf(alpha.numerator) / alpha.denominator) / 2
        limit = (1 - mpmath.mpf(eps.numerator) / eps.denominator) * mpmath.power(2, -beta)
        if limit <= mpmath.mpf(1) / 2:
            raise ValueError(f"no finite N: (1-eps) 2^-beta = {mpmath.nstr(limit, 8)} <= 1/2")
    # the left side increases with N: bracket, then bisect
    hi = 1
    while not threshold_holds(alpha, eps, hi):
        hi *= 2
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if threshold_holds(alpha, eps, mid):
            hi = mid
        else:
            lo = mid
    return hi


def dyadic_power(beta, k: int, bits: int = 64) -> Fraction:
    """``2^(-beta k)`` rounded down to ``bits`` significant bits."""
    beta = as_fraction(beta)
    whole = floor(beta * k)
    frac = beta * k - whole
    with mpmath.workdps(PRECISION):
        f = mpmath.mpf(frac.numerator) / frac.denominator
        mantissa = int(mpmath.floor(mpmath.power(2, bits - f)))
    return Fraction(mantissa, 1 << (bits + whole))


@dataclass(frozen=True)
class VarsizeReport:
    k: int
    log_lhs: float
    log_rhs: float
    passed: bool


def check_varsize_condition(params: CnfFamilyParams, k: int,
                            neighbor_profile: Mapping[int, int]) -> VarsizeReport:
    """Check ``2^-k <= (1-eps) 2^(-beta k) prod_m (1 - 2^(-beta m))^count_m``.

    ``neighbor_profile`` maps a clause size to the number of neighbours of that
    size; each count may not exceed ``k 2^(alpha m)``.
    """
    alpha, eps = params.alpha, params.epsilon
    with mpmath.workdps(PRECISION):
        a = mpmath.mpf(alpha.numerator) / alpha.denominator
        b = (1 + a) / 2
        ln2 = mpmath.log(2)
        for m, count in neighbor_profile.items():
            if count > k * mpmath.power(2, a * m):
                raise InstanceError(f"{count} neighbours of size {m} exceed k 2^(alpha m)")
        log_rhs = mpmath.log(1 - mpmath.mpf(eps.numerator) / eps.denominator) - b * k * ln2
        for m, count in neighbor_profile.items():
            log_rhs += count * mpmath.log1p(-mpmath.power(2, -b * m))
        log_lhs = -k * ln2
        return VarsizeReport(k, float(log_lhs), float(log_rhs), bool(log_lhs <= log_rhs))


def trim_clause(clause: Clause, delta) -> Clause:
    """Drop the ``floor(delta k)`` literals with the smallest variable indices."""
    delta = as_fraction(delta)
    cut = floor(delta * len(clause))
    if cut >= len(clause):
        raise InstanceError(f"trimming {clause} with delta={delta} leaves nothing")
    return Clause(clause.literals[cut:])


def trim_clauses(clauses: Iterable[Clause], delta) -> Iterable[Clause]:
    delta = as_fraction(delta)
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    for c in clauses:
        yield trim_clause(c, delta)


def max_untrimmed_size(i: int, delta: Fraction) -> int:
    """Largest clause size ``n`` from which variable ``i`` can survive trimming."""
    if delta == 0:
        raise ValueError("without trimming the size is unbounded")
    # survives only if floor(delta n) <= i, i.e. n < (i + 1) / delta
    return ceil((i + 1) / delta) - 1


class TrimmedFamily(ClauseFamily):
    """Trim every clause of ``base``; needs ``base.clauses_of_size``."""

    def __init__(self, base: ClauseFamily, delta, min_size: int = 1):
        self.base = base
        self.delta = as_fraction(delta)
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.min_size = min_size
        self.num_variables = base.num_variables

    def clause(self, j):
        return trim_clause(self.base.clause(j), self.delta)

    def clauses_of(self, i):
        fast = getattr(self.base, "trimmed_clauses_of_size", None)
        out = []
        for n in range(self.min_size, max_untrimmed_size(i, self.delta) + 1):
            if fast is not None:
                out.extend(fast(i, n, self.delta))
                continue
            for j in self.base.clauses_of_size(i, n):
                if i in self.clause(j).vars:
                    out.append(j)
        return out

    def clauses_ending_at(self, i):
        return self.base.clauses_ending_at(i)


def varsize_cnf_instance(family: ClauseFamily, params: CnfFamilyParams,
                         name: str = "variable-size cnf") -> EffectiveInstance:
    """Weights ``x = 2^(-beta k)`` (dyadic, rounded down) for clauses of size ``k``.

    Clause sizes below ``params.N`` are rejected when their weight is queried.
    When ``params.delta`` is positive the family is trimmed first.
    """
    if params.delta:
        family = TrimmedFamily(family, params.delta)
    beta = params.beta
    cache: dict[int, Fraction] = {}

    def weight(j):
        k = len(family.clause(j))
        if k < params.N:
            raise InstanceError(f"clause {j} has size {k} < N = {params.N}")
        if k not in cache:
            cache[k] = dyadic_power(beta, k)
        return cache[k]

    return cnf_instance(family, weight, params.epsilon, name=name)
