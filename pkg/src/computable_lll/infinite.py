"""The staged resampling algorithm for countably many variables and events.

Events are prioritised by their largest variable index (ties by id).  Stage
``i`` activates the events whose largest variable is ``i`` and resamples the
first violated active event until none is violated; the values of
``P_0..P_i`` at that moment form the stage snapshot.  On top of this live the
stabilisation bounds and the extraction of a computable prefix from the
output distribution.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, sqrt
from typing import Callable, Iterable, Mapping, Sequence

from .core import (BudgetExhausted, ConditionFailed, ConditionReport, Event,
                   FiniteInstance, InstanceError, Variable, as_fraction,
                   condition_row, event_probability)
from .finite import ExecutionLog, Resampler
from .tape import BitTape, RandomTape, TapeExhausted


class ExtractionError(RuntimeError):
    """No candidate value passed the positivity threshold."""

    def __init__(self, message: str, position: int, masses: Mapping):
        super().__init__(message)
        self.position = position
        self.masses = dict(masses)


class EffectiveInstance:
    """A countable instance given by enumerators.

    ``variable(i)`` gives the spec of ``P_i``; ``events_of_variable(i)`` the
    finite list of events using ``P_i``; ``event(j)`` the event itself;
    ``weight(j)`` its rational ``x(A)``.  ``events_ending_at(i)`` may be
    supplied when listing the events whose largest variable is ``i`` is much
    cheaper than listing every event through ``P_i``.

    All enumerators must be pure functions; results are cached.
    """

    def __init__(self, variable: Callable[[int], Variable],
                 events_of_variable: Callable[[int], Iterable[int]],
                 event: Callable[[int], Event],
                 weight: Callable[[int], Fraction],
                 epsilon=Fraction(0),
                 events_ending_at: Callable[[int], Iterable[int]] | None = None,
                 num_variables: int | None = None,
                 name: str = "instance"):
        self.epsilon = as_fraction(epsilon)
        if not 0 <= self.epsilon < 1:
            raise InstanceError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        self.num_variables = num_variables
        self.name = name
        self._variable = variable
        self._events_of = events_of_variable
        self._event = event
        self._weight = weight
        self._ending_at = events_ending_at
        self.variable = lru_cache(maxsize=None)(self._checked_variable)
        self.event = lru_cache(maxsize=None)(self._checked_event)
        self.weight = lru_cache(maxsize=None)(self._checked_weight)
        self.events_of = lru_cache(maxsize=None)(self._checked_events_of)
        self.ending_at = lru_cache(maxsize=None)(self._checked_ending_at)
        self.probability = lru_cache(maxsize=None)(self._probability)

    def _bounds(self, i: int) -> None:
        if i < 0 or (self.num_variables is not None and i >= self.num_variables):
            raise InstanceError(f"{self.name} has no variable {i}")

    def _checked_variable(self, i: int) -> Variable:
        self._bounds(i)
        spec = self._variable(i)
        if spec.index != i:
            raise InstanceError(f"variable enumerator returned index {spec.index} for {i}")
        return spec

    def _checked_event(self, j: int) -> Event:
        e = self._event(j)
        if e.id != j:
            raise InstanceError(f"event enumerator returned id {e.id} for {j}")
        return e

    def _checked_weight(self, j: int) -> Fraction:
        x = as_fraction(self._weight(j))
        if not 0 < x < 1:
            raise InstanceError(f"weight of event {j} must lie in (0, 1), got {x}")
        return x

    def _checked_events_of(self, i: int) -> tuple[int, ...]:
        self._bounds(i)
        ids = tuple(sorted(set(self._events_of(i))))
        for j in ids:
            if i not in self.event(j).vars:
                raise InstanceError(f"event {j} listed for variable {i} does not use it")
        return ids

    def _checked_ending_at(self, i: int) -> tuple[int, ...]:
        self._bounds(i)
        if self._ending_at is None:
            return tuple(j for j in self.events_of(i) if self.event(j).max_var == i)
        ids = tuple(sorted(set(self._ending_at(i))))
        for j in ids:
            if self.event(j).max_var != i:
                raise InstanceError(f"event {j} listed as ending at {i} ends at "
                                    f"{self.event(j).max_var}")
        return ids

    def _probability(self, j: int) -> Fraction:
        p = event_probability(self.event(j), self.variable)
        if p == 1:
            raise InstanceError(f"event {j} has probability 1 and cannot be avoided")
        return p

    def neighbors(self, j: int) -> tuple[int, ...]:
        """The punctured neighbourhood of event ``j``."""
        out = set()
        for v in self.event(j).vars:
            ids = self.events_of(v)
            if j not in ids:
                raise InstanceError(f"event {j} uses variable {v} but is not listed for it")
            out.update(ids)
        out.discard(j)
        return tuple(sorted(out))

    def check(self, event_ids: Iterable[int], with_slack: bool = True) -> ConditionReport:
        """Exact condition rows for the given events, with full neighbourhoods."""
        factor = 1 - self.epsilon if with_slack else Fraction(1)
        rows = tuple(
            condition_row(j, self.probability(j), self.weight(j),
                          (self.weight(b) for b in self.neighbors(j)), factor)
            for j in event_ids)
        return ConditionReport(rows, with_slack, self.epsilon)

    def require_condition(self, event_ids: Iterable[int]) -> None:
        report = self.check(event_ids, with_slack=True)
        if not report.passed:
            raise ConditionFailed(report)

    @classmethod
    def from_events(cls, events: Iterable[Event], weights: Mapping[int, Fraction],
                    epsilon=Fraction(0), variable: Callable[[int], Variable] | None = None,
                    name: str = "instance") -> "EffectiveInstance":
        """Finitely many events over infinitely many variables (uniform bits by default)."""
        events = {e.id: e for e in events}
        by_var: dict[int, list[int]] = defaultdict(list)
        for e in events.values():
            for v in e.vars:
                by_var[v].append(e.id)
        return cls(variable or (lambda i: Variable.uniform(i, 2)),
                   lambda i: by_var.get(i, ()), events.__getitem__,
                   lambda j: weights[j], epsilon, name=name)

    @classmethod
    def from_finite(cls, instance: FiniteInstance) -> "EffectiveInstance":
        specs = instance.variable_map
        events = instance.event_map
        by_var: dict[int, list[int]] = defaultdict(list)
        for e in instance.events:
            for v in e.vars:
                if v not in specs:
                    raise InstanceError(f"event {e.id} uses unknown variable {v}")
                by_var[v].append(e.id)
        n = max(specs, default=-1) + 1
        if sorted(specs) != list(range(n)):
            raise InstanceError("finite instances must index their variables 0..n-1")
        weights = instance.weights
        return cls(specs.__getitem__, lambda i: by_var.get(i, ()), events.__getitem__,
                   weights.__getitem__, instance.epsilon, num_variables=n, name="finite instance")


def order_events(instance: EffectiveInstance, upto_var: int) -> list[int]:
    """All events with largest variable at most ``upto_var``, by (max vbl, id)."""
    out = []
    for i in range(upto_var + 1):
        out.extend(instance.ending_at(i))
    return out


@dataclass(frozen=True)
class PrefixSnapshot:
    stage: int
    values: tuple[int, ...]
    steps_elapsed: int


class StagedRun:
    """One execution of the staged algorithm.

    Variables are drawn lazily: ``P_i`` is first sampled when stage ``i``
    begins, which with a per-variable :class:`RandomTape` gives the same
    values as sampling everything up front.
    """

    def __init__(self, instance: EffectiveInstance, tape, stage_budget: int | None = None):
        self.instance = instance
        self.tape = tape
        self.stage_budget = stage_budget
        self.stage = -1
        self.expected = Fraction(0)  # sum of x/(1-x) over active events
        self._run = Resampler(tape, instance.variable)

    @property
    def values(self) -> dict[int, int]:
        return self._run.values

    @property
    def steps(self) -> int:
        return len(self._run.records)

    def advance(self, budget: int | None = None, max_steps: int | None = None) -> PrefixSnapshot:
        """Run the next stage to completion."""
        i = self.stage + 1
        inst = self.instance
        if i not in self._run.values:
            self._run.sample(i)
        for j in inst.ending_at(i):
            x = inst.weight(j)
            self.expected += x / (1 - x)
            self._run.activate(inst.event(j), (i, j))
        if budget is None:
            budget = self.stage_budget
        if budget is None:
            budget = max(ceil(100 * self.expected), 10_000)
        limit = self.steps + budget
        if max_steps is not None:
            limit = min(limit, max_steps)
        if not self._run.run(limit):
            raise BudgetExhausted(f"stage {i} did not finish within its budget",
                                  log=self.log(), stage=i)
        self.stage = i
        return self.snapshot()

    def run_until(self, upto: int, max_steps: int | None = None) -> list[PrefixSnapshot]:
        return [self.advance(max_steps=max_steps) for _ in range(self.stage + 1, upto + 1)]

    def snapshot(self) -> PrefixSnapshot:
        values = self._run.values
        return PrefixSnapshot(self.stage, tuple(values[k] for k in range(self.stage + 1)),
                              self.steps)

    def log(self) -> ExecutionLog:
        return self._run.log()


def run_stage(run: StagedRun, budget: int | None = None) -> PrefixSnapshot:
    return run.advance(budget)


def run_stages(instance: EffectiveInstance, tape, upto: int,
               stage_budget: int | None = None) -> list[PrefixSnapshot]:
    return StagedRun(instance, tape, stage_budget).run_until(upto)


# -- stabilisation ---------------------------------------------------------

def reach(instance: EffectiveInstance, i: int, m: int) -> int:
    """Largest variable index in the events within distance ``m`` of ``P_i``."""
    if m < 0:
        raise ValueError("depth must be nonnegative")
    frontier = set(instance.events_of(i))
    seen = set(frontier)
    for _ in range(m):
        nxt = set()
        for j in frontier:
            nxt.update(instance.neighbors(j))
        frontier = nxt - seen
        if not frontier:
            break
        seen |= frontier
    return max((instance.event(j).max_var for j in seen), default=i)


@dataclass(frozen=True)
class StabilizationBound:
    variable: int
    epsilon: Fraction
    steps: int
    reach_depth: int
    reach_var: int
    expected_resamples: Fraction


def expected_resamples(instance: EffectiveInstance, upto_var: int) -> Fraction:
    total = Fraction(0)
    for j in order_events(instance, upto_var):
        x = instance.weight(j)
        total += x / (1 - x)
    return total


def stabilization_bound(instance: EffectiveInstance, i: int, eps, check: bool = True
                        ) -> StabilizationBound:
    """A step count after which ``P_i`` changes with probability at most ``eps``.

    Half of ``eps`` goes to witness trees reaching past distance ``m``, whose
    total weight decays like ``(1 - slack)^m``; the other half to the run not
    having finished the stage ``j = reach(i, m)`` within ``N`` resamples, by
    Markov's inequality on the expected resample count.
    """
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    own = instance.events_of(i)
    if check and own:
        instance.require_condition(own)
    base = sum((instance.weight(j) / (1 - instance.weight(j)) for j in own), Fraction(0))
    decay = 1 - instance.epsilon
    m = 0
    if base > 0:
        if decay == 1:
            raise ValueError("stabilization needs a positive instance epsilon")
        term = base
        while term > eps / 2:
            term *= decay
            m += 1
    j = reach(instance, i, m)
    if check:
        instance.require_condition(order_events(instance, j))
    total = expected_resamples(instance, j)
    return StabilizationBound(i, eps, ceil(total * 2 / eps), m, j, total)


@dataclass(frozen=True)
class StabilizationCheck:
    bound: StabilizationBound
    runs: int
    changes: int
    horizon: int

    @property
    def frequency(self) -> float:
        return self.changes / self.runs

    @property
    def sigma(self) -> float:
        p = float(self.bound.epsilon)
        return sqrt(p * (1 - p) / self.runs)


def changes_after(log: ExecutionLog, var: int, step: int) -> bool:
    """Whether a resample after ``step`` gave ``var`` a different value."""
    for rec in log.records[step:]:
        vs = log.event_vars[rec.event]
        if var in vs:
            k = vs.index(var)
            if rec.before[k] != rec.after[k]:
                return True
    return False


def stabilization_frequency(instance: EffectiveInstance, i: int, eps, runs: int,
                            seed: int = 0, horizon: int | None = None) -> StabilizationCheck:
    """Run ``runs`` seeded executions up to ``horizon`` and count late changes of ``P_i``."""
    bound = stabilization_bound(instance, i, eps)
    if horizon is None:
        horizon = reach(instance, i, 2 * bound.reach_depth)
    changes = 0
    for r in range(runs):
        run = StagedRun(instance, RandomTape(seed + r))
        run.run_until(horizon)
        changes += changes_after(run.log(), i, bound.steps)
    return StabilizationCheck(bound, runs, changes, horizon)


# -- output distribution and extraction ------------------------------------

@dataclass(frozen=True)
class ExactDistribution:
    masses: Mapping[tuple[int, ...], Fraction]
    unresolved: Fraction
    depth: int
    horizon: int

    def marginal(self, length: int) -> dict[tuple[int, ...], Fraction]:
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for t, w in self.masses.items():
            out[t[:length]] += w
        return dict(out)


def default_horizon(instance: EffectiveInstance, s: int) -> int:
    """Largest variable of any event touching ``P_0..P_s`` (at least ``s``)."""
    h = s
    for i in range(s + 1):
        for j in instance.events_of(i):
            h = max(h, instance.event(j).max_var)
    return h


def _bits_needed(spec: Variable) -> int:
    return max(spec.distribution, key=lambda p: p.denominator).denominator.bit_length() - 1


def enumerate_exact_distribution(instance: EffectiveInstance, s: int, depth: int,
                                 horizon: int | None = None) -> ExactDistribution:
    """Exact output masses of ``P_0..P_s`` over all tapes of ``depth`` bits.

    Each tape prefix is run through the stages ``0..horizon``; a prefix on
    which the run finishes contributes its full dyadic mass to the tuple it
    produced, a prefix still undecided at ``depth`` bits is unresolved.
    """
    if horizon is None:
        horizon = default_horizon(instance, s)
    horizon = max(horizon, s)
    for k in range(horizon + 1):
        if not instance.variable(k).is_dyadic:
            raise InstanceError(f"exact mode needs dyadic distributions; P_{k} is not")
    masses: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    unresolved = Fraction(0)
    stack: list[tuple[int, ...]] = [()]
    while stack:
        bits = stack.pop()
        run = StagedRun(instance, BitTape(bits), stage_budget=1 << 62)
        try:
            run.run_until(horizon)
        except TapeExhausted:
            if len(bits) >= depth:
                unresolved += Fraction(1, 1 << len(bits))
            else:
                stack.append(bits + (1,))
                stack.append(bits + (0,))
            continue
        values = run.values
        masses[tuple(values[k] for k in range(s + 1))] += Fraction(1, 1 << len(bits))
    return ExactDistribution(dict(masses), unresolved, depth, horizon)


@dataclass(frozen=True)
class ExtractedPrefix:
    values: tuple[int, ...]
    mode: str
    confidence: Fraction
    masses: tuple[Mapping[int, Fraction], ...] = field(default=(), compare=False)


def _greedy(s: int, weighted: Mapping[tuple[int, ...], Fraction], accept) -> tuple[tuple[int, ...], list]:
    chosen: list[int] = []
    seen = []
    pool = dict(weighted)
    for k in range(s + 1):
        by_value: dict[int, Fraction] = defaultdict(Fraction)
        for t, w in pool.items():
            by_value[t[k]] += w
        by_value = dict(sorted(by_value.items()))
        seen.append(by_value)
        total = sum(by_value.values(), Fraction(0))
        picks = [v for v, w in by_value.items() if accept(w, total)]
        if not picks:
            raise ExtractionError(f"no value for position {k} passes the threshold; "
                                  "increase depth or replicas", k, by_value)
        chosen.append(picks[0])
        pool = {t: w for t, w in pool.items() if t[k] == picks[0]}
    return tuple(chosen), seen


def extract_computable_prefix(instance: EffectiveInstance, s: int, mode: str = "exact", *,
                              depth: int | None = None, horizon: int | None = None,
                              replicas: int = 10_000, seed: int = 0, margin=Fraction(1, 20),
                              eps=Fraction(1, 10), step_cap: int | None = None) -> ExtractedPrefix:
    """Choose ``a_0..a_s`` greedily, smallest value first, keeping positive mass.

    ``exact`` uses :func:`enumerate_exact_distribution` (positive lower bound);
    ``mc`` runs ``replicas`` seeded executions and requires each chosen value
    to appear in at least ``margin`` of the replicas still agreeing with the
    prefix chosen so far.
    """
    if s < 0:
        return ExtractedPrefix((), mode, Fraction(1))
    if mode == "exact":
        if horizon is None:
            horizon = default_horizon(instance, s)
        if depth is None:
            depth = sum(_bits_needed(instance.variable(k)) for k in range(horizon + 1)) + 4
        dist = enumerate_exact_distribution(instance, s, depth, horizon)
        values, seen = _greedy(s, dist.masses, lambda w, total: w > 0)
        return ExtractedPrefix(values, mode, Fraction(1), tuple(seen))
    if mode != "mc":
        raise ValueError(f"unknown extraction mode {mode!r}")

    eps = as_fraction(eps)
    margin = as_fraction(margin)
    if horizon is None or step_cap is None:
        bounds = [stabilization_bound(instance, i, eps) for i in range(s + 1)]
        if horizon is None:
            horizon = max(b.reach_var for b in bounds)
        if step_cap is None:
            step_cap = max(b.steps for b in bounds)
    horizon = max(horizon, s)
    counts: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    for r in range(replicas):
        run = StagedRun(instance, RandomTape(seed + r))
        try:
            run.run_until(horizon, max_steps=step_cap)
        except BudgetExhausted:
            continue
        counts[tuple(run.values[k] for k in range(s + 1))] += 1
    values, seen = _greedy(s, counts, lambda w, total: total > 0 and w >= margin * total)
    return ExtractedPrefix(values, mode, 1 - eps, tuple(seen))


@dataclass(frozen=True)
class PrefixReport:
    checked: tuple[int, ...]
    violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_prefix(instance: EffectiveInstance, prefix: Sequence[int]) -> PrefixReport:
    """Check every event determined by the prefix (largest variable < len)."""
    values = dict(enumerate(prefix))
    checked = order_events(instance, len(prefix) - 1) if prefix else []
    bad = tuple(j for j in checked if instance.event(j).violated(values))
    return PrefixReport(tuple(checked), bad)
