"""Domain types, exact event probabilities, dependency graphs and LLL checks.

All probabilities and weights are :class:`fractions.Fraction` values; nothing
in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterable, Mapping, Sequence


class InstanceError(ValueError):
    """An instance is malformed or its enumerators disagree with each other."""


class ConditionFailed(RuntimeError):
    """The local lemma condition does not hold; carries the failing report."""

    def __init__(self, report: "ConditionReport", message: str | None = None):
        self.report = report
        failing = [row.event for row in report.rows if not row.passed]
        super().__init__(message or f"LLL condition fails for events {failing}")


class BudgetExhausted(RuntimeError):
    """A resampling run hit its step budget before all events were satisfied."""

    def __init__(self, message: str, log=None, stage: int | None = None):
        super().__init__(message)
        self.log = log
        self.stage = stage


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction or a 'num/den' string")
    return Fraction(value)


@dataclass(frozen=True)
class Variable:
    """A discrete random variable ``P_i`` with range ``{0, ..., n_i - 1}``."""

    index: int
    distribution: tuple[Fraction, ...]

    def __post_init__(self):
        dist = tuple(as_fraction(p) for p in self.distribution)
        object.__setattr__(self, "distribution", dist)
        if self.index < 0:
            raise InstanceError(f"variable index must be natural, got {self.index}")
        if not dist:
            raise InstanceError(f"variable {self.index} has an empty range")
        if any(p <= 0 for p in dist):
            raise InstanceError(f"variable {self.index}: probabilities must be positive")
        if sum(dist) != 1:
            raise InstanceError(f"variable {self.index}: probabilities sum to {sum(dist)}")

    @property
    def range_size(self) -> int:
        return len(self.distribution)

    @classmethod
    def uniform(cls, index: int, n: int = 2) -> "Variable":
        return cls(index, (Fraction(1, n),) * n)

    @property
    def is_dyadic(self) -> bool:
        return all(p.denominator & (p.denominator - 1) == 0 for p in self.distribution)


@dataclass(frozen=True)
class Event:
    """A forbidden event: the local evaluations of ``vars`` listed in ``forbidden``."""

    id: int
    vars: tuple[int, ...]
    forbidden: frozenset[tuple[int, ...]]

    def __post_init__(self):
        vs = tuple(self.vars)
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "forbidden", frozenset(tuple(t) for t in self.forbidden))
        if not vs:
            raise InstanceError(f"event {self.id} has no variables")
        if any(b <= a for a, b in zip(vs, vs[1:])):
            raise InstanceError(f"event {self.id}: variables must be strictly increasing")
        for t in self.forbidden:
            if len(t) != len(vs):
                raise InstanceError(f"event {self.id}: tuple {t} has wrong length")
            if any(v < 0 for v in t):
                raise InstanceError(f"event {self.id}: negative value in {t}")
        # single-tuple events (clauses) get an early-exit check
        only = next(iter(self.forbidden)) if len(self.forbidden) == 1 else None
        object.__setattr__(self, "_only", only)

    @property
    def max_var(self) -> int:
        return self.vars[-1]

    def local(self, values: Mapping[int, int]) -> tuple[int, ...]:
        return tuple(values[v] for v in self.vars)

    def violated(self, values: Mapping[int, int]) -> bool:
        only = self._only
        if only is not None:
            for v, want in zip(self.vars, only):
                if values[v] != want:
                    return False
            return True
        if not self.forbidden:
            return False
        return self.local(values) in self.forbidden

    @classmethod
    def from_predicate(cls, id: int, vars: Sequence[int], ranges: Sequence[int], predicate) -> "Event":
        """Compile a predicate over local tuples into an explicit forbidden list."""
        from itertools import product

        tuples = [t for t in product(*(range(n) for n in ranges)) if predicate(t)]
        return cls(id, tuple(vars), frozenset(tuples))


def event_probability(event: Event, variables) -> Fraction:
    """Exact ``Pr[A]`` under the product measure.

    ``variables`` is either a mapping from index to :class:`Variable` or a
    sequence indexed by variable index.
    """
    lookup = _variable_lookup(variables)
    specs = []
    for v in event.vars:
        spec = lookup(v)
        if spec is None:
            raise InstanceError(f"event {event.id} uses unknown variable {v}")
        specs.append(spec)
    total = Fraction(0)
    for t in event.forbidden:
        for spec, value in zip(specs, t):
            if value >= spec.range_size:
                raise InstanceError(
                    f"event {event.id}: value {value} outside range of variable {spec.index}")
        total += prod((spec.distribution[value] for spec, value in zip(specs, t)), start=Fraction(1))
    return total


def _variable_lookup(variables):
    if callable(variables) and not isinstance(variables, Mapping):
        return variables
    if isinstance(variables, Mapping):
        return variables.get
    by_index = {spec.index: spec for spec in variables}
    return by_index.get


@dataclass(frozen=True)
class FiniteInstance:
    variables: tuple[Variable, ...]
    events: tuple[Event, ...]
    weights: Mapping[int, Fraction]
    epsilon: Fraction = Fraction(0)
    probabilities: Mapping[int, Fraction] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(sorted(self.variables, key=lambda s: s.index))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "events", tuple(self.events))
        weights = {k: as_fraction(x) for k, x in dict(self.weights).items()}
        object.__setattr__(self, "weights", weights)
        eps = as_fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)

        seen = set()
        for spec in variables:
            if spec.index in seen:
                raise InstanceError(f"duplicate variable {spec.index}")
            seen.add(spec.index)
        if not 0 <= eps < 1:
            raise InstanceError(f"epsilon must lie in [0, 1), got {eps}")
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate event ids")
        lookup = self.variable_map
        probs = {}
        for e in self.events:
            x = weights.get(e.id)
            if x is None:
                raise InstanceError(f"event {e.id} has no weight")
            if not 0 < x < 1:
                raise InstanceError(f"weight of event {e.id} must lie in (0, 1), got {x}")
            p = event_probability(e, lookup)
            if p == 1:
                raise InstanceError(f"event {e.id} has probability 1 and cannot be avoided")
            probs[e.id] = p
        object.__setattr__(self, "probabilities", probs)

    @property
    def variable_map(self) -> dict[int, Variable]:
        return {spec.index: spec for spec in self.variables}

    @property
    def event_map(self) -> dict[int, Event]:
        return {e.id: e for e in self.events}


@dataclass(frozen=True)
class DependencyGraph:
    adjacency: Mapping[int, tuple[int, ...]]

    def neighbors(self, event_id: int) -> tuple[int, ...]:
        return self.adjacency[event_id]

    def closed_neighbors(self, event_id: int) -> set[int]:
        return {event_id, *self.adjacency[event_id]}


def build_dependency_graph(instance: FiniteInstance | Iterable[Event]) -> DependencyGraph:
    events = instance.events if isinstance(instance, FiniteInstance) else tuple(instance)
    by_var: dict[int, list[int]] = {}
    for e in events:
        for v in e.vars:
            by_var.setdefault(v, []).append(e.id)
    adjacency = {}
    for e in events:
        nbrs = {other for v in e.vars for other in by_var[v]}
        nbrs.discard(e.id)
        adjacency[e.id] = tuple(sorted(nbrs))
    return DependencyGraph(adjacency)


@dataclass(frozen=True)
class ConditionRow:
    event: int
    lhs: Fraction
    rhs: Fraction
    passed: bool

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class ConditionReport:
    rows: tuple[ConditionRow, ...]
    with_slack: bool
    epsilon: Fraction

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def row(self, event_id: int) -> ConditionRow:
        for r in self.rows:
            if r.event == event_id:
                return r
        raise KeyError(event_id)


def _prod(xs: list[int]) -> int:
    # balanced product tree keeps big-int multiplications even-sized
    while len(xs) > 1:
        xs = [xs[k] * xs[k + 1] if k + 1 < len(xs) else xs[k] for k in range(0, len(xs), 2)]
    return xs[0] if xs else 1


def condition_row(event_id: int, prob: Fraction, x: Fraction,
                  neighbor_weights: Iterable[Fraction], factor: Fraction) -> ConditionRow:
    """One row of the condition: ``prob <= factor * x * prod(1 - x(E))``."""
    # unreduced products, one gcd at the end; reducing at each step is far
    # slower once there are thousands of 64-bit dyadic weights
    ws = list(neighbor_weights)
    num = factor.numerator * x.numerator * _prod([w.denominator - w.numerator for w in ws])
    den = factor.denominator * x.denominator * _prod([w.denominator for w in ws])
    rhs = Fraction(num, den)
    return ConditionRow(event_id, prob, rhs, prob <= rhs)


def check_lll(instance: FiniteInstance, with_slack: bool = True) -> ConditionReport:
    """Evaluate the local lemma condition for every event, exactly.

    With ``with_slack`` the right-hand side carries the extra ``(1 - eps)``
    factor needed by the computable version; without it this is the classical
    condition.
    """
    graph = build_dependency_graph(instance)
    factor = 1 - instance.epsilon if with_slack else Fraction(1)
    w = instance.weights
    rows = tuple(
        condition_row(e.id, instance.probabilities[e.id], w[e.id],
                      (w[b] for b in graph.neighbors(e.id)), factor)
        for e in instance.events
    )
    return ConditionReport(rows, with_slack, instance.epsilon)
