"""Finite Moser-Tardos resampling with a fixed priority rule.

The solver always resamples the *first* violated event of a given ordering.
It does this without rescanning every event each step: an event can only
become violated when one of its variables is redrawn, so after a resample
only the closed neighbourhood of the resampled event is re-queued.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, sqrt
from statistics import NormalDist
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .core import (BudgetExhausted, ConditionFailed, DependencyGraph, Event,
                   FiniteInstance, InstanceError, Variable, build_dependency_graph,
                   check_lll)
from .tape import sample_variable

Assignment = dict  # variable index -> value


@dataclass(frozen=True)
class ResampleRecord:
    step: int
    event: int
    before: tuple[int, ...]
    after: tuple[int, ...]
    bits: int


@dataclass(frozen=True)
class ExecutionLog:
    records: tuple[ResampleRecord, ...]
    initial_values: Mapping[int, int]
    final_values: Mapping[int, int]
    event_vars: Mapping[int, tuple[int, ...]] | None = None

    def __len__(self):
        return len(self.records)

    def replay(self, event_vars: Mapping[int, Sequence[int]] | None = None) -> dict[int, int]:
        """Apply every record to ``initial_values`` and return the result."""
        event_vars = event_vars or self.event_vars
        if event_vars is None:
            raise ValueError("replay needs the variable list of every event")
        values = dict(self.initial_values)
        for rec in self.records:
            vs = event_vars[rec.event]
            if tuple(values[v] for v in vs) != rec.before:
                raise InstanceError(f"record {rec.step} does not match the replayed state")
            values.update(zip(vs, rec.after))
        return values

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for rec in self.records:
            out[rec.event] += 1
        return dict(out)


class Resampler:
    """Mutable run state shared by the finite solver and the staged engine."""

    def __init__(self, tape, variable: Callable[[int], Variable]):
        self.tape = tape
        self.variable = variable
        self.values: dict[int, int] = {}
        self.initial: dict[int, int] = {}
        self.records: list[ResampleRecord] = []
        self.events: dict[int, Event] = {}
        self._key: dict[int, Hashable] = {}
        self._active_by_var: dict[int, list[int]] = defaultdict(list)
        self._heap: list = []
        self._pending: set[int] = set()

    def sample(self, index: int) -> int:
        value = sample_variable(self.variable(index), self.tape)
        self.values[index] = value
        self.initial[index] = value
        return value

    def activate(self, event: Event, key) -> None:
        self.events[event.id] = event
        self._key[event.id] = key
        for v in event.vars:
            self._active_by_var[v].append(event.id)
        self._push(event.id)

    def _push(self, eid: int) -> None:
        if eid not in self._pending:
            self._pending.add(eid)
            heapq.heappush(self._heap, (self._key[eid], eid))

    def first_violated(self) -> int | None:
        values = self.values
        while self._heap:
            _, eid = self._heap[0]
            if self.events[eid].violated(values):
                return eid
            heapq.heappop(self._heap)
            self._pending.discard(eid)
        return None

    def resample(self, eid: int) -> ResampleRecord:
        event = self.events[eid]
        values = self.values
        before = event.local(values)
        start = self.tape.cursor
        for v in event.vars:
            values[v] = sample_variable(self.variable(v), self.tape)
        rec = ResampleRecord(len(self.records) + 1, eid, before, event.local(values),
                             self.tape.cursor - start)
        self.records.append(rec)
        for v in event.vars:
            for other in self._active_by_var[v]:
                self._push(other)
        return rec

    def run(self, limit: int) -> bool:
        """Resample until no active event is violated or ``limit`` total steps."""
        while True:
            eid = self.first_violated()
            if eid is None:
                return True
            if len(self.records) >= limit:
                return False
            self.resample(eid)

    def log(self) -> ExecutionLog:
        return ExecutionLog(tuple(self.records), dict(self.initial), dict(self.values),
                            {eid: e.vars for eid, e in self.events.items()})


def sample_initial(instance: FiniteInstance, tape) -> Assignment:
    """Sample every variable once, in increasing index order."""
    return {spec.index: sample_variable(spec, tape) for spec in instance.variables}


def priority_order(events: Iterable[Event]) -> list[int]:
    return [e.id for e in sorted(events, key=lambda e: (e.max_var, e.id))]


def first_violated(instance: FiniteInstance, assignment: Mapping[int, int],
                   ordering: Sequence[int] | None = None) -> int | None:
    events = instance.event_map
    for eid in ordering if ordering is not None else priority_order(instance.events):
        if events[eid].violated(assignment):
            return eid
    return None


def default_budget(weights: Iterable[Fraction]) -> int:
    total = sum((x / (1 - x) for x in weights), Fraction(0))
    return max(ceil(100 * total), 10_000)


def solve_finite(instance: FiniteInstance, tape, ordering: Sequence[int] | None = None,
                 max_steps: int | None = None, check: bool = True):
    """Run the resampling algorithm; returns ``(assignment, log)``.

    Raises :class:`BudgetExhausted` (carrying the partial log) after
    ``max_steps`` resamples, and :class:`ConditionFailed` when ``check`` is on
    and the classical condition fails.
    """
    if check:
        report = check_lll(instance, with_slack=False)
        if not report.passed:
            raise ConditionFailed(report)
    if ordering is None:
        ordering = priority_order(instance.events)
    ordering = list(ordering)
    if sorted(ordering) != sorted(e.id for e in instance.events):
        raise InstanceError("ordering must be a permutation of the event ids")
    if max_steps is None:
        max_steps = default_budget(instance.weights.values())
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")

    specs = instance.variable_map
    run = Resampler(tape, specs.__getitem__)
    for spec in instance.variables:
        run.sample(spec.index)
    events = instance.event_map
    for pos, eid in enumerate(ordering):
        run.activate(events[eid], pos)
    if not run.run(max_steps):
        raise BudgetExhausted(f"no solution after {max_steps} resamples", log=run.log())
    return dict(run.values), run.log()


@dataclass(frozen=True)
class EventStats:
    event: int
    runs: int
    mean: float
    half_width: float


def resample_stats(logs: Sequence[ExecutionLog], events: Iterable[int] | None = None,
                   confidence: float = 0.99) -> dict[int, EventStats]:
    """Per-event mean resample count with a normal-approximation half-width."""
    if not logs:
        raise ValueError("resample_stats needs at least one log")
    counts = [log.counts() for log in logs]
    ids = set(events) if events is not None else set()
    for c in counts:
        ids.update(c)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    n = len(logs)
    out = {}
    for eid in sorted(ids):
        xs = [c.get(eid, 0) for c in counts]
        mean = sum(xs) / n
        var = sum((x - mean) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
        out[eid] = EventStats(eid, n, mean, z * sqrt(var / n))
    return out


def resample_bound(x: Fraction) -> Fraction:
    """Expected-resample bound ``x / (1 - x)`` for an event of weight ``x``."""
    return x / (1 - x)


# -- witness trees ---------------------------------------------------------

@dataclass(frozen=True)
class WitnessTree:
    labels: tuple[int, ...]
    parents: tuple[int, ...]  # parent vertex of each vertex; -1 for the root

    @property
    def root(self) -> int:
        return self.labels[0]

    def __len__(self):
        return len(self.labels)

    def children(self, vertex: int) -> list[int]:
        return [u for u, p in enumerate(self.parents) if p == vertex]

    def depth(self, vertex: int) -> int:
        d = 0
        while self.parents[vertex] >= 0:
            vertex = self.parents[vertex]
            d += 1
        return d

    def canonical(self):
        """Order-independent nested form, usable as a dictionary key."""
        kids: dict[int, list[int]] = defaultdict(list)
        for u, p in enumerate(self.parents):
            if p >= 0:
                kids[p].append(u)

        def form(u):
            return (self.labels[u], tuple(sorted(form(c) for c in kids[u])))

        return form(0)


def build_witness_tree(log: ExecutionLog, graph: DependencyGraph, step: int) -> WitnessTree:
    """Reconstruct the witness tree of the resample at ``step`` (1-based).

    Earlier records are scanned backwards; a record is attached as a child of
    the deepest vertex whose label is its own event or a neighbour of it
    (ties go to the earliest-added vertex) and dropped if there is none.
    """
    if not 1 <= step <= len(log.records):
        raise IndexError(f"step {step} outside 1..{len(log.records)}")
    labels = [log.records[step - 1].event]
    parents = [-1]
    depths = [0]
    nbrs = {eid: set(adj) for eid, adj in graph.adjacency.items()}
    for rec in reversed(log.records[:step - 1]):
        e = rec.event
        best = -1
        for u, lab in enumerate(labels):
            if (lab == e or e in nbrs[lab]) and (best < 0 or depths[u] > depths[best]):
                best = u
        if best >= 0:
            labels.append(e)
            parents.append(best)
            depths.append(depths[best] + 1)
    return WitnessTree(tuple(labels), tuple(parents))


def tree_weight(tree: WitnessTree, instance: FiniteInstance) -> Fraction:
    probs = instance.probabilities
    w = Fraction(1)
    for lab in tree.labels:
        w *= probs[lab]
    return w


def check_tree(tree: WitnessTree, graph: DependencyGraph) -> bool:
    """Every child is labelled by its parent's event or a neighbour of it."""
    for u, p in enumerate(tree.parents):
        if p < 0:
            continue
        a, b = tree.labels[p], tree.labels[u]
        if a != b and b not in graph.adjacency[a]:
            return False
    return True
