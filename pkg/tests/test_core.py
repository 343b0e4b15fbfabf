from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings

from computable_lll import (Event, FiniteInstance, InstanceError, Variable,
                            build_dependency_graph, check_lll, event_probability)
from computable_lll.core import as_fraction, condition_row

from conftest import bits, clause_event, finite_instances, instance


# -- types -------------------------------------------------------------------

def test_variable_validation():
    with pytest.raises(InstanceError):
        Variable(0, (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(InstanceError):
        Variable(0, (Fraction(1), Fraction(0)))
    assert Variable.uniform(3, 4).distribution == (Fraction(1, 4),) * 4
    assert Variable(0, (Fraction(1, 4), Fraction(3, 4))).is_dyadic
    assert not Variable(0, (Fraction(1, 3), Fraction(2, 3))).is_dyadic


def test_floats_rejected():
    with pytest.raises(TypeError):
        as_fraction(0.25)
    assert as_fraction("3/8") == Fraction(3, 8)


def test_event_validation():
    with pytest.raises(InstanceError):
        Event(0, (1, 0), frozenset([(0, 0)]))
    with pytest.raises(InstanceError):
        Event(0, (0, 0), frozenset([(0, 0)]))
    with pytest.raises(InstanceError):
        Event(0, (0, 1), frozenset([(0,)]))


def test_instance_validation():
    e = clause_event(0, (0, 1))
    with pytest.raises(InstanceError):
        instance([e], 1)  # variable 1 missing
    with pytest.raises(InstanceError):
        FiniteInstance(bits(2), (e,), {0: Fraction(1)}, Fraction(0))
    with pytest.raises(InstanceError):
        FiniteInstance(bits(2), (e,), {0: Fraction(1, 2)}, Fraction(1))


def test_certain_event_rejected():
    e = Event(0, (0,), frozenset([(0,), (1,)]))
    with pytest.raises(InstanceError):
        instance([e], 1)


# -- event_probability ---------------------------------------------------------

def test_probability_one_bit():
    e = Event(0, (0,), frozenset([(1,)]))
    assert event_probability(e, bits(1)) == Fraction(1, 2)


def test_probability_cube():
    e = clause_event(0, (0, 1, 2))
    assert event_probability(e, bits(3)) == Fraction(1, 8)


def test_probability_ternary():
    v = Variable(0, (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))
    e = Event(0, (0,), frozenset([(1,), (2,)]))
    assert event_probability(e, [v]) == Fraction(1, 3) + Fraction(1, 6)


def test_probability_missing_variable():
    with pytest.raises(InstanceError):
        event_probability(clause_event(0, (0, 5)), bits(2))


@settings(max_examples=200, deadline=None)
@given(finite_instances())
def test_complement_probability(inst):
    specs = inst.variable_map
    for e in inst.events:
        cube = set(product(*(range(specs[v].range_size) for v in e.vars)))
        comp = Event(e.id, e.vars, frozenset(cube - e.forbidden))
        assert event_probability(comp, specs) == 1 - event_probability(e, specs)


# -- dependency graph ----------------------------------------------------------

def test_disjoint_events():
    g = build_dependency_graph([clause_event(0, (0, 1)), clause_event(1, (2, 3))])
    assert g.neighbors(0) == () and g.neighbors(1) == ()


def test_chain_overlap():
    g = build_dependency_graph([clause_event(k, (k, k + 1)) for k in range(3)])
    assert g.neighbors(1) == (0, 2)
    assert g.neighbors(0) == (1,)


def test_single_event_has_no_neighbors():
    assert build_dependency_graph([clause_event(7, (0,))]).neighbors(7) == ()


@settings(max_examples=200, deadline=None)
@given(finite_instances(max_events=6))
def test_graph_symmetric_and_punctured(inst):
    g = build_dependency_graph(inst)
    for a in inst.events:
        for b in inst.events:
            shares = a.id != b.id and bool(set(a.vars) & set(b.vars))
            assert (b.id in g.neighbors(a.id)) == shares
            assert (b.id in g.neighbors(a.id)) == (a.id in g.neighbors(b.id))


# -- condition check -----------------------------------------------------------

def test_condition_four_uniform_passes():
    row = condition_row(0, Fraction(1, 16), Fraction(1, 4), [Fraction(1, 4)] * 4,
                        Fraction(9, 10))
    assert row.rhs == Fraction(9, 10) * Fraction(1, 4) * Fraction(3, 4) ** 4
    assert row.rhs == Fraction(729, 10240)
    assert row.passed and row.slack == Fraction(729, 10240) - Fraction(1, 16)


def test_condition_three_uniform_fails():
    row = condition_row(0, Fraction(1, 8), Fraction(1, 2), [Fraction(1, 2)] * 2,
                        Fraction(9, 10))
    assert row.rhs == Fraction(9, 80)
    assert not row.passed


def test_condition_isolated_impossible_event():
    e = Event(0, (0,), frozenset())
    rep = check_lll(instance([e], 1, x=Fraction(1, 1000), epsilon=Fraction(1, 2)))
    assert rep.passed and rep.row(0).lhs == 0


def test_check_lll_star():
    # a centre clause sharing one variable with each of four others
    centre = clause_event(0, (0, 1, 2, 3))
    leaves = [clause_event(k + 1, (k, 4 + 3 * k, 5 + 3 * k, 6 + 3 * k)) for k in range(4)]
    rep = check_lll(instance([centre, *leaves], 16, epsilon=Fraction(1, 10)))
    assert rep.row(0).rhs == Fraction(729, 10240)
    assert rep.row(1).rhs == Fraction(9, 10) * Fraction(1, 4) * Fraction(3, 4)
    assert rep.passed


@settings(max_examples=200, deadline=None)
@given(finite_instances())
def test_zero_epsilon_slack_agrees(inst):
    inst = FiniteInstance(inst.variables, inst.events, inst.weights, Fraction(0))
    a, b = check_lll(inst, True), check_lll(inst, False)
    assert [(r.lhs, r.rhs, r.passed) for r in a.rows] == [(r.lhs, r.rhs, r.passed) for r in b.rows]


@settings(max_examples=100, deadline=None)
@given(finite_instances())
def test_report_reproducible_and_exact(inst):
    a, b = check_lll(inst), check_lll(inst)
    assert a == b
    g = build_dependency_graph(inst)
    for r in a.rows:
        rhs = (1 - inst.epsilon) * inst.weights[r.event]
        for n in g.neighbors(r.event):
            rhs *= 1 - inst.weights[n]
        assert r.rhs == rhs
        assert r.passed == (r.lhs <= rhs)
