from fractions import Fraction
from math import e as E, floor, log, log1p

import pytest
from hypothesis import given, settings, strategies as st

from computable_lll import (ChainCNF, Clause, ClauseList, CnfFamilyParams, ConditionFailed,
                            InstanceError, Variable, chain_instance, check_varsize_condition,
                            event_probability, min_clause_size, to_finite, trim_clauses,
                            uniform_cnf_instance, varsize_cnf_instance)
from computable_lll.cnf import (dyadic_power, max_untrimmed_size, threshold_holds,
                                trim_clause, uniform_condition)


# -- clauses -----------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.integers(0, 30), st.booleans(), min_size=1, max_size=8))
def test_clause_compiles_to_one_tuple(lits):
    c = Clause(tuple(lits.items()))
    ev = c.to_event(5)
    assert len(ev.forbidden) == 1
    assert event_probability(ev, lambda i: Variable.uniform(i)) == Fraction(1, 2 ** len(c))
    (bad,) = ev.forbidden
    assert not c.satisfied(dict(zip(ev.vars, bad)))


def test_clause_rejects_repeats():
    with pytest.raises(InstanceError):
        Clause(((1, True), (1, False)))


def test_chain_enumerators():
    fam = ChainCNF(4, 1)
    for i in range(40):
        brute = [j for j in range(20) if i in fam.clause(j).vars]
        assert list(fam.clauses_of(i)) == brute
        assert list(fam.clauses_ending_at(i)) == [j for j in brute if fam.clause(j).vars[-1] == i]
    assert ChainCNF(4, 1, 20).num_variables == 61


def test_chain_to_finite():
    fin = to_finite(chain_instance(4, 1, 20))
    assert len(fin.events) == 20 and len(fin.variables) == 61
    assert all(w == Fraction(1, 4) for w in fin.weights.values())


# -- uniform CNFs --------------------------------------------------------------

def test_uniform_four():
    row = uniform_condition(4, Fraction(1, 10), neighbors=4)
    assert row.lhs == Fraction(1, 16) and row.rhs == Fraction(729, 10240) and row.passed


def test_uniform_three():
    row = uniform_condition(3, Fraction(1, 10))
    assert row.lhs == Fraction(1, 8) and row.rhs == Fraction(9, 80) and not row.passed
    row = uniform_condition(3, 0)
    assert row.rhs == Fraction(1, 2) * Fraction(1, 2) ** 2 == row.lhs and row.passed


def test_uniform_instance_construction():
    star = ClauseList([Clause.positive(range(4))] +
                      [Clause.positive([k] + [4 + 3 * k + t for t in range(3)]) for k in range(4)])
    inst = uniform_cnf_instance(star, 4)
    rep = inst.check(range(5))
    assert rep.passed and rep.row(0).rhs == Fraction(729, 10240)
    with pytest.raises(ConditionFailed):
        uniform_cnf_instance(star, 3)
    with pytest.raises(InstanceError):
        uniform_cnf_instance(star, 2)
    assert uniform_cnf_instance(ClauseList([Clause.positive(range(3))]), 3, 0).weight(0) == Fraction(1, 2)


def test_uniform_instance_rejects_wrong_size():
    inst = uniform_cnf_instance(ClauseList([Clause.positive(range(3))]), 4)
    with pytest.raises(InstanceError):
        inst.weight(0)


def test_uniform_slack_approaches_inverse_e():
    # the bracket (1 - 2^(2-m))^(2^(m-2)) exceeds 1/4 for m >= 4 and tends to 1/e
    vals = [(1 - 2.0 ** (2 - m)) ** (2 ** (m - 2)) for m in range(3, 31)]
    assert vals[0] == 0.25
    assert all(v > 0.25 for v in vals[1:])
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert abs(vals[20 - 3] - 1 / E) < 1e-5
    # so for large m the slack condition holds at eps = 1/10
    assert all(uniform_condition(m, Fraction(1, 10)).passed for m in range(4, 12))


# -- variable-size CNFs --------------------------------------------------------

def tail_lhs(alpha, eps, n):
    """Float oracle for (1-eps) 2^-beta (1 - 2^(-gamma n) / (1 - 2^-gamma))."""
    beta = (1 + alpha) / 2
    gamma = beta - alpha
    return (1 - eps) * 2 ** -beta * (1 - 2 ** (-gamma * n) / (1 - 2 ** -gamma))


def test_min_clause_size_half():
    assert min_clause_size(Fraction(1, 2), 0) == 22
    assert tail_lhs(0.5, 0, 22) >= 0.5 > tail_lhs(0.5, 0, 21)
    assert threshold_holds(Fraction(1, 2), 0, 22) and not threshold_holds(Fraction(1, 2), 0, 21)
    # the same bound written as 2^(-N/4) <= 0.0253...
    assert 2 ** (-22 / 4) <= 0.025314 < 2 ** (-21 / 4)


ALPHAS = [Fraction(k, 16) for k in range(1, 16)]
EPSILONS = [Fraction(0), Fraction(1, 100), Fraction(1, 10)]


@pytest.mark.parametrize("eps", EPSILONS, ids=str)
def test_min_clause_size_against_float_oracle(eps):
    for alpha in ALPHAS:
        a, e = float(alpha), float(eps)
        if (1 - e) * 2 ** -((1 + a) / 2) <= 0.5:
            with pytest.raises(ValueError):
                min_clause_size(alpha, eps)
            continue
        n = min_clause_size(alpha, eps)
        assert threshold_holds(alpha, eps, n) and not threshold_holds(alpha, eps, n - 1)
        if abs(tail_lhs(a, e, n) - 0.5) > 1e-9 and abs(tail_lhs(a, e, n - 1) - 0.5) > 1e-9:
            assert tail_lhs(a, e, n) >= 0.5 > tail_lhs(a, e, n - 1)


def test_min_clause_size_monotone():
    for eps in EPSILONS:
        sizes = []
        for alpha in ALPHAS:
            try:
                sizes.append(min_clause_size(alpha, eps))
            except ValueError:
                break
        assert sizes == sorted(sizes) and len(sizes) >= 8
    for alpha in ALPHAS[:8]:
        assert min_clause_size(alpha, 0) <= min_clause_size(alpha, Fraction(1, 10))


@pytest.mark.parametrize("k", [1, 22, 101, 1000])
def test_dyadic_power(k):
    # with beta = 3/4 the rounding is checkable exactly: x^4 <= 2^(-3k) < (x + ulp)^4
    x = dyadic_power(Fraction(3, 4), k)
    assert x.denominator & (x.denominator - 1) == 0
    ulp = Fraction(1, 2 ** (64 + floor(Fraction(3, 4) * k)))
    assert x ** 4 <= Fraction(1, 2 ** (3 * k)) < (x + ulp) ** 4


def test_varsize_empty_profile():
    params = CnfFamilyParams(Fraction(1, 2), Fraction(0), 22)
    assert check_varsize_condition(params, 22, {}).passed
    assert check_varsize_condition(CnfFamilyParams(Fraction(1, 2), Fraction(1, 10), 22), 60, {}).passed


def test_varsize_full_profile():
    params = CnfFamilyParams(Fraction(1, 2), Fraction(0), 22)
    k = 22
    profile = {m: floor(k * 2 ** (m / 2)) for m in range(22, 61)}
    rep = check_varsize_condition(params, k, profile)
    assert rep.passed
    # float oracle for the logarithms
    rhs = -0.75 * k * log(2) + sum(c * log1p(-2 ** (-0.75 * m)) for m, c in profile.items())
    assert rep.log_lhs == pytest.approx(-k * log(2))
    assert rep.log_rhs == pytest.approx(rhs)


def test_varsize_profile_too_large():
    params = CnfFamilyParams(Fraction(1, 2), Fraction(0), 22)
    with pytest.raises(InstanceError):
        check_varsize_condition(params, 22, {30: 22 * 2 ** 15 + 1})


def test_varsize_instance_rejects_short_clauses():
    fam = ClauseList([Clause.positive(range(5))])
    inst = varsize_cnf_instance(fam, CnfFamilyParams(Fraction(1, 2), Fraction(0), 22))
    with pytest.raises(InstanceError):
        inst.weight(0)


# -- trimming ------------------------------------------------------------------

def test_trim_example():
    assert trim_clause(Clause.positive([3, 7, 9, 12]), Fraction(1, 4)).vars == (7, 9, 12)


def test_trim_identity_for_small_delta():
    cs = [Clause.positive(range(k)) for k in range(1, 9)]
    assert list(trim_clauses(cs, Fraction(1, 9))) == cs


def test_trim_to_nothing():
    with pytest.raises(InstanceError):
        trim_clause(Clause.positive([1]), Fraction(1))
    with pytest.raises(ValueError):
        list(trim_clauses([Clause.positive([1])], Fraction(1)))


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.integers(0, 40), st.booleans(), min_size=1, max_size=12),
       st.fractions(0, Fraction(99, 100)), st.lists(st.integers(0, 1), min_size=41, max_size=41))
def test_trimming_sound(lits, delta, values):
    c = Clause(tuple(lits.items()))
    t = trim_clause(c, delta)
    assert set(t.literals) <= set(c.literals)
    assert len(t) == len(c) - floor(delta * len(c))
    assign = dict(enumerate(values))
    if t.satisfied(assign):
        assert c.satisfied(assign)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 200), st.fractions(Fraction(1, 50), Fraction(1, 2)))
def test_max_untrimmed_size(i, delta):
    top = max_untrimmed_size(i, delta)
    assert floor(delta * top) <= i < floor(delta * (top + 1))
