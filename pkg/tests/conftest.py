from fractions import Fraction
from itertools import product

from hypothesis import strategies as st

from computable_lll import Event, FiniteInstance, Variable

DISTS = [
    (Fraction(1),),
    (Fraction(1, 2), Fraction(1, 2)),
    (Fraction(1, 4), Fraction(3, 4)),
    (Fraction(1, 3), Fraction(2, 3)),
    (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)),
    (Fraction(1, 4),) * 4,
]


def bits(n):
    return tuple(Variable.uniform(i, 2) for i in range(n))


def clause_event(id, vs, falsifying=None):
    """Event for a clause over uniform bits; all-positive by default."""
    return Event(id, tuple(vs), frozenset([falsifying or (0,) * len(vs)]))


def instance(events, n, x=Fraction(1, 4), epsilon=0, variables=None):
    return FiniteInstance(variables or bits(n), tuple(events),
                          {e.id: Fraction(x) for e in events}, Fraction(epsilon))


@st.composite
def finite_instances(draw, max_vars=4, max_events=4, dyadic=False):
    """Small random instances; no event is certain."""
    pool = [d for d in DISTS if not dyadic or all(p.denominator & (p.denominator - 1) == 0 for p in d)]
    n = draw(st.integers(1, max_vars))
    variables = tuple(Variable(i, draw(st.sampled_from(pool))) for i in range(n))
    events = []
    for eid in range(draw(st.integers(0, max_events))):
        vs = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True))
        vs = tuple(sorted(vs))
        cube = list(product(*(range(variables[v].range_size) for v in vs)))
        if len(cube) < 2:
            continue
        forbidden = draw(st.lists(st.sampled_from(cube), min_size=1,
                                  max_size=len(cube) - 1, unique=True))
        events.append(Event(eid, vs, frozenset(forbidden)))
    weights = {e.id: Fraction(draw(st.integers(1, 15)), 16) for e in events}
    eps = draw(st.sampled_from([Fraction(0), Fraction(1, 10), Fraction(1, 2)]))
    return FiniteInstance(variables, tuple(events), weights, eps)
