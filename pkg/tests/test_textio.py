from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from computable_lll import RandomTape, solve_finite
from computable_lll.textio import (ParseError, format_instance, format_log, parse_instance,
                                   parse_log)

from conftest import finite_instances

DATA = Path(__file__).parent / "data"


def test_parse_star():
    inst = parse_instance((DATA / "star4.txt").read_text())
    assert len(inst.variables) == 16 and len(inst.events) == 5
    assert inst.epsilon == Fraction(1, 10)
    assert inst.weights[0] == Fraction(1, 4)


def test_parse_empty():
    inst = parse_instance((DATA / "empty.txt").read_text())
    assert inst.variables == () and inst.events == ()


@pytest.mark.parametrize("text,line", [
    ("vars 1\nvar 0 2 1/2\n", 2),
    ("vars 1\nvar 0 2 1/2 1/2\nevent 0 vars 0 x 1/2\nforbid 0 0\n", 4),
    ("vars 1\nvar 0 2 1/2 1/2\nforbid 0\n", 3),
    ("vars 1\nvar 0 2 1/2 x\n", 2),
    ("vars 1\nbogus\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_instance(text)
    assert exc.value.lineno == line


def test_parse_missing_header():
    with pytest.raises(ParseError):
        parse_instance("var 0 2 1/2 1/2\n")


@settings(max_examples=100, deadline=None)
@given(finite_instances())
def test_instance_roundtrip(inst):
    assert parse_instance(format_instance(inst)) == inst


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_log_roundtrip(seed):
    inst = parse_instance((DATA / "chain20.txt").read_text())
    values, log = solve_finite(inst, RandomTape(seed))
    back = parse_log(format_log(log), inst)
    assert back.records == log.records
    assert back.initial_values == log.initial_values
    assert back.final_values == values


def test_log_out_of_order():
    with pytest.raises(ParseError):
        parse_log("init 0=0\nresample 2 0 before 0 after 1 bits 1\n")
