"""Line-oriented text formats for finite instances and execution logs.

Instance file::

    # comment
    vars 2
    var 0 2 1/2 1/2
    var 1 2 1/2 1/2
    event 0 vars 0 1 x 1/4
    forbid 0 0
    epsilon 1/10

Log file::

    init 0=1 1=0
    resample 1 0 before 0,0 after 1,0 bits 2
"""

from __future__ import annotations

from fractions import Fraction

from .core import Event, FiniteInstance, InstanceError, Variable
from .finite import ExecutionLog, ResampleRecord


class ParseError(InstanceError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _fraction(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(lineno, f"bad rational {token!r}") from None


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(lineno, f"bad integer {token!r}") from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_instance(text: str) -> FiniteInstance:
    count = None
    variables = []
    events: list[tuple[int, int, list[int], Fraction, list[tuple[int, ...]]]] = []
    epsilon = None
    for lineno, tok in _lines(text):
        head = tok[0]
        if head == "vars":
            if count is not None or len(tok) != 2:
                raise ParseError(lineno, "expected a single 'vars <count>' header")
            count = _int(tok[1], lineno)
        elif head == "var":
            if len(tok) < 3:
                raise ParseError(lineno, "expected 'var <i> <n> <p_0> ...'")
            i, n = _int(tok[1], lineno), _int(tok[2], lineno)
            probs = [_fraction(t, lineno) for t in tok[3:]]
            if len(probs) != n:
                raise ParseError(lineno, f"variable {i} lists {len(probs)} probabilities, expected {n}")
            try:
                variables.append(Variable(i, tuple(probs)))
            except InstanceError as exc:
                raise ParseError(lineno, str(exc)) from None
        elif head == "event":
            try:
                at_vars, at_x = tok.index("vars"), tok.index("x")
            except ValueError:
                raise ParseError(lineno, "expected 'event <id> vars <i_1> ... x <num/den>'") from None
            if at_vars != 2 or at_x != len(tok) - 2:
                raise ParseError(lineno, "expected 'event <id> vars <i_1> ... x <num/den>'")
            vs = [_int(t, lineno) for t in tok[3:at_x]]
            events.append((lineno, _int(tok[1], lineno), vs, _fraction(tok[-1], lineno), []))
        elif head == "forbid":
            if not events:
                raise ParseError(lineno, "'forbid' before any event")
            t = tuple(_int(v, lineno) for v in tok[1:])
            if len(t) != len(events[-1][2]):
                raise ParseError(lineno, f"tuple of length {len(t)} for an event on "
                                         f"{len(events[-1][2])} variables")
            events[-1][4].append(t)
        elif head == "epsilon":
            if len(tok) != 2:
                raise ParseError(lineno, "expected 'epsilon <num/den>'")
            epsilon = _fraction(tok[1], lineno)
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if count is None:
        raise ParseError(0, "missing 'vars <count>' header")
    if len(variables) != count:
        raise ParseError(0, f"header announces {count} variables, found {len(variables)}")
    built = []
    for lineno, eid, vs, _, forbidden in events:
        if len(set(forbidden)) != len(forbidden):
            raise ParseError(lineno, f"event {eid} repeats a forbidden tuple")
        try:
            built.append(Event(eid, tuple(vs), frozenset(forbidden)))
        except InstanceError as exc:
            raise ParseError(lineno, str(exc)) from None
    weights = {eid: x for _, eid, _, x, _ in events}
    try:
        return FiniteInstance(tuple(variables), tuple(built), weights,
                              epsilon if epsilon is not None else Fraction(0))
    except InstanceError as exc:
        raise ParseError(0, str(exc)) from None


def format_instance(instance: FiniteInstance) -> str:
    out = [f"vars {len(instance.variables)}"]
    for spec in instance.variables:
        out.append(f"var {spec.index} {spec.range_size} " + " ".join(map(str, spec.distribution)))
    for e in instance.events:
        out.append(f"event {e.id} vars {' '.join(map(str, e.vars))} x {instance.weights[e.id]}")
        for t in sorted(e.forbidden):
            out.append("forbid " + " ".join(map(str, t)))
    out.append(f"epsilon {instance.epsilon}")
    return "\n".join(out) + "\n"


def _tuple(t) -> str:
    return ",".join(map(str, t))


def format_log(log: ExecutionLog) -> str:
    out = ["init " + " ".join(f"{i}={v}" for i, v in sorted(log.initial_values.items()))]
    for r in log.records:
        out.append(f"resample {r.step} {r.event} before {_tuple(r.before)} "
                   f"after {_tuple(r.after)} bits {r.bits}")
    return "\n".join(out) + "\n"


def parse_log(text: str, instance: FiniteInstance | None = None) -> ExecutionLog:
    """Read a log; with ``instance`` the final values are recomputed by replay."""
    initial: dict[int, int] = {}
    records = []
    for lineno, tok in _lines(text):
        if tok[0] == "init":
            for item in tok[1:]:
                k, _, v = item.partition("=")
                initial[_int(k, lineno)] = _int(v, lineno)
        elif tok[0] == "resample":
            if len(tok) != 9 or tok[3] != "before" or tok[5] != "after" or tok[7] != "bits":
                raise ParseError(lineno, "expected 'resample <step> <event> before <t> after <t> bits <n>'")
            before = tuple(_int(v, lineno) for v in tok[4].split(","))
            after = tuple(_int(v, lineno) for v in tok[6].split(","))
            records.append(ResampleRecord(_int(tok[1], lineno), _int(tok[2], lineno),
                                          before, after, _int(tok[8], lineno)))
        else:
            raise ParseError(lineno, f"unknown log line {tok[0]!r}")
    for k, rec in enumerate(records, 1):
        if rec.step != k:
            raise ParseError(0, f"records out of order at step {rec.step}")
    if instance is None:
        return ExecutionLog(tuple(records), initial, {})
    event_vars = {e.id: e.vars for e in instance.events}
    log = ExecutionLog(tuple(records), initial, {}, event_vars)
    return ExecutionLog(log.records, initial, log.replay(), event_vars)
