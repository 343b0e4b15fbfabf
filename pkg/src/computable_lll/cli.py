"""Command-line interface.

Exit codes: 0 success, 1 condition failure, 2 budget exhausted,
3 extraction threshold failure, 64 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .cnf import chain_instance
from .core import BudgetExhausted, ConditionFailed, Event, InstanceError, check_lll
from .finite import resample_bound, resample_stats, solve_finite
from .infinite import (EffectiveInstance, ExtractionError, StagedRun, changes_after,
                       extract_computable_prefix, order_events, run_stages,
                       stabilization_bound, verify_prefix)
from .patterns import (avoid_patterns_2d, avoid_substrings, explicit_patterns,
                       explicit_words, periodic, zero_rectangles, zero_runs)
from .tape import RandomTape
from .textio import ParseError, format_log, parse_instance

EXIT_OK, EXIT_CONDITION, EXIT_BUDGET, EXIT_EXTRACT, EXIT_USAGE = 0, 1, 2, 3, 64

STATS_COLUMNS = ("kind", "id", "runs", "mean", "half_width_99", "bound", "within")


@dataclass
class RunConfig:
    seed: int = 0
    max_steps: int | None = None
    replicas: int = 10_000
    mode: str = "exact"
    margin: Fraction = Fraction(1, 20)
    output: str | None = None

    def header(self) -> str:
        return "# " + " ".join(f"{k}={v}" for k, v in asdict(self).items())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load(path: str):
    return parse_instance(Path(path).read_text())


def _family(args) -> EffectiveInstance:
    eps = Fraction(args.epsilon)
    if args.instance:
        return EffectiveInstance.from_finite(_load(args.instance))
    if args.family == "chain":
        return chain_instance(args.width, args.overlap, args.clauses, epsilon=eps)
    if args.family == "none":
        return EffectiveInstance.from_events([], {}, eps, name="no events")
    if args.family == "single-bit":
        return EffectiveInstance.from_events([Event(0, (0,), frozenset({(1,)}))],
                                             {0: Fraction(1, 2)}, eps, name="single bit")
    raise InstanceError(f"unknown family {args.family!r}")


def _add_family_flags(p):
    p.add_argument("--instance", help="finite instance file")
    p.add_argument("--family", choices=["chain", "none", "single-bit"], default="chain")
    p.add_argument("--width", type=int, default=4, help="chain clause width")
    p.add_argument("--overlap", type=int, default=1, help="variables shared by chain neighbours")
    p.add_argument("--clauses", type=int, default=None, help="chain length (default infinite)")
    p.add_argument("--epsilon", default="1/10")


def cmd_check(args, out) -> int:
    inst = _load(args.file)
    report = check_lll(inst, with_slack=args.slack)
    print(f"# with_slack={args.slack} epsilon={inst.epsilon}", file=out)
    print("event\tlhs\trhs\tslack\tpass", file=out)
    for r in report.rows:
        print(f"{r.event}\t{r.lhs}\t{r.rhs}\t{r.slack}\t{'yes' if r.passed else 'NO'}", file=out)
    print(f"overall {'pass' if report.passed else 'FAIL'}", file=out)
    return EXIT_OK if report.passed else EXIT_CONDITION


def cmd_solve(args, out) -> int:
    cfg = RunConfig(seed=args.seed, max_steps=args.max_steps, output=args.log)
    inst = _load(args.file)
    print(cfg.header(), file=out)
    try:
        values, log = solve_finite(inst, RandomTape(args.seed), max_steps=args.max_steps)
    except ConditionFailed as exc:
        print(f"condition fails: {exc}", file=out)
        return EXIT_CONDITION
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=out)
        if args.log and exc.log is not None:
            Path(args.log).write_text(format_log(exc.log))
        return EXIT_BUDGET
    if args.log:
        Path(args.log).write_text(format_log(log))
    print("assignment " + " ".join(f"{i}={v}" for i, v in sorted(values.items())), file=out)
    print(f"resamples {len(log)}", file=out)
    return EXIT_OK


def cmd_stages(args, out) -> int:
    inst = _family(args)
    print(RunConfig(seed=args.seed).header(), file=out)
    try:
        snaps = run_stages(inst, RandomTape(args.seed), args.upto)
    except BudgetExhausted as exc:
        print(f"budget exhausted at stage {exc.stage}", file=out)
        return EXIT_BUDGET
    for s in snaps:
        print(f"prefix {s.stage} " + " ".join(map(str, s.values)), file=out)
    return EXIT_OK


def cmd_extract(args, out) -> int:
    inst = _family(args)
    cfg = RunConfig(seed=args.seed, replicas=args.replicas, mode=args.mode,
                    margin=Fraction(args.margin))
    print(cfg.header(), file=out)
    mode = "mc" if args.mode == "mc" else "exact"
    kw = dict(depth=args.depth) if mode == "exact" else dict(
        replicas=args.replicas, seed=args.seed, margin=cfg.margin)
    try:
        prefix = extract_computable_prefix(inst, args.length - 1, mode, **kw)
    except ExtractionError as exc:
        print(f"extraction failed at position {exc.position}: masses "
              + " ".join(f"{v}:{w}" for v, w in exc.masses.items()), file=out)
        return EXIT_EXTRACT
    print(f"prefix {args.length - 1} " + " ".join(map(str, prefix.values)), file=out)
    report = verify_prefix(inst, prefix.values)
    print(f"verified {len(report.checked)} events, {len(report.violations)} violated; "
          f"mode={prefix.mode} confidence={prefix.confidence}", file=out)
    return EXIT_OK if report.ok else EXIT_CONDITION


def _words(spec: str, alpha: Fraction):
    if spec == "zero-runs":
        return zero_runs(alpha)
    if spec == "periodic":
        return periodic(2, alpha)
    words = [ln.split("#")[0].strip() for ln in Path(spec).read_text().splitlines()]
    return explicit_words([w for w in words if w], alpha)


def _patterns(spec: str, alpha: Fraction):
    if spec == "zero-rectangles":
        return zero_rectangles(alpha)
    lines = [ln.split("#")[0].strip() for ln in Path(spec).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    pats = []
    k = 0
    while k < len(lines):
        tok = lines[k].split()
        if tok[0] != "rect" or len(tok) != 3:
            raise ParseError(k + 1, "expected 'rect <h> <w>'")
        h, w = int(tok[1]), int(tok[2])
        rows = [tuple(int(c) for c in lines[k + 1 + r].replace(" ", "")) for r in range(h)]
        if any(len(r) != w for r in rows):
            raise ParseError(k + 1, f"pattern rows must have width {w}")
        pats.append(tuple(rows))
        k += h + 1
    return explicit_patterns(pats, alpha)


def cmd_avoid(args, out) -> int:
    alpha = Fraction(args.alpha)
    print(RunConfig(seed=args.seed, mode=args.mode).header(), file=out)
    if args.dim == "1d":
        F = _words(args.forbidden or "zero-runs", alpha)
        res = avoid_substrings(F, args.length, args.mode, args.seed)
        print(f"N {res.N}", file=out)
        print(f"word {res.word}", file=out)
    else:
        F2 = _patterns(args.forbidden or "zero-rectangles", alpha)
        res = avoid_patterns_2d(F2, args.radius, args.mode, args.seed)
        print(f"N {res.N}", file=out)
        for row in reversed(res.block):
            print("".join(map(str, row)), file=out)
    print(f"verification {'ok' if res.ok else 'FAILED'} ({len(res.violations)} forbidden placements)",
          file=out)
    return EXIT_OK if res.ok else EXIT_CONDITION


def cmd_stats(args, out) -> int:
    finite = _load(args.instance)
    inst = EffectiveInstance.from_finite(finite)
    seeds = [args.seed_base + r for r in range(args.runs)]
    print(RunConfig(seed=args.seed_base, replicas=args.runs).header(), file=out)
    print(",".join(STATS_COLUMNS), file=out)

    logs = [solve_finite(finite, RandomTape(s), check=False)[1] for s in seeds]
    stats = resample_stats(logs, [e.id for e in finite.events])
    for eid, st in stats.items():
        bound = resample_bound(finite.weights[eid])
        print(f"event,{eid},{st.runs},{st.mean:.6f},{st.half_width:.6f},{float(bound):.6f},"
              f"{int(st.mean <= bound + st.half_width)}", file=out)

    last = inst.num_variables - 1
    staged = []
    stage_steps = [[] for _ in range(last + 1)]
    for s in seeds:
        run = StagedRun(inst, RandomTape(s))
        prev = 0
        for snap in run.run_until(last):
            stage_steps[snap.stage].append(snap.steps_elapsed - prev)
            prev = snap.steps_elapsed
        staged.append(run.log())
    for i, xs in enumerate(stage_steps):
        n = len(xs)
        mean = sum(xs) / n
        var = sum((x - mean) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
        hw = 2.5758293035489 * (var / n) ** 0.5
        bound = sum((resample_bound(inst.weight(j)) for j in order_events(inst, i)), Fraction(0))
        print(f"stage,{i},{n},{mean:.6f},{hw:.6f},{float(bound):.6f},{int(mean <= bound + hw)}",
              file=out)

    if inst.epsilon > 0:
        eps = Fraction(args.stab_eps)
        for i in range(last + 1):
            b = stabilization_bound(inst, i, eps, check=False)
            freq = sum(changes_after(log, i, b.steps) for log in staged) / len(staged)
            sigma = (float(eps) * (1 - float(eps)) / len(staged)) ** 0.5
            print(f"stabilization,{i},{len(staged)},{freq:.6f},{3 * sigma:.6f},{float(eps):.6f},"
                  f"{int(freq <= eps + 3 * sigma)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="computable-lll", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="evaluate the local lemma condition")
    c.add_argument("file")
    c.add_argument("--slack", action=argparse.BooleanOptionalAction, default=True)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", help="finite resampling solver")
    s.add_argument("file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--log", help="write the execution log here")
    s.set_defaults(func=cmd_solve)

    st = sub.add_parser("stages", help="stage snapshots of the staged algorithm")
    _add_family_flags(st)
    st.add_argument("--upto", type=int, required=True)
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=cmd_stages)

    e = sub.add_parser("extract", help="extract a computable prefix")
    _add_family_flags(e)
    e.add_argument("--length", type=int, required=True, help="prefix length s + 1")
    e.add_argument("--mode", choices=["exact", "mc"], default="exact")
    e.add_argument("--replicas", type=int, default=10_000)
    e.add_argument("--margin", default="1/20")
    e.add_argument("--depth", type=int, default=None)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_extract)

    a = sub.add_parser("avoid", help="pattern-avoiding words and blocks")
    a.add_argument("--dim", "--family", dest="dim", choices=["1d", "2d"], default="1d")
    a.add_argument("--forbidden", help="file or builtin (zero-runs, periodic, zero-rectangles)")
    a.add_argument("--alpha", default="1/4", help="sparsity of the forbidden set")
    a.add_argument("--length", type=int, default=64)
    a.add_argument("--radius", type=int, default=4)
    a.add_argument("--mode", choices=["run", "mc"], default="run")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_avoid)

    t = sub.add_parser("stats", help="CSV of resample statistics")
    t.add_argument("--instance", required=True)
    t.add_argument("--runs", type=int, default=1000)
    t.add_argument("--seed-base", type=int, default=0)
    t.add_argument("--stab-eps", default="1/10")
    t.set_defaults(func=cmd_stats)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, InstanceError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
