"""Command-line entry point: ``rwsched <subcommand> ...``.

Exit status: 0 on success, 1 when the input fails validation, 2 on an
internal error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from fractions import Fraction

from . import casestudy, experiments, fluid, fuzzing
from .io_placement import transform, transformed_to_dict
from .sched_tests import TestName, run_tests
from .simulator import Scheduler, parse_release_model, simulate, write_trace_csv
from .task_model import (ParseError, TaskKind, dump_document, serialize_task_system,
                         system_from_dict)

log = logging.getLogger("rwsched")

# ValidationError, ParseError, WrongTaskKind, IncompatibleScheduler,
# HorizonTooSmall and CapTooSmall all derive from ValueError
USER_ERRORS = (ValueError, OSError)


def load_document(path):
    """Original or transformed system from a task-system file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from None
    system = system_from_dict(doc)
    if isinstance(doc, dict) and doc.get("transformed"):
        return transform(system)
    return system


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def cmd_analyze(args) -> int:
    system = load_document(args.system)
    base = getattr(system, "base", system)
    names = [TestName(x.strip()) for x in args.tests.split(",")] if args.tests else None
    print(f"n={base.n} m={base.m} U_sum={base.u_sum} V_sum={base.v_sum}")
    for verdict in run_tests(base, names):
        print(verdict.explain())
    return 0


def cmd_transform(args) -> int:
    system = load_document(args.system)
    ts = system if hasattr(system, "base") else transform(system)
    with _output(args.output) as fh:
        fh.write(dump_document(transformed_to_dict(ts)))
    return 0


def _check_lemmas(trace, out) -> int:
    system = getattr(trace.system, "base", trace.system)
    found = []
    if system.u_sum <= system.m:
        found += fluid.assert_lemma1(trace)
    if trace.scheduler is Scheduler.GEDF and system.kinds == {TaskKind.WRITE_ONLY} \
            and not hasattr(trace.system, "base"):
        found += fluid.assert_lemma2(trace)
    if trace.scheduler is Scheduler.GEDF_RW:
        found += fluid.assert_lemma4(trace)
    for v in found:
        print(f"violation {v.lemma} at tick {v.tick} subject={v.subject}: {v.detail}", file=out)
    print(f"lemma checks: {len(found)} violation(s)", file=out)
    return len(found)


def cmd_simulate(args) -> int:
    system = load_document(args.system)
    rel = parse_release_model(args.release, system)
    trace = simulate(system, Scheduler(args.sched), rel, args.horizon)
    with _output(args.output) as fh:
        write_trace_csv(trace, fh)
    misses = trace.misses()
    print(f"{len(trace.jobs)} jobs, {len(misses)} deadline miss(es)", file=sys.stderr)
    if args.check_lemmas:
        _check_lemmas(trace, sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    cfg = experiments.GenConfig(
        m=args.m, util_dist=args.util, susp_dist=args.susp, alpha=Fraction(args.alpha),
        systems_per_cap=args.per_cap, seed=args.seed)
    caps = [Fraction(c) for c in args.caps.split(",")] if args.caps else None
    points = experiments.run_schedulability_experiment(cfg, caps)
    with _output(args.output) as fh:
        experiments.write_curves_csv(points, cfg, fh)
    return 0


def cmd_casestudy(args) -> int:
    rows = casestudy.run_case_study(args.case, args.sched, jobs=args.jobs)
    with _output(args.output) as fh:
        casestudy.write_responses_csv(rows, args.case, args.sched, fh)
    return 0


def cmd_fuzz(args) -> int:
    report = fuzzing.soundness_fuzz(args.kind, args.count, seed=args.seed)
    print(f"{report.kind}: generated={report.generated} accepted={report.accepted} "
          f"ticks={report.simulated_ticks} counterexamples={len(report.counterexamples)}")
    for system, miss in report.counterexamples:
        print(f"  {miss} in {serialize_task_system(system).strip()}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwsched", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run closed-form schedulability tests")
    a.add_argument("system")
    a.add_argument("--tests", help="comma list of density,oblivious,writeonly,rw")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("transform", help="apply the I/O placement policy")
    t.add_argument("system")
    t.add_argument("-o", "--output", default="-")
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("simulate", help="simulate GEDF or GEDF-R/W and emit a trace CSV")
    s.add_argument("system")
    s.add_argument("--sched", choices=[x.value for x in Scheduler], default="gedf")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--release", default="sync",
                   help="sync | offsets:o1,o2,... | sporadic:SEED[:MAXEXTRA]")
    s.add_argument("--check-lemmas", action="store_true")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="acceptance-ratio curves for generated systems")
    e.add_argument("--alpha", choices=["0.9", "0.5", "0.2"], default="0.9")
    e.add_argument("--util", choices=[x.value for x in experiments.UtilDist], default="light")
    e.add_argument("--susp", choices=[x.value for x in experiments.SuspDist], default="short")
    e.add_argument("--m", type=int, default=4)
    e.add_argument("--per-cap", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--caps", help="comma list of caps (default 0.1 .. m step 0.1)")
    e.add_argument("-o", "--output", default="-")
    e.set_defaults(func=cmd_experiment)

    c = sub.add_parser("casestudy", help="simulated matrix-calculation case study")
    c.add_argument("--case", choices=[x.value for x in casestudy.Case], required=True)
    c.add_argument("--sched", choices=[x.value for x in Scheduler], required=True)
    c.add_argument("--jobs", type=int, default=400)
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(func=cmd_casestudy)

    f = sub.add_parser("fuzz", help="simulate random accepted systems looking for misses")
    f.add_argument("--kind", choices=["write-only", "read-write"], required=True)
    f.add_argument("--count", type=int, default=200)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        log.exception("internal error")
        return 2


if __name__ == "__main__":
    sys.exit(main())
