"""Fluid PS/SPS reference schedules, lag accounting and trace assertions.

The PS schedule runs every job's computation at rate ``C/T`` over its
window ``[r, d)``; the SPS schedule does the same for its suspension. Actual
service is read off a :class:`~rwsched.simulator.Trace` in whole ticks. All
quantities are exact ``Fraction`` values.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .io_placement import TransformedSystem, TransformedTask, job_phases
from .simulator import (ReleaseModel, Scheduler, SynchronousPeriodic, Trace,
                        release_time)
from .task_model import PhaseKind, TaskKind, TaskSystem, WrongTaskKind


def _overlap(a1, a2, b1, b2) -> int:
    return max(0, min(a2, b2) - max(a1, b1))


def _fluid(total, release: int, deadline: int, t1: int, t2: int) -> Fraction:
    if t2 < t1:
        raise ValueError(f"empty interval [{t1}, {t2})")
    return Fraction(total) * _overlap(release, deadline, t1, t2) / (deadline - release)


def _job_totals(task, j: int) -> tuple:
    if isinstance(task, TransformedTask):
        items = job_phases(task, j)
        c = sum(p.length for p in items if p.kind is PhaseKind.COMPUTE)
        s = sum(p.length for p in items if p.kind is PhaseKind.SUSPEND)
        return c, s
    return task.compute_total, task.suspension_total


def ps_allocation(task, job: int, t1: int, t2: int,
                  rel: Optional[ReleaseModel] = None) -> Fraction:
    """Computation of job ``job`` of ``task`` in ``[t1, t2)`` under PS."""
    rel = rel or SynchronousPeriodic()
    r = release_time(rel, task.id, int(task.period), job)
    c, _ = _job_totals(task, job)
    return _fluid(c, r, r + int(task.period), t1, t2)


def sps_allocation(task, job: int, t1: int, t2: int,
                   rel: Optional[ReleaseModel] = None) -> Fraction:
    """Suspension of job ``job`` of ``task`` in ``[t1, t2)`` under SPS.

    The rate is the job's own suspension total over ``T``; this is ``V``
    for every job except the first job of a transformed task, which carries
    only a read.
    """
    rel = rel or SynchronousPeriodic()
    r = release_time(rel, task.id, int(task.period), job)
    _, s = _job_totals(task, job)
    return _fluid(s, r, r + int(task.period), t1, t2)


# -- lags ----------------------------------------------------------------------

def job_lag(trace: Trace, job, t: int) -> Fraction:
    rec = trace.jobs[job]
    ps = _fluid(rec.compute_total, rec.release, rec.deadline, 0, t)
    return ps - trace.compute_done(job, t)


def job_slag(trace: Trace, job, t: int) -> Fraction:
    rec = trace.jobs[job]
    sps = _fluid(rec.suspend_total, rec.release, rec.deadline, 0, t)
    return sps - trace.suspend_done(job, t)


def task_lag(trace: Trace, task: int, t: int) -> Fraction:
    return sum((job_lag(trace, jid, t) for jid, rec in trace.jobs.items()
                if jid[0] == task and rec.release < t), Fraction(0))


def system_lag(t: int, trace: Trace) -> Fraction:
    """``LAG(t)`` as the sum of per-task lags."""
    return sum((task_lag(trace, i, t) for i in range(trace.system.n)), Fraction(0))


def lag(subject, t: int, trace: Trace) -> Fraction:
    """Lag of a job ``(task, index)``, a task id, or the system (``None``)."""
    if subject is None:
        return system_lag(t, trace)
    if isinstance(subject, tuple):
        return job_lag(trace, subject, t)
    return task_lag(trace, subject, t)


def slag(job, t: int, trace: Trace) -> Fraction:
    if isinstance(trace.system, TaskSystem) and TaskKind.WRITE_ONLY in trace.system.kinds:
        raise WrongTaskKind("slag is defined for read-write tasks only")
    return job_slag(trace, job, t)


class _LagIndex:
    """Fast ``LAG(t) = A(PS, 0, t) - A(S, 0, t)`` for repeated queries."""

    def __init__(self, trace: Trace):
        self.trace = trace
        per_task: dict = {}
        for rec in trace.jobs.values():
            per_task.setdefault(rec.task, []).append(rec)
        self.per_task = []
        for recs in per_task.values():
            recs.sort(key=lambda r: r.release)
            deadlines = [r.deadline for r in recs]
            cum = [Fraction(0)]
            for r in recs:
                cum.append(cum[-1] + r.compute_total)
            self.per_task.append((recs, deadlines, cum))

    def ps_total(self, t: int) -> Fraction:
        total = Fraction(0)
        for recs, deadlines, cum in self.per_task:
            k = bisect_left(deadlines, t + 1)  # jobs with deadline <= t are fully served
            total += cum[k]
            for rec in recs[k:]:
                if rec.release >= t:
                    break
                total += _fluid(rec.compute_total, rec.release, rec.deadline, 0, t)
        return total

    def lag(self, t: int) -> Fraction:
        return self.ps_total(t) - self.trace.total_compute(t)


def system_lag_direct(t: int, trace: Trace) -> Fraction:
    """``LAG(t)`` from system-wide PS and actual totals (independent of the
    per-task sum)."""
    return _LagIndex(trace).lag(t)


# -- assertions ----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    lemma: str
    tick: int
    subject: object
    detail: str


def assert_lemma1(trace: Trace) -> list[Violation]:
    """Busy intervals where system LAG increased.

    Meaningful only for systems with ``U_sum <= m``.
    """
    index = _LagIndex(trace)
    out = []
    for t1, t2 in trace.busy_intervals():
        before, after = index.lag(t1), index.lag(t2)
        if after > before:
            out.append(Violation("lemma1", t1, (t1, t2),
                                 f"LAG rose from {before} to {after} over busy [{t1}, {t2})"))
    return out


def _checkpoints(rec) -> list[int]:
    points = set()
    for s, e in rec.compute_intervals + rec.suspend_intervals:
        points.update((s, e))
    return sorted(p for p in points if p > rec.release)


def assert_lemma2(trace: Trace) -> list[Violation]:
    """Jobs of a write-only GEDF trace whose finished suspension exceeds
    ``delta`` times their finished computation at some instant.

    The ratio only grows while a job suspends, so checking the ends of its
    service intervals covers every tick.
    """
    system = trace.system
    if isinstance(system, TransformedSystem) or system.kinds != {TaskKind.WRITE_ONLY}:
        raise WrongTaskKind("lemma 2 applies to write-only systems")
    out = []
    for jid, rec in trace.jobs.items():
        delta = system.params[rec.task].delta
        for t in _checkpoints(rec):
            c = trace.compute_done(jid, t)
            s = trace.suspend_done(jid, t)
            if (c == 0 and s > 0) or (c > 0 and Fraction(s, c) > delta):
                out.append(Violation("lemma2", t, jid,
                                     f"S*={s} C*={c} delta={delta}"))
                break
    return out


def lemma4_in_scope(trace: Trace) -> list:
    """Missed jobs that were eligible for their whole window.

    A job held back by a tardy predecessor of the same task cannot suspend
    before it becomes eligible, so the lag argument does not cover it.
    """
    out = []
    for miss in trace.misses():
        rec = trace.jobs[(miss.task, miss.job)]
        if rec.eligible == rec.release:
            out.append(rec.id)
    return out


def assert_lemma4(trace: Trace) -> list[Violation]:
    """Missed jobs of a GEDF-R/W trace whose computation lag at the deadline
    is not positive."""
    if trace.scheduler is not Scheduler.GEDF_RW:
        raise ValueError("lemma 4 applies to GEDF-R/W traces")
    out = []
    for jid in lemma4_in_scope(trace):
        d = trace.jobs[jid].deadline
        value = job_lag(trace, jid, d)
        if value <= 0:
            out.append(Violation("lemma4", d, jid, f"lag at deadline is {value}"))
    return out
