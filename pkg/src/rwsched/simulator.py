"""Discrete-time GEDF and GEDF-R/W simulation on ``m`` identical processors.

Time is measured in integer ticks and every scheduling decision is taken at a
tick boundary. The engine is event driven: between two events (a release or
some phase counter reaching zero) no job changes status, so the per-tick
decision is constant and is applied to the whole stretch at once. The
resulting :class:`Trace` is stored as run-length segments but answers
per-tick queries.

Jobs of one task execute in release order: a job becomes eligible once it is
released and its predecessor has completed. Suspensions of different jobs
proceed concurrently without limit.
"""

from __future__ import annotations

import bisect
import csv
import enum
import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .io_placement import TransformedSystem, job_phases
from .task_model import PhaseKind, TaskSystem

TRACE_SCHEMA = "rwsched-trace/1"

JobId = tuple  # (task id, job index)


class Scheduler(enum.Enum):
    GEDF = "gedf"
    GEDF_RW = "gedf-rw"


class HorizonTooSmall(ValueError):
    pass


class IncompatibleScheduler(ValueError):
    pass


# -- release models ------------------------------------------------------------

@dataclass(frozen=True)
class SynchronousPeriodic:
    """Every task releases at 0, T, 2T, ..."""

    def release_times(self, task_id: int, period: int, horizon: int) -> list[int]:
        return list(range(0, horizon, period))


@dataclass(frozen=True)
class PeriodicWithOffsets:
    offsets: tuple

    def release_times(self, task_id: int, period: int, horizon: int) -> list[int]:
        return list(range(self.offsets[task_id], horizon, period))


@dataclass(frozen=True)
class SporadicSeeded:
    """Inter-release gaps ``T_i + U{0..max_extra_i}``, first release at 0.

    ``max_extra`` is a single integer or one value per task. Each task draws
    from its own stream, so adding tasks does not perturb existing ones.
    """

    seed: int
    max_extra: Union[int, tuple] = 0

    def _extra(self, task_id: int) -> int:
        if isinstance(self.max_extra, int):
            return self.max_extra
        return self.max_extra[task_id]

    def release_times(self, task_id: int, period: int, horizon: int) -> list[int]:
        rng = random.Random(f"{self.seed}:{task_id}")
        extra = self._extra(task_id)
        out, r = [], 0
        while r < horizon:
            out.append(r)
            r += period + rng.randint(0, extra)
        return out


ReleaseModel = Union[SynchronousPeriodic, PeriodicWithOffsets, SporadicSeeded]


def parse_release_model(text: str, system=None) -> ReleaseModel:
    """``sync``, ``offsets:o1,o2,...`` or ``sporadic:SEED[:MAXEXTRA]``."""
    head, _, rest = text.partition(":")
    if head == "sync":
        return SynchronousPeriodic()
    if head == "offsets":
        if rest:
            offsets = tuple(int(x) for x in rest.split(","))
        else:
            offsets = tuple(0 for _ in range(system.n if system is not None else 0))
        return PeriodicWithOffsets(offsets)
    if head == "sporadic":
        seed, _, extra = rest.partition(":")
        if not seed:
            raise ValueError("sporadic release model needs a seed: sporadic:SEED")
        if extra:
            max_extra = int(extra)
        elif system is not None:
            max_extra = tuple(int(t.period) // 2 for t in system.tasks)
        else:
            max_extra = 0
        return SporadicSeeded(int(seed), max_extra)
    raise ValueError(f"unknown release model {text!r}")


def release_time(rel: ReleaseModel, task_id: int, period: int, j: int) -> int:
    """Release tick of job ``j`` (1-based) of a task."""
    if isinstance(rel, SynchronousPeriodic):
        return (j - 1) * period
    if isinstance(rel, PeriodicWithOffsets):
        return rel.offsets[task_id] + (j - 1) * period
    horizon = j * (period + max(rel._extra(task_id), 0)) + 1
    return rel.release_times(task_id, period, horizon)[j - 1]


# -- job state -----------------------------------------------------------------

class JobState:
    """Mutable per-job progress used inside the simulation loop.

    ``items`` is a list of ``[PhaseKind, remaining ticks]``. With
    ``flexible=False`` the items are executed strictly in order; with
    ``flexible=True`` computation and suspension may interleave freely and
    suspension items are drained first to last.
    """

    __slots__ = ("task", "index", "release", "deadline", "items", "flexible",
                 "compute_left", "suspend_left")

    def __init__(self, task, index, release, deadline, items, flexible=False):
        self.task = task
        self.index = index
        self.release = release
        self.deadline = deadline
        self.items = [[k, r] for k, r in items if r > 0]
        self.flexible = flexible
        self.compute_left = sum(r for k, r in self.items if k is PhaseKind.COMPUTE)
        self.suspend_left = sum(r for k, r in self.items if k is PhaseKind.SUSPEND)

    @property
    def id(self) -> JobId:
        return (self.task, self.index)

    @property
    def key(self):
        return (self.deadline, self.task, self.index)

    @property
    def pending(self) -> bool:
        return self.compute_left > 0 or self.suspend_left > 0

    @property
    def comp_pending(self) -> bool:
        return self.compute_left > 0

    @property
    def sus_pending(self) -> bool:
        return self.suspend_left > 0

    @property
    def current(self):
        return self.items[0][0] if self.items else None

    @property
    def comp_available(self) -> bool:
        if self.flexible:
            return self.compute_left > 0
        return self.current is PhaseKind.COMPUTE

    @property
    def in_suspension(self) -> bool:
        """Ordered model only: the current phase is a suspension."""
        return not self.flexible and self.current is PhaseKind.SUSPEND

    def headroom(self, kind: PhaseKind) -> int:
        """Ticks of ``kind`` that can run before this job's status changes."""
        if self.flexible:
            return self.compute_left if kind is PhaseKind.COMPUTE else self.suspend_left
        return self.items[0][1]

    def advance(self, kind: PhaseKind, ticks: int):
        if kind is PhaseKind.COMPUTE:
            self.compute_left -= ticks
        else:
            self.suspend_left -= ticks
        if not self.flexible:
            head = self.items[0]
            assert head[0] is kind and head[1] >= ticks
            head[1] -= ticks
            if head[1] == 0:
                self.items.pop(0)
            return
        for item in self.items:
            if ticks == 0:
                break
            if item[0] is kind and item[1] > 0:
                step = min(item[1], ticks)
                item[1] -= step
                ticks -= step
        self.items = [it for it in self.items if it[1] > 0]

    def __repr__(self):
        return (f"JobState(task={self.task}, index={self.index}, d={self.deadline}, "
                f"c={self.compute_left}, s={self.suspend_left})")


def gedf_pick(jobs: Iterable[JobState], m: int) -> list[JobState]:
    """The at most ``m`` comp-available jobs with the smallest
    ``(deadline, task id, job index)``."""
    return heapq.nsmallest(m, (j for j in jobs if j.comp_available), key=lambda j: j.key)


def gedf_rw_pick(jobs: Iterable[JobState], m: int) -> tuple[list[JobState], list[JobState]]:
    """Computation set and suspension set under GEDF-R/W.

    The ``m`` earliest-deadline comp-pending jobs compute; every other job
    with suspension left suspends (comp-preempted jobs and jobs whose
    computation is already complete).
    """
    jobs = list(jobs)
    picked = heapq.nsmallest(m, (j for j in jobs if j.comp_pending), key=lambda j: j.key)
    chosen = {id(j) for j in picked}
    suspending = [j for j in jobs if id(j) not in chosen and j.sus_pending]
    return picked, suspending


# -- trace ---------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Ticks ``[start, end)`` with a constant decision."""

    start: int
    end: int
    compute: tuple  # ((processor, JobId), ...) sorted by processor
    suspend: tuple  # (JobId, ...) sorted


@dataclass
class JobRecord:
    task: int
    index: int
    release: int
    deadline: int
    compute_total: int
    suspend_total: int
    eligible: Optional[int] = None  # released and predecessor complete
    completion: Optional[int] = None
    compute_intervals: list = field(default_factory=list)
    suspend_intervals: list = field(default_factory=list)

    @property
    def id(self) -> JobId:
        return (self.task, self.index)

    @property
    def response_time(self) -> Optional[int]:
        return None if self.completion is None else self.completion - self.release

    def missed(self, horizon: int) -> bool:
        if self.deadline > horizon:
            return False
        return self.completion is None or self.completion > self.deadline


@dataclass(frozen=True)
class Miss:
    task: int
    job: int
    deadline: int
    tardiness: int  # so far, capped at the horizon for incomplete jobs


def _done_by(intervals: list, t: int) -> int:
    total = 0
    for s, e in intervals:
        if s >= t:
            break
        total += min(e, t) - s
    return total


def _add_interval(intervals: list, s: int, e: int):
    if intervals and intervals[-1][1] == s:
        intervals[-1] = (intervals[-1][0], e)
    else:
        intervals.append((s, e))


class Trace:
    """Immutable record of one simulated schedule."""

    def __init__(self, system, scheduler: Scheduler, horizon: int,
                 segments: list, jobs: dict):
        self.system = system
        self.scheduler = scheduler
        self.horizon = horizon
        self.m = system.m
        self.segments = tuple(segments)
        self.jobs = jobs
        self._starts = [s.start for s in self.segments]
        cum = [0]
        for s in self.segments:
            cum.append(cum[-1] + len(s.compute) * (s.end - s.start))
        self._cum_compute = cum

    # per-job accounting
    def compute_done(self, job: JobId, t: int) -> int:
        """Computation ticks of ``job`` in ``[0, t)``."""
        return _done_by(self.jobs[job].compute_intervals, t)

    def suspend_done(self, job: JobId, t: int) -> int:
        return _done_by(self.jobs[job].suspend_intervals, t)

    def total_compute(self, t: int) -> int:
        """Computation ticks of all jobs in ``[0, t)``."""
        i = bisect.bisect_right(self._starts, t) - 1
        if i < 0:
            return 0
        seg = self.segments[i]
        partial = len(seg.compute) * (min(seg.end, t) - seg.start)
        return self._cum_compute[i] + partial

    def segment_at(self, t: int) -> Optional[Segment]:
        i = bisect.bisect_right(self._starts, t) - 1
        if i >= 0 and self.segments[i].end > t:
            return self.segments[i]
        return None

    def assignments_at(self, t: int) -> tuple:
        seg = self.segment_at(t)
        return seg.compute if seg else ()

    def suspending_at(self, t: int) -> tuple:
        seg = self.segment_at(t)
        return seg.suspend if seg else ()

    def busy_intervals(self) -> list[tuple[int, int]]:
        """Maximal intervals in which all ``m`` processors compute every tick."""
        out = []
        for seg in self.segments:
            if len(seg.compute) != self.m:
                continue
            if out and out[-1][1] == seg.start:
                out[-1] = (out[-1][0], seg.end)
            else:
                out.append((seg.start, seg.end))
        return out

    def releases(self) -> list[tuple[int, JobId]]:
        return sorted((r.release, r.id) for r in self.jobs.values())

    def misses(self) -> list[Miss]:
        out = []
        for rec in self.jobs.values():
            if rec.missed(self.horizon):
                end = rec.completion if rec.completion is not None else self.horizon
                out.append(Miss(rec.task, rec.index, rec.deadline, end - rec.deadline))
        out.sort(key=lambda x: (x.deadline, x.task, x.job))
        return out

    def iter_ticks(self) -> Iterator[tuple[int, tuple, tuple]]:
        """``(tick, compute assignments, suspending jobs)`` for every tick."""
        k = 0
        for t in range(self.horizon):
            while k < len(self.segments) and self.segments[k].end <= t:
                k += 1
            if k < len(self.segments) and self.segments[k].start <= t:
                seg = self.segments[k]
                yield t, seg.compute, seg.suspend
            else:
                yield t, (), ()


def response_times(trace: Trace):
    """``(completed, incomplete)``: ``[(task, job, response)]`` for completed
    jobs and ``[(task, job)]`` for jobs still pending at the horizon."""
    done, pending = [], []
    for rec in sorted(trace.jobs.values(), key=lambda r: (r.task, r.index)):
        if rec.completion is None:
            pending.append((rec.task, rec.index))
        else:
            done.append((rec.task, rec.index, rec.response_time))
    return done, pending


def first_deadline_miss(trace: Trace) -> Optional[tuple[int, int, int]]:
    """Earliest miss by deadline, ties broken by task index."""
    misses = trace.misses()
    if not misses:
        return None
    first = misses[0]
    return (first.task, first.job, first.deadline)


# -- engine --------------------------------------------------------------------

def _job_items(system, task_id: int, j: int):
    if isinstance(system, TransformedSystem):
        return [(p.kind, int(p.length)) for p in job_phases(system.tasks[task_id], j)]
    return [(k, int(x)) for k, x in system.tasks[task_id].phases()]


def simulate(system: Union[TaskSystem, TransformedSystem], sched: Scheduler,
             rel: Optional[ReleaseModel] = None, horizon: int = 0) -> Trace:
    """Simulate ``system`` over ticks ``[0, horizon)``.

    GEDF accepts original and transformed systems; a transformed job under
    GEDF drains its items in order (pending write, compute, read). GEDF-R/W
    requires a transformed system.
    """
    sched = Scheduler(sched)
    if horizon < 1:
        raise HorizonTooSmall(f"horizon {horizon} must be at least 1 tick")
    if rel is None:
        rel = SynchronousPeriodic()
    flexible = isinstance(system, TransformedSystem)
    if sched is Scheduler.GEDF_RW and not flexible:
        raise IncompatibleScheduler(
            "GEDF-R/W needs the flexible suspension pattern; transform the system first")
    if not system.is_integral:
        raise ValueError("simulation needs integer phase lengths and periods")
    flexible_run = sched is Scheduler.GEDF_RW
    m = system.m

    tasks = system.tasks
    if isinstance(rel, PeriodicWithOffsets):
        if len(rel.offsets) != len(tasks) or min(rel.offsets) < 0:
            raise ValueError(f"need {len(tasks)} non-negative offsets, got {rel.offsets}")
    periods = [int(t.period) for t in tasks]
    release_lists = [rel.release_times(i, periods[i], horizon) for i in range(len(tasks))]
    for i, rl in enumerate(release_lists):
        for a, b in zip(rl, rl[1:]):
            if b - a < periods[i]:
                raise ValueError(f"task {i}: releases {a} and {b} closer than the period")
    next_rel = [0] * len(tasks)
    queues = [deque() for _ in tasks]
    records: dict = {}
    segments: list = []
    prev_proc: dict = {}

    def release_due(t):
        for i, rl in enumerate(release_lists):
            while next_rel[i] < len(rl) and rl[next_rel[i]] <= t:
                r = rl[next_rel[i]]
                j = next_rel[i] + 1
                items = _job_items(system, i, j)
                job = JobState(i, j, r, r + periods[i], items, flexible_run)
                queues[i].append(job)
                records[job.id] = JobRecord(i, j, r, r + periods[i],
                                            job.compute_left, job.suspend_left)
                next_rel[i] += 1

    def retire_heads(t):
        for q in queues:
            while q:
                head = q[0]
                rec = records[head.id]
                if rec.eligible is None:
                    rec.eligible = t
                if head.pending:
                    break
                rec.completion = t
                q.popleft()

    def next_release_time():
        best = horizon
        for i, rl in enumerate(release_lists):
            if next_rel[i] < len(rl) and rl[next_rel[i]] < best:
                best = rl[next_rel[i]]
        return best

    t = 0
    while t < horizon:
        release_due(t)
        retire_heads(t)
        active = [q[0] for q in queues if q]
        if sched is Scheduler.GEDF:
            picked = gedf_pick(active, m)
            suspending = [j for j in active if j.in_suspension]
        else:
            picked, suspending = gedf_rw_pick(active, m)

        step = next_release_time() - t
        for j in picked:
            step = min(step, j.headroom(PhaseKind.COMPUTE))
        for j in suspending:
            step = min(step, j.headroom(PhaseKind.SUSPEND))
        assert step > 0

        if picked or suspending:
            # processor assignment: keep running jobs in place, fill lowest free
            proc = {}
            used = set()
            for j in picked:
                p = prev_proc.get(j.id)
                if p is not None:
                    proc[j.id] = p
                    used.add(p)
            free = iter(p for p in range(m) if p not in used)
            for j in picked:
                if j.id not in proc:
                    proc[j.id] = next(free)
            prev_proc = proc
            end = t + step
            compute = tuple(sorted((proc[j.id], j.id) for j in picked))
            susp = tuple(sorted(j.id for j in suspending))
            segments.append(Segment(t, end, compute, susp))
            for j in picked:
                j.advance(PhaseKind.COMPUTE, step)
                _add_interval(records[j.id].compute_intervals, t, end)
            for j in suspending:
                j.advance(PhaseKind.SUSPEND, step)
                _add_interval(records[j.id].suspend_intervals, t, end)
        else:
            prev_proc = {}
        t += step
    retire_heads(horizon)
    return Trace(system, sched, horizon, segments, records)


# -- CSV -----------------------------------------------------------------------

TRACE_COLUMNS = ["tick", "event", "processor", "task", "job", "value"]


def write_trace_csv(trace: Trace, fh) -> None:
    """One row per (tick, processor, job) computation plus event rows.

    ``event`` is one of release, compute, suspend, complete, miss. ``value``
    holds the response time for ``complete`` rows and the tardiness so far
    for ``miss`` rows.
    """
    fh.write(f"# schema: {TRACE_SCHEMA} scheduler={trace.scheduler.value} "
             f"m={trace.m} horizon={trace.horizon}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    by_tick: dict = {}
    for rec in trace.jobs.values():
        by_tick.setdefault(rec.release, []).append((0, "release", "", rec.task, rec.index, ""))
        if rec.completion is not None:
            by_tick.setdefault(rec.completion, []).append(
                (3, "complete", "", rec.task, rec.index, rec.response_time))
    for miss in trace.misses():
        by_tick.setdefault(miss.deadline, []).append(
            (4, "miss", "", miss.task, miss.job, miss.tardiness))
    last = max([trace.horizon - 1, *by_tick])
    ticks = trace.iter_ticks()
    for t in range(last + 1):
        rows = list(by_tick.get(t, ()))
        if t < trace.horizon:
            _, compute, susp = next(ticks)
            rows += [(1, "compute", p, j[0], j[1], "") for p, j in compute]
            rows += [(2, "suspend", "", j[0], j[1], "") for j in susp]
        rows.sort(key=lambda r: (r[0], str(r[2]), r[3], r[4]))
        for r in rows:
            w.writerow([t, *r[1:]])
