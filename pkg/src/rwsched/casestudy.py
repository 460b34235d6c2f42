"""Simulated matrix-calculation case study (1 ms ticks, no overheads).

Task 0 reads three matrices (300 ms), performs two multiplications (400 ms)
and writes one result (100 ms) every 950 ms. Task 1 runs every 1250 ms with
600 ms of computation, a 300 ms read and a 200 ms write.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .io_placement import transform
from .simulator import Scheduler, SynchronousPeriodic, simulate
from .task_model import ReadWriteTask, TaskSystem

CASE_SCHEMA = "rwsched-responses/1"

TAU1 = dict(period=950, read=300, compute=400, write=100)
TAU2 = dict(period=1250, read=300, compute=600, write=200)


class Case(enum.Enum):
    UNI2 = "uni2"  # two tasks, one processor
    DUO3 = "duo3"  # tau1, tau2 and a copy of tau1 on two processors


def build_case(case) -> TaskSystem:
    case = Case(case)
    if case is Case.UNI2:
        specs, m = [TAU1, TAU2], 1
    else:
        specs, m = [TAU1, TAU2, TAU1], 2
    return TaskSystem([ReadWriteTask(i, **s) for i, s in enumerate(specs)], m, "ms")


@dataclass(frozen=True)
class ResponseRow:
    task: int
    job: int
    release: int
    completion: Optional[int]
    period: int

    @property
    def response(self) -> Optional[int]:
        return None if self.completion is None else self.completion - self.release


def run_case_study(case, sched, jobs: int = 400, horizon: Optional[int] = None) -> list[ResponseRow]:
    """Per-job response times of the first ``jobs`` jobs of every task.

    GEDF runs the original system; GEDF-R/W runs the I/O-placed system.
    """
    sched = Scheduler(sched)
    system = build_case(case)
    longest = max(int(t.period) for t in system.tasks)
    if horizon is None:
        horizon = (jobs + 2) * longest
    target = transform(system) if sched is Scheduler.GEDF_RW else system
    trace = simulate(target, sched, SynchronousPeriodic(), horizon)
    rows = []
    for rec in sorted(trace.jobs.values(), key=lambda r: (r.task, r.index)):
        if rec.index <= jobs:
            rows.append(ResponseRow(rec.task, rec.index, rec.release, rec.completion,
                                    int(system.tasks[rec.task].period)))
    return rows


def write_responses_csv(rows, case, sched, fh) -> None:
    fh.write(f"# schema: {CASE_SCHEMA} case={Case(case).value} "
             f"scheduler={Scheduler(sched).value} tick=1ms\n")
    fh.write("task,job,release,completion,response,period\n")
    for r in rows:
        completion = "" if r.completion is None else r.completion
        response = "" if r.response is None else r.response
        fh.write(f"{r.task},{r.job},{r.release},{completion},{response},{r.period}\n")
