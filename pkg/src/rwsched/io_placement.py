"""Flexible I/O placement for read-write tasks.

Each job of a transformed task carries the write of the previous original
job, its own computation, and the read of the next original job. Those three
pieces are mutually independent, so a scheduler may suspend or compute them
in any order within the job's window.

Job numbering of a transformed task ``i``:

* job 0 (prefetch): read of original job 1; runs in a warm-up window before
  time 0, so simulations start with it complete;
* job 1: compute of job 1, read of job 2;
* job ``j >= 2``: write of ``j-1``, compute of ``j``, read of ``j+1``;
* for a finite horizon of ``J`` original jobs, job ``J`` drops the read of
  the non-existent job ``J+1`` and an epilogue job ``J+1`` holds the final
  write of job ``J``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .task_model import (PhaseKind, ReadWriteTask, TaskKind, TaskSystem,
                         WrongTaskKind, derived_params, encode_number,
                         system_to_dict)


class Origin(enum.Enum):
    READ = "read"
    COMPUTE = "compute"
    WRITE = "write"


@dataclass(frozen=True)
class PhaseItem:
    kind: PhaseKind
    length: int
    task: int
    job: int  # original job index the phase belongs to
    origin: Origin

    def to_dict(self, host_job: int) -> dict:
        """Template entry; ``origin_offset`` is relative to the hosting job."""
        return {"kind": self.kind.value, "length": encode_number(self.length),
                "origin": self.origin.value, "origin_offset": self.job - host_job}


@dataclass(frozen=True)
class TransformedTask:
    base: ReadWriteTask

    @property
    def id(self) -> int:
        return self.base.id

    @property
    def period(self):
        return self.base.period

    def _read(self, j):
        return PhaseItem(PhaseKind.SUSPEND, self.base.read, self.id, j, Origin.READ)

    def _compute(self, j):
        return PhaseItem(PhaseKind.COMPUTE, self.base.compute, self.id, j, Origin.COMPUTE)

    def _write(self, j):
        return PhaseItem(PhaseKind.SUSPEND, self.base.write, self.id, j, Origin.WRITE)

    @property
    def prefetch(self) -> list[PhaseItem]:
        return [self._read(1)]

    @property
    def first_job(self) -> list[PhaseItem]:
        return [self._compute(1), self._read(2)]

    def steady_phases(self, j: int = 2) -> list[PhaseItem]:
        # FIFO drain order of the suspend items: pending write, then read.
        return [self._write(j - 1), self._compute(j), self._read(j + 1)]

    def epilogue(self, last_job: int) -> list[PhaseItem]:
        return [self._write(last_job)]

    @property
    def compute_total(self):
        return self.base.compute

    @property
    def suspension_total(self):
        return self.base.read + self.base.write


@dataclass(frozen=True)
class TransformedSystem:
    base: TaskSystem
    tasks: tuple

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def params(self):
        return self.base.params

    @property
    def u_sum(self):
        return self.base.u_sum

    @property
    def tick_unit(self):
        return self.base.tick_unit

    @property
    def is_integral(self):
        return self.base.is_integral


def transform(system: TaskSystem) -> TransformedSystem:
    """Apply the I/O placement policy to every task of a read-write system."""
    wrong = [t.id for t in system.tasks if t.kind is not TaskKind.READ_WRITE]
    if wrong:
        raise WrongTaskKind(f"tasks {wrong} are not read-write")
    return TransformedSystem(system, tuple(TransformedTask(t) for t in system.tasks))


def job_phases(task: TransformedTask, j: int, last_job: Optional[int] = None) -> list[PhaseItem]:
    """Phase items of transformed job ``j``, zero-length items dropped.

    ``last_job=None`` models an unbounded job stream (no epilogue, every
    ``j >= 2`` is a steady job).
    """
    if j < 0 or (last_job is not None and (last_job < 1 or j > last_job + 1)):
        raise IndexError(f"job {j} outside 0..{'inf' if last_job is None else last_job + 1}")
    if j == 0:
        items = task.prefetch
    elif last_job is not None and j == last_job + 1:
        items = task.epilogue(last_job)
    elif j == 1:
        items = task.first_job
    else:
        items = task.steady_phases(j)
    if last_job is not None and j == last_job:
        items = [p for p in items if not (p.origin is Origin.READ and p.job == last_job + 1)]
    return [p for p in items if p.length > 0]


def transformed_params(task: TransformedTask):
    """Utilization and suspension ratio of a steady transformed job."""
    steady = task.steady_phases()
    c = sum(p.length for p in steady if p.kind is PhaseKind.COMPUTE)
    s = sum(p.length for p in steady if p.kind is PhaseKind.SUSPEND)
    return derived_params(ReadWriteTask(task.id, task.period, s, c, 0))


def transformed_to_dict(ts: TransformedSystem) -> dict:
    doc = system_to_dict(ts.base)
    doc["transformed"] = True
    doc["templates"] = [
        {
            "id": t.id,
            "prefetch": [p.to_dict(0) for p in t.prefetch],
            "first_job": [p.to_dict(1) for p in t.first_job],
            "steady": [p.to_dict(2) for p in t.steady_phases(2)],
            "epilogue": [p.to_dict(2) for p in t.epilogue(1)],
        }
        for t in ts.tasks
    ]
    return doc
