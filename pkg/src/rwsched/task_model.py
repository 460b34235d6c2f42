"""Suspending sporadic task types, validation and the task-system file format.

Two phase patterns are supported:

* read-write ``(R, C, W, T)``: read (suspend), compute, write (suspend);
* write-only ``(C1, W, C2, T)``: compute, write (suspend), compute.

All lengths are in abstract ticks. They are normally integers, but the
random task-set generator produces exact rationals, so every numeric field
accepts ``int`` or ``fractions.Fraction``. Deadlines are implicit (equal to
the period).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Union

Number = Union[int, Fraction]

FORMAT_VERSION = 1


class TaskKind(enum.Enum):
    WRITE_ONLY = "write-only"
    READ_WRITE = "read-write"


class PhaseKind(enum.Enum):
    COMPUTE = "compute"
    SUSPEND = "suspend"


class ValidationError(ValueError):
    """A task or task system violates a model invariant."""


class NonPositivePeriod(ValidationError):
    pass


class NegativePhase(ValidationError):
    pass


class UtilizationOverflow(ValidationError):
    pass


class ZeroFirstCompute(ValidationError):
    pass


class ParseError(ValueError):
    """A task-system document could not be read."""


class MalformedDocument(ParseError):
    pass


class DuplicateId(ParseError):
    pass


class WrongTaskKind(ValueError):
    """An operation received a task of a kind it does not handle."""


@dataclass(frozen=True)
class DerivedParams:
    utilization: Fraction
    suspension_ratio: Fraction
    delta: Optional[Fraction]

    @property
    def density(self) -> Fraction:
        """``U + V``; the quantity Z used by the suspension-oblivious test."""
        return self.utilization + self.suspension_ratio


@dataclass(frozen=True)
class ReadWriteTask:
    id: int
    period: Number
    read: Number
    compute: Number
    write: Number

    kind = TaskKind.READ_WRITE

    @property
    def compute_total(self) -> Number:
        return self.compute

    @property
    def suspension_total(self) -> Number:
        return self.read + self.write

    def phases(self) -> list[tuple[PhaseKind, Number]]:
        return [
            (PhaseKind.SUSPEND, self.read),
            (PhaseKind.COMPUTE, self.compute),
            (PhaseKind.SUSPEND, self.write),
        ]

    def lengths(self) -> dict[str, Number]:
        return {"read": self.read, "compute": self.compute, "write": self.write}

    def scaled(self, k: Number) -> "ReadWriteTask":
        return ReadWriteTask(self.id, self.period * k, self.read * k,
                             self.compute * k, self.write * k)


@dataclass(frozen=True)
class WriteOnlyTask:
    id: int
    period: Number
    compute1: Number
    write: Number
    compute2: Number

    kind = TaskKind.WRITE_ONLY

    @property
    def compute_total(self) -> Number:
        return self.compute1 + self.compute2

    @property
    def suspension_total(self) -> Number:
        return self.write

    def phases(self) -> list[tuple[PhaseKind, Number]]:
        return [
            (PhaseKind.COMPUTE, self.compute1),
            (PhaseKind.SUSPEND, self.write),
            (PhaseKind.COMPUTE, self.compute2),
        ]

    def lengths(self) -> dict[str, Number]:
        return {"compute1": self.compute1, "write": self.write,
                "compute2": self.compute2}

    def scaled(self, k: Number) -> "WriteOnlyTask":
        return WriteOnlyTask(self.id, self.period * k, self.compute1 * k,
                             self.write * k, self.compute2 * k)


TaskSpec = Union[ReadWriteTask, WriteOnlyTask]


def derived_params(task: TaskSpec) -> DerivedParams:
    period = Fraction(task.period)
    u = task.compute_total / period
    v = task.suspension_total / period
    delta = None
    if task.kind is TaskKind.WRITE_ONLY and task.compute1 != 0:
        delta = Fraction(task.write) / task.compute1
    return DerivedParams(Fraction(u), Fraction(v), delta)


def validate_task(task: TaskSpec) -> None:
    """Raise a :class:`ValidationError` subclass naming the first violated rule."""
    if task.period <= 0:
        raise NonPositivePeriod(f"task {task.id}: period {task.period} must be positive")
    for name, length in task.lengths().items():
        if length < 0:
            raise NegativePhase(f"task {task.id}: {name} length {length} is negative")
    if task.kind is TaskKind.WRITE_ONLY and task.compute1 == 0:
        raise ZeroFirstCompute(f"task {task.id}: first compute phase must be non-empty")
    p = derived_params(task)
    if p.density > 1:
        raise UtilizationOverflow(
            f"task {task.id}: U + V = {p.density} exceeds 1")


@dataclass(frozen=True)
class TaskSystem:
    tasks: tuple
    m: int
    tick_unit: str = "tick"
    params: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.tasks:
            raise ValidationError("a task system needs at least one task")
        if not isinstance(self.m, int) or self.m < 1:
            raise ValidationError(f"processor count {self.m!r} must be a positive integer")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"task ids {ids} are not unique")
        if ids != list(range(len(ids))):
            raise ValidationError(f"task ids {ids} must equal their list positions")
        for t in self.tasks:
            validate_task(t)
        object.__setattr__(self, "params", tuple(derived_params(t) for t in self.tasks))

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def u_sum(self) -> Fraction:
        return sum((p.utilization for p in self.params), Fraction(0))

    @property
    def v_sum(self) -> Fraction:
        return sum((p.suspension_ratio for p in self.params), Fraction(0))

    @property
    def u_max(self) -> Fraction:
        return max(p.utilization for p in self.params)

    @property
    def kinds(self) -> set:
        return {t.kind for t in self.tasks}

    @property
    def is_integral(self) -> bool:
        return all(_is_int(x) for t in self.tasks
                   for x in (t.period, *t.lengths().values()))

    def with_tasks(self, tasks: Iterable[TaskSpec]) -> "TaskSystem":
        """New system on the same platform; ids are renumbered by position."""
        renumbered = [_with_id(t, i) for i, t in enumerate(tasks)]
        return TaskSystem(renumbered, self.m, self.tick_unit)


def _with_id(task: TaskSpec, new_id: int) -> TaskSpec:
    if task.kind is TaskKind.READ_WRITE:
        return ReadWriteTask(new_id, task.period, task.read, task.compute, task.write)
    return WriteOnlyTask(new_id, task.period, task.compute1, task.write, task.compute2)


def _is_int(x: Number) -> bool:
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


def hyperperiod(system: TaskSystem) -> int:
    """Least common multiple of all (integer) periods."""
    periods = []
    for t in system.tasks:
        if not _is_int(t.period):
            raise ValueError(f"task {t.id}: period {t.period} is not an integer")
        periods.append(int(t.period))
    return reduce(math.lcm, periods)


# -- file format -------------------------------------------------------------

def encode_number(x: Number):
    """Integers stay JSON numbers; other rationals become ``"p/q"`` strings."""
    if _is_int(x):
        return int(x)
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def decode_number(raw, where: str) -> Number:
    if isinstance(raw, bool):
        raise MalformedDocument(f"{where}: expected a number, got {raw!r}")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        try:
            value = Fraction(raw.strip())
        except (ValueError, ZeroDivisionError):
            raise MalformedDocument(f"{where}: {raw!r} is not a rational") from None
        return int(value) if value.denominator == 1 else value
    raise MalformedDocument(f"{where}: expected an integer or 'p/q' string, got {raw!r}")


def task_to_dict(task: TaskSpec) -> dict:
    return {
        "id": task.id,
        "kind": task.kind.value,
        "T": encode_number(task.period),
        "phases": {k: encode_number(v) for k, v in task.lengths().items()},
    }


def system_to_dict(system: TaskSystem) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "m": system.m,
        "tick_unit": system.tick_unit,
        "tasks": [task_to_dict(t) for t in sorted(system.tasks, key=lambda t: t.id)],
    }


def dump_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def serialize_task_system(system: TaskSystem) -> str:
    """Canonical text form: tasks ordered by id, keys sorted alphabetically."""
    return dump_document(system_to_dict(system))


_PHASE_KEYS = {
    TaskKind.READ_WRITE: ("read", "compute", "write"),
    TaskKind.WRITE_ONLY: ("compute1", "write", "compute2"),
}


def task_from_dict(raw: dict) -> TaskSpec:
    if not isinstance(raw, dict):
        raise MalformedDocument(f"task entry must be an object, got {raw!r}")
    for key in ("id", "kind", "T", "phases"):
        if key not in raw:
            raise MalformedDocument(f"task entry {raw!r} lacks {key!r}")
    tid = raw["id"]
    if not isinstance(tid, int) or isinstance(tid, bool):
        raise MalformedDocument(f"task id {tid!r} must be an integer")
    try:
        kind = TaskKind(raw["kind"])
    except ValueError:
        raise MalformedDocument(f"task {tid}: unknown kind {raw['kind']!r}") from None
    phases = raw["phases"]
    expected = _PHASE_KEYS[kind]
    if not isinstance(phases, dict) or set(phases) != set(expected):
        raise MalformedDocument(f"task {tid}: phases must have exactly the keys {expected}")
    values = [decode_number(phases[k], f"task {tid} phase {k}") for k in expected]
    period = decode_number(raw["T"], f"task {tid} period")
    if kind is TaskKind.READ_WRITE:
        return ReadWriteTask(tid, period, *values)
    return WriteOnlyTask(tid, period, *values)


def system_from_dict(doc) -> TaskSystem:
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be an object")
    for key in ("m", "tasks"):
        if key not in doc:
            raise MalformedDocument(f"missing field {key!r}")
    m = doc["m"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise MalformedDocument(f"m must be an integer, got {m!r}")
    raw_tasks = doc["tasks"]
    if not isinstance(raw_tasks, list):
        raise MalformedDocument("tasks must be an array")
    if not raw_tasks:
        raise ParseError("task list is empty")
    tasks = [task_from_dict(t) for t in raw_tasks]
    seen = set()
    for t in tasks:
        if t.id in seen:
            raise DuplicateId(f"task id {t.id} appears more than once")
        seen.add(t.id)
    tasks.sort(key=lambda t: t.id)
    return TaskSystem(tasks, m, str(doc.get("tick_unit", "tick")))


def parse_task_system(text: str) -> TaskSystem:
    """Read a task-system document; all model invariants are checked on load."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from None
    return system_from_dict(doc)


def load_task_system(path) -> TaskSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_task_system(fh.read())
