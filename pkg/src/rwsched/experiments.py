"""Random task-set generation and schedulability-curve experiments.

Generated write-only systems follow the usual recipe: draw a write length
``W ~ U[5, 50]`` us, a suspension ratio ``V`` and a utilization ``U``; then
``T = W / V``, ``C = U T``, ``C1 = alpha C``, ``C2 = (1 - alpha) C``. Tasks
are added until the utilization sum reaches the cap, and the last task is
shrunk so that ``U_sum`` equals the cap exactly.

Draws are taken on a fixed rational grid (``U`` and ``V`` in steps of 1e-6,
``W`` in steps of 1 ns) so every parameter is an exact rational.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .sched_tests import TestName
from .task_model import ReadWriteTask, TaskSystem, WriteOnlyTask, hyperperiod

CURVES_SCHEMA = "rwsched-curves/1"

GRID = 10**6  # denominator of U and V draws
NS_PER_US = 1000


class UtilDist(enum.Enum):
    LIGHT = "light"
    MEDIUM = "medium"
    HEAVY = "heavy"

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        return {
            "light": (Fraction(1, 1000), Fraction(5, 100)),
            "medium": (Fraction(5, 100), Fraction(1, 10)),
            "heavy": (Fraction(1, 10), Fraction(3, 10)),
        }[self.value]


class SuspDist(enum.Enum):
    SHORT = "short"
    LONG = "long"

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        return {
            "short": (Fraction(5, 1000), Fraction(1, 10)),
            "long": (Fraction(1, 10), Fraction(3, 10)),
        }[self.value]


class CapTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    m: int = 4
    util_dist: UtilDist = UtilDist.LIGHT
    susp_dist: SuspDist = SuspDist.SHORT
    alpha: Fraction = Fraction(9, 10)
    write_range_us: tuple = (5, 50)
    cap: Fraction = Fraction(1)
    systems_per_cap: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "cap", Fraction(self.cap))
        object.__setattr__(self, "util_dist", UtilDist(self.util_dist))
        object.__setattr__(self, "susp_dist", SuspDist(self.susp_dist))
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha {self.alpha} must lie in (0, 1]")
        if self.cap > self.m:
            raise ValueError(f"cap {self.cap} exceeds m = {self.m}")
        if self.systems_per_cap < 1:
            raise ValueError("systems_per_cap must be positive")


def _grid_bounds(bounds, scale) -> tuple[int, int]:
    lo, hi = bounds
    return int(lo * scale), int(hi * scale)


@dataclass
class DrawnSystem:
    """Integer numerators of one generated system.

    Task ``i`` has ``U = u[i] / GRID``, ``V = v[i] / GRID`` and a write of
    ``w[i]`` ns.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    alpha: Fraction
    m: int

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def u_sum(self) -> Fraction:
        return Fraction(int(self.u.sum()), GRID)

    def to_task_system(self) -> TaskSystem:
        tasks = []
        for i, (a, b, w) in enumerate(zip(self.u.tolist(), self.v.tolist(), self.w.tolist())):
            period = Fraction(w * GRID, NS_PER_US * b)  # us
            compute = Fraction(a, GRID) * period
            c1 = self.alpha * compute
            tasks.append(WriteOnlyTask(i, period, c1, Fraction(w, NS_PER_US), compute - c1))
        return TaskSystem(tasks, self.m, "us")


def draw_system(cfg: GenConfig, rng: np.random.Generator) -> DrawnSystem:
    u_lo, u_hi = _grid_bounds(cfg.util_dist.bounds, GRID)
    v_lo, v_hi = _grid_bounds(cfg.susp_dist.bounds, GRID)
    w_lo, w_hi = (x * NS_PER_US for x in cfg.write_range_us)
    cap_units = cfg.cap * GRID
    if cap_units.denominator != 1:
        raise ValueError(f"cap {cfg.cap} is not on the 1e-6 utilization grid")
    cap_units = int(cap_units)
    if cap_units < u_lo:
        raise CapTooSmall(f"cap {cfg.cap} is below the smallest task utilization")

    chunk = max(8, int(cap_units / ((u_lo + u_hi) / 2) * 1.25) + 4)
    us, vs, ws = [], [], []
    total = 0
    while True:
        u = rng.integers(u_lo, u_hi, size=chunk, endpoint=True)
        v = rng.integers(v_lo, v_hi, size=chunk, endpoint=True)
        w = rng.integers(w_lo, w_hi, size=chunk, endpoint=True)
        us.append(u)
        vs.append(v)
        ws.append(w)
        total += int(u.sum())
        if total >= cap_units:
            break
    u, v, w = np.concatenate(us), np.concatenate(vs), np.concatenate(ws)
    cum = np.cumsum(u)
    k = int(np.searchsorted(cum, cap_units, side="left"))
    u, v, w = u[:k + 1].copy(), v[:k + 1], w[:k + 1]
    u[k] = cap_units - (int(cum[k - 1]) if k > 0 else 0)
    return DrawnSystem(u, v, w, cfg.alpha, cfg.m)


def generate_task_system(cfg: GenConfig, rng: np.random.Generator) -> TaskSystem:
    """One write-only system with ``U_sum == cfg.cap`` exactly."""
    return draw_system(cfg, rng).to_task_system()


def fast_verdicts(drawn: DrawnSystem, tests: Sequence[TestName]) -> dict:
    """Test outcomes computed in scaled integer arithmetic.

    Equivalent to running :mod:`rwsched.sched_tests` on
    ``drawn.to_task_system()``, without building Fractions per task.
    Uses ``U delta = V / alpha`` to avoid forming ``T`` and ``C``.
    """
    m = drawn.m
    p, q = drawn.alpha.numerator, drawn.alpha.denominator
    u, v = drawn.u, drawn.v
    u_sum = int(u.sum())
    out = {}
    for name in tests:
        name = TestName(name)
        if name is TestName.WRITE_ONLY_GEDF:
            per_task_ok = bool(np.all(u * p + v * q < GRID * p))
            big_l = int(np.max((m - 1) * u * p + m * v * q))
            out[name] = per_task_ok and u_sum * p <= m * GRID * p - big_l
        elif name is TestName.SUSP_OBLIVIOUS_DENSITY:
            z_max = int(np.max(u + v))
            out[name] = u_sum <= m * GRID - (m - 1) * z_max - int(v.sum())
        elif name is TestName.DENSITY:
            out[name] = u_sum <= m * GRID - (m - 1) * int(u.max())
        else:
            raise ValueError(f"{name.value} does not apply to write-only systems")
    return out


@dataclass(frozen=True)
class CurvePoint:
    cap: Fraction
    samples: int
    accepted: dict = field(default_factory=dict)

    def fraction(self, test) -> float:
        return self.accepted[TestName(test)] / self.samples


def default_caps(m: int, step: Fraction = Fraction(1, 10)) -> list[Fraction]:
    count = int(m / step)
    return [step * k for k in range(1, count + 1)]


def cap_rng(seed: int, cap: Fraction) -> np.random.Generator:
    """Independent PCG64 stream per (seed, cap)."""
    return np.random.default_rng(np.random.SeedSequence([seed, cap.numerator, cap.denominator]))


DEFAULT_TESTS = (TestName.WRITE_ONLY_GEDF, TestName.SUSP_OBLIVIOUS_DENSITY)


def run_schedulability_experiment(cfg: GenConfig, caps: Optional[Sequence] = None,
                                  tests: Sequence = DEFAULT_TESTS) -> list[CurvePoint]:
    """Acceptance fraction per cap; deterministic given ``cfg.seed``."""
    tests = [TestName(t) for t in tests]
    caps = default_caps(cfg.m) if caps is None else [Fraction(c) for c in caps]
    points = []
    for cap in caps:
        c = replace(cfg, cap=cap)
        rng = cap_rng(cfg.seed, cap)
        accepted = {t: 0 for t in tests}
        for _ in range(cfg.systems_per_cap):
            verdicts = fast_verdicts(draw_system(c, rng), tests)
            for t in tests:
                accepted[t] += verdicts[t]
        points.append(CurvePoint(cap, cfg.systems_per_cap, accepted))
    return points


def write_curves_csv(points: Sequence[CurvePoint], cfg: GenConfig, fh) -> None:
    fh.write(f"# schema: {CURVES_SCHEMA} m={cfg.m} alpha={cfg.alpha} "
             f"util={cfg.util_dist.value} susp={cfg.susp_dist.value} seed={cfg.seed}\n")
    fh.write("cap,test,accepted,samples,fraction\n")
    for pt in points:
        for test, acc in pt.accepted.items():
            fh.write(f"{float(pt.cap):.4g},{test.value},{acc},{pt.samples},"
                     f"{acc / pt.samples:.6g}\n")


# -- integer systems for simulation ---------------------------------------------

def quantize(system: TaskSystem, max_hyperperiod: int = 10**6) -> Optional[TaskSystem]:
    """Scale every length by the common denominator so all become integers.

    Returns ``None`` when the resulting hyperperiod exceeds ``max_hyperperiod``.
    """
    values = [Fraction(x) for t in system.tasks for x in (t.period, *t.lengths().values())]
    scale = reduce(math.lcm, (x.denominator for x in values), 1)
    tasks = []
    for t in system.tasks:
        s = t.scaled(scale)
        tasks.append(type(s)(s.id, *(int(Fraction(x)) for x in (
            s.period, *s.lengths().values()))))
    unit = system.tick_unit if scale == 1 else f"{system.tick_unit}/{scale}"
    scaled = TaskSystem(tasks, system.m, unit)
    if hyperperiod(scaled) > max_hyperperiod:
        return None
    return scaled


FUZZ_PERIODS = (12, 15, 16, 18, 20, 24, 30, 36, 40, 45, 48, 60, 72, 80, 90,
                120, 144, 180, 240, 360, 720)  # divisors of 720
ALPHAS = (Fraction(9, 10), Fraction(1, 2), Fraction(1, 5))


def random_integer_system(rng: np.random.Generator, kind: str, m: int, cap: float,
                          util=(0.02, 0.3), susp=(0.0, 0.3),
                          periods: Sequence[int] = FUZZ_PERIODS) -> TaskSystem:
    """Integer-tick system with ``U_sum`` close to ``cap``.

    Periods come from ``periods`` (divisors of 720 by default) so that the
    hyperperiod stays small. ``kind`` is ``"write-only"`` or ``"read-write"``.
    """
    tasks = []
    total = Fraction(0)
    while total < cap:
        period = int(rng.choice(periods))
        c = max(1, round(rng.uniform(*util) * period))
        room = Fraction(cap) - total
        if Fraction(c, period) > room:
            c = math.floor(room * period)
            if c < 1:
                break
        s = min(round(rng.uniform(*susp) * period), period - c)
        tid = len(tasks)
        if kind == "write-only":
            alpha = ALPHAS[int(rng.integers(len(ALPHAS)))]
            c1 = min(c, max(1, round(alpha * c)))
            tasks.append(WriteOnlyTask(tid, period, c1, s, c - c1))
        else:
            r = int(rng.integers(0, s + 1))
            tasks.append(ReadWriteTask(tid, period, r, c, s - r))
        total += Fraction(c, period)
    if not tasks:
        period = int(periods[0])
        if kind == "write-only":
            tasks.append(WriteOnlyTask(0, period, 1, 0, 0))
        else:
            tasks.append(ReadWriteTask(0, period, 0, 1, 0))
    return TaskSystem(tasks, m)
