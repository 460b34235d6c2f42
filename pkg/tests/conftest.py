from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from rwsched.task_model import ReadWriteTask, TaskSystem, WriteOnlyTask


def io_pair(m: int = 1) -> TaskSystem:
    return TaskSystem([ReadWriteTask(0, 15, 5, 5, 5), ReadWriteTask(1, 15, 5, 5, 5)], m)


@pytest.fixture
def pair():
    return io_pair()


# -- independent tick-by-tick reference simulator ------------------------------
#
# Written without the engine's data structures: every tick re-derives the
# decision from plain lists. Used as an oracle for the event-driven engine.

def _original_items(task):
    if isinstance(task, ReadWriteTask):
        return [["S", task.read], ["C", task.compute], ["S", task.write]]
    return [["C", task.compute1], ["S", task.write], ["C", task.compute2]]


def _transformed_items(task, j):
    if j == 1:
        items = [["C", task.compute], ["S", task.read]]
    else:
        items = [["S", task.write], ["C", task.compute], ["S", task.read]]
    return items


def naive_simulate(system, flexible: bool, rw: bool, releases, horizon: int):
    """Return (per-tick [(compute ids, suspend ids)], completions dict).

    ``system`` is an original TaskSystem; ``flexible`` selects the
    transformed job contents, ``rw`` the GEDF-R/W rule.
    """
    jobs = {}  # id -> dict
    queues = [[] for _ in system.tasks]
    ticks = []
    completions = {}
    for t in range(horizon + 1):
        for i, task in enumerate(system.tasks):
            for j, r in enumerate(releases[i], start=1):
                if r == t:
                    items = _transformed_items(task, j) if flexible else _original_items(task)
                    items = [[k, int(x)] for k, x in items if x > 0]
                    jobs[(i, j)] = dict(d=r + int(task.period), items=items)
                    queues[i].append((i, j))
        for q in queues:
            while q and not jobs[q[0]]["items"]:
                completions[q[0]] = t
                q.pop(0)
        if t == horizon:
            break
        heads = [q[0] for q in queues if q]

        def has(jid, kind):
            return any(k == kind and x > 0 for k, x in jobs[jid]["items"])

        def current(jid):
            return jobs[jid]["items"][0][0]

        key = lambda jid: (jobs[jid]["d"], jid[0], jid[1])
        if rw:
            cands = sorted((h for h in heads if has(h, "C")), key=key)
            comp = cands[:system.m]
            susp = [h for h in heads if h not in comp and has(h, "S")]
        else:
            cands = sorted((h for h in heads if current(h) == "C"), key=key)
            comp = cands[:system.m]
            susp = [h for h in heads if current(h) == "S"]
        for jid, kind in [(c, "C") for c in comp] + [(s, "S") for s in susp]:
            items = jobs[jid]["items"]
            if flexible:
                item = next(it for it in items if it[0] == kind)
            else:
                item = items[0]
            item[1] -= 1
            jobs[jid]["items"] = [it for it in items if it[1] > 0]
        ticks.append((tuple(sorted(comp)), tuple(sorted(susp))))
    return ticks, completions


# -- hypothesis strategies ------------------------------------------------------

@st.composite
def rw_tasks(draw, tid=0, periods=(2, 3, 4, 5, 6, 8, 10, 12)):
    T = draw(st.sampled_from(periods))
    c = draw(st.integers(0, T))
    s = draw(st.integers(0, T - c))
    r = draw(st.integers(0, s))
    return ReadWriteTask(tid, T, r, c, s - r)


@st.composite
def wo_tasks(draw, tid=0, periods=(2, 3, 4, 5, 6, 8, 10, 12)):
    T = draw(st.sampled_from(periods))
    c = draw(st.integers(1, T))
    c1 = draw(st.integers(1, c))
    w = draw(st.integers(0, T - c))
    return WriteOnlyTask(tid, T, c1, w, c - c1)


@st.composite
def systems(draw, kind="read-write", max_n=4, max_m=3):
    n = draw(st.integers(1, max_n))
    make = rw_tasks if kind == "read-write" else wo_tasks
    tasks = [draw(make(i)) for i in range(n)]
    return TaskSystem(tasks, draw(st.integers(1, max_m)))


@st.composite
def rational_wo_systems(draw, max_n=5):
    """Write-only systems with rational phase lengths."""
    n = draw(st.integers(1, max_n))
    tasks = []
    for i in range(n):
        T = Fraction(draw(st.integers(1, 200)), draw(st.integers(1, 7)))
        u = Fraction(draw(st.integers(1, 50)), 100)
        v = Fraction(draw(st.integers(0, 50)), 100)
        a = Fraction(draw(st.integers(1, 10)), 10)
        c = u * T
        tasks.append(WriteOnlyTask(i, T, a * c, v * T, c - a * c))
    return TaskSystem(tasks, draw(st.integers(1, 6)))


# -- acceptance reporting -----------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
