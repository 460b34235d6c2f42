from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rwsched.io_placement import (Origin, job_phases, transform, transformed_params,
                                  transformed_to_dict)
from rwsched.task_model import PhaseKind, ReadWriteTask, TaskSystem, WriteOnlyTask, WrongTaskKind

from conftest import io_pair, systems

S, C = PhaseKind.SUSPEND, PhaseKind.COMPUTE


def _shape(items):
    return [(p.kind, p.length, p.origin, p.job) for p in items]


def test_steady_job_pair():
    t = transform(io_pair()).tasks[0]
    assert _shape(job_phases(t, 2)) == [
        (S, 5, Origin.WRITE, 1), (C, 5, Origin.COMPUTE, 2), (S, 5, Origin.READ, 3)]
    assert _shape(job_phases(t, 7)) == [
        (S, 5, Origin.WRITE, 6), (C, 5, Origin.COMPUTE, 7), (S, 5, Origin.READ, 8)]


def test_prefetch_and_first_job():
    t = transform(io_pair()).tasks[1]
    assert _shape(job_phases(t, 0)) == [(S, 5, Origin.READ, 1)]
    assert _shape(job_phases(t, 1)) == [(C, 5, Origin.COMPUTE, 1), (S, 5, Origin.READ, 2)]
    j2 = job_phases(t, 2)
    assert sum(p.length for p in j2 if p.kind is S) == 10
    assert sum(p.length for p in j2 if p.kind is C) == 5


def test_no_suspension_is_identity():
    t = transform(TaskSystem([ReadWriteTask(0, 9, 0, 4, 0)], 1)).tasks[0]
    assert job_phases(t, 0, last_job=3) == []
    assert job_phases(t, 4, last_job=3) == []
    for j in (1, 2, 3):
        assert _shape(job_phases(t, j, last_job=3)) == [(C, 4, Origin.COMPUTE, j)]


def test_utilization_preserved_pair():
    ts = transform(io_pair())
    for t in ts.tasks:
        p = transformed_params(t)
        assert (p.utilization, p.suspension_ratio) == (Fraction(1, 3), Fraction(2, 3))
    assert ts.u_sum == Fraction(2, 3)


def test_index_out_of_range():
    t = transform(io_pair()).tasks[0]
    with pytest.raises(IndexError):
        job_phases(t, -1)
    with pytest.raises(IndexError):
        job_phases(t, 5, last_job=3)


def test_rejects_write_only():
    with pytest.raises(WrongTaskKind):
        transform(TaskSystem([WriteOnlyTask(0, 10, 2, 2, 2)], 1))


def test_last_job_and_epilogue():
    t = transform(TaskSystem([ReadWriteTask(0, 20, 3, 4, 5)], 1)).tasks[0]
    assert _shape(job_phases(t, 3, last_job=3)) == [(S, 5, Origin.WRITE, 2), (C, 4, Origin.COMPUTE, 3)]
    assert _shape(job_phases(t, 4, last_job=3)) == [(S, 5, Origin.WRITE, 3)]
    assert _shape(job_phases(t, 1, last_job=1)) == [(C, 4, Origin.COMPUTE, 1)]
    assert _shape(job_phases(t, 2, last_job=1)) == [(S, 5, Origin.WRITE, 1)]


@given(systems("read-write", max_n=3), st.integers(1, 12))
def test_conservation(s, J):
    ts = transform(s)
    for t, base in zip(ts.tasks, s.tasks):
        moved = Counter((p.origin, p.job, p.length)
                        for j in range(J + 2) for p in job_phases(t, j, last_job=J))
        original = Counter()
        for j in range(1, J + 1):
            for origin, length in ((Origin.READ, base.read), (Origin.COMPUTE, base.compute),
                                   (Origin.WRITE, base.write)):
                if length > 0:
                    original[(origin, j, length)] += 1
        assert moved == original


@given(systems("read-write", max_n=5))
def test_params_preserved(s):
    ts = transform(s)
    for t, p in zip(ts.tasks, s.params):
        q = transformed_params(t)
        assert (q.utilization, q.suspension_ratio) == (p.utilization, p.suspension_ratio)
    assert ts.u_sum == s.u_sum and ts.m == s.m


def test_document_templates():
    doc = transformed_to_dict(transform(io_pair()))
    assert doc["transformed"] is True
    tmpl = doc["templates"][0]
    assert [(x["origin"], x["origin_offset"]) for x in tmpl["steady"]] == [
        ("write", -1), ("compute", 0), ("read", 1)]
    assert tmpl["prefetch"] == [{"kind": "suspend", "length": 5, "origin": "read", "origin_offset": 1}]
    assert [x["origin"] for x in tmpl["epilogue"]] == ["write"]
