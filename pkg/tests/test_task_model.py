from fractions import Fraction

import pytest
from hypothesis import given

from rwsched.task_model import (DuplicateId, MalformedDocument, NegativePhase,
                                NonPositivePeriod, ParseError, ReadWriteTask, TaskSystem,
                                UtilizationOverflow, ValidationError, WriteOnlyTask,
                                ZeroFirstCompute, derived_params, hyperperiod,
                                parse_task_system, serialize_task_system, validate_task)

from conftest import io_pair, rational_wo_systems, systems


def test_validate_pair_task():
    t = ReadWriteTask(0, 15, 5, 5, 5)
    validate_task(t)
    p = derived_params(t)
    assert (p.utilization, p.suspension_ratio, p.density) == (Fraction(1, 3), Fraction(2, 3), 1)


def test_validate_degenerate_empty_task():
    validate_task(ReadWriteTask(0, 1, 0, 0, 0))


def test_validate_overflow():
    with pytest.raises(UtilizationOverflow):
        validate_task(ReadWriteTask(0, 15, 8, 8, 8))


@pytest.mark.parametrize("task, exc", [
    (ReadWriteTask(0, 0, 0, 0, 0), NonPositivePeriod),
    (ReadWriteTask(0, -3, 0, 0, 0), NonPositivePeriod),
    (ReadWriteTask(0, 5, -1, 1, 0), NegativePhase),
    (WriteOnlyTask(0, 5, 1, 1, -1), NegativePhase),
    (WriteOnlyTask(0, 5, 0, 1, 1), ZeroFirstCompute),
    (WriteOnlyTask(0, 5, 3, 2, 1), UtilizationOverflow),
])
def test_validation_errors(task, exc):
    with pytest.raises(exc):
        validate_task(task)
    assert issubclass(exc, ValidationError)


def test_derived_write_only():
    p = derived_params(WriteOnlyTask(0, 10, 2, 2, 2))
    assert (p.utilization, p.suspension_ratio, p.delta, p.density) == (
        Fraction(2, 5), Fraction(1, 5), 1, Fraction(3, 5))


def test_derived_no_suspension():
    p = derived_params(WriteOnlyTask(0, 8, 4, 0, 0))
    assert p.delta == 0 and p.suspension_ratio == 0
    assert derived_params(ReadWriteTask(0, 8, 0, 4, 0)).delta is None


def test_system_aggregates(pair):
    assert pair.n == 2 and pair.u_sum == Fraction(2, 3) and pair.v_sum == Fraction(4, 3)
    assert pair.u_max == Fraction(1, 3)


@pytest.mark.parametrize("tasks, m", [
    ([], 1),
    ([ReadWriteTask(0, 5, 0, 1, 0)], 0),
    ([ReadWriteTask(1, 5, 0, 1, 0)], 1),
    ([ReadWriteTask(0, 5, 0, 1, 0), ReadWriteTask(0, 5, 0, 1, 0)], 1),
])
def test_system_invariants(tasks, m):
    with pytest.raises(ValidationError):
        TaskSystem(tasks, m)


DOC = """{"m": 1, "tick_unit": "tick", "tasks": [
  {"id": 0, "kind": "read-write", "T": 15, "phases": {"read": 5, "compute": 5, "write": 5}},
  {"id": 1, "kind": "read-write", "T": 15, "phases": {"read": 5, "compute": 5, "write": 5}}]}"""


def test_parse_pair_document():
    s = parse_task_system(DOC)
    assert s.n == 2 and s.u_sum == Fraction(2, 3)
    assert s == io_pair()


def test_parse_empty():
    with pytest.raises(ParseError):
        parse_task_system('{"m": 1, "tasks": []}')


def test_parse_duplicate():
    doc = DOC.replace('"id": 1', '"id": 0')
    with pytest.raises(DuplicateId):
        parse_task_system(doc)


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"tasks": []}',
    '{"m": 1, "tasks": [{"id": 0, "kind": "rw", "T": 5, "phases": {}}]}',
    '{"m": 1, "tasks": [{"id": 0, "kind": "read-write", "T": 5, "phases": {"read": 1}}]}',
    '{"m": 1, "tasks": [{"id": 0, "kind": "read-write", "T": "x", '
    '"phases": {"read": 1, "compute": 1, "write": 1}}]}',
    '{"m": true, "tasks": []}',
])
def test_parse_malformed(text):
    with pytest.raises(MalformedDocument):
        parse_task_system(text)


def test_parse_validation_propagates():
    with pytest.raises(UtilizationOverflow):
        parse_task_system(DOC.replace('"read": 5', '"read": 9'))


def test_parse_unordered_ids():
    doc = ('{"m": 2, "tasks": ['
           '{"id": 1, "kind": "write-only", "T": 10, "phases": {"compute1": 2, "write": 2, "compute2": 2}},'
           '{"id": 0, "kind": "read-write", "T": 15, "phases": {"read": 5, "compute": 5, "write": 5}}]}')
    s = parse_task_system(doc)
    assert [t.id for t in s.tasks] == [0, 1]
    assert isinstance(s.tasks[1], WriteOnlyTask)


def test_canonical_form_sorted():
    text = serialize_task_system(io_pair())
    assert text.index('"format_version"') < text.index('"m"') < text.index('"tasks"')
    assert serialize_task_system(parse_task_system(text)) == text


@given(systems("read-write"))
def test_roundtrip_rw(s):
    text = serialize_task_system(s)
    assert serialize_task_system(parse_task_system(text)) == text
    assert parse_task_system(text) == s


@given(rational_wo_systems())
def test_roundtrip_rational(s):
    text = serialize_task_system(s)
    back = parse_task_system(text)
    assert back == s
    assert serialize_task_system(back) == text


@given(systems("write-only"))
def test_exact_parameters(s):
    for t, p in zip(s.tasks, s.params):
        assert p.utilization * t.period == t.compute_total
        assert p.utilization + p.suspension_ratio <= 1
        assert isinstance(p.utilization, Fraction)


@pytest.mark.parametrize("periods, expected", [
    ((15, 15), 15), ((10, 15), 30), ((950, 1250), 23750)])
def test_hyperperiod(periods, expected):
    s = TaskSystem([ReadWriteTask(i, T, 0, 1, 0) for i, T in enumerate(periods)], 1)
    assert hyperperiod(s) == expected


def test_hyperperiod_needs_integers():
    s = TaskSystem([ReadWriteTask(0, Fraction(5, 2), 0, 1, 0)], 1)
    with pytest.raises(ValueError):
        hyperperiod(s)
