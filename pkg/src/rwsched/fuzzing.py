"""Randomized soundness and invariant checks over simulated traces.

A test that accepts a system predicts that no deadline is missed; the fuzz
harness simulates accepted systems and collects any counterexample. Clean
runs are evidence, not proof: synchronous periodic release is not known to
be the worst case for suspending tasks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .experiments import random_integer_system
from .fluid import assert_lemma1, assert_lemma2, assert_lemma4, lemma4_in_scope
from .io_placement import transform
from .sched_tests import rw_placement_test, write_only_test
from .simulator import Scheduler, SporadicSeeded, SynchronousPeriodic, simulate
from .task_model import hyperperiod

log = logging.getLogger(__name__)


@dataclass
class FuzzReport:
    kind: str
    generated: int = 0
    accepted: int = 0
    simulated_ticks: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def soundness_fuzz(kind: str, accepted: int, seed: int = 0, ms=(2, 4),
                   max_attempts: int = 100_000) -> FuzzReport:
    """Simulate ``accepted`` random systems that pass the matching test.

    Write-only systems run under GEDF; read-write systems are transformed
    and run under GEDF-R/W. Horizon: two hyperperiods, synchronous release.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1 if kind == "write-only" else 2]))
    report = FuzzReport(kind)
    while report.accepted < accepted and report.generated < max_attempts:
        m = int(rng.choice(ms))
        cap = rng.uniform(0.2, m)
        system = random_integer_system(rng, kind, m, cap)
        report.generated += 1
        if kind == "write-only":
            if not write_only_test(system).passed:
                continue
            target, sched = system, Scheduler.GEDF
        else:
            if not rw_placement_test(system).passed:
                continue
            target, sched = transform(system), Scheduler.GEDF_RW
        report.accepted += 1
        horizon = 2 * hyperperiod(system)
        trace = simulate(target, sched, SynchronousPeriodic(), horizon)
        report.simulated_ticks += horizon
        misses = trace.misses()
        if misses:
            log.warning("counterexample: %s misses %s", system, misses[0])
            report.counterexamples.append((system, misses[0]))
    return report


@dataclass
class LemmaReport:
    traces: int = 0
    lemma1_checked: int = 0
    lemma2_checked: int = 0
    lemma4_checked: int = 0
    lemma4_misses: int = 0
    violations: list = field(default_factory=list)


def lemma_suite(traces: int = 500, seed: int = 0, ms=(1, 2, 4)) -> LemmaReport:
    """Run the lag assertions on random traces of four flavours, in rotation:
    write-only under GEDF, read-write under GEDF, transformed under GEDF-R/W,
    and over-utilized transformed under GEDF-R/W (to induce misses)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    report = LemmaReport()
    for k in range(traces):
        flavour = k % 4
        m = int(rng.choice(ms))
        if flavour == 3:
            cap = rng.uniform(m + 0.05, 1.5 * m + 0.5)
        else:
            cap = rng.uniform(0.3, m)
        kind = "write-only" if flavour == 0 else "read-write"
        system = random_integer_system(rng, kind, m, cap)
        horizon = min(2 * hyperperiod(system), 1440)
        if rng.random() < 0.5:
            rel = SynchronousPeriodic()
        else:
            rel = SporadicSeeded(int(rng.integers(2**31)),
                                 tuple(int(t.period) // 3 for t in system.tasks))
        if flavour < 2:
            trace = simulate(system, Scheduler.GEDF, rel, horizon)
        else:
            trace = simulate(transform(system), Scheduler.GEDF_RW, rel, horizon)
        report.traces += 1
        if system.u_sum <= system.m:
            report.lemma1_checked += 1
            report.violations += assert_lemma1(trace)
        if flavour == 0:
            report.lemma2_checked += 1
            report.violations += assert_lemma2(trace)
        if flavour >= 2:
            report.lemma4_checked += 1
            report.lemma4_misses += len(lemma4_in_scope(trace))
            report.violations += assert_lemma4(trace)
    return report

