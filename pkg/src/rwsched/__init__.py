"""Analysis and simulation of suspending sporadic tasks under global EDF."""

from .io_placement import TransformedSystem, job_phases, transform
from .sched_tests import (TestName, TestVerdict, density_test, run_tests,
                          rw_placement_test, susp_oblivious_density_test,
                          write_only_test)
from .simulator import Scheduler, Trace, first_deadline_miss, simulate
from .task_model import (ReadWriteTask, TaskSystem, WriteOnlyTask, derived_params,
                         hyperperiod, parse_task_system, serialize_task_system,
                         validate_task)

__version__ = "0.1.0"
