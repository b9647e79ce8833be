import time

import pytest

from spectriple.core.exceptions import TimeOutException
from spectriple.manager.lagrangian_task_manager import TaskManagerLagrangian
from spectriple.utils.timeout import timeout_decorator

TASK_CONFIG = {
    "sleep": 3,
    "timeout": 1,
}


class SlowChecker:
    def __init__(self, timeout=None):
        if timeout is not None:
            self._CHECK_TIMEOUT = timeout

    @timeout_decorator(default_timeout=TASK_CONFIG["timeout"])
    def run(self, seconds):
        time.sleep(seconds)
        return seconds


@timeout_decorator(default_timeout=TASK_CONFIG["timeout"])
def sleepy(seconds):
    time.sleep(seconds)
    return "done"


def test_function_timeout():
    """A plain function past its budget raises TimeOutException."""
    try:
        _ = sleepy(TASK_CONFIG["sleep"])
    except TimeOutException:
        return

    raise ValueError("Expected a TimeOutException but none was raised")


def test_function_within_budget():
    assert sleepy(0) == "done"


def test_instance_budget_overrides_default():
    """_CHECK_TIMEOUT on the instance wins over the decorator default."""
    assert SlowChecker(timeout=TASK_CONFIG["sleep"] + 5).run(2) == 2
    with pytest.raises(TimeOutException):
        SlowChecker().run(TASK_CONFIG["sleep"])


def test_manager_timeout():
    manager = TaskManagerLagrangian(n_jobs=1, timeout=0.001)
    with pytest.raises(TimeOutException):
        manager.inplace_check(manager.build_task_list(200, seed=0))
