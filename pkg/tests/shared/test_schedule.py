import math

import pytest

from kinopt.shared.schedule import Schedule, log_cooling


def test_log_cooling_values():

    assert log_cooling(0, 1.0) == pytest.approx(1.0 / math.log(2.0))
    assert log_cooling(98, 2.0) == pytest.approx(2.0 / math.log(100.0))


def test_log_cooling_decreases():

    values = [log_cooling(k) for k in range(0, 1000, 10)]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("k,C", [(-1, 1.0), (0, 0.0), (5, -2.0)])
def test_log_cooling_rejects(k, C):

    with pytest.raises(ValueError):
        log_cooling(k, C)


def test_schedule_kinds():

    assert Schedule.constant(0.5).value_at(1000) == 0.5
    assert Schedule.logarithmic(3.0).value_at(10) == log_cooling(10, 3.0)
    assert Schedule.geometric(2.0, 0.5).value_at(3) == 0.25


def test_schedule_validation():

    with pytest.raises(ValueError):
        Schedule(kind="linear")
    with pytest.raises(ValueError):
        Schedule.constant(0.0)
    with pytest.raises(ValueError):
        Schedule.geometric(1.0, 1.5)
