import numpy as np
import pytest

from arfima_traffic.timeseries import load_fixture

# Hourly volumes of the three-day backbone trace, transcribed independently of the
# bundled CSV files so the fixtures themselves are checked.
DAY1 = [
    4579980, 3710512, 3157889, 2853392, 2605959, 2460145, 2343611, 2568329,
    3689533, 5435866, 6889225, 7014512, 7773121, 8224229, 8247586, 8380588,
    8809613, 8555500, 8354096, 9362043, 9356253, 9219356, 8560516, 6369390,
]
DAY2 = [
    4584550, 3754345, 3190912, 2784617, 2534228, 2351439, 2246381, 2441217,
    3313881, 4798367, 6268091, 6830835, 7915579, 8692846, 8831177, 8985398,
    9190998, 8732356, 8664592, 9249369, 9250066, 9038823, 8453056, 6545901,
]
DAY3 = [
    4761961, 3787515, 3149364, 2802171, 2576379, 2397031, 2336571, 2629421,
    3685423, 5216799, 6561625, 7156008, 7831581, 8010846, 7921752, 8037197,
    8402647, 8262956, 8393854, 9000149, 9132337, 9097003, 8504556, 6380823,
]
TRAFFIC_72 = DAY1 + DAY2 + DAY3


@pytest.fixture(scope="session")
def trace_series():
    return load_fixture("day123")


@pytest.fixture(scope="session")
def trace_values():
    return np.array(TRAFFIC_72, dtype=float)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.report_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
