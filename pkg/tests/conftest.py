from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from steinercover import DstInstance, SetCoverInstance

settings.register_profile("repo", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def abc():
    # A = {0,1} cost 1, B = {2,3} cost 1, C = everything at 5/2
    return SetCoverInstance.build(4, [(1, [0, 1]), (1, [2, 3]), (Fraction(5, 2), [0, 1, 2, 3])])


@pytest.fixture
def diamond():
    r, a, b, t1, t2 = range(5)
    arcs = [(r, a, 1), (r, b, 1), (a, t1, 1), (b, t1, 5), (a, t2, 5), (b, t2, 1)]
    return DstInstance.build(5, arcs, r, [t1, t2])


def path_instance(costs, terminal_positions=None):
    """Path 0 -> 1 -> ... with the given arc costs; terminals default to the far end."""
    n = len(costs) + 1
    arcs = [(i, i + 1, c) for i, c in enumerate(costs)]
    terms = terminal_positions if terminal_positions is not None else [n - 1]
    return DstInstance.build(n, arcs, 0, terms)


# acceptance lines, printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
