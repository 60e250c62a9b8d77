import pytest

from fwshock.matcher import match_algebraic, match_on_trajectories
from fwshock.phase_plane import make_params
from fwshock.profile import reconstruct_profile
from fwshock.shooting import shoot_P, shoot_Q

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def ref_params():
    return make_params(4.0, 0.0)


@pytest.fixture(scope="session")
def ref_orbits(ref_params):
    return shoot_P(ref_params), shoot_Q(ref_params)


@pytest.fixture(scope="session")
def ref_jump(ref_orbits):
    return match_on_trajectories(*ref_orbits)


@pytest.fixture(scope="session")
def ref_jump_algebraic(ref_params):
    return match_algebraic(ref_params)


@pytest.fixture(scope="session")
def ref_profile(ref_orbits, ref_jump):
    return reconstruct_profile(*ref_orbits, ref_jump, L=40.0, n=4001)


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])
