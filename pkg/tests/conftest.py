import pytest

from optmerge.types import make_scenario


def platoon(positions=(300.0, 250.0, 200.0), v_d=25.0, **kw):
    base = dict(t0=0.0, x0=0.0, v0=20.0, L=400.0, alpha=0.5)
    base.update(kw)
    return make_scenario(hdv_positions=list(positions), hdv_speeds=v_d, **base)


@pytest.fixture
def wide():
    """Three HDVs far behind the AV, 90 m apart."""
    return make_scenario(t0=0.0, x0=100.0, v0=20.0, hdv_positions=[0.0, -90.0, -180.0],
                         hdv_speeds=25.0, L=400.0, alpha=0.5, beta=0.05)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
