import math

import pytest

from curveflow import fixtures, flow_engine as fe
from curveflow.chart import make_chart
from curveflow.smoother import smoothed_reference

ANGLES = (math.pi / 3, math.pi / 2, 2 * math.pi / 3)


@pytest.fixture(scope="session")
def relaxed_runs():
    """Perturbed arcs run to t = 1e-2 for three contact angles."""
    out = {}
    for alpha in ANGLES:
        cfg = fe.FlowConfig(alpha=alpha, t_end=1e-2)
        start = fe.init_state(fixtures.circular_arc(alpha, bump=0.01), cfg)
        traj, verdict = fe.run(start, cfg)
        out[alpha] = (cfg, traj, verdict)
    return out


@pytest.fixture(scope="session")
def semicircle_run():
    cfg = fe.FlowConfig(alpha=math.pi / 2, t_end=1e-3)
    start = fe.init_state(fixtures.semicircle(200), cfg)
    traj, verdict = fe.run(start, cfg)
    return cfg, traj, verdict


@pytest.fixture(scope="session")
def exact_chart():
    """Chart over the exact unit semicircle (non-zero endpoint curvature)."""
    return make_chart(fixtures.semicircle(400), math.pi / 2, strict=False)


@pytest.fixture(scope="session")
def smoothed_chart():
    """Strict chart over a smoothed semicircle."""
    ref = smoothed_reference(fixtures.semicircle(800), 1e-4, alpha=math.pi / 2, n=400)
    return make_chart(ref, math.pi / 2)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdict lines after the test report."""
    import sys

    lines = [line for name, mod in list(sys.modules.items())
             if name.endswith("test_acceptance") for line in getattr(mod, "LINES", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
