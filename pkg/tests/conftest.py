import numpy as np
import pytest

from stormpath.precip import BodyCloud, DropField, SimConfig
from stormpath.transit import BACKENDS

ACCEPTANCE_SEED = 0xD1CE


def make_body(points) -> BodyCloud:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return BodyCloud(pts[:, 0].copy(), pts[:, 1].copy())


def make_field(points, angles=None) -> DropField:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if angles is None:
        angles = np.zeros(len(pts))
    return DropField(pts[:, 0].copy(), pts[:, 1].copy(), np.asarray(angles, dtype=np.float64))


@pytest.fixture
def default_cfg() -> SimConfig:
    return SimConfig()


needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernel not built")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[7:9])):
            terminalreporter.write_line(line)
