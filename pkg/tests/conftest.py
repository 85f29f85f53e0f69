import math

import numpy as np
import pytest

from ergoscope.kinematics import DhLink, ManipulatorModel, Pose, master_manipulator

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def optimized():
    return master_manipulator(0.26, 0.18)


@pytest.fixture
def original():
    return master_manipulator(0.15, 0.15)


def random_model(rng, convention=None):
    """Arbitrary 6R chain with a random base pose."""
    links = []
    for _ in range(6):
        lo = rng.uniform(-math.pi, 0.0)
        hi = rng.uniform(0.1, math.pi)
        links.append(DhLink(alpha=rng.uniform(-math.pi, math.pi), a=rng.uniform(0, 0.5),
                            d=rng.uniform(-0.3, 0.3), theta_offset=rng.uniform(-1, 1),
                            theta_down=lo, theta_up=hi))
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    ang = rng.uniform(-math.pi, math.pi)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    R = np.eye(3) + math.sin(ang) * K + (1 - math.cos(ang)) * K @ K
    conv = convention or rng.choice(["modified", "standard"])
    return ManipulatorModel(tuple(links), Pose(rng.uniform(-1, 1, 3), R), conv)


def random_q(rng, model):
    return rng.uniform(model.lower, model.upper)


@pytest.fixture
def repo_root():
    from pathlib import Path

    return Path(__file__).resolve().parent.parent
