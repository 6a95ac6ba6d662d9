import numpy as np
import pytest

from vinedesign.files import load_task
from vinedesign.geometry import Cylinder
from vinedesign.robot import HomeBase, Target, Task

# criterion name -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def down_home(z=150.0):
    """Base at (0, 0, z) growing straight down."""
    return HomeBase.from_angles(np.array([0.0, 0.0, z]), np.pi, 0.0)


def make_task(targets, obstacles=(), n=20, **kw):
    return Task(targets=targets, obstacles=obstacles, home=kw.pop("home", down_home()), n=n, **kw)


def random_x(task, size, rng):
    lower, upper = task.bounds()
    return rng.uniform(lower, upper, size=(size, lower.size))


@pytest.fixture(scope="session")
def task1():
    return load_task("task1")


@pytest.fixture(scope="session")
def trivial():
    return load_task("trivial")


@pytest.fixture(scope="session")
def pillar_task():
    """One target beside a pillar that sits between it and the base."""
    return make_task(
        [Target(np.array([50.0, 0.0, 20.0]), np.deg2rad(30), np.pi)],
        [Cylinder(np.array([20.0, 0.0, 0.0]), 10.0, 50.0), Cylinder(np.array([-30.0, 20.0, 0.0]), 8.0, 60.0)],
    )
