import numpy as np
import pytest

from rwre.environment import sample_environment
from rwre.model import ModelFamily
from rwre.walk import simulate_walk


@pytest.fixture
def temkin():
    return ModelFamily.temkin()


@pytest.fixture
def two_point():
    return ModelFamily.two_point()


@pytest.fixture
def lazy():
    return ModelFamily.lazy_temkin()


TRUE_FREE = {
    "temkin": (0.3,),
    "two_point": (0.4, 0.7),
    "lazy_temkin": (0.3, 0.2),
}


def simulate(family, free, n, seed, x_max=20_000, record_path=False):
    rng = np.random.default_rng(seed)
    theta = family.to_theta(free)
    env = sample_environment(theta, x_max, rng)
    return theta, env, simulate_walk(env, n, rng, record_path=record_path)


@pytest.fixture(scope="session")
def temkin_walks():
    """A handful of Temkin(0.3) walks with recorded paths, n = 20000."""
    fam = ModelFamily.temkin()
    return [simulate(fam, (0.3,), 20_000, seed, record_path=True) for seed in range(5)]


def synthetic_stats(xp, xm, n=None):
    """Stats with the given departure counts on sites 1..k (site 0 unvisited)."""
    from rwre.walk import WalkStats

    xp = np.concatenate([[0], np.asarray(xp, dtype=np.int64)])
    xm = np.concatenate([[0], np.asarray(xm, dtype=np.int64)])
    xi = xp + xm
    return WalkStats(int(xi.sum()) if n is None else n, xi, xp, xm, xi.size - 1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
