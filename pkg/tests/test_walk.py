import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwre.environment import Environment, sample_environment
from rwre.errors import EnvironmentExhaustedError, MalformedPathError
from rwre.model import ModelFamily
from rwre.walk import WalkStats, check_invariants, simulate_walk, stats_from_path


def test_forced_left_double():
    # omega_1 = 0: the walk bounces 0 -> 1 -> 0 -> 1 -> 0
    env = Environment([0.0, 0.5, 0.5])
    walk = simulate_walk(env, 4, np.random.default_rng(0), record_path=True)
    s = walk.stats
    assert walk.path.tolist() == [0, 1, 0, 1, 0]
    assert (s.xi[0], s.xi_plus[0], s.xi_minus[0]) == (2, 2, 0)
    assert (s.xi[1], s.xi_plus[1], s.xi_minus[1]) == (2, 0, 2)
    assert s.range_size == 1


def test_one_step():
    s = simulate_walk(Environment([0.5]), 1, np.random.default_rng(0)).stats
    assert s.xi_plus[0] == 1
    assert s.range_size == 0 and s.max_site == 1


@pytest.mark.parametrize(
    "path, plus, minus, r",
    [
        ((0, 1, 0, 1, 0), [2, 0], [0, 2], 1),
        ((0, 1, 2, 1, 0), [1, 1, 0], [0, 1, 1], 2),
        ((0, 1), [1, 0], [0, 0], 0),
    ],
)
def test_stats_from_path(path, plus, minus, r):
    s = stats_from_path(path)
    assert s.xi_plus.tolist() == plus
    assert s.xi_minus.tolist() == minus
    assert s.range_size == r


@pytest.mark.parametrize("path", [(1, 2), (0, 2), (0, 1, 1), (0, -1), (0,)])
def test_malformed(path):
    with pytest.raises(MalformedPathError):
        stats_from_path(path)


def test_exhausted_window():
    env = Environment(np.full(5, 0.99))
    with pytest.raises(EnvironmentExhaustedError):
        simulate_walk(env, 1000, np.random.default_rng(0))


@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 300),
       kind=st.sampled_from(["temkin", "two_point", "lazy_temkin"]))
def test_streaming_matches_oracle(seed, n, kind):
    fam = ModelFamily.from_name(kind)
    free = {"temkin": [0.3], "two_point": [0.4, 0.7], "lazy_temkin": [0.3, 0.2]}[kind]
    rng = np.random.default_rng(seed)
    env = sample_environment(fam.to_theta(free), 400, rng)
    walk = simulate_walk(env, n, rng, record_path=True)
    oracle = stats_from_path(walk.path)
    for name in ("xi", "xi_plus", "xi_minus"):
        assert np.array_equal(getattr(walk.stats, name), getattr(oracle, name))
    assert walk.stats.max_site == oracle.max_site
    check_invariants(walk.stats)


def test_determinism(lazy):
    env = sample_environment(lazy.to_theta([0.3, 0.2]), 10_000, np.random.default_rng(2))
    a = simulate_walk(env, 5000, np.random.default_rng(9)).stats
    b = simulate_walk(env, 5000, np.random.default_rng(9)).stats
    assert np.array_equal(a.xi_plus, b.xi_plus) and np.array_equal(a.xi_minus, b.xi_minus)


def test_chunked_stream_equals_oracle(temkin):
    """Long walk crossing several random-number chunks."""
    rng = np.random.default_rng(4)
    env = sample_environment(temkin.to_theta([0.3]), 100_000, rng)
    walk = simulate_walk(env, 200_000, rng, record_path=True)
    oracle = stats_from_path(walk.path)
    assert np.array_equal(walk.stats.xi, oracle.xi)
    check_invariants(walk.stats)


def test_sinai_scale(temkin):
    n = 100_000
    bound = 40 * math.log(n) ** 2
    theta = temkin.to_theta([0.3])
    ok = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        env = sample_environment(theta, 20_000, rng)
        ok += simulate_walk(env, n, rng).stats.max_site <= bound
    assert ok / 100 >= 0.99


def test_csv_round_trip(temkin_walks):
    _, _, walk = temkin_walks[0]
    text = walk.stats.to_csv()
    assert text.splitlines()[0] == "x,xi,xi_plus,xi_minus"
    back = WalkStats.from_csv(text)
    assert back.n == walk.stats.n
    assert np.array_equal(back.xi_minus, walk.stats.xi_minus)
