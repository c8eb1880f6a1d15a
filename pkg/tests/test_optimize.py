import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwre.errors import DomainError, OptimizationError
from rwre.model import kl
from rwre.optimize import maximize_1d, maximize_box, start_points


class TestMaximize1d:
    def test_quadratic(self):
        res = maximize_1d(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, tol=1e-6)
        assert abs(res.argmax[0] - 0.3) <= 1e-6
        assert res.evaluations <= 500

    def test_kl(self):
        res = maximize_1d(lambda x: -kl(0.3, x), 0.05, 0.45, tol=1e-6)
        assert abs(res.argmax[0] - 0.3) <= 1e-6

    def test_boundary(self):
        res = maximize_1d(lambda x: x, 0.0, 1.0)
        assert res.argmax[0] == 1.0 and res.value == 1.0

    def test_grid_escapes_local_max(self):
        # local bump near 0.2, global one near 0.8
        f = lambda x: np.exp(-((x - 0.2) / 0.05) ** 2) + 2 * np.exp(-((x - 0.8) / 0.05) ** 2)
        assert abs(maximize_1d(f, 0.0, 1.0, grid=41).argmax[0] - 0.8) < 1e-5

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite(self):
        with pytest.raises(OptimizationError) as info:
            maximize_1d(lambda x: np.log(x - 0.5), 0.0, 1.0)
        assert info.value.x is not None

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            maximize_1d(lambda x: x, 1.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(c=st.floats(0.0, 1.0))
    def test_value_matches_argmax(self, c):
        f = lambda x: -abs(x - c)
        res = maximize_1d(f, 0.0, 1.0, grid=11)
        assert res.value == f(res.argmax[0])
        assert 0.0 <= res.argmax[0] <= 1.0


class TestMaximizeBox:
    BOX = [(0.0, 1.0), (0.0, 1.0)]

    def test_quadratic(self):
        res = maximize_box(lambda v: -(v[0] - 0.4) ** 2 - (v[1] - 0.7) ** 2, self.BOX, 1e-6, 3)
        np.testing.assert_allclose(res.argmax, [0.4, 0.7], atol=1e-5)

    def test_kl(self):
        box = [(0.01, 0.99), (0.01, 0.99)]
        res = maximize_box(lambda v: -kl(0.4, v[0]) - kl(0.7, v[1]), box, 1e-6, 3)
        np.testing.assert_allclose(res.argmax, [0.4, 0.7], atol=1e-5)

    def test_corner(self):
        res = maximize_box(lambda v: v[0] + v[1], self.BOX, 1e-6, 3)
        np.testing.assert_allclose(res.argmax, [1.0, 1.0], atol=1e-6)

    def test_invariants(self):
        f = lambda v: np.sin(7 * v[0]) * np.cos(5 * v[1])
        res = maximize_box(f, self.BOX, 1e-6, 5)
        assert res.value == f(res.argmax)
        assert np.all(res.argmax >= 0) and np.all(res.argmax <= 1)
        assert all(res.value >= f(x) for x in start_points(self.BOX, 5))

    def test_warm_start_kept(self):
        f = lambda v: -np.sum((v - 0.9) ** 2)
        res = maximize_box(f, self.BOX, 1e-6, restarts=1, x0s=[[0.9, 0.9]])
        assert res.value == 0.0

    def test_empty_box(self):
        with pytest.raises(DomainError):
            maximize_box(lambda v: 0.0, [(1.0, 0.0)])


def test_start_points_in_box():
    box = [(0.02, 0.48), (0.52, 0.98)]
    pts = start_points(box, 8, seed=3)
    assert pts.shape == (8, 2)
    np.testing.assert_allclose(pts[0], [0.25, 0.75])
    assert np.all((pts >= [0.02, 0.52]) & (pts <= [0.48, 0.98]))
    assert np.array_equal(pts, start_points(box, 8, seed=3))
