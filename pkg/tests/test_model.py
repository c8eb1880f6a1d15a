import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwre.errors import ConstraintError, DomainError
from rwre.model import (
    ModelFamily, ThetaParams, entropy, entropy_vec, family_to_theta, kl, kl_vec,
    recurrence_defect, theta_to_free, two_point_probabilities,
)

# log(7/3) / log(3.5), evaluated independently
P1_TWO_POINT = 0.6763433160902349


class TestRecurrenceDefect:
    def test_symmetric_pair(self):
        assert recurrence_defect([0.3, 0.7], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)

    def test_solved_two_point(self):
        assert recurrence_defect([0.4, 0.7], [P1_TWO_POINT, 1 - P1_TWO_POINT]) == pytest.approx(0.0, abs=1e-6)

    def test_not_recurrent(self):
        expected = 0.5 * math.log(1.5) + 0.5 * math.log(3 / 7)
        assert recurrence_defect([0.4, 0.7], [0.5, 0.5]) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-0.220917, abs=1e-6)

    @pytest.mark.parametrize("a", [[0.0, 0.7], [0.3, 1.0], [-0.1, 0.5]])
    def test_domain(self, a):
        with pytest.raises(DomainError):
            recurrence_defect(a, [0.5, 0.5])


class TestFamilies:
    def test_temkin(self, temkin):
        th = family_to_theta(temkin, [0.3])
        np.testing.assert_allclose(th.a, [0.3, 0.7])
        np.testing.assert_allclose(th.p, [0.5, 0.5])

    def test_lazy(self, lazy):
        th = family_to_theta(lazy, [0.3, 0.2])
        np.testing.assert_allclose(th.a, [0.3, 0.5, 0.7])
        np.testing.assert_allclose(th.p, [0.4, 0.2, 0.4])

    def test_two_point(self, two_point):
        th = family_to_theta(two_point, [0.4, 0.7])
        np.testing.assert_allclose(th.p, [P1_TWO_POINT, 1 - P1_TWO_POINT], atol=1e-12)

    def test_two_point_probabilities_are_recurrent(self):
        p = two_point_probabilities(0.1, 0.6)
        assert recurrence_defect([0.1, 0.6], p) == pytest.approx(0.0, abs=1e-14)

    def test_box_violation(self, temkin, two_point):
        with pytest.raises(DomainError):
            family_to_theta(temkin, [0.6])
        with pytest.raises(DomainError):
            family_to_theta(two_point, [0.4])

    def test_general_recurrent(self):
        fam = ModelFamily.general(3)
        free = [0.3, 0.5, 0.7, 0.4, 0.2]
        th = family_to_theta(fam, free)
        np.testing.assert_allclose(th.p, [0.4, 0.2, 0.4])
        np.testing.assert_allclose(theta_to_free(fam, th), free)

    def test_general_rejects_transient(self):
        with pytest.raises(ConstraintError):
            family_to_theta(ModelFamily.general(2), [0.4, 0.7, 0.5])

    def test_general_rejects_unordered(self):
        with pytest.raises(DomainError):
            family_to_theta(ModelFamily.general(2), [0.7, 0.3, 0.5])

    def test_two_point_small_eps0(self):
        with pytest.raises(DomainError):
            ModelFamily.two_point(eps0=0.005)

    def test_theta_invariants(self):
        with pytest.raises(DomainError):
            ThetaParams([0.3, 0.31], [0.5, 0.5])
        with pytest.raises(DomainError):
            ThetaParams([0.3, 0.7], [0.6, 0.5])
        with pytest.raises(DomainError):
            ThetaParams([0.01, 0.7], [0.5, 0.5])

    def test_immutable(self, temkin):
        th = temkin.to_theta([0.3])
        with pytest.raises(ValueError):
            th.a[0] = 0.1


unit = st.floats(0.0, 1.0)


@settings(max_examples=300, deadline=None)
@given(kind=st.sampled_from(["temkin", "two_point", "lazy_temkin"]), u=st.lists(unit, min_size=2, max_size=2),
       eps0=st.floats(0.02, 0.1))
def test_family_map_is_recurrent(kind, u, eps0):
    fam = ModelFamily.from_name(kind, eps0)
    lo, hi = np.array(fam.box).T
    free = np.clip(lo + np.array(u[: fam.n_free]) * (hi - lo), lo, hi)
    th = family_to_theta(fam, free)
    assert abs(recurrence_defect(th.a, th.p)) <= 1e-10
    assert np.all(np.diff(th.a) >= th.eps0 - 1e-12) and np.all(th.p >= th.eps0 - 1e-12)
    assert th.p.sum() == pytest.approx(1.0, abs=1e-12)


class TestEntropy:
    def test_half(self):
        assert entropy(0.5) == pytest.approx(math.log(2))

    def test_value(self):
        assert entropy(0.3) == pytest.approx(0.610864, abs=1e-6)

    def test_degenerate_vector(self):
        assert entropy_vec([1.0, 0.0, 0.0]) == 0.0

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            entropy(q)

    def test_symmetry_grid(self):
        q = np.linspace(0.001, 0.999, 500)
        np.testing.assert_allclose(entropy(q), entropy(1 - q), atol=1e-14)


class TestKL:
    def test_identity(self):
        assert kl(0.3, 0.3) == 0.0

    def test_against_entropy_gap(self):
        assert kl(0.3, 0.5) == pytest.approx(0.082283, abs=1e-6)
        assert kl(0.3, 0.5) == pytest.approx(entropy(0.5) - entropy(0.3), abs=1e-14)

    def test_vector(self):
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert kl_vec([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.143841, abs=1e-6)

    def test_boundary(self):
        with pytest.raises(DomainError):
            kl(0.0, 0.5)
        with pytest.raises(DomainError):
            kl_vec([0.5, 0.5], [1.0, 0.0])

    def test_nonnegative_grid(self):
        q = np.linspace(0.005, 0.995, 100)
        d = kl(q[:, None], q[None, :])
        assert np.all(d >= 0)
        off = ~np.eye(q.size, dtype=bool)
        assert np.all(d[off] > 0)
        assert np.all(np.diag(d) == 0)
