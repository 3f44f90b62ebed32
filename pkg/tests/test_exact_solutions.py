import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccf.core_fields import make_grid
from ccf.exact_solutions import (
    ReferenceSolution,
    SingularSetError,
    cusp,
    expanding_semicircle,
    pde_residual,
    scaled,
    semicircle,
    shrinking_semicircle,
    translating_cusp,
)
from ccf.solver import OperatorSpec, SchemeConfig, run


@pytest.fixture(scope="module")
def grid():
    return make_grid("line", 8193, 2.0)


class TestFormulas:
    def test_semicircle_values(self):
        np.testing.assert_allclose(semicircle(2.0, [0.0, 1.0, 3.0]), [-1.0, -np.sqrt(0.75), 0.0])

    def test_shrinking_is_reflection(self):
        x = np.linspace(-2, 2, 41)
        np.testing.assert_array_equal(semicircle(-0.7, x, "shrinking"), -semicircle(0.7, x))

    @pytest.mark.parametrize("t,sign", [(0.0, "expanding"), (-1.0, "expanding"), (1.0, "shrinking")])
    def test_outside_time_domain(self, t, sign):
        with pytest.raises(SingularSetError):
            semicircle(t, 0.0, sign)

    def test_cusp(self):
        np.testing.assert_allclose(cusp(2.0, [0.0, 4.0]), [-1.0, -3.0])

    def test_strict_refuses_singular_set(self):
        sol = expanding_semicircle()
        with pytest.raises(SingularSetError):
            sol(1.0, np.array([0.0, 1.0]), strict=True)
        assert sol(1.0, 0.5, strict=True) == pytest.approx(-np.sqrt(0.75))

    def test_singular_points(self):
        np.testing.assert_array_equal(shrinking_semicircle().singular_points(-0.5), [-0.5, 0.5])
        np.testing.assert_array_equal(translating_cusp().singular_points(3.0), [0.0])
        np.testing.assert_allclose(scaled(expanding_semicircle(), a=2, b=4).singular_points(1.0), [-0.5, 0.5])


class TestResiduals:
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_expanding(self, t):
        g = make_grid("line", 8193, 2.0 * t)
        r = pde_residual(expanding_semicircle(), t, g)
        assert r.max(lambda x: np.abs(x) <= 0.9 * t) < 1e-3

    @pytest.mark.parametrize("t", [-1.0, -0.5])
    def test_shrinking(self, t):
        g = make_grid("line", 8193, 2.0 * abs(t))
        r = pde_residual(shrinking_semicircle(), t, g)
        assert r.max(lambda x: np.abs(x) <= 0.9 * abs(t)) < 1e-3

    def test_cusp(self):
        g = make_grid("line", 8193, 10.0)
        r = pde_residual(translating_cusp(), 0.3, g)
        assert r.max(lambda x: (np.abs(x) >= 0.1) & (np.abs(x) <= 8.0)) < 1e-2

    @pytest.mark.parametrize("C", [0.5, 2.0])
    def test_wrong_amplitude_is_detected(self, grid, C):
        r = pde_residual(ReferenceSolution("expanding", C=C), 1.0, grid)
        assert r.max(lambda x: np.abs(x) <= 0.9) > 0.1

    def test_wrong_cusp_speed_is_detected(self):
        g = make_grid("line", 8193, 10.0)
        r = pde_residual(translating_cusp(C1=1.0), 0.3, g)
        assert r.max(lambda x: (np.abs(x) >= 0.1) & (np.abs(x) <= 8.0)) > 0.4

    def test_stencil_crossing_zero(self, grid):
        with pytest.raises(SingularSetError):
            pde_residual(expanding_semicircle(), 1e-6, grid)

    def test_band_excluded(self, grid):
        r = pde_residual(expanding_semicircle(), 1.0, grid)
        assert not r.valid[grid.nearest(1.0)]
        assert r.valid[grid.origin]

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.5, 4.0), st.floats(0.5, 4.0))
    def test_rescaled_semicircle(self, a, t):
        # theta(a t, a x) is again a solution at s = 0
        sol = scaled(expanding_semicircle(), a=a, b=a)
        g = make_grid("line", 4097, 2.0 * t)
        r = pde_residual(sol, t, g)
        assert r.max(lambda x: np.abs(x) <= 0.9 * t) < 1e-3


@pytest.fixture(scope="module")
def errors():
    """L1 errors of the semicircle run from t = 1 to 1.5 at three resolutions."""
    sol = expanding_semicircle()
    out = []
    for n in (2049, 4097, 8193):
        g = make_grid("line", n, 2.0)
        traj = run(sol.field(g, 1.0), OperatorSpec(), SchemeConfig(grad_max=np.inf), 0.5, 0.5, t0=1.0)
        err = np.abs(traj.snapshots[-1].values - sol(1.5, g.x))
        out.append(float(np.dot(g.weights, err)))
    return out


class TestSolverOrder:
    def test_first_order_in_l1(self, errors):
        ratios = np.array(errors[:-1]) / np.array(errors[1:])
        assert np.all(np.abs(ratios - 2.0) <= 0.4), ratios

    def test_errors_small(self, errors):
        assert errors[-1] < 5e-3
