import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccf.core_fields import Field, Symmetry, hhalf_sq, make_grid
from ccf.solver import (
    CFLError,
    OperatorSpec,
    SchemeConfig,
    run,
    stable_dt,
    step,
    vanishing_viscosity_sweep,
)

from conftest import bump


class TestConfig:
    @pytest.mark.parametrize("kw", [{"s": 1.0}, {"s": -1.0}, {"gamma": 0.0}, {"gamma": 2.5}, {"eps": -1.0}])
    def test_bad_spec(self, kw):
        with pytest.raises(ValueError):
            OperatorSpec(**kw)

    @pytest.mark.parametrize("kw", [{"advection": "weno"}, {"cfl": 1.0}, {"grad_max": 0.0}, {"dt_floor": 0.0}])
    def test_bad_scheme(self, kw):
        with pytest.raises(ValueError):
            SchemeConfig(**kw)

    def test_step_rejects_large_dt(self):
        f = bump(make_grid("line", 257, 6.0))
        spec = OperatorSpec()
        with pytest.raises(CFLError):
            step(f, spec, SchemeConfig(), 2 * stable_dt(f, spec))

    def test_spectral_needs_periodic(self):
        with pytest.raises(ValueError):
            step(bump(make_grid("line", 257, 6.0)), OperatorSpec(), SchemeConfig(advection="spectral"), 1e-3)


class TestBumpRun:
    def test_blows_up(self, bump_run):
        v = bump_run.verdict
        assert v.blowup and 0.55 < v.t < 0.7

    def test_snapshots_recorded(self, bump_run):
        t = np.asarray(bump_run.times)
        assert t[0] == 0.0 and np.all(np.diff(t) > 0)
        np.testing.assert_allclose(t[1:-1], 0.025 * np.arange(1, t.size - 1), atol=1e-12)

    def test_maximum_principle(self, bump_run):
        m = bump_run.monitor_array()
        assert m[:, 2].max() <= 5.0 + 1e-12
        assert m[:, 3].min() >= -1e-12

    def test_evenness_exact(self, bump_run):
        for f in bump_run.snapshots:
            np.testing.assert_array_equal(f.values, f.values[f.grid.mirror])

    def test_mass_loss_rate(self, bump_run):
        # d/dt int theta = -int theta Lambda theta while the solution is smooth
        t = np.asarray(bump_run.times[:9])
        mass = np.array([np.dot(f.grid.weights, f.values) for f in bump_run.snapshots[:9]])
        rate = np.array([hhalf_sq(f) for f in bump_run.snapshots[:9]])
        lost = mass[0] - mass[-1]
        predicted = np.trapezoid(rate, t)
        assert lost == pytest.approx(predicted, rel=0.05)


class TestViscous:
    def test_completes(self, viscous_run):
        assert viscous_run.verdict.kind == "completed"
        assert viscous_run.times[-1] == pytest.approx(10.0)

    def test_sup_nonincreasing(self, viscous_run):
        sup = [f.values.max() for f in viscous_run.snapshots]
        assert np.all(np.diff(sup) <= 1e-12)

    def test_gradient_bounded(self, viscous_run):
        assert viscous_run.monitor_array()[:, 1].max() < 1e3


class TestInvariance:
    @settings(max_examples=10, deadline=None)
    @given(st.floats(-3.0, 3.0))
    def test_constant_unchanged(self, c):
        g = make_grid("line", 129, 4.0)
        traj = run(Field(g, np.full(g.n, c)), OperatorSpec(eps=1e-2), SchemeConfig(), 0.5, 0.25)
        for f in traj.snapshots:
            np.testing.assert_array_equal(f.values, c)

    def test_deterministic(self):
        g = make_grid("line", 513, 6.0)
        a = run(bump(g), OperatorSpec(s=0.3, eps=1e-3), SchemeConfig(), 0.3, 0.1)
        b = run(bump(g), OperatorSpec(s=0.3, eps=1e-3), SchemeConfig(), 0.3, 0.1)
        assert a.times == b.times
        for fa, fb in zip(a.snapshots, b.snapshots):
            assert fa.values.tobytes() == fb.values.tobytes()

    def test_even_symmetry_returned(self):
        g = make_grid("line", 257, 6.0)
        f = bump(g)
        out = step(f, OperatorSpec(), SchemeConfig(), 0.2 * stable_dt(f, OperatorSpec()))
        assert out.symmetry is Symmetry.EVEN

    def test_linear_dissipation_decay(self):
        # tiny amplitude: transport is negligible, Lambda damps cos x by exp(-t)
        g = make_grid("periodic", 64)
        f = Field(g, 1e-6 * np.cos(g.x))
        traj = run(f, OperatorSpec(kappa=1.0), SchemeConfig(advection="spectral"), 1.0, 0.5)
        np.testing.assert_allclose(traj.snapshots[-1].values, 1e-6 * np.exp(-1.0) * np.cos(g.x), atol=1e-12)


@pytest.fixture(scope="module")
def sweep():
    g = make_grid("line", 513, 6.0)
    return vanishing_viscosity_sweep(bump(g), OperatorSpec(), SchemeConfig(grad_max=np.inf),
                                     [1e-1, 1e-2, 1e-3], 0.2, 0.1)


class TestSweep:

    def test_shape(self, sweep):
        assert len(sweep) == 3 and sweep.eps_list == [1e-1, 1e-2, 1e-3]
        assert set(sweep.distances) == {(1e-1, 1e-2), (1e-1, 1e-3), (1e-2, 1e-3)}

    def test_distances_shrink(self, sweep):
        # before the shock the viscous family is Cauchy in eps
        assert sweep.distances[(1e-2, 1e-3)] < sweep.distances[(1e-1, 1e-2)]

    def test_matches_single_runs(self, sweep):
        g = make_grid("line", 513, 6.0)
        one = run(bump(g), OperatorSpec(eps=1e-2), SchemeConfig(grad_max=np.inf), 0.2, 0.1)
        np.testing.assert_array_equal(one.snapshots[-1].values, sweep[1].snapshots[-1].values)

    @pytest.mark.parametrize("eps", [[1e-3, 1e-2], [1e-2, 0.0]])
    def test_rejects_bad_lists(self, eps):
        g = make_grid("line", 65, 6.0)
        with pytest.raises(ValueError):
            vanishing_viscosity_sweep(bump(g), OperatorSpec(), SchemeConfig(), eps, 0.1, 0.1)
