import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ccf.core_fields import Field, FieldError, Symmetry, field_from_function, make_grid
from ccf.diagnostics import (
    HOLDS,
    NOT_APPLICABLE,
    VIOLATED,
    CertificateReport,
    WeightPair,
    barrier_certificate,
    conjecture_trackers,
    degiorgi_certificate,
    degiorgi_levels,
    dyadic_shells,
    fold_reports,
    interpolation_certificate,
    is_resolved,
    linfty_decay_certificate,
    log_modulus_certificate,
    lyapunov_F,
    maxflow_tracker,
    pointwise_hilbert_certificate,
    pointwise_trajectory_certificate,
    riccati_coefficient,
    riccati_F_certificate,
    snapshot_recorder,
    stationary_holder_certificate,
    telescoping_certificate,
    telescoping_trajectory_certificate,
    truncations,
)
from ccf.experiments.runner import forward_stationary_pair
from ccf.ops import analytic_constants, drift_velocity

from conftest import bump
from fieldgen import bump_params, bumps_field, random_fields


@pytest.fixture(scope="module")
def fields():
    return random_fields(100)


class TestReport:
    def test_within(self):
        r = CertificateReport("x", VIOLATED, -0.5, 0.1)
        assert r.within() and not r.within(4.0) and not r.holds

    def test_fold_reports(self):
        a = CertificateReport("a", HOLDS, 1.0, 0.1)
        b = CertificateReport("a", VIOLATED, -0.3, 0.1)
        na = CertificateReport("a", NOT_APPLICABLE, np.nan, np.nan)
        r = fold_reports("a", [(0.0, a), (0.5, b), (1.0, na)])
        assert r.status == VIOLATED and r.margin == -0.3
        assert r.location["t"] == 0.5
        assert [t for t, _ in r.meta["not_applicable"]] == [1.0]
        assert [row[1] for row in r.rows] == [HOLDS, VIOLATED, NOT_APPLICABLE]


class TestWeights:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_l1_norm(self, alpha):
        w = WeightPair(alpha)
        total = quad(w.eta, 0, 1)[0] + quad(w.eta, 1, np.inf)[0]
        assert total == pytest.approx(w.l1_norm(), rel=1e-8)

    def test_primitive(self):
        w = WeightPair(0.5)
        for x in (0.3, 1.0, 4.0):
            assert w.phi(x) == pytest.approx(quad(w.eta, x, np.inf)[0], rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
    def test_rejects_alpha(self, alpha):
        with pytest.raises(ValueError):
            WeightPair(alpha)

    def test_for_dissipation(self):
        w = WeightPair.for_dissipation(0.1)
        assert w.variant == "dissipative" and 0.1 < (1 - w.alpha) / 2
        with pytest.raises(ValueError):
            WeightPair.for_dissipation(0.5)

    def test_riccati_coefficient(self):
        w = WeightPair(0.5)
        c = analytic_constants()
        assert riccati_coefficient(w) == pytest.approx(np.log(3) / (4 * np.pi * c.value("c_alpha(0.5)")))
        with pytest.raises(ValueError):
            riccati_coefficient(w, 0.3, exact=False)


class TestLyapunov:
    def test_constant_is_zero(self):
        g = make_grid("line", 257, 4.0)
        assert lyapunov_F(Field(g, np.full(g.n, 2.0), Symmetry.EVEN)) == 0.0

    def test_scales_linearly(self):
        g = make_grid("line", 2049, 8.0)
        f = bump(g, 1.0)
        assert lyapunov_F(bump(g, 3.0)) == pytest.approx(3 * lyapunov_F(f), rel=1e-12)

    def test_rejects_periodic(self):
        g = make_grid("periodic", 64)
        with pytest.raises(FieldError):
            lyapunov_F(Field(g, np.cos(g.x)))

    def test_matches_quadrature(self):
        g = make_grid("line", 8193, 8.0)
        f = field_from_function(g, lambda y: np.exp(-y * y), Symmetry.EVEN_MONOTONE)
        w = WeightPair(0.5)
        ref = quad(lambda x: w.eta(x) * (1 - np.exp(-x * x)), 0, 8, points=[1.0], limit=200)[0]
        ref += w.phi(8.0)  # theta vanishes beyond the grid
        assert lyapunov_F(f, w) == pytest.approx(ref, rel=1e-3)


class TestResolution:
    def test_smooth_is_resolved(self):
        assert is_resolved(bump(make_grid("line", 1025, 6.0)))

    def test_step_is_not(self):
        g = make_grid("line", 1025, 6.0)
        assert not is_resolved(Field(g, (np.abs(g.x) < 1).astype(float)))

    def test_shells_resolved(self):
        g = make_grid("line", 4097, 6.0)
        resolved, skipped = dyadic_shells(g)
        assert all(x2 / g.h >= 8 for _, x2, _ in resolved)
        assert all(x1 <= g.L for _, _, x1 in resolved)
        assert skipped and max(skipped) < min(k for k, _, _ in resolved)


class TestPointwise:
    @pytest.mark.parametrize("s", [0.0, 0.5, -0.5])
    def test_random_fields(self, fields, s):
        for f in fields[:25]:
            for x1, x2 in [(1.0, 0.5), (2.0, 0.25), (4.0, 3.0)]:
                assert pointwise_hilbert_certificate(f, x1, x2, s).holds

    def test_detects_wrong_sign(self):
        f = bump(make_grid("line", 2049, 6.0))
        u = -drift_velocity(f, 0.0).values
        assert pointwise_hilbert_certificate(f, 1.0, 0.5, u=u).status == VIOLATED

    def test_increasing_field_reflected(self):
        f = bump(make_grid("line", 2049, 6.0))
        g = Field(f.grid, -f.values, Symmetry.EVEN)
        assert pointwise_hilbert_certificate(g, 1.0, 0.5).holds

    def test_trajectory(self, bump_run):
        assert pointwise_trajectory_certificate(bump_run).holds


class TestTelescoping:
    @pytest.mark.parametrize("s,alpha", [(0.0, 0.5), (0.5, 0.75), (-0.5, 0.75)])
    def test_random_fields(self, fields, s, alpha):
        w = WeightPair(alpha)
        for f in fields:
            assert telescoping_certificate(f, w, s).holds

    def test_alpha_below_s_skips_assembly(self):
        f = bump(make_grid("line", 2049, 6.0))
        r = telescoping_certificate(f, WeightPair(0.25), 0.5)
        assert r.status != VIOLATED and "alpha" in str(r.meta)

    def test_detects_wrong_sign(self):
        f = bump(make_grid("line", 2049, 6.0))
        u = -drift_velocity(f, 0.0).values
        assert telescoping_certificate(f, WeightPair(0.5), 0.0, u=u).status == VIOLATED

    def test_trajectory(self, bump_run):
        assert telescoping_trajectory_certificate(bump_run, WeightPair(0.5)).holds


@pytest.fixture(scope="module")
def riccati_report(bump_run):
    return riccati_F_certificate(bump_run, WeightPair(0.5))


class TestRiccati:
    def test_holds(self, riccati_report):
        assert riccati_report.holds

    def test_forecast(self, riccati_report):
        assert riccati_report.meta["forecast_formula"] == pytest.approx(45.17, abs=0.05)
        assert riccati_report.meta["forecast_exact"] > riccati_report.meta["forecast_formula"]
        assert riccati_report.meta["forecast_consistent"]

    def test_F_grows(self, riccati_report):
        F = [row[1] for row in riccati_report.meta["series"]]
        assert np.all(np.diff(F) > 0)


class TestTruncations:
    @settings(max_examples=30, deadline=None)
    @given(bump_params)
    def test_ladder_nonincreasing(self, params):
        f = bumps_field(params, make_grid("line", 1025, 8.0))
        f = Field(f.grid, f.values / f.values.max(), Symmetry.EVEN_MONOTONE)
        a = degiorgi_levels(f, 8)
        assert np.all(np.diff(a) <= 1e-15)

    def test_truncations_nonnegative(self):
        f = bump(make_grid("line", 257, 6.0), 1.0)
        for g in truncations(f, 6):
            assert g.values.min() >= 0.0

    def test_interpolation_random(self, fields):
        for f in fields:
            r = interpolation_certificate(f)
            assert r.holds and r.meta["ratio"] <= 1 + 1 / np.pi + 1e-3

    def test_degiorgi_bump(self, bump_run):
        r = degiorgi_certificate(bump_run)
        assert r.within()
        assert r.meta.get("under_resolved")

    def test_degiorgi_viscous(self, viscous_run):
        assert degiorgi_certificate(viscous_run).within()


class TestBarrier:
    def test_default_holds(self, bump_run, viscous_run):
        assert barrier_certificate(bump_run).holds
        assert barrier_certificate(viscous_run).holds

    def test_small_A_violated(self, bump_run):
        A = analytic_constants().A / 100
        r = barrier_certificate(bump_run, A=A)
        assert r.status == VIOLATED and r.location["t"] < 0.5


class TestTrackers:
    def test_maxflow(self, bump_run):
        r = maxflow_tracker(bump_run)
        assert r.holds

    def test_conjecture_status(self, bump_run):
        r = conjecture_trackers(bump_run)
        assert r.status == NOT_APPLICABLE
        assert [row[0] for row in r.meta["series"]] == bump_run.times
        assert r.meta["columns"][0] == "t"

    def test_linfty_single_run(self, viscous_run):
        r = linfty_decay_certificate([viscous_run])
        assert r.holds


class TestStationary:
    def test_forward_pair(self):
        theta, f = forward_stationary_pair()
        assert stationary_holder_certificate(theta, f).holds

    def test_mismatched_pair_not_applicable(self):
        theta, f = forward_stationary_pair()
        r = stationary_holder_certificate(theta, Field(f.grid, 2 * f.values + 1.0))
        assert r.status == NOT_APPLICABLE

    def test_log_modulus_random(self, fields):
        for f in fields[:20]:
            assert log_modulus_certificate(f, max_nodes=512).holds


class TestRecorder:
    def test_row_columns(self):
        f = bump(make_grid("line", 513, 6.0))
        row = snapshot_recorder(f)(0.0, f).as_row()
        assert list(row)[:2] == ["t", "norm_l1"]
        assert {"F_alpha", "lambda_theta_min", "holder_half", "barrier_margin", "a_8"} <= set(row)
        assert row["barrier_margin"] == np.inf
