import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import dawsn

from ccf.core_fields import (
    Field,
    Symmetry,
    dissipation_parts,
    field_from_function,
    hhalf_sq,
    make_grid,
)
from ccf.ops import (
    QUADRATURE,
    SPECTRAL,
    analytic_constants,
    barrier_function,
    dissipation_density,
    drift_velocity,
    frac_laplacian,
    hilbert,
    identity_suite,
    lambda_barrier_check,
    prop_identity_residual,
)
from ccf.ops.constants import (
    c0_closed_form,
    c0_quadrature,
    c_alpha_exact,
    c_alpha_formula,
    c_alpha_formula_direct,
    drift_ratio,
)

from fieldgen import bump_params, bumps_field, random_fields


@pytest.fixture(scope="module")
def periodic():
    return make_grid("periodic", 256)


@pytest.fixture(scope="module")
def wide_line():
    return make_grid("line", 8193, 40.0)


class TestSpectral:
    @pytest.mark.parametrize("k", [1, 2, 5, 17])
    def test_hilbert_cos(self, periodic, k):
        h = hilbert(Field(periodic, np.cos(k * periodic.x)), SPECTRAL).values
        np.testing.assert_allclose(h, -np.sin(k * periodic.x), atol=1e-12)

    @pytest.mark.parametrize("k", [1, 3, 9])
    def test_lambda_cos(self, periodic, k):
        v = frac_laplacian(Field(periodic, np.cos(k * periodic.x)), 1.0, SPECTRAL).values
        np.testing.assert_allclose(v, k * np.cos(k * periodic.x), atol=1e-11)

    @pytest.mark.parametrize("gamma", [0.3, 1.0, 1.7])
    def test_constant_annihilated(self, periodic, gamma):
        v = frac_laplacian(Field(periodic, np.full(periodic.n, 2.5)), gamma, SPECTRAL).values
        np.testing.assert_allclose(v, 0.0, atol=1e-13)

    @pytest.mark.parametrize("s", [-0.5, 0.25, 0.5])
    def test_drift_of_sine(self, periodic, s):
        k = 4
        u = drift_velocity(Field(periodic, np.sin(k * periodic.x)), s, SPECTRAL).values
        np.testing.assert_allclose(u, k**s * np.cos(k * periodic.x), atol=1e-11)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_convention_lock(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid("periodic", 256)
        k = np.arange(1, 17)
        a, b = rng.standard_normal((2, k.size)) / k
        C, S = np.cos(np.outer(g.x, k)), np.sin(np.outer(g.x, k))
        f = Field(g, C @ a + S @ b)
        df = Field(g, -S @ (a * k) + C @ (b * k))
        lhs = hilbert(df, SPECTRAL).values
        rhs = -frac_laplacian(f, 1.0, SPECTRAL).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, np.max(np.abs(rhs)))


class TestQuadrature:
    def test_semicircle(self):
        g = make_grid("line", 8193, 2.0)
        f = field_from_function(g, lambda y: -np.sqrt(np.clip(1 - y * y, 0, None)))
        m = np.abs(g.x) <= 0.9
        assert np.max(np.abs(hilbert(f, QUADRATURE).values[m] - g.x[m])) < 1e-3

    def test_gaussian_dawson(self, wide_line):
        f = field_from_function(wide_line, lambda y: np.exp(-y * y))
        m = np.abs(wide_line.x) <= 10
        exact = -2 / np.sqrt(np.pi) * dawsn(wide_line.x[m])
        np.testing.assert_allclose(hilbert(f).values[m], exact, atol=1e-6)

    def test_lambda_of_half_power(self):
        g = make_grid("line", 8193, 8.0)
        f = field_from_function(g, lambda y: np.sqrt(np.clip(y, 0, None)))
        v = frac_laplacian(f, 1.0).values
        neg = (g.x <= -0.5) & (g.x >= -4)
        pos = (g.x >= 0.5) & (g.x <= 4)
        np.testing.assert_allclose(v[neg], -0.5 / np.sqrt(-g.x[neg]), atol=1e-3)
        np.testing.assert_allclose(v[pos], 0.0, atol=1e-3)

    def test_drift_zero_is_hilbert(self, wide_line):
        f = field_from_function(wide_line, lambda y: 1 / (1 + y * y))
        np.testing.assert_array_equal(drift_velocity(f, 0.0).values, hilbert(f).values)

    def test_drift_continuous_at_zero(self, wide_line):
        f = field_from_function(wide_line, lambda y: np.exp(-y * y))
        h = hilbert(f).values
        u = drift_velocity(f, 1e-3).values
        assert np.max(np.abs(u - h)) <= 1e-2 * np.max(np.abs(h))

    def test_drift_backends_agree(self, wide_line):
        gp = make_grid("periodic", 8192, 80.0)
        fs = Field(gp, np.exp(-gp.x**2))
        fq = field_from_function(wide_line, lambda y: np.exp(-y * y))
        us = drift_velocity(fs, 0.5, SPECTRAL).values
        uq = drift_velocity(fq, 0.5, QUADRATURE).values
        m = np.abs(wide_line.x) <= 5
        # both grids share the nodes (i - n/2) h with h = 80/8192
        assert np.max(np.abs(us[: gp.n][m[:-1]] - uq[:-1][m[:-1]])) < 1e-3

    def test_hilbert_of_even_is_odd(self):
        for f in random_fields(5, n=1025):
            h = hilbert(f).values
            np.testing.assert_array_equal(h, -h[f.grid.mirror])

    @settings(max_examples=40, deadline=None)
    @given(bump_params, st.floats(0.1, 2.0), st.floats(0.05, 1.0), st.floats(0.3, 2.0))
    def test_comparison_principle(self, params, x0, c, w):
        # f - g >= 0 on [0, x0] and <= 0 beyond, so H(f - g)(x0) <= 0
        g = make_grid("line", 2049, 8.0)
        base = bumps_field(params, g)
        d = c * (x0**2 - g.x**2) * np.exp(-((g.x / w) ** 2))
        f = Field(g, base.values + d, Symmetry.EVEN)
        gg = Field(g, base.values, Symmetry.EVEN)
        i = g.nearest(x0)
        x0 = g.x[i]
        d = c * (x0**2 - g.x**2) * np.exp(-((g.x / w) ** 2))
        f = Field(g, base.values + d, Symmetry.EVEN)
        assert hilbert(f).values[i] <= hilbert(gg).values[i] + 1e-8

    @pytest.mark.parametrize("x0", [0.01, 0.05, 0.1, 0.25, 0.5])
    @pytest.mark.parametrize("A", [1.0, 34.0])
    def test_tangent_bound(self, x0, A):
        g = make_grid("line", 8193, 4.0)
        fn = lambda y: A * np.clip(1 - np.sqrt(np.maximum(np.abs(y), x0)), 0, None)
        f = field_from_function(g, fn, Symmetry.EVEN_MONOTONE)
        c0 = analytic_constants().c0
        assert hilbert(f).values[g.nearest(x0)] <= -c0 * A * np.sqrt(x0)


class TestDissipation:
    def test_constant(self):
        g = make_grid("line", 257, 4.0)
        np.testing.assert_allclose(dissipation_density(Field(g, np.full(g.n, 1.5))).values, 0.0, atol=1e-12)

    def test_nonnegative_and_integrates_to_seminorm(self):
        for f in random_fields(100, n=513):
            d, exterior = dissipation_parts(f)
            assert d.min() >= 0.0
            np.testing.assert_array_equal(dissipation_density(f).values, d)
            assert np.dot(f.grid.weights, d) + exterior == pytest.approx(hhalf_sq(f), rel=1e-6)


class TestIdentities:
    @pytest.mark.parametrize("name,fn", [("gaussian", lambda y: np.exp(-y * y)),
                                         ("lorentzian", lambda y: 1 / (1 + y * y))])
    def test_suite_residuals(self, wide_line, name, fn):
        for rep in identity_suite(field_from_function(wide_line, fn)):
            assert rep.residual < 1e-6, rep.identity_id

    def test_odd_function_zero_mass(self, wide_line):
        rep = identity_suite(field_from_function(wide_line, lambda y: y * np.exp(-y * y)))[0]
        assert abs(rep.extras["integral"]) < 1e-12
        assert rep.residual < 1e-6

    def test_semicircle_mass(self):
        g = make_grid("line", 8193, 2.0)
        f = field_from_function(g, lambda y: np.sqrt(np.clip(1 - y * y, 0, None)))
        assert identity_suite(f)[0].extras["integral"] == pytest.approx(np.pi / 2, abs=1e-5)

    def test_origin_identity_lorentzian(self, wide_line):
        rep = prop_identity_residual(field_from_function(wide_line, lambda y: 1 / (1 + y * y)))
        assert rep.residual < 1e-4
        assert rep.lhs == pytest.approx(0.25, abs=1e-4)

    def test_origin_identity_constant(self):
        g = make_grid("line", 1025, 10.0)
        rep = prop_identity_residual(field_from_function(g, lambda y: np.full_like(y, 2.0)))
        assert abs(rep.lhs) < 1e-10 and abs(rep.rhs) < 1e-10

    def test_origin_identity_odd(self, wide_line):
        rep = prop_identity_residual(field_from_function(wide_line, lambda y: y * np.exp(-y * y)))
        assert rep.extras["rhs_via_g"] == pytest.approx(rep.rhs, abs=1e-5)


class TestBarrier:
    def test_values(self):
        np.testing.assert_array_equal(barrier_function([0.0, 2.0, 5.0]), [0.0, 1.0, 1.0])

    def test_lower_bound(self):
        rep = lambda_barrier_check()
        assert rep.lhs >= 1 / (2 * np.pi) - 1e-2

    def test_two_resolutions_agree(self):
        a = lambda_barrier_check(make_grid("line", 8193, 8.0)).extras["lambda_b_1_5"]
        b = lambda_barrier_check(make_grid("line", 16385, 8.0)).extras["lambda_b_1_5"]
        assert abs(a - b) < 1e-3


class TestConstants:
    def test_c0(self):
        assert c0_quadrature() == pytest.approx(0.1174, abs=1e-4)
        assert c0_quadrature() == pytest.approx(c0_closed_form(), rel=1e-12)
        assert analytic_constants().A == pytest.approx(4 / c0_closed_form())

    def test_c_alpha_formula(self):
        assert c_alpha_formula(0.5) == pytest.approx(17.69, abs=5e-3)
        assert c_alpha_formula(0.5) == pytest.approx(c_alpha_formula_direct(0.5), rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 0.5])
    def test_exact_sum_exceeds_closed_form(self, alpha):
        # the closed form undercounts the dyadic sum for small alpha
        assert c_alpha_exact(alpha) > c_alpha_formula(alpha)

    def test_exact_sum_at_half(self):
        assert c_alpha_exact(0.5) == pytest.approx(20.87, abs=5e-3)

    def test_dyadic_sum_needs_alpha_above_s(self):
        with pytest.raises(ValueError):
            c_alpha_exact(0.4, 0.5)

    @pytest.mark.parametrize("s", np.linspace(-0.9, 0.9, 13))
    def test_drift_ratio_reported(self, s):
        r = drift_ratio(s)
        assert np.isfinite(r) and 0.2 < r < 0.55

    def test_provenance_tags(self):
        for row in analytic_constants().table():
            assert row["provenance"] in ("closed-form", "derived-oracle", "measured")
