import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccf.core_fields import (
    Field,
    FieldError,
    GridError,
    Symmetry,
    field_from_bytes,
    field_from_function,
    field_to_bytes,
    holder_seminorm,
    hhalf_fourier,
    hhalf_sq,
    make_grid,
    norms,
    read_csv,
    rescale,
    write_csv,
)
from ccf.exact_solutions import expanding_semicircle, pde_residual


class TestGrid:
    def test_periodic_spacing(self):
        assert make_grid("periodic", 8, 2 * np.pi).h == pytest.approx(np.pi / 4)

    def test_line_nodes(self):
        np.testing.assert_array_equal(make_grid("line", 5, 1.0).x, [-1, -0.5, 0, 0.5, 1])

    @pytest.mark.parametrize("topology,n", [("periodic", 7), ("periodic", 100), ("line", 6), ("line", 4)])
    def test_rejects_bad_sizes(self, topology, n):
        with pytest.raises(GridError):
            make_grid(topology, n, 1.0)

    @pytest.mark.parametrize("n", [9, 513, 4097])
    def test_line_nodes_antisymmetric(self, n):
        g = make_grid("line", n, 3.0)
        assert g.x[g.origin] == 0.0
        np.testing.assert_array_equal(g.x, -g.x[g.mirror])
        assert g.h * (n - 1) == pytest.approx(2 * g.L)


class TestField:
    def test_even_mirroring_is_exact(self):
        g = make_grid("line", 101, 2.0)
        rng = np.random.default_rng(3)
        f = Field(g, rng.standard_normal(g.n), Symmetry.EVEN)
        np.testing.assert_array_equal(f.values, f.values[g.mirror])

    def test_rejects_non_monotone(self):
        g = make_grid("line", 101, 2.0)
        with pytest.raises(FieldError):
            Field(g, np.cos(3 * g.x) + 2, Symmetry.EVEN_MONOTONE)

    def test_rejects_nan(self):
        g = make_grid("line", 11, 1.0)
        v = np.zeros(11)
        v[3] = np.nan
        with pytest.raises(FieldError):
            Field(g, v)

    def test_binary_round_trip(self):
        g = make_grid("line", 65, 2.0)
        f = Field(g, np.exp(-g.x**2), Symmetry.EVEN_MONOTONE)
        h = field_from_bytes(field_to_bytes(f))
        assert h.grid == g and h.symmetry is Symmetry.EVEN_MONOTONE
        np.testing.assert_array_equal(h.values, f.values)

    def test_csv_round_trip(self, tmp_path):
        g = make_grid("line", 33, 2.0)
        f = Field(g, np.exp(-g.x**2))
        write_csv(f, tmp_path / "f.csv")
        h = read_csv(tmp_path / "f.csv")
        np.testing.assert_array_equal(h.values, f.values)


class TestNorms:
    def test_constant_field(self):
        g = make_grid("line", 101, 2.0)
        r = norms(Field(g, np.full(g.n, 3.0)))
        assert r.l1 == pytest.approx(3.0 * g.measure())
        assert r.hhalf_sq == pytest.approx(0.0, abs=1e-12)
        assert r.w11 == 0.0

    def test_semicircle_area(self):
        g = make_grid("line", 8193, 1.5)
        f = field_from_function(g, lambda y: np.sqrt(np.clip(1 - y * y, 0, None)))
        assert norms(f).l1 == pytest.approx(np.pi / 2, abs=1e-4)

    def test_gaussian_seminorm(self):
        # int |xi| |theta^|^2 dxi / (2 pi) = 1/sqrt(2 pi) * ... = 1 for exp(-x^2)
        g = make_grid("line", 8193, 40.0)
        f = field_from_function(g, lambda y: np.exp(-y * y))
        assert hhalf_sq(f) == pytest.approx(1.0, rel=1e-5)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_backends_agree(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid("periodic", 1024)
        k = np.arange(1, 9)
        a, b = rng.standard_normal((2, k.size)) / k**2
        f = Field(g, np.cos(np.outer(g.x, k)) @ a + np.sin(np.outer(g.x, k)) @ b)
        assert hhalf_sq(f) == pytest.approx(hhalf_fourier(f), rel=1e-3)

    @given(st.lists(st.floats(-10, 10), min_size=9, max_size=9))
    def test_osc_is_max_minus_min(self, vals):
        g = make_grid("line", 9, 1.0)
        r = norms(Field(g, vals))
        assert r.osc == r.vmax - r.vmin


class TestHolder:
    def test_constant(self):
        g = make_grid("line", 101, 1.0)
        assert holder_seminorm(Field(g, np.ones(g.n)), 0.5).seminorm == 0.0

    def test_sqrt_abs(self):
        g = make_grid("line", 401, 1.0)
        est = holder_seminorm(Field(g, np.sqrt(np.abs(g.x))), 0.5, mode="exact")
        assert est.seminorm == pytest.approx(1.0)
        assert 0.0 in est.witness_pair

    def test_linear_on_unit_interval(self):
        g = make_grid("line", 201, 1.0)
        est = holder_seminorm(Field(g, g.x), 0.5, sub_interval=(0.0, 1.0), mode="exact")
        assert est.seminorm == pytest.approx(1.0)
        assert est.witness_pair == (0.0, 1.0)

    @given(st.floats(1.0, 50.0))
    def test_scales_linearly(self, lam):
        g = make_grid("line", 129, 1.0)
        f = Field(g, np.exp(-4 * g.x**2))
        base = holder_seminorm(f, 0.5).seminorm
        assert holder_seminorm(Field(g, lam * f.values), 0.5).seminorm == pytest.approx(lam * base, rel=1e-12)


class TestRescale:
    def test_identity(self):
        fn = lambda t, x: np.sin(x) * t
        np.testing.assert_array_equal(rescale(fn)(0.3, np.arange(3.0)), fn(0.3, np.arange(3.0)))

    def test_dissipative_mode_unit_gamma(self):
        fn = lambda t, x: t + x
        assert rescale(fn, b=2.0, gamma=1.0)(1.0, 1.0) == fn(2.0, 2.0)

    def test_semicircle_stays_a_solution(self):
        sol = expanding_semicircle()
        scaled = rescale(sol.fn(), a=2.0, b=2.0)
        g = make_grid("line", 4097, 2.0)
        r = pde_residual(scaled, 1.0, g)
        # the scaled semicircle has its edge at |x| = 1
        m = np.abs(g.x) <= 0.9
        assert r.field.values[m].max() < 1e-3
