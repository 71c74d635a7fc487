"""Grid, spectral operators, and the one-sided exponential kernels.

The expensive checks compare against adaptive quadrature of the continuum
kernels; the cheap ones are closed forms. Tolerances for the marching
convolution follow its measured fourth-order convergence.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from chbreak import (
    EdgeDecayError,
    Field,
    Grid,
    band_limit,
    check_edge_decay,
    conv_P_minus,
    conv_P_plus,
    dealiased_product,
    dealiased_square,
    deriv,
    h1_norm_sq,
    helmholtz_inverse,
    interp,
    resample,
    second_deriv,
    smoothed_edge_decay,
    tail_fraction,
)
from chbreak.grid import _exp_moments, from_spectrum, spectrum

L = 30.0

# decaying, asymmetric, infinitely smooth; used wherever the continuum
# kernel integrals are the reference
def _bump(y):
    return np.exp(-0.5 * y * y) * (1.0 + 0.3 * np.sin(2.0 * y))


def _plus_oracle(x0):
    val, _ = quad(lambda y: 0.5 * math.exp(y - x0) * _bump(y), -np.inf, x0,
                  epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def _minus_oracle(x0):
    val, _ = quad(lambda y: 0.5 * math.exp(x0 - y) * _bump(y), x0, np.inf,
                  epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def _band_noise(grid, seed=7, amplitude=1.0):
    rng = np.random.default_rng(seed)
    coef = np.zeros(grid.n_points // 2 + 1, dtype=complex)
    coef[1:grid.kc + 1] = rng.standard_normal(grid.kc) + 1j * rng.standard_normal(grid.kc)
    u = from_spectrum(grid, coef)
    return Field(grid, amplitude * u.values / u.max_abs)


class TestGridBasics:
    def test_geometry(self):
        g = Grid(L, 1024)
        assert g.dx * g.n_points == pytest.approx(2.0 * L)
        assert g.x[0] == -L
        assert g.x[-1] == pytest.approx(L - g.dx)
        assert np.allclose(np.diff(g.wavenumbers), np.pi / L)
        assert g.kc == 341
        assert g.padded_points == 1536

    @pytest.mark.parametrize("n_bad", [0, 8, 12, 24, 100, 1000, -256])
    def test_rejects_bad_sizes(self, n_bad):
        with pytest.raises(ValueError):
            Grid(L, n_bad)

    @pytest.mark.parametrize("n_ok", [16, 32, 256, 4096])
    def test_accepts_powers_of_two(self, n_ok):
        Grid(L, n_ok)

    @pytest.mark.parametrize("half_length", [0.0, -3.0, math.inf, math.nan])
    def test_rejects_bad_lengths(self, half_length):
        with pytest.raises(ValueError):
            Grid(half_length, 256)


class TestDerivatives:
    @pytest.mark.parametrize("j", [1, 5, 113])
    def test_single_mode_exact(self, j):
        g = Grid(L, 512)
        k = np.pi * j / L
        s = Field(g, np.sin(k * g.x))
        c = Field(g, np.cos(k * g.x))
        assert np.allclose(deriv(s).values, k * c.values, atol=1e-11)
        assert np.allclose(deriv(c).values, -k * s.values, atol=1e-11)
        assert np.allclose(second_deriv(s).values, -k * k * s.values, atol=1e-9)

    def test_helmholtz_inverse_single_mode(self):
        g = Grid(L, 512)
        j = 9
        k = np.pi * j / L
        s = Field(g, np.sin(k * g.x))
        assert np.allclose(helmholtz_inverse(s).values, s.values / (1.0 + k * k),
                           atol=1e-14)

    def test_identity_on_band_limited_noise(self):
        # (1 - d_xx) o helmholtz_inverse must be the identity on the band
        g = Grid(L, 1024)
        u = _band_noise(g)
        inv = helmholtz_inverse(u)
        back = inv + (-1.0) * second_deriv(inv)
        rel = np.max(np.abs(back.values - u.values)) / u.max_abs
        assert rel < 1e-10

    def test_h1_norm_closed_form(self):
        g = Grid(L, 512)
        j = 11
        s = Field(g, np.sin(np.pi * j * g.x / L))
        exact = L * (1.0 + (np.pi * j / L) ** 2)
        assert h1_norm_sq(s) == pytest.approx(exact, rel=1e-12)

    def test_h1_norm_zero(self):
        g = Grid(L, 256)
        assert h1_norm_sq(Field(g, np.zeros(256))) == 0.0


# absolute error of the marching kernels against adaptive quadrature of the
# continuum integrals; fourth-order in dx
CONV_TOLERANCES = {128: 1e-3, 256: 8e-5, 512: 5e-6, 1024: 5e-7}


class TestOneSidedKernels:
    # probe points shared by every grid in the table (multiples of 60/128)
    probes = (-1.875, 0.46875, 2.8125)

    @pytest.mark.parametrize("n", sorted(CONV_TOLERANCES))
    def test_against_quadrature(self, n):
        g = Grid(L, n)
        u = Field(g, _bump(g.x))
        p = conv_P_plus(u, 1e-5)
        m = conv_P_minus(u, 1e-5)
        worst = 0.0
        for x0 in self.probes:
            j = int(round((x0 + L) / g.dx))
            assert g.x[j] == pytest.approx(x0, abs=1e-12)
            worst = max(worst,
                        abs(p.values[j] - _plus_oracle(x0)),
                        abs(m.values[j] - _minus_oracle(x0)))
        assert worst < CONV_TOLERANCES[n]

    def test_fourth_order_convergence(self):
        errs = []
        for n in (128, 256, 512):
            g = Grid(L, n)
            u = Field(g, _bump(g.x))
            p = conv_P_plus(u, 1e-5)
            j = int(round((0.46875 + L) / g.dx))
            errs.append(abs(p.values[j] - _plus_oracle(0.46875)))
        assert errs[0] / errs[1] > 8.0
        assert errs[1] / errs[2] > 8.0

    def test_sum_matches_helmholtz_inverse(self):
        # two routes to P * f: one-sided marching vs the Fourier multiplier
        g = Grid(L, 1024)
        u = Field(g, _bump(g.x))
        total = conv_P_plus(u, 1e-5) + conv_P_minus(u, 1e-5)
        assert np.max(np.abs(total.values - helmholtz_inverse(u).values)) < 1e-6

    def test_difference_matches_derivative(self):
        g = Grid(L, 1024)
        u = Field(g, _bump(g.x))
        diff = conv_P_minus(u, 1e-5) + (-1.0) * conv_P_plus(u, 1e-5)
        ref = deriv(helmholtz_inverse(u))
        assert np.max(np.abs(diff.values - ref.values)) < 1e-6

    def test_quarter_square_lower_bound(self):
        # P+- * (u^2 + ux^2/2) >= u^2/4 pointwise, the coercivity that makes
        # the one-sided kernels control the local amplitude
        g = Grid(L, 1024)
        u = Field(g, np.exp(-0.5 * (g.x - 1.0) ** 2) * np.cos(1.3 * g.x))
        f2 = Field(g, u.values ** 2 + 0.5 * deriv(u).values ** 2)
        for conv in (conv_P_plus, conv_P_minus):
            slack = conv(f2, 1e-5).values - 0.25 * u.values ** 2
            assert np.min(slack) > -1e-12

    def test_rejects_non_decaying_input(self):
        g = Grid(L, 256)
        with pytest.raises(EdgeDecayError):
            conv_P_plus(Field(g, np.cos(np.pi * g.x / L)), 1e-8)

    def test_exp_moments_match_quadrature(self):
        for z in (0.6, -0.6, 0.0586, -0.0586, 1e-3):
            mom = _exp_moments(z)
            for p in range(4):
                ref, _ = quad(lambda t: t ** p * math.exp(z * t), 0.0, 1.0,
                              epsabs=1e-15)
                assert mom[p] == pytest.approx(ref, abs=1e-14)


class TestDealiasing:
    def test_product_trig_identity_inside_band(self):
        g = Grid(L, 1024)
        k1, k2 = 50, 120
        a = Field(g, np.sin(np.pi * k1 * g.x / L))
        b = Field(g, np.sin(np.pi * k2 * g.x / L))
        expect = 0.5 * (np.cos(np.pi * (k2 - k1) * g.x / L)
                        - np.cos(np.pi * (k2 + k1) * g.x / L))
        assert np.max(np.abs(dealiased_product(a, b).values - expect)) < 1e-12

    def test_product_drops_out_of_band_sum(self):
        # k1 + k2 beyond the cutoff: only the difference mode survives,
        # with no aliased contamination anywhere in the band
        g = Grid(L, 1024)
        k1, k2 = 100, 300
        a = Field(g, np.sin(np.pi * k1 * g.x / L))
        b = Field(g, np.sin(np.pi * k2 * g.x / L))
        expect = 0.5 * np.cos(np.pi * (k2 - k1) * g.x / L)
        assert np.max(np.abs(dealiased_product(a, b).values - expect)) < 1e-12

    def test_square_matches_product(self):
        g = Grid(L, 512)
        u = _band_noise(g, seed=3)
        assert np.allclose(dealiased_square(u).values,
                           dealiased_product(u, u).values, atol=1e-13)

    def test_integration_by_parts_cancellation(self):
        # sum of u * (u u_x) dx vanishes exactly for band-limited u; this
        # cancellation is what the conservation of the quadratic energy
        # rests on
        g = Grid(L, 1024)
        u = _band_noise(g)
        adv = dealiased_product(u, deriv(u))
        assert abs(np.sum(u.values * adv.values)) * g.dx < 1e-13

    def test_band_limit_is_projection(self):
        g = Grid(L, 512)
        u = Field(g, _bump(g.x))
        once = band_limit(u)
        twice = band_limit(once)
        assert np.allclose(once.values, twice.values, atol=1e-15)
        coef = spectrum(once)
        assert np.max(np.abs(coef[g.kc + 1:])) < 1e-13 * u.max_abs


class TestInterpAndResample:
    def test_nodal_exactness(self):
        g = Grid(L, 512)
        u = _band_noise(g, seed=11)
        for j in (0, 7, 255, 511):
            assert interp(u, g.x[j]) == pytest.approx(u.values[j], abs=1e-12)

    def test_matches_fine_resample_off_grid(self):
        g = Grid(L, 512)
        u = _band_noise(g, seed=11)
        fine = resample(u, 4096)
        for j in (5, 1003, 4001):
            assert interp(u, fine.grid.x[j]) == pytest.approx(fine.values[j],
                                                              abs=1e-8)

    def test_resample_keeps_shared_nodes(self):
        g = Grid(L, 512)
        u = _band_noise(g, seed=2)
        fine = resample(u, 2048)
        assert np.max(np.abs(fine.values[::4] - u.values)) < 1e-12

    def test_resample_refuses_to_coarsen(self):
        g = Grid(L, 512)
        with pytest.raises(ValueError):
            resample(_band_noise(g), 256)

    def test_periodic_wrap(self):
        g = Grid(L, 256)
        u = _band_noise(g, seed=5)
        assert interp(u, -L) == pytest.approx(interp(u, L), abs=1e-10)


class TestSpectralMassAndEdges:
    def test_tail_fraction_two_modes(self):
        g = Grid(L, 1024)
        spec = np.zeros(g.n_points // 2 + 1, dtype=complex)
        spec[2] = 3.0
        spec[g.kc - 1] = 1.0   # inside the top octave [kc//2, kc]
        u = from_spectrum(g, spec)
        assert tail_fraction(u) == pytest.approx(0.1, rel=1e-12)

    def test_tail_fraction_low_band_zero(self):
        g = Grid(L, 1024)
        spec = np.zeros(g.n_points // 2 + 1, dtype=complex)
        spec[3] = 1.0
        assert tail_fraction(from_spectrum(g, spec)) < 1e-30

    def test_raw_edge_check(self):
        g = Grid(L, 512)
        good = Field(g, np.exp(-0.5 * g.x ** 2))
        assert check_edge_decay(good, 1e-8)
        shifted = Field(g, np.exp(-0.5 * (g.x + L - 3.0) ** 2))
        assert not check_edge_decay(shifted, 1e-8)

    def test_smoothed_check_forgives_band_edge_ripple(self):
        # a tiny ripple at the band edge fails the raw test but carries no
        # low-frequency mass; the smoothed test must see through it
        g = Grid(L, 1024)
        ripple = 1e-7 * np.cos(np.pi * g.kc * g.x / L)
        u = Field(g, np.exp(-0.5 * g.x ** 2) + ripple)
        assert not check_edge_decay(u, 1e-8)
        assert smoothed_edge_decay(u, 1e-8)

    def test_smoothed_check_still_sees_real_mass(self):
        g = Grid(L, 1024)
        u = Field(g, np.exp(-0.5 * (g.x + L - 3.0) ** 2))
        assert not smoothed_edge_decay(u, 1e-8)


class TestFieldAlgebra:
    def test_linear_ops(self):
        g = Grid(L, 256)
        a = _band_noise(g, seed=1)
        b = _band_noise(g, seed=2)
        assert np.allclose((a + b).values, a.values + b.values)
        assert np.allclose((a - b).values, a.values - b.values)
        assert np.allclose((2.5 * a).values, 2.5 * a.values)
        assert np.allclose((a * 2.5).values, 2.5 * a.values)
        assert np.allclose((-a).values, -a.values)
        assert a.max_abs == np.max(np.abs(a.values))

    def test_grid_mismatch_rejected(self):
        a = _band_noise(Grid(L, 256), seed=1)
        b = _band_noise(Grid(L, 512), seed=1)
        with pytest.raises(ValueError):
            a + b


@settings(max_examples=25, deadline=None)
@given(shift=st.integers(min_value=-512, max_value=512),
       seed=st.integers(min_value=0, max_value=2 ** 16))
def test_translation_equivariance(shift, seed):
    """Shifting by whole cells commutes with every Fourier-side operator."""
    g = Grid(L, 512)
    u = _band_noise(g, seed=seed)
    moved = Field(g, np.roll(u.values, shift))
    for op in (deriv, second_deriv, helmholtz_inverse, dealiased_square):
        direct = op(moved).values
        rolled = np.roll(op(u).values, shift)
        assert np.max(np.abs(direct - rolled)) < 1e-10
