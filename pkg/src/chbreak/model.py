"""The evolution law, dissipation profiles, and initial data.

The equation is the nonlocal form of a Camassa-Holm-type shallow water
model with a cubic correction and time-dependent linear damping:

    u_t + u u_x + d_x (1 - d_xx)^(-1) [ u^2 + u_x^2/2 + h(u) ] + lambda(t) u = 0
    h(u) = u^3 - (3/2) u^2

Damping multiplies the H^1 energy by exp(-2 int_0^t lambda); everything else
conserves it. The slope equation obtained by differentiating in x is also
provided, since the minimum slope drives wave breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EdgeDecayError, SearchError
from .grid import (
    Field,
    Grid,
    band_limit,
    check_edge_decay,
    from_spectrum,
    _pad_to_fine,
    _truncate_from_fine,
)

DATUM_FAMILIES = ("gaussian_derivative", "sech_squared", "antisym_peak", "samples")
PROFILE_KINDS = ("constant", "linear_ramp", "sinusoidal", "piecewise")


# ---------------------------------------------------------------------------
# Dissipation


@dataclass(frozen=True)
class DissipationProfile:
    """Continuous damping coefficient lambda(t) with a certified ceiling.

    delta_sup must dominate lambda on the horizon of interest; the blow-up
    criteria are stated in terms of this ceiling, so it is supplied rather
    than estimated.
    """

    kind: str
    params: tuple[float, ...]
    delta_sup: float
    knot_times: tuple[float, ...] = ()
    knot_values: tuple[float, ...] = ()

    @classmethod
    def constant(cls, value: float, delta_sup: float | None = None) -> "DissipationProfile":
        if delta_sup is None:
            delta_sup = value
        return cls("constant", (float(value),), float(delta_sup))

    @classmethod
    def linear_ramp(cls, start: float, ramp_rate: float, delta_sup: float) -> "DissipationProfile":
        return cls("linear_ramp", (float(start), float(ramp_rate)), float(delta_sup))

    @classmethod
    def sinusoidal(cls, offset: float, amplitude: float, omega: float,
                   delta_sup: float | None = None) -> "DissipationProfile":
        if omega == 0.0:
            raise ConfigError("sinusoidal profile needs omega != 0")
        if delta_sup is None:
            delta_sup = offset + abs(amplitude)
        return cls("sinusoidal", (float(offset), float(amplitude), float(omega)), float(delta_sup))

    @classmethod
    def piecewise(cls, times, values, delta_sup: float | None = None) -> "DissipationProfile":
        ts = tuple(float(t) for t in times)
        vs = tuple(float(v) for v in values)
        if len(ts) != len(vs) or len(ts) < 2:
            raise ConfigError("piecewise profile needs matching times/values, at least two knots")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("piecewise profile times must be strictly increasing")
        if delta_sup is None:
            delta_sup = max(vs)
        return cls("piecewise", (), float(delta_sup), ts, vs)

    def rate(self, t: float) -> float:
        """lambda(t). Piecewise profiles are linear between knots and held
        constant beyond them."""
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "linear_ramp":
            start, ramp = self.params
            return start + ramp * t
        if self.kind == "sinusoidal":
            offset, amp, omega = self.params
            return offset + amp * math.sin(omega * t)
        ts, vs = self.knot_times, self.knot_values
        if t <= ts[0]:
            return vs[0]
        if t >= ts[-1]:
            return vs[-1]
        return float(np.interp(t, ts, vs))

    def integral(self, t: float) -> float:
        """int_0^t lambda, exact for every kind."""
        if self.kind == "constant":
            return self.params[0] * t
        if self.kind == "linear_ramp":
            start, ramp = self.params
            return start * t + 0.5 * ramp * t * t
        if self.kind == "sinusoidal":
            offset, amp, omega = self.params
            return offset * t + (amp / omega) * (1.0 - math.cos(omega * t))
        return self._piecewise_integral(t)

    def _piecewise_integral(self, t: float) -> float:
        ts, vs = np.asarray(self.knot_times), np.asarray(self.knot_values)
        if t <= ts[0]:
            return float(vs[0] * t)
        total = float(vs[0] * ts[0])  # constant extension left of the table
        upper = min(t, float(ts[-1]))
        for a, b, va, vb in zip(ts[:-1], ts[1:], vs[:-1], vs[1:]):
            if upper <= a:
                break
            end = min(b, upper)
            vend = va + (vb - va) * (end - a) / (b - a)
            total += 0.5 * (va + vend) * (end - a)
        if t > ts[-1]:
            total += float(vs[-1]) * (t - float(ts[-1]))
        return total

    def validate_horizon(self, t_end: float, n_sample: int = 2048) -> None:
        """Certify delta_sup >= lambda on [0, t_end]."""
        ts = np.linspace(0.0, t_end, n_sample)
        peak = max(self.rate(float(t)) for t in ts)
        if self.delta_sup < peak - 1e-9 * max(1.0, abs(peak)):
            raise ConfigError(
                f"delta_sup={self.delta_sup} is below max lambda ~ {peak:.6g} on [0, {t_end}]")

    def is_dissipative(self, t_end: float, n_sample: int = 2048) -> bool:
        """True when lambda stays nonnegative on [0, t_end]; the decay-based
        amplitude and localization bounds assume this."""
        ts = np.linspace(0.0, t_end, n_sample)
        return min(self.rate(float(t)) for t in ts) >= -1e-12


# ---------------------------------------------------------------------------
# Initial data


@dataclass(frozen=True)
class InitialDatum:
    """A one-parameter family member used to seed runs.

    width is the sole shape parameter (the Gaussian sigma or the sech
    width); amplitude scales the profile. The `samples` family carries raw
    node values instead.
    """

    family: str
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.family not in DATUM_FAMILIES:
            raise ConfigError(f"unknown datum family {self.family!r}")
        if self.family != "samples" and self.width <= 0.0:
            raise ConfigError("datum width must be positive")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        a = self.amplitude
        if self.family == "gaussian_derivative":
            return -a * self.width * z * np.exp(-0.5 * z * z)
        z = np.clip(z, -350.0, 350.0)   # sech^2 underflows to 0 long before
        if self.family == "sech_squared":
            return a / np.cosh(z) ** 2
        if self.family == "antisym_peak":
            return -a * z / np.cosh(z) ** 2
        raise ConfigError("samples datum has no off-grid evaluation")

    def derivative(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.family != "gaussian_derivative":
            z = np.clip(z, -350.0, 350.0)
        a = self.amplitude
        if self.family == "gaussian_derivative":
            return -a * (1.0 - z * z) * np.exp(-0.5 * z * z)
        if self.family == "sech_squared":
            return -(2.0 * a / self.width) * np.tanh(z) / np.cosh(z) ** 2
        if self.family == "antisym_peak":
            sech2 = 1.0 / np.cosh(z) ** 2
            return -(a / self.width) * sech2 * (1.0 - 2.0 * z * np.tanh(z))
        raise ConfigError("samples datum has no off-grid derivative")

    def analytic_min_slope(self) -> tuple[float, float] | None:
        """(location, value) of the global slope minimum, when closed-form."""
        a, w, c = self.amplitude, self.width, self.center
        if a <= 0.0:
            return None
        if self.family == "gaussian_derivative":
            return c, -a
        if self.family == "sech_squared":
            z_star = math.atanh(1.0 / math.sqrt(3.0))
            return c + w * z_star, -(4.0 / (3.0 * math.sqrt(3.0))) * a / w
        if self.family == "antisym_peak":
            return c, -a / w
        return None

    def reach(self) -> float:
        """Half-width of the interval outside which the profile is negligible."""
        if self.family == "gaussian_derivative":
            return 13.0 * self.width
        return 25.0 * self.width

    def energy(self, n_quad: int = 1 << 15) -> float:
        """H^1 energy of the line profile by dense trapezoid quadrature."""
        if self.family == "samples":
            raise ConfigError("samples datum energy requires a grid; use h1_norm_sq")
        r = self.reach()
        xs = np.linspace(self.center - r, self.center + r, n_quad + 1)
        u = self.evaluate(xs)
        du = self.derivative(xs)
        return float(np.trapezoid(u * u + du * du, xs))


def make_datum(datum: InitialDatum, grid: Grid, edge_tol: float = 1e-8) -> Field:
    """Sample the datum on the grid, band-limit it, and vet edge decay."""
    if datum.family == "samples":
        v = np.asarray(datum.values, dtype=float)
        if v.shape != (grid.n_points,):
            raise ConfigError(
                f"samples datum has {v.shape[0] if v.ndim == 1 else 'bad'} values, grid wants {grid.n_points}")
        raw = Field(grid, v)
    else:
        if datum.reach() > grid.half_length:
            raise EdgeDecayError(
                f"datum with width {datum.width:g} does not fit in [-{grid.half_length:g}, {grid.half_length:g})")
        raw = Field(grid, datum.evaluate(grid.x))
    out = band_limit(raw)
    if not check_edge_decay(out, edge_tol):
        raise EdgeDecayError("initial datum does not decay at the domain edges")
    return out


# ---------------------------------------------------------------------------
# Evolution operators


def _nonlinear_spectra(grid: Grid, v: np.ndarray):
    """Band-limited spectra of u^2, u_x^2, u u_x, u^3 for a state vector."""
    u_hat = np.fft.rfft(v)
    ux_hat = u_hat * (1j * grid.wavenumbers)
    ux_hat[-1] = 0.0
    u_fine = _pad_to_fine(grid, u_hat)
    ux_fine = _pad_to_fine(grid, ux_hat)
    sq_hat = _truncate_from_fine(grid, u_fine * u_fine)
    slopesq_hat = _truncate_from_fine(grid, ux_fine * ux_fine)
    advect_hat = _truncate_from_fine(grid, u_fine * ux_fine)
    cube_hat = _truncate_from_fine(grid, _pad_to_fine(grid, sq_hat) * u_fine)
    return u_hat, sq_hat, slopesq_hat, advect_hat, cube_hat


def h_eval(u: Field) -> Field:
    """h(u) = u^3 - (3/2) u^2 with fully dealiased products."""
    _, sq_hat, _, _, cube_hat = _nonlinear_spectra(u.grid, u.values)
    return from_spectrum(u.grid, cube_hat - 1.5 * sq_hat)


def rhs(u: Field, t: float, profile: DissipationProfile) -> Field:
    """Time derivative of u in the nonlocal form."""
    grid = u.grid
    _, sq_hat, slopesq_hat, advect_hat, cube_hat = _nonlinear_spectra(grid, u.values)
    flux_hat = cube_hat - 0.5 * sq_hat + 0.5 * slopesq_hat  # u^2 + ux^2/2 + h(u)
    grad_conv = flux_hat * grid.helmholtz_multiplier * (1j * grid.wavenumbers)
    grad_conv[-1] = 0.0
    out = np.fft.irfft(-advect_hat - grad_conv, grid.n_points)
    out -= profile.rate(t) * u.values
    return Field(grid, out)


def bounded_forcing(u: Field) -> Field:
    """B = u^2 + h(u) - P * (u^2 + u_x^2/2 + h(u)).

    This is the portion of the slope dynamics that stays bounded by the
    initial energy (|B| <= K) while the slope itself diverges.
    """
    grid = u.grid
    _, sq_hat, slopesq_hat, _, cube_hat = _nonlinear_spectra(grid, u.values)
    local_hat = cube_hat - 0.5 * sq_hat               # u^2 + h(u)
    flux_hat = local_hat + 0.5 * slopesq_hat
    return from_spectrum(grid, local_hat - flux_hat * grid.helmholtz_multiplier)


def slope_rhs(u: Field, t: float, profile: DissipationProfile) -> Field:
    """Time derivative of u_x: -ux^2/2 - u u_xx + B(u) - lambda(t) ux.

    Identical to deriv(rhs(u)) up to roundoff; kept as a separate route so
    the slope dynamics can be cross-checked against the direct one.
    """
    grid = u.grid
    u_hat = np.fft.rfft(u.values)
    k = grid.wavenumbers
    ux_hat = u_hat * (1j * k)
    ux_hat[-1] = 0.0
    uxx_hat = -u_hat * (k * k)
    u_fine = _pad_to_fine(grid, u_hat)
    ux_fine = _pad_to_fine(grid, ux_hat)
    uxx_fine = _pad_to_fine(grid, uxx_hat)
    sq_hat = _truncate_from_fine(grid, u_fine * u_fine)
    slopesq_hat = _truncate_from_fine(grid, ux_fine * ux_fine)
    bend_hat = _truncate_from_fine(grid, u_fine * uxx_fine)
    cube_hat = _truncate_from_fine(grid, _pad_to_fine(grid, sq_hat) * u_fine)
    local_hat = cube_hat - 0.5 * sq_hat
    flux_hat = local_hat + 0.5 * slopesq_hat
    forcing_hat = local_hat - flux_hat * grid.helmholtz_multiplier
    out_hat = -0.5 * slopesq_hat - bend_hat + forcing_hat - profile.rate(t) * ux_hat
    return from_spectrum(grid, out_hat)


# ---------------------------------------------------------------------------
# Supercritical datum search


@dataclass(frozen=True)
class BreakingSearchResult:
    datum: InitialDatum
    criterion: str
    delta: float
    point: float          # x1 for the mixed criterion, slope argmin otherwise
    extreme: float        # min slope, or min of (slope + |u0|) for mixed
    threshold: float      # -(delta + sqrt(delta^2 + 2K))
    margin: float         # (threshold - extreme) / |threshold|
    energy: float
    forcing_bound: float  # K
    t_bound: float | None = None                  # certified breaking-time bound
    g0: float | None = None                       # mixed only
    location: tuple[float, float] | None = None   # mixed only


def _mixed_extreme(datum: InitialDatum, n_sample: int = 8192) -> tuple[float, float]:
    """Dense-sample argmin of u0' + |u0| over the datum's support."""
    r = datum.reach()
    xs = np.linspace(datum.center - r, datum.center + r, n_sample + 1)
    w = datum.derivative(xs) + np.abs(datum.evaluate(xs))
    j = int(np.argmin(w))
    x1, val = float(xs[j]), float(w[j])
    # odd profiles pin the minimum to the center kink; snap when adjacent
    if datum.family in ("gaussian_derivative", "antisym_peak"):
        if abs(x1 - datum.center) <= (xs[1] - xs[0]) * 1.5:
            x_c = datum.center
            val_c = float(datum.derivative(np.array([x_c]))[0]
                          + abs(datum.evaluate(np.array([x_c]))[0]))
            if val_c <= val + 1e-12:
                return x_c, val_c
    return x1, val


def find_breaking_datum(
    family: str = "gaussian_derivative",
    delta: float = 0.0,
    criterion: str = "slope_only",
    amplitude: float = 2.0,
    center: float = 0.0,
    width_range: tuple[float, float] = (0.04, 1.0),
    margin: float = 0.10,
    n_scan: int = 96,
) -> BreakingSearchResult:
    """Scan the family's width for a datum that satisfies a blow-up criterion.

    Widths are scanned geometrically from wide to narrow; narrowing lowers
    the energy (hence the threshold) faster than it costs slope, so the
    first hit is the widest, best-resolved qualifying datum. Raises
    SearchError when no width in the range reaches the requested margin.
    """
    from .criteria import forcing_constant, slope_threshold
    from .riccati import omega_bound, two_sided_bound

    if criterion not in ("slope_only", "mixed"):
        raise ConfigError(f"unknown criterion {criterion!r}")
    if family == "samples":
        raise ConfigError("the width search needs an analytic family")
    lo, hi = width_range
    if not (0.0 < lo < hi):
        raise ConfigError("width_range must satisfy 0 < lo < hi")
    widths = np.geomspace(hi, lo, n_scan)
    best_fail = None
    for w in widths:
        datum = InitialDatum(family, amplitude=amplitude, width=float(w), center=center)
        energy = datum.energy()
        big_k = forcing_constant(energy)
        threshold = slope_threshold(delta, big_k)
        if criterion == "slope_only":
            point, extreme = datum.analytic_min_slope()
        else:
            point, extreme = _mixed_extreme(datum)
        got = (threshold - extreme) / abs(threshold)
        if got >= margin:
            g0 = location = None
            if criterion == "slope_only":
                t_bound = omega_bound(delta, big_k, extreme)
            else:
                slope_at = float(datum.derivative(np.array([point]))[0])
                amp_at = float(datum.evaluate(np.array([point]))[0])
                g0 = math.sqrt(slope_at * slope_at - amp_at * amp_at)
                t_bound = two_sided_bound(delta, big_k, g0)
                if t_bound is not None:
                    speed = math.sqrt(energy / 2.0)
                    location = (point - speed * t_bound, point + speed * t_bound)
            return BreakingSearchResult(
                datum=datum, criterion=criterion, delta=delta, point=point,
                extreme=extreme, threshold=threshold, margin=got,
                energy=energy, forcing_bound=big_k,
                t_bound=t_bound, g0=g0, location=location)
        if best_fail is None or got > best_fail:
            best_fail = got
    raise SearchError(
        f"no {family} width in [{lo:g}, {hi:g}] meets the {criterion} criterion "
        f"at delta={delta:g}, amplitude={amplitude:g} "
        f"(best margin {best_fail:.3f} < {margin:g})")
