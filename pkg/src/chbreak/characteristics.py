"""Flow-map tracks and the transport identities checked along them.

A track follows one material point q' = u(q, t). Along it the field and its
slope obey closed pointwise laws:

    d/dt u(q)   = (P+ - P-) * F (q) - lambda u(q)
    d/dt u_x(q) = -u_x^2/2 + u^2 + h(u) - (P+ + P-) * F (q) - lambda u_x(q)

with F = u^2 + u_x^2/2 + h(u). Each sample stores these right-hand sides by
two independent routes: the one-sided quadrature kernels above, and the
spectral evolution operators plus the advective correction. Their agreement
and the finite-difference residual of the stored series are the evidence
that the discrete flow map realizes the transport structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .grid import (
    Field,
    conv_P_minus,
    conv_P_plus,
    deriv,
    from_spectrum,
    interp,
    second_deriv,
)
from .model import DissipationProfile, _nonlinear_spectra, rhs, slope_rhs

SLOPE_RELIABLE_LIMIT = 1.0e5


@dataclass(frozen=True)
class TrackAux:
    """Per-step fields shared by every track: computed once, interpolated many."""

    t: float
    lam: float
    u: Field
    ux: Field
    uxx: Field
    conv_sum: Field    # (P+ + P-) * F by the quadrature kernels
    conv_diff: Field   # (P+ - P-) * F by the quadrature kernels
    rhs_field: Field
    slope_field: Field


def build_aux(u: Field, t: float, profile: DissipationProfile,
              edge_tol: float = 1.0e-8) -> TrackAux:
    grid = u.grid
    _, sq_hat, slopesq_hat, _, cube_hat = _nonlinear_spectra(grid, u.values)
    flux = from_spectrum(grid, cube_hat - 0.5 * sq_hat + 0.5 * slopesq_hat)
    plus = conv_P_plus(flux, edge_tol)
    minus = conv_P_minus(flux, edge_tol)
    return TrackAux(
        t=t,
        lam=profile.rate(t),
        u=u,
        ux=deriv(u),
        uxx=second_deriv(u),
        conv_sum=plus + minus,
        conv_diff=plus - minus,
        rhs_field=rhs(u, t, profile),
        slope_field=slope_rhs(u, t, profile),
    )


@dataclass
class CharacteristicTrack:
    """Sample series along one characteristic, with dual-route rhs channels."""

    seed: float
    times: list = dataclass_field(default_factory=list)
    positions: list = dataclass_field(default_factory=list)
    u_vals: list = dataclass_field(default_factory=list)
    ux_vals: list = dataclass_field(default_factory=list)
    rhs_u: list = dataclass_field(default_factory=list)
    rhs_ux: list = dataclass_field(default_factory=list)
    rhs_u_alt: list = dataclass_field(default_factory=list)
    rhs_ux_alt: list = dataclass_field(default_factory=list)
    reliable: list = dataclass_field(default_factory=list)
    edge_contaminated: bool = False

    @property
    def n_samples(self) -> int:
        return len(self.times)

    def phi(self) -> np.ndarray:
        """(u - u_x) along the track: the component driven up by breaking."""
        return np.asarray(self.u_vals) - np.asarray(self.ux_vals)

    def psi(self) -> np.ndarray:
        """(u + u_x) along the track: the component driven down."""
        return np.asarray(self.u_vals) + np.asarray(self.ux_vals)

    def g(self) -> np.ndarray:
        """sqrt(-phi * psi) = sqrt(u_x^2 - u^2); nan where undefined."""
        prod = -self.phi() * self.psi()
        out = np.full_like(prod, np.nan)
        ok = prod > 0.0
        out[ok] = np.sqrt(prod[ok])
        return out


def _append_pde_sample(track: CharacteristicTrack, q: float, aux: TrackAux) -> None:
    grid = aux.u.grid
    if abs(q) > grid.half_length - 2.0 * grid.dx:
        track.edge_contaminated = True
    uq = interp(aux.u, q)
    wq = interp(aux.ux, q)
    lam = aux.lam
    local = uq * uq + (uq ** 3 - 1.5 * uq * uq)    # u^2 + h(u), pointwise
    track.times.append(aux.t)
    track.positions.append(q)
    track.u_vals.append(uq)
    track.ux_vals.append(wq)
    track.rhs_u.append(interp(aux.conv_diff, q) - lam * uq)
    track.rhs_ux.append(-0.5 * wq * wq + local - interp(aux.conv_sum, q) - lam * wq)
    track.rhs_u_alt.append(interp(aux.rhs_field, q) + uq * wq)
    track.rhs_ux_alt.append(interp(aux.slope_field, q) + uq * interp(aux.uxx, q))
    track.reliable.append(not track.edge_contaminated and abs(wq) < SLOPE_RELIABLE_LIMIT)


def start_track(seed: float, aux: TrackAux) -> CharacteristicTrack:
    track = CharacteristicTrack(seed=float(seed))
    _append_pde_sample(track, float(seed), aux)
    return track


def advance(track: CharacteristicTrack, aux_before: TrackAux, aux_after: TrackAux) -> None:
    """One Heun step of q' = u(q, t), then sample the new state's fields."""
    dt = aux_after.t - aux_before.t
    q = track.positions[-1]
    v0 = interp(aux_before.u, q)
    predictor = q + dt * v0
    v1 = interp(aux_after.u, predictor)
    q_new = q + 0.5 * dt * (v0 + v1)
    _append_pde_sample(track, q_new, aux_after)


def advance_frozen(
    track: CharacteristicTrack,
    t_start: float,
    dt: float,
    drift: Field,
    forcing: Field,
    profile: DissipationProfile,
) -> None:
    """One RK4 step of the closed track system against frozen fields.

    Past the resolvability horizon the Eulerian fields stop moving but each
    track still obeys its own proven ODEs: q' = v, v' = drift(q) - lambda v,
    w' = -w^2/2 + forcing(q) - lambda w, with drift = (P+ - P-) * F and
    forcing = u^2 + h(u) - P * F evaluated at the freeze time.
    """
    q0 = track.positions[-1]
    v0 = track.u_vals[-1]
    w0 = track.ux_vals[-1]

    def f(t, state):
        q, v, w = state
        lam = profile.rate(t)
        return np.array([
            v,
            interp(drift, q) - lam * v,
            -0.5 * w * w + interp(forcing, q) - lam * w,
        ])

    y = np.array([q0, v0, w0])
    k1 = f(t_start, y)
    k2 = f(t_start + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t_start + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t_start + dt, y + dt * k3)
    q, v, w = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    t_new = t_start + dt
    lam = profile.rate(t_new)
    grid = drift.grid
    if abs(q) > grid.half_length - 2.0 * grid.dx:
        track.edge_contaminated = True
    track.times.append(t_new)
    track.positions.append(float(q))
    track.u_vals.append(float(v))
    track.ux_vals.append(float(w))
    track.rhs_u.append(interp(drift, float(q)) - lam * v)
    track.rhs_ux.append(-0.5 * w * w + interp(forcing, float(q)) - lam * w)
    # the spectral route needs live fields; no second route while frozen
    track.rhs_u_alt.append(math.nan)
    track.rhs_ux_alt.append(math.nan)
    track.reliable.append(not track.edge_contaminated and abs(w) < SLOPE_RELIABLE_LIMIT)


@dataclass(frozen=True)
class LemmaResidual:
    """Consistency of a track's stored series with its transport laws.

    All four numbers are normalized by max(1, |channel value|) sample by
    sample: for smooth tracks that is the absolute residual, while on a
    blowing-up track it stays meaningful (the raw finite-difference error
    grows like the cube of the slope while the channel grows like its
    square).
    """

    max_resid_u: float     # |d/dt u(q) - stored rhs| by 3-point differencing
    max_resid_ux: float
    route_gap_u: float     # quadrature route vs spectral route
    route_gap_ux: float
    n_checked: int


def _three_point_derivative(ts: np.ndarray, ys: np.ndarray, i: int) -> float:
    t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
    y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
    d0 = (t1 - t2) / ((t0 - t1) * (t0 - t2))
    d1 = 1.0 / (t1 - t0) + 1.0 / (t1 - t2)
    d2 = (t1 - t0) / ((t2 - t0) * (t2 - t1))
    return y0 * d0 + y1 * d1 + y2 * d2


def lemma_residual(track: CharacteristicTrack) -> LemmaResidual:
    ts = np.asarray(track.times)
    us = np.asarray(track.u_vals)
    ws = np.asarray(track.ux_vals)
    ru = np.asarray(track.rhs_u)
    rw = np.asarray(track.rhs_ux)
    rua = np.asarray(track.rhs_u_alt)
    rwa = np.asarray(track.rhs_ux_alt)
    ok = np.asarray(track.reliable, dtype=bool)
    worst_u = worst_w = gap_u = gap_w = 0.0
    n = 0
    for i in range(1, ts.size - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        worst_u = max(worst_u, abs(_three_point_derivative(ts, us, i) - ru[i])
                      / max(1.0, abs(ru[i])))
        worst_w = max(worst_w, abs(_three_point_derivative(ts, ws, i) - rw[i])
                      / max(1.0, abs(rw[i])))
        n += 1
    for i in range(ts.size):
        if ok[i] and math.isfinite(rua[i]):
            gap_u = max(gap_u, abs(ru[i] - rua[i]) / max(1.0, abs(ru[i])))
            gap_w = max(gap_w, abs(rw[i] - rwa[i]) / max(1.0, abs(rw[i])))
    return LemmaResidual(worst_u, worst_w, gap_u, gap_w, n)


@dataclass(frozen=True)
class MixedMonitor:
    """Watched (not asserted) structure of a two-sided-criterion track.

    While u - u_x > 0 > u + u_x the geometric mean g should never decrease
    and can never exceed -u_x. Violations are reported here for the caller
    to judge; the sign pattern itself is only proven for the comparison
    pair, so losing it mid-track is an observation, not an error.
    """

    signs_ok_initially: bool
    t_signs_lost: float | None     # first sample time with the pattern broken
    worst_step_decrease: float     # max per-step drop of g while signs held
    worst_slope_excess: float      # max of g + u_x while signs held (<= 0 ideally)
    n_checked: int


def mixed_monitor(track: CharacteristicTrack) -> MixedMonitor:
    ts = np.asarray(track.times)
    if ts.size == 0:
        return MixedMonitor(False, None, 0.0, 0.0, 0)
    u = np.asarray(track.u_vals)
    w = np.asarray(track.ux_vals)
    phi = u - w
    psi = u + w
    signs = (phi > 0.0) & (psi < 0.0)
    bad = np.nonzero(~signs)[0]
    upto = int(bad[0]) if bad.size else ts.size
    t_lost = float(ts[bad[0]]) if bad.size else None
    if upto == 0:
        return MixedMonitor(False, t_lost, 0.0, 0.0, 0)
    g = np.sqrt(-phi[:upto] * psi[:upto])
    decrease = float(np.max(g[:-1] - g[1:])) if upto >= 2 else 0.0
    return MixedMonitor(
        signs_ok_initially=True,
        t_signs_lost=t_lost,
        worst_step_decrease=max(0.0, decrease),
        worst_slope_excess=float(np.max(g + w[:upto])),
        n_checked=upto,
    )


def diffeo_factor(track: CharacteristicTrack) -> np.ndarray:
    """exp of the running time integral of u_x along the track.

    This is dq/dseed for the flow map; positive and finite exactly while
    the track stays ahead of breaking.
    """
    ts = np.asarray(track.times)
    ws = np.asarray(track.ux_vals)
    if ts.size == 0:
        return np.empty(0)
    steps = 0.5 * (ws[1:] + ws[:-1]) * np.diff(ts)
    return np.exp(np.concatenate(([0.0], np.cumsum(steps))))
