"""Time integration, breaking detection, and the certified slope continuation.

A run has two phases. While the front is resolvable the band-limited
Galerkin system is integrated with RK4 under a CFL and a slope-adapted step
cap. No fixed grid can follow the slope minimum to -1e6: the front's width
shrinks like 1/m^2, so the Eulerian phase ends when spectral mass reaches
the top octave of the band. At that moment the run checks a certificate:
the measured minimum slope must already be past the supercritical threshold
computed from the *current* energy, which pins the remaining dynamics to
the monotone slope collapse m' = -m^2/2 - lambda m + B with B bounded.
Certified runs then integrate that closed law (and each track's own closed
system) against the frozen fields until the stop threshold, which is where
the blow-up time and rate are read off. An uncertified loss of resolution
is flagged, never silently continued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .characteristics import CharacteristicTrack, advance, advance_frozen, build_aux, start_track
from .criteria import forcing_constant
from .diagnostics import DiagnosticsRecord
from .errors import EdgeDecayError, NumericsError
from .grid import (
    Field,
    Grid,
    deriv,
    from_spectrum,
    h1_norm_sq,
    interp,
    smoothed_edge_decay,
    tail_fraction,
)
from .model import (
    DissipationProfile,
    InitialDatum,
    _nonlinear_spectra,
    bounded_forcing,
    make_datum,
    rhs,
)

OUTCOME_KINDS = ("reached_horizon", "breaking_detected", "dt_underflow", "edge_decay_lost")


@dataclass(frozen=True)
class SolverConfig:
    grid: Grid
    datum: InitialDatum
    profile: DissipationProfile
    t_end: float
    cfl_factor: float = 0.3
    slope_dt_factor: float = 0.2
    dt_min: float = 1.0e-12
    breaking_threshold: float = -1.0e6
    record_stride: int = 1
    seeds: tuple[float, ...] = ()
    tail_tol: float = 1.0e-6
    collapse_margin: float = 1.05
    edge_tol: float = 1.0e-8

    def __post_init__(self) -> None:
        if not (self.t_end >= 0.0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be finite and >= 0")
        if not (0.0 < self.cfl_factor <= 1.0):
            raise ValueError("cfl_factor must lie in (0, 1]")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.breaking_threshold >= 0.0:
            raise ValueError("breaking_threshold must be negative")


@dataclass
class SolverState:
    t: float
    u: Field
    step_index: int = 0
    last_dt: float = 0.0


@dataclass
class RunOutcome:
    kind: str
    t_final: float
    records: list
    tracks: list
    energy0: float
    dissipative: bool
    t_switch: float | None = None
    m_switch: float | None = None
    frozen_forcing: float | None = None   # scalar forcing of the continued slope law
    resolution_degraded: bool = False
    config: SolverConfig | None = None


def _rk4(u: Field, t: float, dt: float, profile: DissipationProfile) -> Field:
    k1 = rhs(u, t, profile)
    k2 = rhs(u + (0.5 * dt) * k1, t + 0.5 * dt, profile)
    k3 = rhs(u + (0.5 * dt) * k2, t + 0.5 * dt, profile)
    k4 = rhs(u + dt * k3, t + dt, profile)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state: SolverState, cfg: SolverConfig) -> SolverState:
    """One accepted RK4 step.

    dt = min(cfl dx / max(1, sup|u|), slope_factor / max(1, |m|), horizon).
    A step producing non-finite values is rejected and retried at dt/2;
    underflow past dt_min raises NumericsError.
    """
    u = state.u
    grid = u.grid
    sup = u.max_abs
    m = float(np.min(deriv(u).values))
    dt = min(
        cfg.cfl_factor * grid.dx / max(1.0, sup),
        cfg.slope_dt_factor / max(1.0, abs(m)),
        cfg.t_end - state.t,
    )
    while True:
        if dt < cfg.dt_min:
            raise NumericsError(f"time step underflow at t={state.t:.6g}")
        candidate = _rk4(u, state.t, dt, cfg.profile)
        if np.all(np.isfinite(candidate.values)):
            return SolverState(state.t + dt, candidate, state.step_index + 1, dt)
        dt *= 0.5


def _record(state_t, energy, m, x_at, sup, dt, profile) -> DiagnosticsRecord:
    return DiagnosticsRecord(
        t=state_t, energy=energy, min_slope=m, x_at_min=x_at,
        sup_abs=sup, dt=dt, lam_integral=profile.integral(state_t))


def _emit(records: list, sink, rec: DiagnosticsRecord, state_sink=None, live=None) -> None:
    records.append(rec)
    if sink is not None:
        sink(rec)
    if state_sink is not None:
        state_sink(rec, live)


def run(cfg: SolverConfig, sink=None, state_sink=None) -> RunOutcome:
    """Integrate to the horizon or through certified breaking.

    sink, when given, receives each DiagnosticsRecord as it is produced.
    state_sink additionally receives (record, field) pairs; the field is the
    live state at the record's time, or None once the run has switched to
    the frozen-field continuation.
    """
    profile = cfg.profile
    profile.validate_horizon(cfg.t_end)
    u = make_datum(cfg.datum, cfg.grid, cfg.edge_tol)
    energy0 = h1_norm_sq(u)
    dissipative = profile.is_dissipative(cfg.t_end)
    records: list[DiagnosticsRecord] = []
    tracks: list[CharacteristicTrack] = []
    aux = None
    if cfg.seeds:
        aux = build_aux(u, 0.0, profile)
        tracks = [start_track(s, aux) for s in cfg.seeds]
    outcome = RunOutcome(
        kind="reached_horizon", t_final=0.0, records=records, tracks=tracks,
        energy0=energy0, dissipative=dissipative, config=cfg)

    state = SolverState(0.0, u)
    ux0 = deriv(u)
    j0 = int(np.argmin(ux0.values))
    _emit(records, sink, _record(
        0.0, energy0, float(ux0.values[j0]), float(cfg.grid.x[j0]), u.max_abs, 0.0, profile),
        state_sink, u)

    switch_state = None
    while state.t < cfg.t_end * (1.0 - 1e-14):
        try:
            state = step(state, cfg)
        except NumericsError:
            outcome.kind = "dt_underflow"
            outcome.t_final = state.t
            return outcome
        u = state.u
        ux = deriv(u)
        j = int(np.argmin(ux.values))
        m = float(ux.values[j])
        energy = h1_norm_sq(u)
        if not smoothed_edge_decay(u, cfg.edge_tol):
            _emit(records, sink, _record(
                state.t, energy, m, float(cfg.grid.x[j]), u.max_abs, state.last_dt, profile),
                state_sink, u)
            outcome.kind = "edge_decay_lost"
            outcome.t_final = state.t
            return outcome
        if tracks:
            try:
                aux_new = build_aux(u, state.t, profile, cfg.edge_tol)
            except EdgeDecayError:
                # the track channels need the one-sided kernels; once their
                # input stops decaying the Eulerian phase is over
                _emit(records, sink, _record(
                    state.t, energy, m, float(cfg.grid.x[j]), u.max_abs,
                    state.last_dt, profile), state_sink, u)
                outcome.kind = "edge_decay_lost"
                outcome.t_final = state.t
                return outcome
            for tr in tracks:
                advance(tr, aux, aux_new)
            aux = aux_new
        due = state.step_index % cfg.record_stride == 0
        if m <= cfg.breaking_threshold:
            _emit(records, sink, _record(
                state.t, energy, m, float(cfg.grid.x[j]), u.max_abs, state.last_dt, profile),
                state_sink, u)
            outcome.kind = "breaking_detected"
            outcome.t_final = state.t
            return outcome
        if tail_fraction(u) > cfg.tail_tol:
            delta = profile.delta_sup
            k_now = forcing_constant(energy)
            certified_level = -cfg.collapse_margin * (
                delta + math.sqrt(delta * delta + 2.0 * k_now))
            if m < certified_level:
                _emit(records, sink, _record(
                    state.t, energy, m, float(cfg.grid.x[j]), u.max_abs, state.last_dt, profile),
                    state_sink, u)
                switch_state = (state, m, j, energy)
                break
            if not outcome.resolution_degraded:
                outcome.resolution_degraded = True
        if due:
            _emit(records, sink, _record(
                state.t, energy, m, float(cfg.grid.x[j]), u.max_abs, state.last_dt, profile),
                state_sink, u)

    if switch_state is None:
        # horizon reached in the Eulerian phase
        if records[-1].t < state.t * (1.0 - 1e-14):
            u = state.u
            ux = deriv(u)
            j = int(np.argmin(ux.values))
            _emit(records, sink, _record(
                state.t, h1_norm_sq(u), float(ux.values[j]), float(cfg.grid.x[j]),
                u.max_abs, state.last_dt, profile), state_sink, u)
        outcome.kind = "reached_horizon"
        outcome.t_final = state.t
        return outcome

    return _continue_collapse(cfg, outcome, sink, state_sink, switch_state)


def _continue_collapse(cfg: SolverConfig, outcome: RunOutcome, sink, state_sink,
                       switch_state) -> RunOutcome:
    """Integrate the closed slope law against the frozen fields.

    Entered only under the certificate: the slope minimum is supercritical
    for the current energy, so it decreases monotonically to -inf and the
    bounded forcing stays bounded by the (frozen) forcing_constant.
    """
    profile = cfg.profile
    state, m, j, energy_sw = switch_state
    outcome.t_switch = state.t
    outcome.m_switch = m
    u_frozen = state.u
    grid = cfg.grid
    b_field = bounded_forcing(u_frozen)
    _, sq_hat, slopesq_hat, _, cube_hat = _nonlinear_spectra(grid, u_frozen.values)
    flux_hat = cube_hat - 0.5 * sq_hat + 0.5 * slopesq_hat
    drift_hat = -flux_hat * grid.helmholtz_multiplier * (1j * grid.wavenumbers)
    drift_hat[-1] = 0.0
    drift = from_spectrum(grid, drift_hat)   # (P+ - P-) * F, spectral route
    b_at_front = float(b_field.values[j])
    outcome.frozen_forcing = b_at_front
    xi = float(grid.x[j])
    sup_frozen = u_frozen.max_abs
    lam_int_sw = profile.integral(state.t)

    def m_rate(t, y):
        return -0.5 * y * y - profile.rate(t) * y + b_at_front

    t = state.t
    step_index = state.step_index
    while m > cfg.breaking_threshold and t < cfg.t_end * (1.0 - 1e-14):
        dt = min(cfg.slope_dt_factor / max(1.0, abs(m)), cfg.t_end - t)
        k1 = m_rate(t, m)
        k2 = m_rate(t + 0.5 * dt, m + 0.5 * dt * k1)
        k3 = m_rate(t + 0.5 * dt, m + 0.5 * dt * k2)
        k4 = m_rate(t + dt, m + dt * k3)
        m = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        # front location rides the frozen velocity field
        v_xi = interp(u_frozen, xi)
        xi = xi + dt * 0.5 * (v_xi + interp(u_frozen, xi + dt * v_xi))
        for tr in outcome.tracks:
            advance_frozen(tr, t, dt, drift, b_field, profile)
        t += dt
        step_index += 1
        law_energy = math.exp(-2.0 * (profile.integral(t) - lam_int_sw)) * energy_sw
        if step_index % cfg.record_stride == 0 or m <= cfg.breaking_threshold:
            _emit(outcome.records, sink, _record(
                t, law_energy, m, xi, sup_frozen, dt, profile), state_sink, None)
    outcome.kind = "breaking_detected" if m <= cfg.breaking_threshold else "reached_horizon"
    outcome.t_final = t
    return outcome
