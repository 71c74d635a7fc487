"""Scalar and coupled comparison problems for the slope dynamics.

The slope minimum of the evolution is bounded above by the solution of

    omega' = -delta * omega - omega^2 / 2 + forcing,   omega(0) = m(0),

with forcing the energy-determined ceiling on the bounded part of the slope
equation. The closed-form blow-up time of this problem, and the quadratic
comparison lemma behind the two-sided (slope and amplitude) criterion, give
the certified upper bounds that runs are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import RateEstimate, reciprocal_blowup_fit
from .errors import ConfigError

DEFAULT_DIVERGENCE = 1.0e8
DEFAULT_STEP_SCALE = 0.02


@dataclass(frozen=True)
class OdeTrajectory:
    ts: np.ndarray
    values: np.ndarray
    blew_up: bool
    fit: RateEstimate | None
    requested_times: np.ndarray | None = None
    requested_values: np.ndarray | None = None

    @property
    def t_blowup(self) -> float | None:
        return None if self.fit is None else self.fit.t_star


@dataclass(frozen=True)
class CoupledTrajectory:
    """Trajectory of the coupled pair bracketing (u - u_x, u + u_x).

    rising starts positive and grows; falling starts negative and drops.
    g_margin is the worst normalized defect of the quadratic lower bound on
    the geometric mean's growth (see solve_coupled); None when no interior
    sample is eligible.
    """

    ts: np.ndarray
    rising: np.ndarray
    falling: np.ndarray
    blew_up: bool
    fit: RateEstimate | None
    g_margin: float | None = None

    @property
    def t_blowup(self) -> float | None:
        return None if self.fit is None else self.fit.t_star

    def geometric_mean(self) -> np.ndarray:
        """sqrt(-rising * falling); nan where the product has the wrong sign."""
        prod = -self.rising * self.falling
        out = np.full_like(prod, np.nan)
        ok = prod > 0.0
        out[ok] = np.sqrt(prod[ok])
        return out


def omega_bound(delta: float, forcing: float, omega0: float) -> float | None:
    """Exact blow-up time of the scalar comparison problem.

    None when omega0 is not supercritical (omega0 >= -delta - s with
    s = sqrt(delta^2 + 2 forcing)); those solutions relax instead.
    """
    s = math.sqrt(delta * delta + 2.0 * forcing)
    if s == 0.0:
        # undamped, unforced: omega' = -omega^2/2 blows up iff omega0 < 0
        return -2.0 / omega0 if omega0 < 0.0 else None
    if omega0 + delta >= -s:
        return None
    shifted = omega0 + delta
    return (1.0 / s) * math.log((shifted - s) / (shifted + s))


def chen_bound(gain: float, drain: float, f0: float) -> float:
    """Blow-up time bound for f' >= gain * f^2 - drain, f(0) = f0.

    Requires gain > 0, drain > 0 and f0 > sqrt(drain/gain); anything else
    is outside the lemma's scope and is rejected.
    """
    if gain <= 0.0 or drain <= 0.0:
        raise ConfigError(
            f"quadratic comparison needs gain > 0 and drain > 0, got {gain} and {drain}"
        )
    root = math.sqrt(drain / gain)
    if f0 <= root:
        raise ConfigError(
            f"quadratic comparison needs f0 > sqrt(drain/gain) = {root:.6g}, got {f0}"
        )
    return (1.0 / (2.0 * math.sqrt(gain * drain))) * math.log((f0 + root) / (f0 - root))


def two_sided_bound(delta: float, forcing: float, g0: float) -> float | None:
    """Blow-up bound from the slope/amplitude geometric mean.

    g = sqrt(u_x^2 - u^2) at the distinguished point obeys
    g' >= (g - delta)^2 / 2 - delta^2/2 - forcing, which is the quadratic
    lemma for f = g - delta with gain 1/2 and drain delta^2/2 + forcing.
    None when g0 does not clear the threshold delta + sqrt(delta^2 + 2 forcing).
    """
    drain = 0.5 * delta * delta + forcing
    f0 = g0 - delta
    if not math.isfinite(f0) or f0 * f0 <= 2.0 * drain or f0 <= 0.0:
        return None
    if drain == 0.0:
        # forcing-free limit of the lemma: f' >= f^2/2 alone
        return 2.0 / f0
    return chen_bound(0.5, drain, f0)


def _rk4_step(fun, y, dt):
    k1 = fun(y)
    k2 = fun(y + 0.5 * dt * k1)
    k3 = fun(y + 0.5 * dt * k2)
    k4 = fun(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_omega(
    delta: float,
    forcing: float,
    omega0: float,
    t_max: float = 20.0,
    step_scale: float = DEFAULT_STEP_SCALE,
    divergence: float = DEFAULT_DIVERGENCE,
    sample_times=None,
) -> OdeTrajectory:
    """Integrate the scalar comparison problem with slope-adapted RK4 steps.

    Steps shrink like step_scale / |omega| so the divergence is tracked all
    the way to the cutoff. When sample_times is given, values at those times
    are returned as well (linear interpolation of the dense solution, nan
    past the blow-up cutoff).
    """
    fun = lambda y: -delta * y - 0.5 * y * y + forcing
    ts = [0.0]
    ys = [float(omega0)]
    t, y = 0.0, float(omega0)
    while t < t_max and abs(y) < divergence:
        dt = min(step_scale / max(1.0, abs(y)), t_max - t)
        y = _rk4_step(fun, y, dt)
        t += dt
        if not math.isfinite(y):
            break
        ts.append(t)
        ys.append(y)
    ts_arr = np.array(ts)
    ys_arr = np.array(ys)
    blew = bool(abs(ys_arr[-1]) >= divergence)
    fit = reciprocal_blowup_fit(ts_arr, ys_arr) if blew else None
    req_t = req_v = None
    if sample_times is not None:
        req_t = np.asarray(sample_times, dtype=float)
        req_v = np.interp(req_t, ts_arr, ys_arr, left=np.nan, right=np.nan)
        req_v[req_t > ts_arr[-1]] = np.nan
    return OdeTrajectory(ts_arr, ys_arr, blew, fit, req_t, req_v)


def solve_coupled(
    delta: float,
    forcing: float,
    rising0: float,
    falling0: float,
    t_max: float = 20.0,
    step_scale: float = DEFAULT_STEP_SCALE,
    divergence: float = DEFAULT_DIVERGENCE,
) -> CoupledTrajectory:
    """Integrate the coupled comparison pair

        rising'  = -rising * (falling + 2 delta) / 2 - forcing
        falling' =  falling * (rising + 2 delta) / 2 + forcing

    which brackets (u - u_x, u + u_x) at the distinguished point of the
    two-sided criterion. Above the entry threshold (rising0 > d + s,
    falling0 < -d - s with s = sqrt(delta^2 + 2 forcing)) rising grows and
    falling drops, and their geometric mean g = sqrt(-rising * falling)
    obeys g' >= g^2/2 - delta*g - forcing. The worst defect of that bound
    along the trajectory, normalized by max(1, |quadratic|), is recorded as
    g_margin (interior samples with the sign pattern intact and g above the
    threshold; finite-difference g' via nonuniform centered differences).
    """

    def fun(state):
        r, f = state
        return np.array([
            -0.5 * r * (f + 2.0 * delta) - forcing,
            0.5 * f * (r + 2.0 * delta) + forcing,
        ])

    ts = [0.0]
    states = [np.array([float(rising0), float(falling0)])]
    t = 0.0
    state = states[0]
    while t < t_max and float(np.max(np.abs(state))) < divergence:
        size = max(1.0, float(np.max(np.abs(state))))
        dt = min(step_scale / size, t_max - t)
        state = _rk4_step(fun, state, dt)
        t += dt
        if not np.all(np.isfinite(state)):
            break
        ts.append(t)
        states.append(state)
    ts_arr = np.array(ts)
    arr = np.array(states)
    rising = arr[:, 0]
    falling = arr[:, 1]
    blew = bool(np.max(np.abs(arr[-1])) >= divergence)
    fit = reciprocal_blowup_fit(ts_arr, falling) if blew else None
    g_margin = _g_inequality_margin(ts_arr, rising, falling, delta, forcing)
    return CoupledTrajectory(ts_arr, rising, falling, blew, fit, g_margin)


def _g_inequality_margin(ts, rising, falling, delta, forcing):
    # worst normalized defect of g' >= g^2/2 - delta*g - forcing over the
    # proof regime (signs intact, g above the entry threshold)
    if ts.size < 3:
        return None
    prod = -rising * falling
    ok = prod > 0.0
    g = np.where(ok, np.sqrt(np.maximum(prod, 0.0)), np.nan)
    threshold = delta + math.sqrt(delta * delta + 2.0 * forcing)
    eligible = ok & (rising > 0.0) & (falling < 0.0) & (g > threshold)
    eligible[0] = eligible[-1] = False
    dg = np.gradient(g, ts)
    quad = 0.5 * g * g - delta * g - forcing
    defect = (dg - quad) / np.maximum(1.0, np.abs(quad))
    eligible &= np.isfinite(defect)
    if not np.any(eligible):
        return None
    return float(np.min(defect[eligible]))
