"""Energy-based wave-breaking criteria and their certified time bounds.

Everything here is determined by the initial state and the damping ceiling
delta >= sup lambda. The H^1 energy E0 controls the bounded part of the
slope dynamics through

    forcing_constant(E0) = (sqrt(2)/2) E0^(3/2) + (5/2) E0,

and a datum breaks in finite time whenever its slope somewhere beats the
threshold -delta - sqrt(delta^2 + 2 K). The two-sided variant asks the
slope to beat the local amplitude as well and pays for it with a sharper
localization of the breaking point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .grid import Field, deriv, h1_norm_sq, interp
from .model import DissipationProfile, bounded_forcing
from .riccati import omega_bound, two_sided_bound


def forcing_constant(energy: float) -> float:
    """Ceiling K on the bounded slope forcing, from the H^1 energy."""
    if energy < 0.0:
        raise ValueError("energy must be nonnegative")
    return (math.sqrt(2.0) / 2.0) * energy ** 1.5 + 2.5 * energy


def slope_threshold(delta: float, forcing: float) -> float:
    """Breaking threshold -delta - sqrt(delta^2 + 2 forcing)."""
    return -delta - math.sqrt(delta * delta + 2.0 * forcing)


def compute_K(u0: Field) -> float:
    """forcing_constant evaluated on a gridded datum."""
    return forcing_constant(h1_norm_sq(u0))


@dataclass(frozen=True)
class CriterionReport:
    """Outcome of testing a datum against one breaking criterion."""

    kind: str                 # "slope_only" or "mixed"
    satisfied: bool
    delta: float
    energy: float
    forcing_bound: float      # K
    threshold: float
    point: float              # where the criterion was tested
    slope_at_point: float
    amp_at_point: float
    extreme: float            # slope, or slope + |u|, at the point
    margin: float             # (threshold - extreme)/|threshold|
    t_bound: float | None     # certified breaking-time bound when satisfied
    g0: float | None = None                      # mixed only
    location: tuple[float, float] | None = None  # mixed only
    speed_bound: float | None = None             # mixed only


def _relative_margin(threshold: float, extreme: float) -> float:
    # zero threshold only for the zero datum; any scale works there
    return (threshold - extreme) / max(abs(threshold), 1.0e-30)


def check_criterion1(u0: Field, delta: float) -> CriterionReport:
    """Slope-only criterion at the grid argmin of the initial slope."""
    energy = h1_norm_sq(u0)
    big_k = forcing_constant(energy)
    threshold = slope_threshold(delta, big_k)
    ux = deriv(u0)
    j = int(np.argmin(ux.values))
    m0 = float(ux.values[j])
    point = float(u0.grid.x[j])
    return CriterionReport(
        kind="slope_only",
        satisfied=m0 < threshold,
        delta=delta,
        energy=energy,
        forcing_bound=big_k,
        threshold=threshold,
        point=point,
        slope_at_point=m0,
        amp_at_point=float(u0.values[j]),
        extreme=m0,
        margin=_relative_margin(threshold, m0),
        t_bound=omega_bound(delta, big_k, m0),
    )


def check_criterion2(u0: Field, delta: float, point: float | None = None) -> CriterionReport:
    """Two-sided criterion: slope beats amplitude plus threshold at a point.

    With no point given, the grid node minimizing u0' + |u0| is used. When
    satisfied, the report carries the certified breaking-time bound, the
    transport speed ceiling sqrt(E0/2), and the interval that must contain
    the breaking location.
    """
    energy = h1_norm_sq(u0)
    big_k = forcing_constant(energy)
    threshold = slope_threshold(delta, big_k)
    ux = deriv(u0)
    if point is None:
        w = ux.values + np.abs(u0.values)
        j = int(np.argmin(w))
        point = float(u0.grid.x[j])
        slope = float(ux.values[j])
        amp = float(u0.values[j])
    else:
        point = float(point)
        slope = interp(ux, point)
        amp = interp(u0, point)
    extreme = slope + abs(amp)
    satisfied = extreme < threshold
    g0 = t_bound = location = speed = None
    if satisfied:
        spread = slope * slope - amp * amp
        if spread <= 0.0:
            # impossible when the condition truly holds; guards float noise
            raise NumericsError(
                f"two-sided condition held at x = {point:.6g} but the slope "
                "does not dominate the amplitude there"
            )
        g0 = math.sqrt(spread)
        t_bound = two_sided_bound(delta, big_k, g0)
        if t_bound is not None:
            speed = math.sqrt(energy / 2.0)
            location = (point - speed * t_bound, point + speed * t_bound)
    return CriterionReport(
        kind="mixed",
        satisfied=satisfied,
        delta=delta,
        energy=energy,
        forcing_bound=big_k,
        threshold=threshold,
        point=point,
        slope_at_point=slope,
        amp_at_point=amp,
        extreme=extreme,
        margin=_relative_margin(threshold, extreme),
        t_bound=t_bound,
        g0=g0,
        location=location,
        speed_bound=speed,
    )


def m_prime_rhs(u: Field, t: float, profile: DissipationProfile) -> float:
    """Instantaneous d/dt of the minimum slope, from the slope equation.

    At the slope argmin the convective term drops, leaving
    -m^2/2 - lambda m + B. Ties resolve to the smallest grid point.
    """
    ux = deriv(u)
    j = int(np.argmin(ux.values))
    m = float(ux.values[j])
    b = float(bounded_forcing(u).values[j])
    return -0.5 * m * m - profile.rate(t) * m + b


def riccati_forcing(u: Field, t: float, profile: DissipationProfile) -> float:
    """Forcing felt by the completed-square slope variable m + lambda.

    Equals B at the slope argmin plus lambda^2/2; bounded in magnitude by
    forcing_constant(E0) + delta^2/2 for as long as the solution is smooth.
    """
    ux = deriv(u)
    j = int(np.argmin(ux.values))
    lam = profile.rate(t)
    return float(bounded_forcing(u).values[j]) + 0.5 * lam * lam
