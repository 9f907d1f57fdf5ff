"""Frequency-excursion pulse profiles and derived timing quantities.

The CZ pulse is a filtered rectangular excursion built from two error
functions.  Times are ns, configuration frequencies GHz, switch-profile
rates rad/ns.  The truncation relation t_ramp = 4*sqrt(2)*sigma cuts the
pulse 2*sqrt(2) standard deviations from each switching midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

SQRT2 = np.sqrt(2.0)

#: Ramp truncation factor: t_ramp = RAMP_FACTOR * sigma.
RAMP_FACTOR = 4.0 * SQRT2


def _resolve_ramp(sigma, t_ramp):
    if sigma is None and t_ramp is None:
        raise ValueError("provide sigma or t_ramp")
    if sigma is None:
        sigma = t_ramp / RAMP_FACTOR
    if t_ramp is None:
        t_ramp = RAMP_FACTOR * sigma
    if sigma <= 0 or t_ramp <= 0:
        raise ValueError("sigma and t_ramp must be positive")
    return float(sigma), float(t_ramp)


@dataclass(frozen=True)
class CZPulseParams:
    """Two-parameter CZ pulse: excursion from off_freq to on_freq (GHz).

    ``t_on`` is the interval between ramp midpoints (the FWHM);
    ``t_gate = t_on + t_ramp``.  Giving both ``sigma`` and ``t_ramp``
    overrides the default truncation relation.
    """

    off_freq: float
    on_freq: float
    t_on: float
    sigma: float | None = None
    t_ramp: float | None = None

    def __post_init__(self):
        s, tr = _resolve_ramp(self.sigma, self.t_ramp)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "t_ramp", tr)
        if self.t_on <= 0:
            raise ValueError("t_on must be positive")

    @property
    def t_gate(self) -> float:
        return self.t_on + self.t_ramp

    def replace(self, **kw) -> "CZPulseParams":
        fields = dict(off_freq=self.off_freq, on_freq=self.on_freq,
                      t_on=self.t_on, sigma=self.sigma, t_ramp=self.t_ramp)
        if "sigma" in kw and "t_ramp" not in kw:
            fields["t_ramp"] = None
        if "t_ramp" in kw and "sigma" not in kw:
            fields["sigma"] = None
        fields.update(kw)
        return CZPulseParams(**fields)


def cz_profile(params: CZPulseParams, t):
    """Qubit frequency (GHz) at time t in [0, t_gate]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12) or np.any(t > params.t_gate + 1e-12):
        raise ValueError(f"t outside [0, {params.t_gate}]")
    x1 = (t - 0.5 * params.t_ramp) / (SQRT2 * params.sigma)
    x2 = (t - params.t_gate + 0.5 * params.t_ramp) / (SQRT2 * params.sigma)
    out = params.off_freq + 0.5 * (params.on_freq - params.off_freq) * (erf(x1) - erf(x2))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MovePulseParams:
    """Single-excursion transfer pulse with independent start/end frequencies.

    The qubit ramps from ``start_freq`` to ``on_freq`` (ramp width
    ``t_ramp_in``), dwells for ``t_on`` between ramp midpoints, then ramps to
    ``end_freq`` (width ``t_ramp_out``).  With equal start/end frequencies
    and ramps this coincides with the CZ profile.
    """

    start_freq: float
    on_freq: float
    end_freq: float
    t_on: float
    sigma: float | None = None
    t_ramp: float | None = None
    sigma_out: float | None = None
    t_ramp_out: float | None = None

    def __post_init__(self):
        s, tr = _resolve_ramp(self.sigma, self.t_ramp)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "t_ramp", tr)
        if self.sigma_out is None and self.t_ramp_out is None:
            object.__setattr__(self, "sigma_out", s)
            object.__setattr__(self, "t_ramp_out", tr)
        else:
            so, tro = _resolve_ramp(self.sigma_out, self.t_ramp_out)
            object.__setattr__(self, "sigma_out", so)
            object.__setattr__(self, "t_ramp_out", tro)
        if self.t_on <= 0:
            raise ValueError("t_on must be positive")

    @property
    def t_gate(self) -> float:
        return self.t_on + 0.5 * (self.t_ramp + self.t_ramp_out)

    def replace(self, **kw) -> "MovePulseParams":
        fields = dict(start_freq=self.start_freq, on_freq=self.on_freq,
                      end_freq=self.end_freq, t_on=self.t_on,
                      sigma=self.sigma, t_ramp=self.t_ramp,
                      sigma_out=self.sigma_out, t_ramp_out=self.t_ramp_out)
        fields.update(kw)
        return MovePulseParams(**fields)


def move_profile(params: MovePulseParams, t):
    """Qubit frequency (GHz) at time t in [0, t_gate] for a transfer pulse."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12) or np.any(t > params.t_gate + 1e-12):
        raise ValueError(f"t outside [0, {params.t_gate}]")
    c1 = 0.5 * params.t_ramp
    c2 = params.t_gate - 0.5 * params.t_ramp_out
    x1 = (t - c1) / (SQRT2 * params.sigma)
    x2 = (t - c2) / (SQRT2 * params.sigma_out)
    out = (params.on_freq
           + 0.5 * (params.start_freq - params.on_freq) * (1.0 - erf(x1))
           + 0.5 * (params.end_freq - params.on_freq) * (1.0 + erf(x2)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SwitchParams:
    """Single switch of a detuning from delta_on to delta_off (rad/ns)."""

    delta_off: float
    delta_on: float
    sigma: float | None = None
    t_ramp: float | None = None

    def __post_init__(self):
        s, tr = _resolve_ramp(self.sigma, self.t_ramp)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "t_ramp", tr)
        if self.delta_on * self.delta_off <= 0:
            raise ValueError("delta_on and delta_off must have the same sign "
                             "(the detuning must not cross zero)")


def switch_profile(params: SwitchParams, t):
    """Detuning (rad/ns) at time t in [0, t_ramp]; midpoint value is exact."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12) or np.any(t > params.t_ramp + 1e-12):
        raise ValueError(f"t outside [0, {params.t_ramp}]")
    x = (t - 0.5 * params.t_ramp) / (SQRT2 * params.sigma)
    out = (0.5 * (params.delta_off + params.delta_on)
           + 0.5 * (params.delta_off - params.delta_on) * erf(x))
    return out if out.ndim else float(out)


def sudden_limit_ton(g_bus: float) -> float:
    """Plateau time (ns) of the sudden-limit CZ, pi/(sqrt(2) g) with g angular.

    ``g_bus`` is the coupling in GHz (as omega/2pi).
    """
    if g_bus <= 0:
        raise ValueError("g_bus must be positive")
    return 1.0 / (2.0 * SQRT2 * g_bus)
