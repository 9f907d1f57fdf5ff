"""Perturbative nonadiabatic switching errors and pulse-shape error formulas.

A single frequency switch between two dispersive settings excites a detuned
channel with probability p_sw = (G/Delta_on)^2 |A|^2, where A is a
dimensionless phase-weighted integral over the ramp.  The CZ worst-case
fidelity estimate combines two incoherent switching events: F = 1 - 2 p_sw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

from .device import TWO_PI, DeviceConfig
from .pulses import RAMP_FACTOR, SQRT2, SwitchParams, sudden_limit_ton

__all__ = [
    "TwoChannelSpec", "SwitchErrorReport", "switching_amplitude",
    "switching_probability", "switching_report", "cz_switch_spec",
    "cz_lower_band_spec", "cz_min_fidelity_estimate", "z_angle_error",
    "uncompensated_pulse_error", "compensated_pulse_error",
    "pulse_precision_bounds", "qubit_qubit_min_fidelity",
]


class QuadratureError(RuntimeError):
    """The ramp integral did not converge to the requested tolerance."""


@dataclass(frozen=True)
class TwoChannelSpec:
    """One nonadiabatic transition channel during a frequency switch.

    ``coupling`` (G) and the detunings are angular, rad/ns.  Validity needs
    G < |delta_on| and a detuning that never crosses zero.
    """

    coupling: float
    delta_on: float
    delta_off: float
    sigma: float | None = None
    t_ramp: float | None = None

    def __post_init__(self):
        if self.sigma is None and self.t_ramp is None:
            raise ValueError("provide sigma or t_ramp")
        if self.sigma is None:
            object.__setattr__(self, "sigma", self.t_ramp / RAMP_FACTOR)
        if self.t_ramp is None:
            object.__setattr__(self, "t_ramp", RAMP_FACTOR * self.sigma)
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if self.delta_on * self.delta_off <= 0:
            raise ValueError("detuning must not pass through zero "
                             "(Landau-Zener regime)")
        if self.coupling >= abs(self.delta_on):
            raise ValueError("perturbative limit needs G < |delta_on|")

    @classmethod
    def from_ghz(cls, coupling, delta_on, delta_off, sigma=None, t_ramp=None):
        """Build from plain-GHz rates."""
        return cls(TWO_PI * coupling, TWO_PI * delta_on, TWO_PI * delta_off,
                   sigma=sigma, t_ramp=t_ramp)

    def profile(self) -> SwitchParams:
        return SwitchParams(delta_off=self.delta_off, delta_on=self.delta_on,
                            sigma=self.sigma, t_ramp=self.t_ramp)


@dataclass(frozen=True)
class SwitchErrorReport:
    amplitude: complex
    p_sw: float
    context: str = ""

    @property
    def a_sq(self) -> float:
        return float(abs(self.amplitude) ** 2)


def switching_amplitude(spec: TwoChannelSpec, rel_tol: float = 1e-9) -> complex:
    """A = Delta_on * int_0^{t_ramp} (dDelta/dt / Delta^2) e^{-i Phi(t)} dt.

    The accumulated phase Phi(t) = int_0^t Delta dtau has a closed form for
    the error-function ramp and the remaining oscillatory integral is done by
    adaptive quadrature.
    """
    c = 0.5 * (spec.delta_off + spec.delta_on)
    d = 0.5 * (spec.delta_off - spec.delta_on)
    sig, t_ramp = spec.sigma, spec.t_ramp
    if d == 0.0:
        return 0.0 + 0.0j

    def u(t):
        return (t - 0.5 * t_ramp) / (SQRT2 * sig)

    def erf_antiderivative(x):
        return x * erf(x) + np.exp(-x * x) / np.sqrt(np.pi)

    u0 = u(0.0)
    f0 = erf_antiderivative(u0)

    def phase(t):
        return c * t + d * SQRT2 * sig * (erf_antiderivative(u(t)) - f0)

    def weight(t):
        x = u(t)
        delta = c + d * erf(x)
        ddot = d * (2.0 / np.sqrt(np.pi)) * np.exp(-x * x) / (SQRT2 * sig)
        return ddot / (delta * delta)

    def integrand_re(t):
        return weight(t) * np.cos(phase(t))

    def integrand_im(t):
        return -weight(t) * np.sin(phase(t))

    re, err_re = quad(integrand_re, 0.0, t_ramp, epsabs=1e-14,
                      epsrel=rel_tol, limit=500)
    im, err_im = quad(integrand_im, 0.0, t_ramp, epsabs=1e-14,
                      epsrel=rel_tol, limit=500)
    a = spec.delta_on * (re + 1j * im)
    err = abs(spec.delta_on) * (err_re + err_im)
    if err > max(1e-13, 1e-6 * abs(a)):
        raise QuadratureError(f"ramp integral error estimate {err:.2e} "
                              f"for |A| = {abs(a):.2e}")
    return complex(a)


def switching_probability(spec: TwoChannelSpec) -> float:
    """p_sw = (G/Delta_on)^2 |A|^2."""
    a = switching_amplitude(spec)
    return float((spec.coupling / spec.delta_on) ** 2 * abs(a) ** 2)


def switching_report(spec: TwoChannelSpec, context: str = "") -> SwitchErrorReport:
    a = switching_amplitude(spec)
    p = float((spec.coupling / spec.delta_on) ** 2 * abs(a) ** 2)
    return SwitchErrorReport(amplitude=a, p_sw=p, context=context)


def cz_switch_spec(device: DeviceConfig, t_ramp: float | None = None,
                   sigma: float | None = None) -> TwoChannelSpec:
    """Dominant CZ channel: the doubly-excited computational state leaking to
    the two-photon bus state.  G = sqrt(2) g_b; the on-resonance detuning
    eta - sqrt(2) g_b accounts for level repulsion by the auxiliary state."""
    return TwoChannelSpec.from_ghz(
        coupling=SQRT2 * device.g_bus,
        delta_on=device.anharmonicity - SQRT2 * device.g_bus,
        delta_off=device.off_freq - device.bus_freq,
        sigma=sigma, t_ramp=t_ramp)


def cz_lower_band_spec(device: DeviceConfig, t_ramp: float | None = None,
                       sigma: float | None = None) -> TwoChannelSpec:
    """Subdominant single-excitation channel; level repulsion raises the
    on-resonance detuning to eta + 2 g_b^2 / eta."""
    eta, gb = device.anharmonicity, device.g_bus
    return TwoChannelSpec.from_ghz(
        coupling=gb,
        delta_on=eta + 2.0 * gb * gb / eta,
        delta_off=device.off_freq - device.bus_freq,
        sigma=sigma, t_ramp=t_ramp)


def cz_min_fidelity_estimate(device: DeviceConfig, t_ramp: float | None = None,
                             sigma: float | None = None) -> float:
    """Worst-case CZ fidelity estimate 1 - 2 p_sw (two incoherent switches)."""
    p = switching_probability(cz_switch_spec(device, t_ramp=t_ramp, sigma=sigma))
    return float(1.0 - 2.0 * p)


def z_angle_error(phi1: float, phi2: float) -> float:
    """Leading-order average fidelity loss from z-angle errors."""
    return (phi1 * phi1 + phi2 * phi2) / 5.0


@dataclass(frozen=True)
class PulseErrorEstimate:
    """Fidelity-loss estimates for plateau-time and on-frequency errors."""

    exact: float
    sudden: float | None = None


def uncompensated_pulse_error(dt_on: float, domega_on: float, pulse,
                              device: DeviceConfig | None = None) -> PulseErrorEstimate:
    """Loss when the z angles are NOT readjusted after a pulse error.

    The qubit's accumulated phase error (omega_on - omega_off) dt_on +
    domega_on t_on acts as an uncompensated z-angle error.  ``exact`` uses
    the pulse's own parameters; ``sudden`` substitutes the bus detuning and
    the sudden-limit plateau time (needs ``device``).

    dt_on in ns, domega_on in GHz.
    """
    dw = TWO_PI * domega_on
    phi = TWO_PI * (pulse.on_freq - pulse.off_freq) * dt_on + dw * pulse.t_on
    exact = phi * phi / 5.0
    sudden = None
    if device is not None:
        phi_s = (TWO_PI * (device.off_freq - device.bus_freq) * dt_on) ** 2 \
            + (sudden_limit_ton(device.g_bus) * dw) ** 2
        sudden = phi_s / 5.0
    return PulseErrorEstimate(exact=float(exact), sudden=sudden)


@dataclass(frozen=True)
class CompensatedPulseError:
    """Loss with optimal z angles re-applied: controlled-phase error delta
    and rotation error theta on the doubly-excited channel."""

    loss: float
    phase_error: float
    rotation_angle: float

    @property
    def rotation_population(self) -> float:
        return float(np.sin(0.5 * self.rotation_angle) ** 2)


def compensated_pulse_error(dt_on: float, domega_on: float,
                            g_bus: float) -> CompensatedPulseError:
    """delta = -pi domega/(2 sqrt2 g_b); E_theta = 2 g_b^2 dt_on^2;
    loss = (3/20) delta^2 + (1/16) theta^2.  g_bus in GHz."""
    gb = TWO_PI * g_bus
    delta = -np.pi * TWO_PI * domega_on / (2.0 * SQRT2 * gb)
    e_theta = 2.0 * gb * gb * dt_on * dt_on
    theta = 2.0 * np.arcsin(min(1.0, np.sqrt(e_theta)))
    loss = (3.0 / 20.0) * delta * delta + theta * theta / 16.0
    return CompensatedPulseError(loss=float(loss), phase_error=float(delta),
                                 rotation_angle=float(theta))


def pulse_precision_bounds(loss: float, g_bus: float) -> tuple[float, float]:
    """Invert the compensated-error formulas: the plateau-time error (ns) and
    on-frequency error (GHz) that each alone produce the given loss."""
    gb = TWO_PI * g_bus
    dt_on = np.sqrt(2.0 * loss) / gb          # loss = g_b^2 dt^2 / 2
    domega = gb * np.sqrt(loss * 160.0 / 3.0) / np.pi / TWO_PI
    return float(dt_on), float(domega)


@dataclass(frozen=True)
class QubitQubitEstimate:
    """Switching-error estimates for a directly coupled qubit pair."""

    f_min_est: float
    lower_band: SwitchErrorReport
    leakage_channel: SwitchErrorReport


def qubit_qubit_min_fidelity(eta1: float, eta2: float, g: float,
                             t_ramp: float | None = None,
                             sigma: float | None = None,
                             delta_off: float = 1.0) -> QubitQubitEstimate:
    """Directly coupled qubits approaching the upper crossing from above.

    The dominant error is single-excitation switching (G = g, repulsion-
    corrected detuning eta + 2 g^2/eta); the doubly-excited leakage channel
    (G = sqrt2 g, detuning eta1 + eta2 - sqrt2 g) is strongly suppressed by
    the doubled anharmonicity.  All rates GHz, times ns.
    """
    lower = switching_report(
        TwoChannelSpec.from_ghz(g, eta1 + 2.0 * g * g / eta1, delta_off,
                                sigma=sigma, t_ramp=t_ramp),
        context="01<->10")
    leak = switching_report(
        TwoChannelSpec.from_ghz(SQRT2 * g, eta1 + eta2 - SQRT2 * g, delta_off,
                                sigma=sigma, t_ramp=t_ramp),
        context="11->02")
    return QubitQubitEstimate(f_min_est=float(1.0 - 2.0 * lower.p_sw),
                              lower_band=lower, leakage_channel=leak)
