"""Fidelity metrics, auxiliary z rotations, and z-angle optimization.

The state-averaged process fidelity of an order-N projected gate is
(Tr(U^dag U) + |Tr(T^dag U)|^2) / (N + N^2); leakage enters through the
first term.  A CZ is only defined up to local z rotations on the qubit and
the bus, which form a two-parameter diagonal sheet; the optimizer seeds the
angles from the projected gate's diagonal phases and refines by direct
search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .propagator import ProjectedGate

#: CZ in the ordered computational basis {00, 01, 10, 11} (qubit, bus).
CZ_TARGET = np.diag([1.0, 1.0, 1.0, -1.0])

#: Diagonal magnitude below which the z-angle seed formulas degenerate.
SEED_DIAGONAL_MIN = 1e-6


class DegenerateSeedError(RuntimeError):
    """A diagonal element is too small to seed the z-angle optimization."""


def _wrap_angle(a: float) -> float:
    """Reduce to (-pi, pi]."""
    w = (-a + np.pi) % (2.0 * np.pi)
    return float(np.pi - w)


@dataclass(frozen=True)
class ZAngles:
    """Auxiliary z-rotation angles (rad) on the qubit and the bus."""

    qubit: float
    bus: float

    def __post_init__(self):
        object.__setattr__(self, "qubit", _wrap_angle(self.qubit))
        object.__setattr__(self, "bus", _wrap_angle(self.bus))


@dataclass(frozen=True)
class FidelityReport:
    f_ave: float
    f_min11: float
    leakage: float
    angles: ZAngles

    def __post_init__(self):
        if self.f_ave > 1 + 1e-9 or self.f_min11 > 1 + 1e-9:
            raise ValueError("fidelities cannot exceed 1")
        if self.leakage < -1e-9:
            raise ValueError("leakage cannot be negative")


def _matrix_of(u) -> np.ndarray:
    return u.matrix if isinstance(u, ProjectedGate) else np.asarray(u)


def f_ave(u, target: np.ndarray = CZ_TARGET) -> float:
    """State-averaged process fidelity of a projected gate against a target."""
    m = _matrix_of(u)
    t = np.asarray(target)
    if m.shape != t.shape or m.shape[0] != m.shape[1]:
        raise ValueError(f"order mismatch: gate {m.shape}, target {t.shape}")
    n = m.shape[0]
    tr_uu = np.trace(m.conj().T @ m).real
    tr_tu = np.trace(t.conj().T @ m)
    return float((tr_uu + abs(tr_tu) ** 2) / (n + n * n))


def f_min11(u_bare: np.ndarray, eig, label) -> float:
    """Worst-case state fidelity |<e11| U |e11>|^2 for the doubly-excited
    computational eigenstate; insensitive to the controlled phase."""
    v = eig.vector(label)
    amp = v.conj() @ np.asarray(u_bare) @ v
    return float(abs(amp) ** 2)


def local_z_matrix(angles: ZAngles) -> np.ndarray:
    """u(g1, g2) = Rz(g1) x Rz(g2) on {00,01,10,11}, global phase included."""
    g1, g2 = angles.qubit, angles.bus
    return np.exp(0.5j * (g1 + g2)) * np.diag(
        [1.0, np.exp(-1j * g2), np.exp(-1j * g1), np.exp(-1j * (g1 + g2))])


def apply_z(gate: ProjectedGate, angles: ZAngles) -> ProjectedGate:
    """Left-multiply by the auxiliary z rotations."""
    m = local_z_matrix(angles) @ gate.matrix
    return ProjectedGate(labels=gate.labels, matrix=m)


def _fave_given_angles(m: np.ndarray, tr_uu: float, g1: float, g2: float) -> float:
    s = (m[0, 0] + m[1, 1] * np.exp(-1j * g2) + m[2, 2] * np.exp(-1j * g1)
         - m[3, 3] * np.exp(-1j * (g1 + g2)))
    return (tr_uu + abs(s) ** 2) / 20.0


def seed_z_angles(gate: ProjectedGate | np.ndarray) -> ZAngles:
    """Analytic angle seeds from the projected gate's diagonal phases:
    g1 = arg<10|U|10> - arg<00|U|00>, g2 = arg<01|U|01> - arg<00|U|00>.

    These cancel the single-excitation phase accumulation exactly, leaving
    any controlled-phase error entirely on the doubly-excited element.
    """
    m = _matrix_of(gate)
    if m.shape != (4, 4):
        raise ValueError("z-angle seeding expects an order-4 gate")
    diag = np.diag(m)
    small = np.abs(diag) < SEED_DIAGONAL_MIN
    if small.any():
        raise DegenerateSeedError(
            f"vanishing diagonal elements at positions {np.flatnonzero(small)}")
    return ZAngles(qubit=float(np.angle(m[2, 2] / m[0, 0])),
                   bus=float(np.angle(m[1, 1] / m[0, 0])))


def optimize_z_angles(gate: ProjectedGate | np.ndarray,
                      target: np.ndarray = CZ_TARGET) -> tuple[ZAngles, float]:
    """Maximize f_ave over the two z angles for a near-CZ projected gate.

    Starts from the analytic seeds and refines by Nelder-Mead; never returns
    less than the seeded value.
    """
    m = _matrix_of(gate)
    if not np.allclose(target, CZ_TARGET):
        raise ValueError("z-angle optimization is defined for the CZ target")
    seeds = seed_z_angles(m)
    tr_uu = np.trace(m.conj().T @ m).real
    g1, g2 = seeds.qubit, seeds.bus

    def neg(g):
        return -_fave_given_angles(m, tr_uu, g[0], g[1])

    res = minimize(neg, [g1, g2], method="Nelder-Mead",
                   options=dict(xatol=1e-12, fatol=1e-14, maxfev=600))
    if -res.fun >= _fave_given_angles(m, tr_uu, g1, g2):
        g1, g2 = res.x
    return ZAngles(qubit=g1, bus=g2), float(_fave_given_angles(m, tr_uu, g1, g2))
