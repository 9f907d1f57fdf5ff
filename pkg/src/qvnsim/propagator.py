"""Time-dependent Schrodinger propagation, subspace projection, and
reference-frame phase unwinding.

Integration is piecewise-constant on a uniform grid: within each step the
Hamiltonian is sampled at the midpoint and the exact matrix exponential is
applied (spectrally shifted Taylor evaluation, converged to machine
precision).  The step is unconditionally unitary; the only discretization
error is the midpoint sampling, second order in the step size.  Propagation
happens in the bare basis; eigenbasis conversion occurs at projection time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .device import TWO_PI, ExcitationBasis, HermitianOperator
from .eigenbasis import EigenBasis

#: Default integrator step, ns.
DEFAULT_DT = 1e-3

UNITARITY_TOL = 1e-9


class PropagationError(RuntimeError):
    """Integration could not proceed (bad step size or non-finite data)."""


@dataclass(frozen=True)
class EvolutionOperator:
    """Evolution operator over a time span, tagged with its basis."""

    matrix: np.ndarray
    time_span: tuple[float, float]
    basis_tag: str = "bare"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def duration(self) -> float:
        return self.time_span[1] - self.time_span[0]

    def unitarity_defect(self) -> float:
        """Spectral-norm distance of U^dag U from the identity."""
        g = self.matrix.conj().T @ self.matrix
        return float(np.linalg.norm(g - np.eye(self.dim), ord=2))


@dataclass(frozen=True)
class ProjectedGate:
    """Evolution projected onto an ordered set of computational labels."""

    labels: tuple
    matrix: np.ndarray

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    @property
    def leakage(self) -> float:
        """order - Tr(U^dag U): total probability lost from the subspace."""
        return float(self.order - np.trace(self.matrix.conj().T @ self.matrix).real)


class DrivenHamiltonian:
    """H(t) = static + 2*pi*drive(t) * diag(drive_diag).

    ``drive`` returns the driven mode's frequency in GHz; ``drive_diag`` is
    that mode's occupation per basis label.  This is the only time dependence
    in a QVN frequency-excursion pulse.
    """

    def __init__(self, static: HermitianOperator | np.ndarray,
                 drive_diag: np.ndarray, drive):
        m = static.entries if isinstance(static, HermitianOperator) else np.asarray(static)
        self.static = np.ascontiguousarray(m, dtype=complex)
        self.drive_diag = np.ascontiguousarray(drive_diag, dtype=float)
        self.drive = drive
        self._offdiag = self.static.copy()
        np.fill_diagonal(self._offdiag, 0.0)
        self._base_diag = np.ascontiguousarray(np.real(np.diag(self.static)))

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    def matrix(self, t: float) -> np.ndarray:
        h = self.static.copy()
        idx = np.arange(self.dim)
        h[idx, idx] = self._base_diag + TWO_PI * float(self.drive(t)) * self.drive_diag
        return h

    def drive_values(self, times: np.ndarray) -> np.ndarray:
        """Angular drive values (rad/ns) at the given times."""
        try:
            vals = np.asarray(self.drive(times), dtype=float)
            if vals.shape != times.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([float(self.drive(t)) for t in times])
        return TWO_PI * vals


class ConstantHamiltonian:
    """Adapter for a time-independent Hermitian matrix."""

    def __init__(self, matrix: HermitianOperator | np.ndarray):
        m = matrix.entries if isinstance(matrix, HermitianOperator) else np.asarray(matrix)
        self.static = np.asarray(m, dtype=complex)

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    def matrix(self, t: float) -> np.ndarray:
        return self.static


def _as_source(h_of_t):
    if isinstance(h_of_t, (DrivenHamiltonian, ConstantHamiltonian)):
        return h_of_t
    if isinstance(h_of_t, (HermitianOperator, np.ndarray)):
        return ConstantHamiltonian(h_of_t)
    if callable(h_of_t):
        class _Wrapped:
            def __init__(self, f):
                self._f = f

            def matrix(self, t):
                return np.asarray(self._f(t))
        return _Wrapped(h_of_t)
    raise TypeError(f"cannot interpret {type(h_of_t)!r} as a Hamiltonian source")


def _grid(t0: float, t1: float, dt: float):
    if not np.isfinite(dt) or dt <= 0:
        raise PropagationError(f"step size must be positive and finite, got {dt}")
    if t1 < t0:
        raise PropagationError("t1 must be >= t0")
    span = t1 - t0
    if span == 0:
        return 0, 0.0, np.empty(0)
    nsteps = int(np.ceil(span / dt - 1e-12))
    h = span / nsteps
    times = t0 + (np.arange(nsteps) + 0.5) * h
    return nsteps, h, times


def evolve_states(h_of_t, states: np.ndarray, t0: float, t1: float,
                  dt: float = DEFAULT_DT) -> np.ndarray:
    """Propagate a (dim, k) block of state columns from t0 to t1."""
    src = _as_source(h_of_t)
    psi = np.ascontiguousarray(np.atleast_2d(np.asarray(states, dtype=complex).T).T)
    squeeze = psi.ndim > np.asarray(states).ndim
    nsteps, h, times = _grid(t0, t1, dt)
    if nsteps:
        if isinstance(src, DrivenHamiltonian):
            drive_vals = src.drive_values(times)
            if not np.all(np.isfinite(drive_vals)):
                raise PropagationError("drive profile returned non-finite values")
            kernel = (_kernels._diag_drive_steps if _kernels.HAVE_NUMBA
                      else _kernels.diag_drive_steps_numpy)
            psi = kernel(src._offdiag, src._base_diag, src.drive_diag,
                         drive_vals, psi, h)
        else:
            psi = _kernels.general_steps(src.matrix, times, psi, h)
    if not np.all(np.isfinite(psi.view(float))):
        raise PropagationError("propagation produced non-finite amplitudes")
    return psi[:, 0] if squeeze else psi


def evolve(h_of_t, t0: float, t1: float, dt: float = DEFAULT_DT) -> EvolutionOperator:
    """Full evolution operator U(t1, t0) in the bare basis."""
    src = _as_source(h_of_t)
    dim = src.matrix(t0).shape[0] if not hasattr(src, "dim") else src.dim
    u = evolve_states(src, np.eye(dim, dtype=complex), t0, t1, dt)
    return EvolutionOperator(matrix=u, time_span=(t0, t1))


def project(u: EvolutionOperator | np.ndarray, eig: EigenBasis, labels) -> ProjectedGate:
    """Matrix elements <eig(a)| U |eig(b)> over the given ordered labels."""
    m = u.matrix if isinstance(u, EvolutionOperator) else np.asarray(u)
    block = eig.column_block(labels)
    return ProjectedGate(labels=tuple(tuple(L) for L in labels),
                         matrix=block.conj().T @ m @ block)


def project_states(states: np.ndarray, eig: EigenBasis, labels) -> ProjectedGate:
    """Projection when columns are the propagated eigenvectors of ``labels``."""
    block = eig.column_block(labels)
    return ProjectedGate(labels=tuple(tuple(L) for L in labels),
                         matrix=block.conj().T @ np.asarray(states))


def frame_phases(basis: ExcitationBasis, reference_freqs, duration: float) -> np.ndarray:
    """Per-label unwinding phase factors exp(+i 2 pi sum_k n_k ref_k T)."""
    refs = np.asarray(reference_freqs, dtype=float)
    if refs.shape != (basis.mode_count,):
        raise ValueError("need one reference frequency per mode")
    occ = np.array(basis.labels, dtype=float)
    return np.exp(1j * TWO_PI * (occ @ refs) * duration)


def frame_unwind(obj, basis: ExcitationBasis, reference_freqs, duration: float):
    """Remove deterministic phase accumulation at the mode reference
    frequencies (qubits: the detuned operating frequency; resonators: their
    bare frequencies).  States get elementwise phases; evolution operators
    and matrices are left-multiplied.
    """
    ph = frame_phases(basis, reference_freqs, duration)
    if isinstance(obj, EvolutionOperator):
        return EvolutionOperator(matrix=ph[:, None] * obj.matrix,
                                 time_span=obj.time_span, basis_tag=obj.basis_tag)
    arr = np.asarray(obj)
    if arr.ndim == 1:
        return ph * arr
    return ph[:, None] * arr


def default_reference_freqs(config) -> np.ndarray:
    """Reference frame: every qubit at off_freq, resonators at bare frequency."""
    n = config.n_qubits
    return np.array([config.off_freq] * n + list(config.memory_freqs)
                    + [config.bus_freq])
