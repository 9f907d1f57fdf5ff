"""Inner stepping loops for the piecewise-constant exponential propagator.

The numba-compiled kernel and the pure-numpy fallback implement the same
algorithm: midpoint-sampled Hamiltonian per uniform step, exponential applied
to the state block by a spectrally-shifted Taylor series (converged to
machine precision, hence an exact matrix-exponential step).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap if not (len(a) == 1 and callable(a[0])) else a[0]

_MAX_TAYLOR_TERMS = 80
_TERM_TOL = 1e-16


@njit(cache=True)
def _diag_drive_steps(h_off, base_diag, drive_diag, drive_vals, psi, h):
    """Steps for H(t) = h_off + diag(base_diag + drive_vals[j]*drive_diag).

    h_off has zero diagonal; drive_vals are angular (rad/ns) midpoint values;
    psi (dim, k) is advanced in place through all steps.
    """
    dim, k = psi.shape
    nsteps = drive_vals.shape[0]
    for j in range(nsteps):
        diag = base_diag + drive_vals[j] * drive_diag
        center = 0.5 * (diag.min() + diag.max())
        shifted = diag - center
        term = psi.copy()
        total = psi.copy()
        for n in range(1, _MAX_TAYLOR_TERMS):
            term = np.dot(h_off, term) + shifted.reshape(dim, 1) * term
            term *= -1j * h / n
            total += term
            biggest = 0.0
            for a in range(dim):
                for b in range(k):
                    v = abs(term[a, b])
                    if v > biggest:
                        biggest = v
            if biggest < _TERM_TOL:
                break
        phase = np.exp(-1j * center * h)
        for a in range(dim):
            for b in range(k):
                psi[a, b] = total[a, b] * phase
    return psi


def diag_drive_steps_numpy(h_off, base_diag, drive_diag, drive_vals, psi, h):
    """Numpy twin of the numba kernel (same arithmetic, same results)."""
    dim, k = psi.shape
    for w in drive_vals:
        diag = base_diag + w * drive_diag
        center = 0.5 * (diag.min() + diag.max())
        shifted = (diag - center)[:, None]
        term = psi.copy()
        total = psi.copy()
        for n in range(1, _MAX_TAYLOR_TERMS):
            term = h_off @ term + shifted * term
            term *= -1j * h / n
            total += term
            if np.abs(term).max() < _TERM_TOL:
                break
        psi = total * np.exp(-1j * center * h)
    return psi


def general_steps(matrix_of_t, times, psi, h):
    """Steps for an arbitrary Hermitian H(t); midpoints given in ``times``."""
    for tm in times:
        hm = np.asarray(matrix_of_t(tm))
        diag = np.real(np.diag(hm))
        center = 0.5 * (diag.min() + diag.max())
        term = psi.copy()
        total = psi.copy()
        for n in range(1, _MAX_TAYLOR_TERMS):
            term = hm @ term - center * term
            term *= -1j * h / n
            total += term
            if np.abs(term).max() < _TERM_TOL * max(1.0, np.abs(total).max()):
                break
        psi = total * np.exp(-1j * center * h)
    return psi
