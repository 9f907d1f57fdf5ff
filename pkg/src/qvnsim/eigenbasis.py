"""Interacting eigenbasis of an idle-configuration Hamiltonian.

Computational states are exact eigenfunctions of H_idle, labeled by the bare
occupation tuple they are perturbatively connected to.  Labeling uses
maximum-overlap assignment; each eigenvector's phase is fixed so that its
dominant bare amplitude is real positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .device import ExcitationBasis, HermitianOperator

#: Minimum squared overlap for an unambiguous dominant-overlap assignment.
DOMINANT_OVERLAP_MIN = 0.5

ORTHONORMALITY_TOL = 1e-10


class NonDispersiveError(RuntimeError):
    """Dominant-overlap labeling is ambiguous for some bare labels."""

    def __init__(self, offenders):
        self.offenders = list(offenders)
        msg = ", ".join(f"{lab} (|overlap|^2={ov:.3f})" for lab, ov in self.offenders)
        super().__init__(f"non-dispersive configuration; ambiguous labels: {msg}")


class ResonantPairError(RuntimeError):
    """A degenerate bare pair is connected by the coupling."""


@dataclass(frozen=True)
class EigenBasis:
    """Eigenfunctions of H_idle with bare-label assignment.

    ``energies`` are shifted so the vacuum-connected eigenvalue is zero and
    are in ascending order; ``vectors[:, k]`` is the k-th eigencolumn in the
    bare basis.
    """

    energies: np.ndarray
    vectors: np.ndarray
    bare_assignment: dict = field(repr=False)
    basis: ExcitationBasis = field(repr=False)
    idle_freqs: tuple[float, ...] | None = None
    dominant_overlaps: dict = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def overlap_of(self, label) -> float:
        """Squared overlap of a label's bare state with its eigenvector."""
        return self.dominant_overlaps[tuple(label)]

    def check_labels(self, labels):
        """Raise NonDispersiveError if any label's assignment is ambiguous."""
        bad = [(tuple(L), self.overlap_of(L)) for L in labels
               if self.overlap_of(L) <= DOMINANT_OVERLAP_MIN]
        if bad:
            raise NonDispersiveError(bad)

    def eigenindex(self, label) -> int:
        try:
            return self.bare_assignment[tuple(label)]
        except KeyError:
            raise KeyError(f"label {tuple(label)} not in the eigenbasis assignment")

    def vector(self, label) -> np.ndarray:
        return self.vectors[:, self.eigenindex(label)]

    def energy(self, label) -> float:
        return float(self.energies[self.eigenindex(label)])

    def column_block(self, labels) -> np.ndarray:
        """Stack of assigned eigencolumns, one per label."""
        return self.vectors[:, [self.eigenindex(L) for L in labels]]


def diagonalize_idle(h_idle: HermitianOperator, basis: ExcitationBasis,
                     idle_freqs=None, required_labels=None) -> EigenBasis:
    """Dense diagonalization with maximum-overlap bare labeling.

    Raises NonDispersiveError if a label's dominant overlap is <= 0.5.  By
    default every label is checked; ``required_labels`` restricts the check
    to the labels a caller will actually use.  (Identically parked empty
    qubits form an exactly degenerate manifold whose eigenstates mix across
    qubits; labels with excitations there are intrinsically ambiguous and
    never used as computational states.)
    """
    if h_idle.dim != basis.dim:
        raise ValueError("operator dimension does not match basis")
    energies, vectors = np.linalg.eigh(h_idle.entries)
    overlap2 = np.abs(vectors) ** 2  # rows: bare labels, cols: eigenvectors

    # Optimal one-to-one assignment maximizing total overlap; equivalent to
    # greedy max-overlap with backtracking on conflicts, but globally optimal.
    rows, cols = linear_sum_assignment(-overlap2)
    checked = (set(map(tuple, required_labels))
               if required_labels is not None else None)
    assignment = {}
    dominant = {}
    offenders = []
    for li, ei in zip(rows, cols):
        ov = overlap2[li, ei]
        if ov <= DOMINANT_OVERLAP_MIN and (checked is None
                                           or basis.labels[li] in checked):
            offenders.append((basis.labels[li], ov))
        assignment[basis.labels[li]] = int(ei)
        dominant[basis.labels[li]] = float(ov)
    if offenders:
        raise NonDispersiveError(offenders)

    # Phase convention: the assigned (dominant) bare amplitude real positive.
    vectors = vectors.copy()
    for label, ei in assignment.items():
        li = basis.index_of[label]
        amp = vectors[li, ei]
        vectors[:, ei] *= np.abs(amp) / amp

    energies = energies - energies[assignment[basis.vacuum()]]
    return EigenBasis(energies=energies, vectors=vectors,
                      bare_assignment=assignment, basis=basis,
                      idle_freqs=None if idle_freqs is None else tuple(idle_freqs),
                      dominant_overlaps=dominant)


@dataclass(frozen=True)
class DiagonalizingGenerator:
    """First-order generator S of the diagonalizing transformation exp(-iS)."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def first_order_generator(h0: np.ndarray, delta_h: np.ndarray,
                          degeneracy_tol: float = 1e-9) -> DiagonalizingGenerator:
    """Solve i[S, H0] + dH = 0 in the bare basis: S_ab = -i dH_ab / (E_a - E_b).

    H0 must be diagonal and dH purely off-diagonal; a degenerate pair
    connected by dH raises ResonantPairError.
    """
    h0 = np.asarray(h0)
    delta_h = np.asarray(delta_h)
    if np.abs(h0 - np.diag(np.diag(h0))).max() > 0:
        raise ValueError("H0 must be diagonal")
    if np.abs(np.diag(delta_h)).max() > 0:
        raise ValueError("delta_h must be purely off-diagonal")
    e = np.real(np.diag(h0))
    gap = e[:, None] - e[None, :]
    connected = np.abs(delta_h) > 0
    resonant = connected & (np.abs(gap) < degeneracy_tol)
    if resonant.any():
        a, b = np.argwhere(resonant)[0]
        raise ResonantPairError(
            f"degenerate pair connected by coupling: states {a} and {b} "
            f"(gap {gap[a, b]:.3e})")
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(connected, -1j * delta_h / gap, 0.0)
    return DiagonalizingGenerator(matrix=s)
