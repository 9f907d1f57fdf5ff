"""Device model: truncated excitation basis and QVN Hamiltonians.

A QVN_n processor has n frequency-tunable qubits, each coupled to a private
memory resonator and to a common bus resonator.  All configuration
frequencies are plain (non-angular) GHz; Hamiltonian matrix entries are
angular, rad/ns.  Mode ordering everywhere is (q1..qn, m1..mn, b).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

#: Hermiticity tolerance (relative) for constructed operators.
HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class DeviceConfig:
    """Static parameters of a QVN_n processor (frequencies in GHz).

    ``qubit_freqs`` holds the nominal idle frequencies; time-dependent
    excursions are described separately by pulse objects.  The second
    anharmonicity defaults to ``3 * anharmonicity`` (cubic anharmonicity).
    """

    n_qubits: int
    memory_freqs: tuple[float, ...]
    bus_freq: float
    g_memory: float
    g_bus: float
    anharmonicity: float
    second_anharmonicity: float | None = None
    park_freq: float = 10.0
    off_freq: float = 7.5
    qubit_freqs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if len(self.memory_freqs) != self.n_qubits:
            raise ValueError("memory_freqs length must equal n_qubits")
        if self.second_anharmonicity is None:
            object.__setattr__(self, "second_anharmonicity",
                               3.0 * self.anharmonicity)
        if self.qubit_freqs is None:
            object.__setattr__(self, "qubit_freqs",
                               (self.park_freq,) * self.n_qubits)
        object.__setattr__(self, "memory_freqs", tuple(self.memory_freqs))
        object.__setattr__(self, "qubit_freqs", tuple(self.qubit_freqs))
        if len(self.qubit_freqs) != self.n_qubits:
            raise ValueError("qubit_freqs length must equal n_qubits")
        for name in ("bus_freq", "park_freq", "off_freq"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if any(f <= 0 for f in self.memory_freqs) or any(f <= 0 for f in self.qubit_freqs):
            raise ValueError("all frequencies must be strictly positive")
        for name in ("g_memory", "g_bus", "anharmonicity"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if len(set(self.memory_freqs)) != self.n_qubits:
            raise ValueError("memory frequencies must be mutually distinct")

    @property
    def mode_count(self) -> int:
        return 2 * self.n_qubits + 1

    def mode_index(self, mode: str) -> int:
        """Dense mode index for names like 'q1', 'm3', 'b'."""
        if mode == "b":
            return 2 * self.n_qubits
        kind, num = mode[0], int(mode[1:])
        if kind not in "qm" or not (1 <= num <= self.n_qubits):
            raise ValueError(f"unknown mode {mode!r}")
        return num - 1 + (self.n_qubits if kind == "m" else 0)

    def mode_freq(self, mode: str) -> float:
        """Bare frequency (GHz) of a mode at its nominal idle setting."""
        i = self.mode_index(mode)
        if i == 2 * self.n_qubits:
            return self.bus_freq
        if i >= self.n_qubits:
            return self.memory_freqs[i - self.n_qubits]
        return self.qubit_freqs[i]


def default_config(anharmonicity: float = 0.300, g_bus: float | None = None,
                   g_memory: float = 0.100, n_qubits: int = 4) -> DeviceConfig:
    """Shipped four-qubit device: memories 8.3..8.0 GHz (100 MHz spacing),
    bus 6.5 GHz, parking 10 GHz, detuned operating point 7.5 GHz.

    ``g_bus`` defaults to the optimal coupling 0.15 * anharmonicity.
    """
    if g_bus is None:
        g_bus = 0.15 * anharmonicity
    mem = tuple(8.3 - 0.1 * i for i in range(n_qubits))
    return DeviceConfig(n_qubits=n_qubits, memory_freqs=mem, bus_freq=6.5,
                        g_memory=g_memory, g_bus=g_bus,
                        anharmonicity=anharmonicity)


@dataclass(frozen=True)
class ExcitationBasis:
    """Occupation-number basis truncated by levels per mode and total excitations.

    ``labels`` is lexicographically ordered and ``index_of`` maps each label
    tuple to its dense index.
    """

    mode_count: int
    levels_per_mode: int
    max_total_excitations: int
    labels: tuple[tuple[int, ...], ...]
    index_of: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def occupations(self, mode: int) -> np.ndarray:
        """Occupation of ``mode`` for every label, as a float vector."""
        return np.array([L[mode] for L in self.labels], dtype=float)

    def single_excitation(self, mode: int) -> tuple[int, ...]:
        """Label with one excitation in ``mode`` and vacuum elsewhere."""
        L = [0] * self.mode_count
        L[mode] = 1
        return tuple(L)

    def vacuum(self) -> tuple[int, ...]:
        return (0,) * self.mode_count


def enumerate_basis(mode_count: int, levels_per_mode: int = 4,
                    max_total_excitations: int = 3) -> ExcitationBasis:
    """Enumerate all occupation tuples with each occupation < levels_per_mode
    and total <= max_total_excitations, in lexicographic order."""
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if levels_per_mode < 2:
        raise ValueError("levels_per_mode must be >= 2")
    if max_total_excitations < 0:
        raise ValueError("max_total_excitations must be >= 0")
    labels = tuple(
        t for t in itertools.product(range(levels_per_mode), repeat=mode_count)
        if sum(t) <= max_total_excitations
    )
    index_of = {t: i for i, t in enumerate(labels)}
    return ExcitationBasis(mode_count, levels_per_mode, max_total_excitations,
                           labels, index_of)


def product_basis(mode_count: int, levels_per_mode: int) -> ExcitationBasis:
    """Full tensor-product basis (no excitation cap)."""
    return enumerate_basis(mode_count, levels_per_mode,
                           mode_count * (levels_per_mode - 1))


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix in a truncated bare basis, entries in rad/ns."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("entries must be finite")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("matrix is not Hermitian to tolerance")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _ladder_y(levels: int) -> np.ndarray:
    """Tridiagonal i(a^dag - a) truncated to ``levels`` levels."""
    y = np.zeros((levels, levels), dtype=complex)
    for n in range(1, levels):
        y[n - 1, n] = -1j * np.sqrt(n)
        y[n, n - 1] = 1j * np.sqrt(n)
    return y


def y_coupling_matrix(levels: int) -> np.ndarray:
    """Coupling matrix from the harmonic-oscillator approximation.

    Only the 4-level form and its 3-level truncation are part of the device
    model contract.
    """
    if levels not in (3, 4):
        raise ValueError(f"unsupported level count {levels}; expected 3 or 4")
    return _ladder_y(levels)


def _qubit_diagonal(eps: float, anh: float, anh2: float, levels: int) -> list[float]:
    """Qubit level energies (GHz): 0, eps, 2 eps - eta, 3 eps - eta'."""
    vals = [0.0, eps, 2.0 * eps - anh, 3.0 * eps - anh2]
    return vals[:levels]


def _assemble(basis: ExcitationBasis, diag_ghz: np.ndarray,
              couplings: list[tuple[int, int, float]]) -> np.ndarray:
    """Dense matrix (rad/ns) from per-label diagonal energies (GHz) and
    Y(x)Y couplings (mode_a, mode_b, strength GHz)."""
    dim = basis.dim
    lv = basis.levels_per_mode
    y = _ladder_y(lv)
    h = np.zeros((dim, dim), dtype=complex)
    h[np.arange(dim), np.arange(dim)] = TWO_PI * diag_ghz
    index_of = basis.index_of
    for label, i in index_of.items():
        for a, b, g in couplings:
            na, nb = label[a], label[b]
            for da in (-1, 1):
                for db in (-1, 1):
                    na2, nb2 = na + da, nb + db
                    if not (0 <= na2 < lv and 0 <= nb2 < lv):
                        continue
                    target = list(label)
                    target[a], target[b] = na2, nb2
                    j = index_of.get(tuple(target))
                    if j is None:
                        continue
                    h[j, i] += TWO_PI * g * y[na2, na] * y[nb2, nb]
    return h


def _qvn_diagonal(config: DeviceConfig, qubit_freqs, basis: ExcitationBasis) -> np.ndarray:
    n = config.n_qubits
    diag = np.zeros(basis.dim)
    for label, i in basis.index_of.items():
        e = 0.0
        for k in range(n):
            e += _qubit_diagonal(qubit_freqs[k], config.anharmonicity,
                                 config.second_anharmonicity,
                                 basis.levels_per_mode)[label[k]]
            e += config.memory_freqs[k] * label[n + k]
        e += config.bus_freq * label[2 * n]
        diag[i] = e
    return diag


def _qvn_couplings(config: DeviceConfig) -> list[tuple[int, int, float]]:
    n = config.n_qubits
    out = [(k, n + k, config.g_memory) for k in range(n)]
    out += [(k, 2 * n, config.g_bus) for k in range(n)]
    return out


def build_qvn_hamiltonian(config: DeviceConfig, qubit_freqs,
                          basis: ExcitationBasis) -> HermitianOperator:
    """Full QVN Hamiltonian at the given qubit frequencies (GHz).

    Diagonal qubit terms (0, eps, 2 eps - eta, 3 eps - eta'), harmonic
    resonator terms, and Y(x)Y couplings of each qubit to its memory (g_m)
    and to the bus (g_b).  No memory-bus coupling and no rotating-wave
    approximation.
    """
    if len(qubit_freqs) != config.n_qubits:
        raise ValueError("qubit_freqs length must equal n_qubits")
    if basis.mode_count != config.mode_count:
        raise ValueError(f"basis has {basis.mode_count} modes, "
                         f"device needs {config.mode_count}")
    diag = _qvn_diagonal(config, qubit_freqs, basis)
    return HermitianOperator(_assemble(basis, diag, _qvn_couplings(config)))


def build_driven_qvn_parts(config: DeviceConfig, qubit_freqs,
                           basis: ExcitationBasis, driven_qubit: int):
    """Split H(t) = static + 2*pi*eps(t)*diag(n_driven) for one driven qubit.

    The static part carries the driven qubit's anharmonic offsets
    (0, 0, -eta, -eta') and everything else; the returned occupation vector
    multiplies the instantaneous drive frequency.
    """
    freqs = list(qubit_freqs)
    freqs[driven_qubit] = 0.0
    static = build_qvn_hamiltonian(config, freqs, basis)
    return static, basis.occupations(driven_qubit)


def build_qubit_bus_hamiltonian(qubit_freq: float, anharmonicity: float,
                                bus_freq: float, g_bus: float,
                                basis: ExcitationBasis | None = None) -> HermitianOperator:
    """Three-level qubit coupled to a three-level bus resonator.

    With the default basis this is the full 9-dim product model, in the bare
    basis (q, b) ordered lexicographically.
    """
    if basis is None:
        basis = qubit_bus_basis()
    if basis.mode_count != 2:
        raise ValueError("qubit-bus model needs a 2-mode basis")
    diag = np.zeros(basis.dim)
    qd = _qubit_diagonal(qubit_freq, anharmonicity, 3.0 * anharmonicity,
                         basis.levels_per_mode)
    for label, i in basis.index_of.items():
        diag[i] = qd[label[0]] + bus_freq * label[1]
    return HermitianOperator(_assemble(basis, diag, [(0, 1, g_bus)]))


def qubit_bus_basis(levels: int = 3) -> ExcitationBasis:
    """Product basis for the single qubit-bus model."""
    return product_basis(2, levels)
