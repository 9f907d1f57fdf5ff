"""Composite gate sequences: segment bookkeeping, z-phase calibration, and
the memory-to-memory CZ protocol.

A sequence is a chain of frequency-excursion segments (MOVEs and one CZ)
with the idle configuration and the logical register's physical homes
re-declared at every boundary.  Between segments, local z corrections --
diagonal phases in the current idle eigenbasis, one angle per occupied-mode
home -- absorb deterministic phase evolution.  They are calibrated from the
segment's action on the vacuum and the single-excitation register states,
independently of the input state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .device import DeviceConfig, ExcitationBasis, build_driven_qvn_parts, \
    build_qvn_hamiltonian, enumerate_basis
from .eigenbasis import EigenBasis, diagonalize_idle
from .optimizer import optimize_cz, optimize_move
from .propagator import DrivenHamiltonian, evolve_states, frame_phases, \
    default_reference_freqs
from .pulses import CZPulseParams, MovePulseParams, cz_profile, move_profile


@dataclass(frozen=True)
class Segment:
    """One pulse on one driven qubit, with idle declarations on both sides.

    ``register_pre``/``register_post`` give, per logical qubit, the mode
    index where its excitation lives before/after the segment.  For a CZ
    segment ``cz_pair`` names the two logical qubits picking up the
    conditional sign.  ``z_phases`` (mode index -> rad) is the calibrated
    correction applied after the segment in the post-idle eigenbasis.
    """

    name: str
    kind: str                      # 'move' | 'cz'
    driven_qubit: int              # qubit number, 0-based
    pulse: CZPulseParams | MovePulseParams
    pre_freqs: tuple[float, ...]
    post_freqs: tuple[float, ...]
    register_pre: tuple[int, ...]
    register_post: tuple[int, ...]
    cz_pair: tuple[int, int] | None = None
    z_phases: dict = field(default_factory=dict)

    @property
    def duration(self) -> float:
        return self.pulse.t_gate

    def profile(self, t):
        if self.kind == "cz":
            return cz_profile(self.pulse, t)
        return move_profile(self.pulse, t)


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered segments; spans abut exactly (each starts where the previous
    ended)."""

    segments: tuple[Segment, ...]

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def boundaries(self) -> list[float]:
        out = [0.0]
        for s in self.segments:
            out.append(out[-1] + s.duration)
        return out


@dataclass
class SequenceResult:
    final_state: np.ndarray
    fidelity: float | None
    total_time: float
    segment_fidelities: list


class _SequenceEngine:
    """Shared machinery for calibration and execution."""

    def __init__(self, device: DeviceConfig, basis: ExcitationBasis, dt: float):
        self.device = device
        self.basis = basis
        self.dt = dt
        self._eig_cache: dict = {}
        self._occ = np.array(basis.labels, dtype=float)

    def idle_eig(self, qubit_freqs) -> EigenBasis:
        key = tuple(np.round(qubit_freqs, 12))
        if key not in self._eig_cache:
            h = build_qvn_hamiltonian(self.device, qubit_freqs, self.basis)
            self._eig_cache[key] = diagonalize_idle(h, self.basis,
                                                    idle_freqs=qubit_freqs,
                                                    required_labels=())
        return self._eig_cache[key]

    def propagate(self, segment: Segment, columns: np.ndarray) -> np.ndarray:
        static, drive_diag = build_driven_qvn_parts(
            self.device, segment.pre_freqs, self.basis, segment.driven_qubit)
        drive = DrivenHamiltonian(static, drive_diag, segment.profile)
        out = evolve_states(drive, columns, 0.0, segment.duration, self.dt)
        # unwind the reference-frame phases accumulated over this segment
        ph = frame_phases(self.basis, default_reference_freqs(self.device),
                          segment.duration).conj()
        return ph[:, None] * out

    def z_correction(self, eig: EigenBasis, z_phases: dict, columns: np.ndarray):
        """Apply exp(-i sum_k phi_k n_k) diagonally in the eigenbasis."""
        if not z_phases:
            return columns
        phase_per_label = np.zeros(self.basis.dim)
        for mode, phi in z_phases.items():
            phase_per_label += phi * self._occ[:, mode]
        d = np.exp(-1j * phase_per_label)
        v = eig.vectors
        return v @ (d[:, None] * (v.conj().T @ columns))


def _register_columns(eig: EigenBasis, homes, basis: ExcitationBasis):
    """Vacuum + one single-excitation eigencolumn per logical qubit."""
    labels = [basis.vacuum()] + [basis.single_excitation(h) for h in homes]
    eig.check_labels(labels)
    return eig.column_block(labels)


def calibrate_sequence(device: DeviceConfig, spec: SequenceSpec,
                       basis: ExcitationBasis, dt: float = 2e-3) -> SequenceSpec:
    """Fill every segment's z_phases from its action on the vacuum and the
    single-excitation register states (input-state independent)."""
    eng = _SequenceEngine(device, basis, dt)
    first = spec.segments[0]
    cols = _register_columns(eng.idle_eig(first.pre_freqs),
                             first.register_pre, basis)
    n_logical = len(first.register_pre)
    out_segments = []
    for seg in spec.segments:
        cols = eng.propagate(seg, cols)
        eig_post = eng.idle_eig(seg.post_freqs)
        vac_amp = complex(eig_post.vector(basis.vacuum()).conj() @ cols[:, 0])
        z_phases = {}
        for k in range(n_logical):
            home = seg.register_post[k]
            target = eig_post.vector(basis.single_excitation(home))
            amp = complex(target.conj() @ cols[:, 1 + k])
            z_phases[home] = float(np.angle(amp) - np.angle(vac_amp))
        seg = replace(seg, z_phases=z_phases)
        cols = eng.z_correction(eig_post, z_phases, cols)
        out_segments.append(seg)
    return SequenceSpec(segments=tuple(out_segments))


def run_sequence(device: DeviceConfig, spec: SequenceSpec,
                 initial_state: np.ndarray, basis: ExcitationBasis,
                 ideal_state: np.ndarray | None = None,
                 dt: float = 2e-3) -> SequenceResult:
    """Propagate a state through all segments, applying the per-segment z
    corrections and frame unwinding at boundaries.

    Returns the final state (bare basis) and, when an ideal state is given,
    the overlap fidelity |<ideal|final>|^2.
    """
    eng = _SequenceEngine(device, basis, dt)
    psi = np.asarray(initial_state, dtype=complex).copy()
    if not spec.segments:
        fid = None if ideal_state is None else float(
            abs(np.vdot(ideal_state, psi)) ** 2)
        return SequenceResult(psi, fid, 0.0, [])
    seg_fids = []
    for seg in spec.segments:
        psi = eng.propagate(seg, psi[:, None])[:, 0]
        eig_post = eng.idle_eig(seg.post_freqs)
        psi = eng.z_correction(eig_post, seg.z_phases, psi[:, None])[:, 0]
        seg_fids.append(float(np.linalg.norm(psi) ** 2))
    fid = None
    if ideal_state is not None:
        fid = float(abs(np.vdot(ideal_state, psi)) ** 2)
    return SequenceResult(final_state=psi, fidelity=fid,
                          total_time=spec.total_time,
                          segment_fidelities=seg_fids)


# ---------------------------------------------------------------------------
# Memory-to-memory CZ protocol
# ---------------------------------------------------------------------------

@dataclass
class CZ23Report:
    fidelity: float
    total_time: float
    spec: SequenceSpec
    segment_reports: dict
    cz_f_ave: float


def build_cz23(device: DeviceConfig, cz_t_ramp: float = 11.0,
               memory_move_ramp: float = 1.0, bus_move_ramp: float = 4.0,
               logical: tuple[int, int] = (1, 2),
               dt_search: float = 0.01) -> tuple[SequenceSpec, dict]:
    """Assemble the CZ-between-memories protocol for logical qubits (1, 2)
    (zero-based; the middle pair of a four-qubit device).

    Segment pulses are optimized individually on the standard three-
    excitation basis; no composite re-optimization is performed.
    """
    qa, qb = logical  # qb's excitation rides the bus; qa meets it on a qubit
    n = device.n_qubits
    park, off = device.park_freq, device.off_freq
    opt_basis = enumerate_basis(device.mode_count)
    eig_cache: dict = {}

    def qmode(i):
        return f"q{i + 1}"

    def mmode(i):
        return f"m{i + 1}"

    moves = {}
    for tag, src, dst, ramp in (
            ("load_b", mmode(qb), qmode(qb), memory_move_ramp),
            ("to_bus", qmode(qb), "b", bus_move_ramp),
            ("load_a", mmode(qa), qmode(qa), memory_move_ramp)):
        moves[tag] = optimize_move(device, src, dst, t_ramp=ramp,
                                   basis=opt_basis, dt_search=dt_search,
                                   eig_cache=eig_cache)
    cz = optimize_cz(device, t_ramp=cz_t_ramp, qubit=qa, dt_search=dt_search)

    def freqs(**at):
        f = [park] * n
        for q, v in at.items():
            f[int(q[1:])] = v
        return tuple(f)

    parked = freqs()
    a_off = freqs(**{f"q{qa}": off})
    b_off = freqs(**{f"q{qb}": off})

    def mirror(pulse: MovePulseParams) -> MovePulseParams:
        """Time-reversed transfer: same on-frequency and plateau."""
        return MovePulseParams(start_freq=pulse.end_freq, on_freq=pulse.on_freq,
                               end_freq=pulse.start_freq, t_on=pulse.t_on,
                               t_ramp=pulse.t_ramp_out, t_ramp_out=pulse.t_ramp)

    mem = [device.mode_index(mmode(k)) for k in range(n)]
    bus = 2 * n

    def homes(**at):
        h = list(mem)
        for k, m in at.items():
            h[int(k)] = m
        return tuple(h)

    segs = [
        Segment(name=f"move m{qb+1}->q{qb+1}", kind="move", driven_qubit=qb,
                pulse=moves["load_b"].pulse, pre_freqs=parked, post_freqs=b_off,
                register_pre=homes(), register_post=homes(**{str(qb): qb})),
        Segment(name=f"move q{qb+1}->bus", kind="move", driven_qubit=qb,
                pulse=moves["to_bus"].pulse, pre_freqs=b_off, post_freqs=parked,
                register_pre=homes(**{str(qb): qb}),
                register_post=homes(**{str(qb): bus})),
        Segment(name=f"move m{qa+1}->q{qa+1}", kind="move", driven_qubit=qa,
                pulse=moves["load_a"].pulse, pre_freqs=parked, post_freqs=a_off,
                register_pre=homes(**{str(qb): bus}),
                register_post=homes(**{str(qa): qa, str(qb): bus})),
        Segment(name=f"cz q{qa+1}-bus", kind="cz", driven_qubit=qa,
                pulse=cz.pulse, pre_freqs=a_off, post_freqs=a_off,
                register_pre=homes(**{str(qa): qa, str(qb): bus}),
                register_post=homes(**{str(qa): qa, str(qb): bus}),
                cz_pair=(qa, qb)),
        Segment(name=f"move q{qa+1}->m{qa+1}", kind="move", driven_qubit=qa,
                pulse=mirror(moves["load_a"].pulse), pre_freqs=a_off,
                post_freqs=parked,
                register_pre=homes(**{str(qa): qa, str(qb): bus}),
                register_post=homes(**{str(qb): bus})),
        Segment(name=f"move bus->q{qb+1}", kind="move", driven_qubit=qb,
                pulse=mirror(moves["to_bus"].pulse), pre_freqs=parked,
                post_freqs=b_off, register_pre=homes(**{str(qb): bus}),
                register_post=homes(**{str(qb): qb})),
        Segment(name=f"move q{qb+1}->m{qb+1}", kind="move", driven_qubit=qb,
                pulse=mirror(moves["load_b"].pulse), pre_freqs=b_off,
                post_freqs=parked, register_pre=homes(**{str(qb): qb}),
                register_post=homes()),
    ]
    reports = {tag: g.report for tag, g in moves.items()}
    reports["cz"] = cz.report
    return SequenceSpec(segments=tuple(segs)), reports


def run_cz23_ghz(device: DeviceConfig, spec: SequenceSpec | None = None,
                 reports: dict | None = None, dt: float = 2e-3,
                 max_total_excitations: int | None = None) -> CZ23Report:
    """Calibrate the protocol and apply it to the register GHZ state.

    The simulation basis must admit one excitation per logical qubit; the
    default allows exactly n_qubits total excitations.
    """
    if spec is None:
        spec, reports = build_cz23(device)
    n = device.n_qubits
    if max_total_excitations is None:
        max_total_excitations = n
    basis = enumerate_basis(device.mode_count,
                            max_total_excitations=max_total_excitations)
    spec = calibrate_sequence(device, spec, basis, dt=dt)

    eng = _SequenceEngine(device, basis, dt)
    first, last = spec.segments[0], spec.segments[-1]
    eig_in = eng.idle_eig(first.pre_freqs)
    eig_out = eng.idle_eig(last.post_freqs)

    def register_label(bits, homes):
        L = [0] * basis.mode_count
        for k, b in enumerate(bits):
            if b:
                L[homes[k]] = 1
        return tuple(L)

    zeros = register_label((0,) * n, first.register_pre)
    ones = register_label((1,) * n, first.register_pre)
    eig_in.check_labels([zeros, ones])
    psi0 = (eig_in.vector(zeros) + eig_in.vector(ones)) / np.sqrt(2.0)
    sign = -1.0  # the CZ flips the all-ones branch
    ideal = (eig_out.vector(register_label((0,) * n, last.register_post))
             + sign * eig_out.vector(register_label((1,) * n, last.register_post))
             ) / np.sqrt(2.0)
    result = run_sequence(device, spec, psi0, basis, ideal_state=ideal, dt=dt)
    cz_f = reports["cz"].f_ave if reports else float("nan")
    return CZ23Report(fidelity=result.fidelity, total_time=result.total_time,
                      spec=spec, segment_reports=reports or {}, cz_f_ave=cz_f)
