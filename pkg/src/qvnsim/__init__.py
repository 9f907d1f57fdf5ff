"""CZ gate design toolkit for qubit-resonator superconducting processors.

Exact truncated-Hilbert-space time evolution under parameterized frequency
pulses, gate-fidelity optimization, perturbative switching-error estimators,
and device-level parameter optimization.
"""

__version__ = "0.1.0"

from .device import (DeviceConfig, ExcitationBasis, HermitianOperator,
                     build_driven_qvn_parts, build_qubit_bus_hamiltonian,
                     build_qvn_hamiltonian, default_config, enumerate_basis,
                     product_basis, qubit_bus_basis, y_coupling_matrix)
from .eigenbasis import (DiagonalizingGenerator, EigenBasis, NonDispersiveError,
                         ResonantPairError, diagonalize_idle,
                         first_order_generator)
from .estimators import (CompensatedPulseError, PulseErrorEstimate,
                         QubitQubitEstimate, SwitchErrorReport, TwoChannelSpec,
                         compensated_pulse_error, cz_lower_band_spec,
                         cz_min_fidelity_estimate, cz_switch_spec,
                         pulse_precision_bounds, qubit_qubit_min_fidelity,
                         switching_amplitude, switching_probability,
                         switching_report, uncompensated_pulse_error,
                         z_angle_error)
from .fidelity import (CZ_TARGET, DegenerateSeedError, FidelityReport, ZAngles,
                       apply_z, f_ave, f_min11, local_z_matrix,
                       optimize_z_angles)
from .optimizer import (CZSetup, OptimizedGate, Stage1Error, Stage1Result,
                        optimize_cz, optimize_cz_stage1, optimize_move,
                        simulate_cz)
from .propagator import (DEFAULT_DT, ConstantHamiltonian, DrivenHamiltonian,
                         EvolutionOperator, ProjectedGate, PropagationError,
                         default_reference_freqs, evolve, evolve_states,
                         frame_unwind, project, project_states)
from .pulses import (CZPulseParams, MovePulseParams, SwitchParams, cz_profile,
                     move_profile, sudden_limit_ton, switch_profile)
from .sequence import (CZ23Report, Segment, SequenceSpec, build_cz23,
                       calibrate_sequence, run_cz23_ghz, run_sequence)
from .system import (GOptimizationCurve, TransmonSpec, compute_zz,
                     compute_zz_exact, g_optimize, idle_error, min_frequency,
                     move_times, transmon_frequency)
