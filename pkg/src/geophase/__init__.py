"""Pulse-level NMR simulation of geometric-phase controlled-phase gates."""

from .algos import AlgorithmResult, DJFunction, diffusion_operator, grover_oracle, run_dj, run_grover, uf_propagator
from .gates import (
    ControlledPhaseSpec,
    cnot_via_phase,
    controlled_phase,
    hahn_echo_embed,
    paired_phase_gate,
    pseudo_hadamard,
    refocus_embed,
)
from .geomphase import bloch_trajectory, coherence_phase, enclosed_solid_angle, slice_circuit, triangle_circuit
from .prep import equilibrium_state, prepare_pseudopure_00
from .pulse import (
    IDEAL,
    Backend,
    PulseEvent,
    PulseSequence,
    QuantumState,
    apply,
    sequence_unitary,
    shaped_backend,
)
from .readout import fidelity, peak_phase, simulate_fid, spectrum, tomograph
from .spinsys import SpinSystem, TransitionId, build_system, transition

__version__ = "0.1.0"
