"""End-to-end experiments: geometric phase readout, sweeps and presets."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gates import hahn_echo_embed, pseudo_hadamard
from .geomphase import (
    THETA_DEFAULT,
    BlochPath,
    bloch_trajectory,
    coherence_phase,
    enclosed_solid_angle,
    slice_circuit,
    triangle_circuit,
)
from .prep import prepare_pseudopure_00
from .pulse import IDEAL, Backend, PulseSequence, QuantumState, apply, sequence_duration
from .readout import Spectrum, peak_phase, simulate_fid, spectrum
from .spinsys import SpinSystem, TransitionId, build_system, internal_hamiltonian_diagonal

J_CHLOROFORM = 210.0

# (13C, 1H) for the phase experiments, (1H, 13C) for the algorithms
PRESETS = {
    "phase": (("13C", "1H"), J_CHLOROFORM),
    "algorithms": (("1H", "13C"), J_CHLOROFORM),
}

# the circuit acts on |00>-|01>; the echo carries it onto |10>-|11>
CIRCUIT_TRANSITION = TransitionId(0, 1)
OBSERVED_TRANSITION = TransitionId(0, 2)


def preset_system(name: str = "phase", offsets=(0.0, 0.0)) -> SpinSystem:
    try:
        labels, j = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    return build_system(list(labels), offsets=list(offsets), couplings={(0, 1): j})


def circuit(kind: str, t: TransitionId, phi: float, theta: float = THETA_DEFAULT) -> PulseSequence:
    if kind == "slice":
        return slice_circuit(t, theta, phi)
    if kind == "triangle":
        return triangle_circuit(t, theta, phi)
    raise ValueError(f"unknown circuit {kind!r}; expected 'slice' or 'triangle'")


@dataclass(frozen=True, eq=False)
class PhaseMeasurement:
    phi: float
    phase: float
    coherence_phase: float
    solid_angle: float
    spectrum: Spectrum
    state: QuantumState


def default_tau(system: SpinSystem, core_duration: float = 0.0) -> float:
    """1/(2J), lengthened in steps of 1/(2J) until the core fits."""
    j = abs(system.coupling(0, 1))
    if j == 0:
        return core_duration
    step = 1 / (2 * j)
    return step * max(1, int(np.ceil(core_duration / step - 1e-12)))


def phase_experiment(system: SpinSystem, kind: str, phi: float, theta: float = THETA_DEFAULT,
                     backend: Backend = IDEAL, tau: float | None = None,
                     n_points: int = 1000, dwell: float = 1e-3, t2: float | None = None,
                     n_samples: int = 400, gamma_weights=None) -> PhaseMeasurement:
    """Observe the geometric phase in the |00>-|10> coherence of spin 0.

    pseudopure |00> -> (pi/2)_y on spin 0 -> Hahn echo on spin 0 holding the
    circuit on |00>-|01> -> FID of spin 0.  The echo maps the circuit onto
    |10>-|11>, so the coherence picks up the phase of |10>.  The solid
    angle comes from the bare circuit's trajectory starting at the pole.
    """
    core = circuit(kind, CIRCUIT_TRANSITION, phi, theta)
    core_len = sequence_duration(core, backend)
    tau = default_tau(system, core_len) if tau is None else tau
    state = prepare_pseudopure_00(system, gamma_weights)
    state = apply(state, PulseSequence([pseudo_hadamard(0)]), system)
    state = apply(state, hahn_echo_embed(core, 0, tau, core_len), system, backend)

    fid = simulate_fid(system, state, 0, n_points, dwell, t2)
    spec = spectrum(fid)
    line = OBSERVED_TRANSITION
    h = internal_hamiltonian_diagonal(system)
    freq = (h[line.bra] - h[line.ket]) / (2 * np.pi)
    phase = peak_phase(spec, freq)

    path = bloch_trajectory(core, CIRCUIT_TRANSITION, QuantumState.basis("00"), n_samples, system, backend)
    omega = enclosed_solid_angle(path)
    return PhaseMeasurement(phi, phase, coherence_phase(state, line), omega, spec, state)


def sweep(system: SpinSystem, kind: str, phis, theta: float = THETA_DEFAULT,
          backend: Backend = IDEAL, **kwargs) -> list[PhaseMeasurement]:
    return [phase_experiment(system, kind, float(p), theta, backend, **kwargs) for p in phis]


def sweep_csv(results: list[PhaseMeasurement], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phi", "phase", "coherence_phase", "solid_angle"])
    for r in results:
        w.writerow([f"{r.phi:.12f}", f"{r.phase:.12f}", f"{r.coherence_phase:.12f}", f"{r.solid_angle:.12f}"])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def circuit_trajectory(kind: str, phi: float, theta: float = THETA_DEFAULT, n_samples: int = 400,
                       system: SpinSystem | None = None, backend: Backend = IDEAL) -> BlochPath:
    t = CIRCUIT_TRANSITION
    return bloch_trajectory(circuit(kind, t, phi, theta), t, QuantumState.basis("00"), n_samples,
                            system, backend)


def phi_grid(start: float = 0.0, stop: float = np.pi, n: int = 9) -> np.ndarray:
    return np.linspace(start, stop, n)


__all__ = [
    "PRESETS",
    "PhaseMeasurement",
    "circuit",
    "circuit_trajectory",
    "default_tau",
    "phase_experiment",
    "phi_grid",
    "preset_system",
    "sweep",
    "sweep_csv",
]
