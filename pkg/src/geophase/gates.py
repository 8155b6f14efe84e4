"""Controlled-phase gates from geometric circuits, echo embedding, CNOTs.

Qubit 1 of the two-qubit gates is spin index 0 (the control), qubit 2 is
spin index 1 (the target).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geomphase import THETA_DEFAULT, slice_circuit, triangle_circuit
from .pulse import (
    COMPOSITE_Z,
    DELAY,
    GRADIENT,
    HARD,
    MINUS_X,
    MINUS_Y,
    SELECTIVE,
    SHAPED,
    X,
    Y,
    Backend,
    PulseError,
    PulseEvent,
    PulseSequence,
    concat,
    delay,
    hard,
    sequence_unitary,
)
from .spinsys import SpinSystem, TransitionId, transition

BASIS_LABELS = ("00", "01", "10", "11")
CPHASE_TAG = "cphase"


class GateError(ValueError):
    pass


@dataclass(frozen=True)
class ControlledPhaseSpec:
    """C_x(phi): phase e^{i phi} on basis state ``target_state``."""

    target_state: str
    phi: float
    theta: float = THETA_DEFAULT
    circuit: str = "slice"

    def __post_init__(self):
        if self.target_state not in BASIS_LABELS:
            raise GateError(f"target_state must be one of {BASIS_LABELS}, got {self.target_state!r}")
        if not np.isfinite(self.phi) or not np.isfinite(self.theta):
            raise GateError("phi and theta must be finite")
        if self.circuit not in ("slice", "triangle"):
            raise GateError(f"unknown circuit {self.circuit!r}")


def cphase_matrix(target_state: str, phi: float) -> np.ndarray:
    """Exact diag matrix with e^{i phi} at ``target_state`` and 1 elsewhere."""
    d = np.ones(4, dtype=complex)
    d[int(target_state, 2)] = np.exp(1j * phi)
    return np.diag(d)


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over alpha of max|u - e^{i alpha} v|."""
    overlap = np.trace(v.conj().T @ u)
    alpha = np.angle(overlap) if abs(overlap) > 1e-15 else 0.0
    return float(np.max(np.abs(u - np.exp(1j * alpha) * v)))


def trace_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(v^dagger u)| / d, insensitive to global phase."""
    return float(abs(np.trace(v.conj().T @ u)) / u.shape[0])


def paired_phase_gate(t: TransitionId, phi: float, theta: float = THETA_DEFAULT,
                      circuit: str = "slice") -> PulseSequence:
    """Phase e^{i phi} on ``t.bra`` and e^{-i phi} on ``t.ket``.

    With the triangle circuit the same pair of phases needs an enclosed
    solid angle of -2 phi, so the circuit is driven with -2 phi.
    """
    if circuit == "slice":
        return slice_circuit(t, theta, phi)
    if circuit == "triangle":
        return triangle_circuit(t, theta, -2 * phi)
    raise GateError(f"unknown circuit {circuit!r}")


def controlled_phase(spec: ControlledPhaseSpec) -> PulseSequence:
    """Pulse sequence for e^{-i phi/4} C_x(phi).

    A pair of pi pulses on qubit 1 splits the phase across its two
    transitions by +-phi/4, then a transition-selective pair on the block
    of the control value adds +-phi/2.  For C_11 this is
    (pi)^1_t . (pi)^1_(t+pi-phi/4) . (pi)^{10-11}_t . (pi)^{10-11}_(t+pi-phi/2).
    """
    control, target = int(spec.target_state[0]), int(spec.target_state[1])
    spin_split = spec.phi / 4 if control == 0 else -spec.phi / 4
    block_split = spec.phi / 2 if target == 0 else -spec.phi / 2
    block = transition(2 * control, 2 * control + 1)
    theta = spec.theta
    selective_pair = paired_phase_gate(block, block_split, theta, spec.circuit)
    spin_pair = PulseSequence(
        [
            hard(0, np.pi, theta + np.pi + spin_split),
            hard(0, np.pi, theta),
        ]
    )
    return concat(selective_pair, spin_pair).tagged(CPHASE_TAG)


def hahn_echo_embed(core: PulseSequence, spin: int, tau: float,
                    core_duration: float = 0.0) -> PulseSequence:
    """tau - (pi)_x - tau, with ``core`` centred in the second tau, then (pi)_-x.

    The trailing (pi)_-x on the echoed spin undoes the refocusing pulse.
    ``core_duration`` is the physical length of ``core`` under the backend
    that will run it.
    """
    if tau < 0:
        raise GateError("tau must be nonnegative")
    if core_duration > tau + 1e-15:
        raise GateError(f"core ({core_duration * 1e3:g} ms) is longer than tau ({tau * 1e3:g} ms)")
    gap = max(tau - core_duration, 0.0) / 2
    return concat(
        delay(tau),
        hard(spin, np.pi, X),
        delay(gap),
        core,
        delay(gap),
        hard(spin, np.pi, MINUS_X),
    )


def refocus_embed(core: PulseSequence, tau: float, core_duration: float = 0.0,
                  spins: tuple[int, int] = (0, 1)) -> PulseSequence:
    """Two-spin refocusing tau-(pi)^1_x-tau-(pi)^2_x-tau-(pi)^1_x-tau-(pi)^2_x.

    Offsets of both spins and their coupling are refocused and the four pi
    pulses multiply to the identity up to sign.  ``core`` runs at the start
    of the first tau period, before any refocusing pulse has acted.
    """
    if core_duration > tau + 1e-15:
        raise GateError(f"core ({core_duration * 1e3:g} ms) is longer than tau ({tau * 1e3:g} ms)")
    a, b = spins
    return concat(
        core,
        delay(tau - core_duration),
        hard(a, np.pi, X),
        delay(tau),
        hard(b, np.pi, X),
        delay(tau),
        hard(a, np.pi, X),
        delay(tau),
        hard(b, np.pi, X),
    )


def spin_z_rotation(spin: int, angle: float) -> PulseSequence:
    """exp(-i angle Iz) on ``spin`` as (pi/2)_-x, (angle)_y, (pi/2)_x hard pulses."""
    return PulseSequence(
        [
            hard(spin, np.pi / 2, MINUS_X),
            hard(spin, angle, Y),
            hard(spin, np.pi / 2, X),
        ]
    )


def coupling_evolution(system: SpinSystem, duration: float) -> PulseSequence:
    """exp(-i 2 pi J Iz Iz duration) for the two spins of ``system``.

    With nonzero offsets the delay is split by pi pulses on both spins,
    which keep the coupling term and refocus the offsets.
    """
    if duration < 0:
        raise GateError("duration must be nonnegative")
    if all(v == 0 for v in system.offsets):
        return PulseSequence([delay(duration)])
    return PulseSequence(
        [
            delay(duration / 2),
            hard(0, np.pi, X),
            hard(1, np.pi, X),
            delay(duration / 2),
            hard(0, np.pi, MINUS_X),
            hard(1, np.pi, MINUS_X),
        ]
    )


def diagonal_compensation(error: np.ndarray, system: SpinSystem) -> PulseSequence:
    """Sequence undoing the diagonal part of a two-spin error operator.

    The phases of diag(error) are split into z rotations of each spin,
    realized with hard pulses, and a zz term, realized as coupling
    evolution for the needed fraction of 2/J.  Global phase is ignored.
    """
    if system.n_spins != 2:
        raise GateError("compensation is implemented for two spins")
    jval = system.coupling(0, 1)
    phases = np.angle(np.diag(error))
    z = np.array([1, 1, -1, -1])
    zz = np.array([1, -1, -1, 1])
    # error = exp(-i (a0 Iz0 + a1 Iz1 + b 2 Iz0 Iz1)) up to global phase
    a0 = -np.dot(phases, z) / 2
    a1 = -np.dot(phases, np.array([1, -1, 1, -1])) / 2
    b = -np.dot(phases, zz) / 2
    out = concat(spin_z_rotation(0, -a0), spin_z_rotation(1, -a1))
    if abs(np.angle(np.exp(1j * b))) > 1e-12:
        if jval == 0:
            raise GateError("a zz phase error cannot be compensated without coupling")
        # coupling evolution for time d applies b' = pi J d
        d = float(np.mod(-b * np.sign(jval), 2 * np.pi) / (np.pi * abs(jval)))
        out = concat(out, coupling_evolution(system, d))
    return out


def compensate(seq: PulseSequence, ideal: np.ndarray, system: SpinSystem,
               backend: Backend) -> PulseSequence:
    """Append the diagonal compensation of ``seq`` as realized by ``backend``.

    This is a calibration step: the realized propagator is compared with
    ``ideal`` and the phase part of the mismatch is corrected.
    """
    actual = sequence_unitary(seq, system.n_spins, system, backend)
    return concat(seq, diagonal_compensation(actual @ ideal.conj().T, system))


def pseudo_hadamard(spin: int, inverse: bool = False) -> PulseEvent:
    """(pi/2)_y, or (pi/2)_-y when ``inverse``."""
    return hard(spin, np.pi / 2, MINUS_Y if inverse else Y)


def cnot_via_phase(control_state: str, theta: float = THETA_DEFAULT) -> PulseSequence:
    """CNOT-type U_f built as h - C(pi) - h^-1 on qubit 2.

    ``"10"`` flips qubit 2 when qubit 1 is |1> (uses C_11); ``"01"`` flips it
    when qubit 1 is |0> (uses C_00).  The sandwich is oriented so that the
    conjugated phase gate is +X rather than -X on the active block: for a
    phase on target |1> the h^-1 pulse goes first, for a phase on target |0>
    the h pulse goes first.  The other orientation leaves a conditional
    sign on qubit 1, which would invert the Deutsch-Jozsa readout.
    """
    if control_state == "10":
        cp, h_first = "11", False
    elif control_state == "01":
        cp, h_first = "00", True
    else:
        raise GateError(f"control_state must be '10' or '01', got {control_state!r}")
    gate = controlled_phase(ControlledPhaseSpec(cp, np.pi, theta))
    first = pseudo_hadamard(1, inverse=not h_first)
    last = pseudo_hadamard(1, inverse=h_first)
    return concat(first, gate, last)


# --------------------------------------------------------------------------
# JSON pulse-program listing


def _target_json(target):
    if isinstance(target, TransitionId):
        return {"bra": target.bra, "ket": target.ket}
    return target


def _target_from_json(obj):
    if isinstance(obj, dict):
        return TransitionId(int(obj["bra"]), int(obj["ket"]))
    return obj


def sequence_to_json(seq: PulseSequence) -> str:
    """Serialise a sequence as a JSON list of events."""
    rows = []
    for e in seq:
        row = {
            "kind": e.kind,
            "target": _target_json(e.target),
            "angle": e.angle,
            "phase": e.phase,
            "duration": e.duration,
        }
        if e.shape is not None:
            row["shape"] = list(e.shape)
        if e.tag:
            row["tag"] = e.tag
        rows.append(row)
    return json.dumps(rows, indent=1)


def sequence_from_json(text: str) -> PulseSequence:
    rows = json.loads(text)
    events = []
    for row in rows:
        if row["kind"] not in (HARD, SELECTIVE, SHAPED, DELAY, GRADIENT, COMPOSITE_Z):
            raise PulseError(f"unknown event kind {row['kind']!r}")
        events.append(
            PulseEvent(
                row["kind"],
                _target_from_json(row.get("target")),
                float(row.get("angle", 0.0)),
                float(row.get("phase", 0.0)),
                float(row.get("duration", 0.0)),
                tuple(row["shape"]) if row.get("shape") is not None else None,
                row.get("tag", ""),
            )
        )
    return PulseSequence(events)
