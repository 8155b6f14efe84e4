"""Deutsch-Jozsa (Cleve form) and one-iteration Grover search at the pulse level."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import (
    BASIS_LABELS,
    CPHASE_TAG,
    ControlledPhaseSpec,
    compensate,
    GateError,
    cnot_via_phase,
    controlled_phase,
    pseudo_hadamard,
    refocus_embed,
)
from .geomphase import THETA_DEFAULT
from .pulse import (
    IDEAL,
    X,
    Backend,
    PulseSequence,
    QuantumState,
    apply,
    concat,
    hard,
    sequence_duration,
    sequence_unitary,
)
from .prep import prepare_pseudopure_00
from .readout import correlation_fidelity, effective_pure_state, fidelity
from .spinsys import SpinSystem

DJ_TABLES = {
    "f00": (0, 0),
    "f11": (1, 1),
    "f10": (0, 1),
    "f01": (1, 0),
}


class AlgorithmError(ValueError):
    pass


@dataclass(frozen=True)
class DJFunction:
    """One-bit function f with table (f(0), f(1)).

    The label follows the oracle matrices: f10 flips qubit 2 when qubit 1
    is |1>, f01 when qubit 1 is |0>.
    """

    label: str

    def __post_init__(self):
        if self.label not in DJ_TABLES:
            raise AlgorithmError(f"unknown function {self.label!r}; expected one of {sorted(DJ_TABLES)}")

    @property
    def table(self) -> tuple[int, int]:
        return DJ_TABLES[self.label]

    def __call__(self, x: int) -> int:
        return self.table[x]

    @property
    def is_constant(self) -> bool:
        return self.table[0] == self.table[1]


@dataclass(frozen=True, eq=False)
class AlgorithmResult:
    """Outcome of a run.

    ``fidelity`` is the deviation correlation with the ideal target,
    ``uhlmann`` the Uhlmann fidelity of the rescaled (effective pure) output
    and ``probability`` its population on the expected basis state.
    """

    state: QuantumState
    answer: str
    dominant: str
    expected: str
    fidelity: float
    uhlmann: float
    probability: float
    oracle_calls: int
    iterations: int = 0
    stages: tuple[tuple[str, QuantumState], ...] = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("fidelity", "uhlmann", "probability"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise AlgorithmError(f"{name} {v} outside [0, 1]")

    @property
    def correct(self) -> bool:
        return self.dominant == self.expected


def uf_propagator(f: DJFunction | str, theta: float = THETA_DEFAULT) -> PulseSequence:
    """Oracle U_f |x, y> = |x, y xor f(x)> as a pulse sequence."""
    f = f if isinstance(f, DJFunction) else DJFunction(f)
    if f.label == "f00":
        return PulseSequence([])
    if f.label == "f11":
        return PulseSequence([hard(1, np.pi, X)])
    return cnot_via_phase(f.label[1:], theta)


def grover_oracle(x: str, theta: float = THETA_DEFAULT) -> PulseSequence:
    """U_x = I - 2|x><x| up to global phase."""
    if x not in BASIS_LABELS:
        raise GateError(f"x must be one of {BASIS_LABELS}, got {x!r}")
    return controlled_phase(ControlledPhaseSpec(x, np.pi, theta))


def hadamards(inverse: bool = False) -> PulseSequence:
    return PulseSequence([pseudo_hadamard(0, inverse), pseudo_hadamard(1, inverse)])


def diffusion_operator(theta: float = THETA_DEFAULT) -> PulseSequence:
    """h^-1 h^-1, C_00(pi), h h: the inversion about the mean state.

    The pseudo-Hadamards are arranged so the product is I - 2|s><s| with
    |s> = h h |00>, the state prepared at the start of the search.
    """
    return concat(hadamards(inverse=True), grover_oracle("00", theta), hadamards())


def refocus_phase_gates(seq: PulseSequence, backend: Backend, tau: float | None = None,
                        system: SpinSystem | None = None) -> PulseSequence:
    """Wrap every controlled-phase block of ``seq`` in the two-spin refocusing sequence.

    ``tau`` defaults to the block length, the shortest period that fits it.
    Given a ``system``, each wrapped block is also calibrated: its
    propagator under ``backend`` is compared with the ideal gate and the
    diagonal part of the error (off-resonance shifts of the spectator
    lines) is undone by hard z rotations and a short coupling evolution.
    """
    out, block = [], []

    def flush():
        if block:
            core = PulseSequence(block)
            core_len = sequence_duration(core, backend)
            wrapped = refocus_embed(core, max(tau or 0.0, core_len), core_len)
            if system is not None:
                wrapped = compensate(wrapped, sequence_unitary(core, system.n_spins), system, backend)
            out.extend(wrapped)
            block.clear()

    for event in seq:
        if event.tag == CPHASE_TAG:
            block.append(event)
        else:
            flush()
            out.append(event)
    flush()
    return PulseSequence(out)


def _run_stage(state, seq, system, backend, refocus, tau, calibrate):
    if refocus:
        seq = refocus_phase_gates(seq, backend, tau, system if calibrate else None)
    return apply(state, seq, system, backend)


def _dominant(state: QuantumState) -> str:
    n = state.n_spins
    k = int(np.argmax(np.real(np.diag(state.deviation()))))
    return format(k, f"0{n}b")


def _result(final, expected, answer_of, stages, oracle_calls, iterations):
    eff = effective_pure_state(final)
    target = QuantumState.basis(expected)
    dominant = _dominant(final)
    pop = float(np.clip(np.real(eff.rho[int(expected, 2), int(expected, 2)]), 0, 1))
    return AlgorithmResult(
        state=final,
        answer=answer_of(dominant),
        dominant=dominant,
        expected=expected,
        fidelity=correlation_fidelity(final, target),
        uhlmann=fidelity(_nearest_state(eff), target),
        probability=pop,
        oracle_calls=oracle_calls,
        iterations=iterations,
        stages=tuple(stages),
    )


def _nearest_state(state: QuantumState) -> QuantumState:
    """Clip negative eigenvalues left by rescaling an imperfect deviation."""
    w, v = np.linalg.eigh(state.rho)
    w = np.clip(w, 0, None)
    w /= w.sum()
    return QuantumState((v * w) @ v.conj().T)


def _default_refocus(backend: Backend, refocus: bool | None) -> bool:
    return backend.is_shaped if refocus is None else refocus


def run_dj(system: SpinSystem, f: DJFunction | str, backend: Backend = IDEAL,
           refocus: bool | None = None, tau: float | None = None,
           calibrate: bool | None = None, initial: QuantumState | None = None) -> AlgorithmResult:
    """pseudopure -> (pi/2)^1_y (pi/2)^2_-y -> U_f -> (pi/2)^1_-y (pi/2)^2_y.

    Constant functions end in |00>, balanced ones in |10>.  With
    ``refocus`` (default on for the shaped backend) the oracle runs inside
    the two-spin refocusing block so that free evolution during the long
    selective pulses is undone; the pseudo-Hadamards stay outside it.
    """
    f = f if isinstance(f, DJFunction) else DJFunction(f)
    refocus = _default_refocus(backend, refocus)
    calibrate = _default_refocus(backend, calibrate)
    state = initial if initial is not None else prepare_pseudopure_00(system)
    stages = [("prepared", state)]
    state = apply(state, PulseSequence([pseudo_hadamard(0), pseudo_hadamard(1, inverse=True)]), system)
    stages.append(("superposition", state))
    oracle = uf_propagator(f)
    state = _run_stage(state, oracle, system, backend, refocus, tau, calibrate)
    stages.append(("oracle", state))
    state = apply(state, PulseSequence([pseudo_hadamard(0, inverse=True), pseudo_hadamard(1)]), system)
    stages.append(("final", state))
    expected = "00" if f.is_constant else "10"
    return _result(
        state,
        expected,
        lambda d: {"00": "constant", "10": "balanced"}.get(d, "undetermined"),
        stages,
        oracle_calls=1,
        iterations=0,
    )


def run_grover(system: SpinSystem, x: str, backend: Backend = IDEAL,
               refocus: bool | None = None, tau: float | None = None,
               calibrate: bool | None = None, initial: QuantumState | None = None) -> AlgorithmResult:
    """pseudopure -> h h -> U_x -> diffusion; one iteration finds x exactly."""
    if x not in BASIS_LABELS:
        raise GateError(f"x must be one of {BASIS_LABELS}, got {x!r}")
    refocus = _default_refocus(backend, refocus)
    calibrate = _default_refocus(backend, calibrate)
    state = initial if initial is not None else prepare_pseudopure_00(system)
    stages = [("prepared", state)]
    state = apply(state, hadamards(), system)
    stages.append(("superposition", state))
    state = _run_stage(state, grover_oracle(x), system, backend, refocus, tau, calibrate)
    stages.append(("oracle", state))
    state = _run_stage(state, diffusion_operator(), system, backend, refocus, tau, calibrate)
    stages.append(("diffusion", state))
    return _result(state, x, lambda d: d, stages, oracle_calls=1, iterations=1)
