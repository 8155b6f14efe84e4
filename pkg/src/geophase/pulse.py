"""Pulse events, propagators and their action on density matrices.

Rotation convention: a pulse of flip ``angle`` and phase ``phase`` rotates
about the axis (cos phase, sin phase, 0), with propagator
``exp[-i (Ix cos(phase) + Iy sin(phase)) angle]``.

A :class:`PulseSequence` is time ordered: events are applied left to right.
Ideal events take no time.  The shaped backend realizes transition-selective
events as Gaussian pulses of finite duration, integrated piecewise-constant
together with the internal Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .spinsys import (
    SpinSystem,
    SpinSystemError,
    TransitionId,
    fictitious_operators,
    internal_hamiltonian_diagonal,
    iz_eigenvalues,
    magnetic_numbers,
    single_spin_operator,
)

HARD = "hard"
SELECTIVE = "selective"
SHAPED = "shaped"
DELAY = "delay"
GRADIENT = "gradient"
COMPOSITE_Z = "composite_z"
EVENT_KINDS = (HARD, SELECTIVE, SHAPED, DELAY, GRADIENT, COMPOSITE_Z)

X, Y, MINUS_X, MINUS_Y = 0.0, np.pi / 2, np.pi, 3 * np.pi / 2

MIN_SLICES = 16
# Slices required per period of the fastest frequency present during a pulse.
SLICES_PER_PERIOD = 8


class PulseError(ValueError):
    """Invalid pulse event or a pulse that cannot be realized numerically."""


class StateError(ValueError):
    """A density matrix violating trace, Hermiticity or positivity."""


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix in the computational basis."""

    rho: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got shape {rho.shape}")
        dim = rho.shape[0]
        if dim & (dim - 1):
            raise StateError(f"dimension {dim} is not a power of two")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        if self.check:
            self.validate()

    def validate(self, trace_tol=1e-10, herm_tol=1e-10, eig_tol=1e-9) -> None:
        rho = self.rho
        tr = np.trace(rho)
        if abs(tr - 1) > trace_tol:
            raise StateError(f"trace {tr:.3g} differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise StateError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -eig_tol:
            raise StateError("density matrix has negative eigenvalues")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_spins(self) -> int:
        return self.dim.bit_length() - 1

    def deviation(self) -> np.ndarray:
        """Traceless part rho - tr(rho) I / d."""
        return self.rho - np.trace(self.rho) * np.eye(self.dim) / self.dim

    @classmethod
    def from_vector(cls, psi: Sequence[complex]) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, label: str) -> "QuantumState":
        """Pure computational basis state, e.g. ``QuantumState.basis("10")``."""
        psi = np.zeros(2 ** len(label), dtype=complex)
        psi[int(label, 2)] = 1
        return cls.from_vector(psi)

    @classmethod
    def maximally_mixed(cls, n_spins: int) -> "QuantumState":
        d = 2**n_spins
        return cls(np.eye(d) / d)

    def __repr__(self):
        return f"QuantumState(dim={self.dim})"


# --------------------------------------------------------------------------
# events


Target = Union[int, TransitionId, None]


@dataclass(frozen=True)
class PulseEvent:
    kind: str
    target: Target = None
    angle: float = 0.0
    phase: float = 0.0
    duration: float = 0.0
    shape: tuple[float, ...] | None = None
    tag: str = ""

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise PulseError(f"unknown event kind {self.kind!r}")
        if not math.isfinite(self.angle) or not math.isfinite(self.phase):
            raise PulseError("angle and phase must be finite")
        if not math.isfinite(self.duration) or self.duration < 0:
            raise PulseError(f"duration must be finite and >= 0, got {self.duration}")
        if self.kind == HARD and not isinstance(self.target, (int, np.integer)):
            raise PulseError("hard pulses target a spin index")
        if self.kind in (SELECTIVE, SHAPED, COMPOSITE_Z) and not isinstance(self.target, TransitionId):
            raise PulseError(f"{self.kind} events target a TransitionId")
        if self.kind == SHAPED:
            if self.shape is None or len(self.shape) < 2:
                raise PulseError("shaped events carry at least two envelope samples")
            if self.duration <= 0:
                raise PulseError("shaped events need a positive duration")


def hard(spin: int, angle: float, phase: float = X, tag: str = "") -> PulseEvent:
    return PulseEvent(HARD, int(spin), float(angle), float(phase), tag=tag)


def selective(t: TransitionId, angle: float, phase: float = X, tag: str = "") -> PulseEvent:
    return PulseEvent(SELECTIVE, t, float(angle), float(phase), tag=tag)


def shaped(
    t: TransitionId, angle: float, phase: float, duration: float, shape: Sequence[float], tag: str = ""
) -> PulseEvent:
    return PulseEvent(SHAPED, t, float(angle), float(phase), float(duration), tuple(float(v) for v in shape), tag)


def delay(duration: float, tag: str = "") -> PulseEvent:
    return PulseEvent(DELAY, None, duration=float(duration), tag=tag)


def gradient(tag: str = "") -> PulseEvent:
    return PulseEvent(GRADIENT, tag=tag)


def composite_z(t: TransitionId, angle: float, tag: str = "") -> PulseEvent:
    return PulseEvent(COMPOSITE_Z, t, float(angle), tag=tag)


@dataclass(frozen=True)
class PulseSequence:
    """Time-ordered list of pulse events."""

    events: tuple[PulseEvent, ...] = ()

    def __init__(self, events: Iterable[PulseEvent] = ()):
        object.__setattr__(self, "events", tuple(events))

    def __iter__(self) -> Iterator[PulseEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def __add__(self, other: "PulseSequence | PulseEvent") -> "PulseSequence":
        if isinstance(other, PulseEvent):
            return PulseSequence(self.events + (other,))
        return PulseSequence(self.events + tuple(other))

    def tagged(self, tag: str) -> "PulseSequence":
        return PulseSequence(replace(e, tag=tag) for e in self.events)

    def count(self, kind: str) -> int:
        return sum(e.kind == kind for e in self.events)


def concat(*parts: PulseSequence | PulseEvent) -> PulseSequence:
    events: list[PulseEvent] = []
    for p in parts:
        if isinstance(p, PulseEvent):
            events.append(p)
        else:
            events.extend(p)
    return PulseSequence(events)


# --------------------------------------------------------------------------
# ideal propagators


def _rotation(ix: np.ndarray, iy: np.ndarray, angle: float, phase: float) -> np.ndarray:
    """exp[-i (ix cos phase + iy sin phase) angle] for generators with spectrum {+-1/2, 0}."""
    gen = ix * np.cos(phase) + iy * np.sin(phase)
    # gen^2 is the projector/4 onto the subspaces it acts on
    proj = 4 * gen @ gen
    eye = np.eye(gen.shape[0])
    return eye - proj + proj * np.cos(angle / 2) - 2j * np.sin(angle / 2) * gen


def ideal_selective_rotation(t: TransitionId, angle: float, phase: float, n_spins: int = 2) -> np.ndarray:
    """Rotation of the fictitious spin of ``t``; identity outside its 2x2 block."""
    ix, iy, _ = fictitious_operators(n_spins, t)
    return _rotation(ix, iy, angle, phase)


def hard_pulse(spin: int, angle: float, phase: float, n_spins: int = 2) -> np.ndarray:
    """Nonselective rotation of one spin."""
    ix = single_spin_operator(n_spins, spin, "x")
    iy = single_spin_operator(n_spins, spin, "y")
    return _rotation(ix, iy, angle, phase)


def z_rotation(t: TransitionId, angle: float, n_spins: int = 2) -> np.ndarray:
    """exp(-i angle Iz_t)."""
    _, _, iz = fictitious_operators(n_spins, t)
    return np.diag(np.exp(-1j * angle * np.diag(iz).real))


def composite_z_rotation(t: TransitionId, angle: float) -> PulseSequence:
    """z rotation on ``t`` built from three selective pulses.

    The operator product (pi/2)_y . (angle)_-x . (pi/2)_-y equals
    exp(-i angle Iz_t); in time order the (pi/2)_-y pulse comes first.
    """
    return PulseSequence(
        [
            selective(t, np.pi / 2, MINUS_Y),
            selective(t, angle, MINUS_X),
            selective(t, np.pi / 2, Y),
        ]
    )


def free_propagator(system: SpinSystem, duration: float) -> np.ndarray:
    if duration < 0:
        raise PulseError(f"negative evolution time {duration}")
    return np.diag(np.exp(-1j * internal_hamiltonian_diagonal(system) * duration))


def free_evolution(system: SpinSystem, state: QuantumState, duration: float) -> QuantumState:
    """Evolve under the internal Hamiltonian for ``duration`` seconds."""
    u = free_propagator(system, duration)
    return QuantumState(u @ state.rho @ u.conj().T)


def gradient_crush(
    state: QuantumState, n_positions: int | None = None, gammas: Sequence[float] | None = None
) -> QuantumState:
    """Destroy all coherences of nonzero order.

    By default this is the exact projection onto coherence order p = 0.  With
    ``n_positions`` the crusher is instead modelled as an average over that
    many sample slices, each twisted about z by a different angle weighted by
    ``gammas`` (uniform by default); this mode exists to validate the
    projection.
    """
    rho = state.rho
    n = state.n_spins
    if n_positions is None:
        m = magnetic_numbers(n)
        keep = np.isclose(m[:, None], m[None, :])
        return QuantumState(np.where(keep, rho, 0))
    if gammas is None:
        gammas = np.ones(n)
    weights = sum(g * iz_eigenvalues(n, s) for s, g in enumerate(gammas))
    out = np.zeros_like(rho)
    for k in range(n_positions):
        twist = 2 * np.pi * k / n_positions
        phase = np.exp(-1j * twist * weights)
        out += phase[:, None] * rho * phase.conj()[None, :]
    return QuantumState(out / n_positions)


# --------------------------------------------------------------------------
# shaped pulses


def gaussian_envelope(n_slices: int, truncation: float = 2.5) -> np.ndarray:
    """Gaussian sampled at slice midpoints, truncated at +-``truncation`` sigma."""
    frac = (np.arange(n_slices) + 0.5) / n_slices
    x = (frac - 0.5) * 2 * truncation
    return np.exp(-0.5 * x**2)


def load_envelope(path: str | Path) -> np.ndarray:
    """Read a two-column text envelope (time_fraction, amplitude)."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise PulseError(f"{path}: expected two columns, got {data.shape[1]}")
    if data.shape[0] < 2:
        raise PulseError(f"{path}: need at least two envelope samples")
    return data


def _resample_envelope(shape: Sequence[float] | np.ndarray, n_slices: int) -> np.ndarray:
    arr = np.asarray(shape, dtype=float)
    mid = (np.arange(n_slices) + 0.5) / n_slices
    if arr.ndim == 2:
        return np.interp(mid, arr[:, 0], arr[:, 1])
    grid = np.linspace(0.0, 1.0, len(arr))
    return np.interp(mid, grid, arr)


def required_slices(system: SpinSystem, duration: float, peak_rf: float = 0.0) -> int:
    """Smallest slice count resolving the fastest frequency during a pulse.

    ``peak_rf`` is the peak nutation rate in rad/s.
    """
    h = internal_hamiltonian_diagonal(system)
    f_max = (h.max() - h.min()) / (2 * np.pi) + peak_rf / (2 * np.pi)
    return max(MIN_SLICES, int(math.ceil(SLICES_PER_PERIOD * f_max * duration)))


def _peak_rf(angle: float, duration: float, env: np.ndarray) -> float:
    area = env.sum() * duration / len(env)
    return abs(angle) * env.max() / area


def check_slicing(system: SpinSystem, duration: float, n_slices: int, angle: float = np.pi,
                  truncation: float = 2.5) -> list[str]:
    """Problems with a slice count, empty when ``n_slices`` is adequate."""
    problems = []
    if n_slices < MIN_SLICES:
        problems.append(f"n_slices={n_slices} is below the minimum of {MIN_SLICES}")
    env = gaussian_envelope(max(n_slices, 2), truncation)
    need = required_slices(system, duration, _peak_rf(angle, duration, env))
    if n_slices < need:
        problems.append(
            f"n_slices={n_slices} under-resolves the fastest frequency over {duration * 1e3:g} ms "
            f"(Nyquist-type bound: need >= {need})"
        )
    return problems


def _expm_hermitian_batch(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """M[n-1] @ ... @ M[1] @ M[0] by pairwise reduction."""
    while len(mats) > 1:
        paired = mats[1::2] @ mats[0 : len(mats) - 1 : 2]
        mats = np.concatenate([paired, mats[-1:]]) if len(mats) % 2 else paired
    return mats[0]


_SHAPED_CACHE: dict = {}


def shaped_slices(
    system: SpinSystem,
    t: TransitionId,
    angle: float,
    phase: float,
    duration: float,
    envelope: Sequence[float] | np.ndarray | None = None,
    n_slices: int = 4096,
    truncation: float = 2.5,
) -> np.ndarray:
    """Per-slice propagators of a transition-selective shaped pulse.

    The rf field drives the spin flipped by ``t``; its carrier follows the
    free precession of ``t`` so the pulse is on resonance with that line,
    with the carrier phase referenced to the start of the pulse.  The
    envelope is scaled so that the flip angle on ``t`` equals ``angle``.
    """
    n = system.n_spins
    t.validate(n)
    spin = t.flipped_spin(n)
    if spin is None:
        raise PulseError(f"{t.label(n)} is not a single-quantum transition; it cannot be driven by one rf channel")
    if duration <= 0:
        raise PulseError("shaped pulses need a positive duration")
    if n_slices < MIN_SLICES:
        raise PulseError(f"n_slices={n_slices} is below the minimum of {MIN_SLICES}")
    env = gaussian_envelope(n_slices, truncation) if envelope is None else _resample_envelope(envelope, n_slices)
    if np.any(env < 0):
        raise PulseError("envelope must be nonnegative")
    dt = duration / n_slices
    area = env.sum() * dt
    if area <= 0:
        raise PulseError("envelope has zero area")
    omega1 = env * (angle / area)
    need = required_slices(system, duration, np.abs(omega1).max())
    if n_slices < need:
        raise PulseError(f"n_slices={n_slices} under-resolves the pulse; need at least {need}")

    h0 = internal_hamiltonian_diagonal(system)
    ix = single_spin_operator(n, spin, "x")
    iy = single_spin_operator(n, spin, "y")
    tmid = (np.arange(n_slices) + 0.5) * dt
    carrier = phase + (h0[t.bra] - h0[t.ket]) * tmid
    hs = (
        np.diag(h0)[None, :, :]
        + (omega1 * np.cos(carrier))[:, None, None] * ix[None]
        + (omega1 * np.sin(carrier))[:, None, None] * iy[None]
    )
    return _expm_hermitian_batch(hs, dt)


def shaped_pulse_propagator(
    system: SpinSystem,
    t: TransitionId,
    angle: float,
    phase: float,
    duration: float,
    envelope: Sequence[float] | np.ndarray | None = None,
    n_slices: int = 4096,
    truncation: float = 2.5,
) -> np.ndarray:
    """Propagator of a shaped selective pulse including the internal Hamiltonian."""
    env_key = None if envelope is None else np.asarray(envelope, dtype=float).tobytes()
    key = (
        system.offsets,
        tuple(sorted(system.j_couplings.items())),
        t,
        float(angle),
        float(phase),
        float(duration),
        env_key,
        int(n_slices),
        float(truncation),
    )
    cached = _SHAPED_CACHE.get(key)
    if cached is None:
        cached = _ordered_product(
            shaped_slices(system, t, angle, phase, duration, envelope, n_slices, truncation)
        )
        cached.setflags(write=False)
        if len(_SHAPED_CACHE) > 512:
            _SHAPED_CACHE.clear()
        _SHAPED_CACHE[key] = cached
    return cached


# --------------------------------------------------------------------------
# backends and sequence realization


@dataclass(frozen=True)
class Backend:
    """How transition-selective events are realized.

    ``ideal``: instantaneous rotations.  ``shaped``: Gaussian pulses of
    ``duration`` seconds, ``n_slices`` midpoint slices, truncated at
    +-``truncation`` standard deviations (sigma = duration / (2 truncation)).
    Hard pulses are instantaneous in both backends.

    ``phase_reference`` fixes where the carrier of a selective pulse starts
    its phase ramp.  ``"sequence"`` keeps one phase-coherent clock from the
    start of the sequence, so a pulse issued later is expressed in the frame
    that has followed the line since then.  ``"pulse"`` restarts the ramp at
    every pulse.
    """

    kind: str = "ideal"
    duration: float = 13.2e-3
    n_slices: int = 4096
    truncation: float = 2.5
    envelope: tuple[float, ...] | None = None
    phase_reference: str = "sequence"

    def __post_init__(self):
        if self.kind not in ("ideal", "shaped"):
            raise PulseError(f"unknown backend {self.kind!r}")
        if self.phase_reference not in ("sequence", "pulse"):
            raise PulseError(f"unknown phase reference {self.phase_reference!r}")
        if self.kind == "shaped" and self.duration <= 0:
            raise PulseError("shaped backend needs a positive pulse duration")

    @property
    def is_shaped(self) -> bool:
        return self.kind == "shaped"


IDEAL = Backend()


def shaped_backend(duration: float = 13.2e-3, n_slices: int = 4096, truncation: float = 2.5,
                   phase_reference: str = "sequence") -> Backend:
    return Backend("shaped", duration, n_slices, truncation, phase_reference=phase_reference)


def _carrier_phase(event: PulseEvent, system: SpinSystem, backend: Backend, clock: float) -> float:
    """Pulse phase including the carrier advance accumulated before the pulse starts."""
    if backend.phase_reference == "pulse" or clock == 0:
        return event.phase
    h0 = internal_hamiltonian_diagonal(system)
    t = event.target
    return event.phase + (h0[t.bra] - h0[t.ket]) * clock


def event_duration(event: PulseEvent, backend: Backend = IDEAL) -> float:
    if event.kind in (DELAY, SHAPED):
        return event.duration
    if backend.is_shaped and event.kind == SELECTIVE:
        return event.duration or backend.duration
    if backend.is_shaped and event.kind == COMPOSITE_Z:
        return 3 * (event.duration or backend.duration)
    return 0.0


def sequence_duration(seq: PulseSequence, backend: Backend = IDEAL) -> float:
    return sum(event_duration(e, backend) for e in seq)


def _require_system(system: SpinSystem | None, event: PulseEvent) -> SpinSystem:
    if system is None:
        raise PulseError(f"{event.kind} events need a SpinSystem")
    return system


def event_unitary(event: PulseEvent, n_spins: int, system: SpinSystem | None = None,
                  backend: Backend = IDEAL, clock: float = 0.0) -> np.ndarray:
    """Propagator of a single unitary event starting ``clock`` seconds into its sequence."""
    kind = event.kind
    if kind == HARD:
        if not 0 <= event.target < n_spins:
            raise SpinSystemError(f"spin index {event.target} out of range for {n_spins} spins")
        return hard_pulse(event.target, event.angle, event.phase, n_spins)
    if kind == DELAY:
        return free_propagator(_require_system(system, event), event.duration)
    if kind == GRADIENT:
        raise PulseError("a gradient is not unitary")
    if kind == SHAPED:
        sys_ = _require_system(system, event)
        return shaped_pulse_propagator(
            sys_, event.target, event.angle, _carrier_phase(event, sys_, backend, clock), event.duration,
            event.shape, backend.n_slices, backend.truncation,
        )
    if kind == SELECTIVE:
        if backend.is_shaped:
            sys_ = _require_system(system, event)
            return shaped_pulse_propagator(
                sys_, event.target, event.angle, _carrier_phase(event, sys_, backend, clock),
                event.duration or backend.duration, backend.envelope, backend.n_slices, backend.truncation,
            )
        return ideal_selective_rotation(event.target, event.angle, event.phase, n_spins)
    if kind == COMPOSITE_Z:
        if backend.is_shaped:
            parts = composite_z_rotation(event.target, event.angle)
            return sequence_unitary(parts, n_spins, system, backend, clock)
        return z_rotation(event.target, event.angle, n_spins)
    raise PulseError(f"unknown event kind {kind!r}")


def sequence_unitary(seq: PulseSequence, n_spins: int = 2, system: SpinSystem | None = None,
                     backend: Backend = IDEAL, clock: float = 0.0) -> np.ndarray:
    """Composed propagator U_last ... U_first of a gradient-free sequence."""
    if system is not None:
        n_spins = system.n_spins
    u = np.eye(2**n_spins, dtype=complex)
    for event in seq:
        u = event_unitary(event, n_spins, system, backend, clock) @ u
        clock += event_duration(event, backend)
    return u


def apply(
    state: QuantumState,
    seq: PulseSequence | PulseEvent | np.ndarray,
    system: SpinSystem | None = None,
    backend: Backend = IDEAL,
) -> QuantumState:
    """Apply a unitary matrix, an event or a sequence to ``state``."""
    if isinstance(seq, np.ndarray):
        if seq.shape != state.rho.shape:
            raise PulseError(f"operator shape {seq.shape} does not match state dimension {state.dim}")
        return QuantumState(seq @ state.rho @ seq.conj().T)
    if isinstance(seq, PulseEvent):
        seq = PulseSequence([seq])
    if system is not None and system.dim != state.dim:
        raise PulseError(f"system dimension {system.dim} does not match state dimension {state.dim}")
    n = state.n_spins
    rho = state.rho
    pending = np.eye(state.dim, dtype=complex)
    clock = 0.0
    for event in seq:
        if event.kind == GRADIENT:
            rho = pending @ rho @ pending.conj().T
            pending = np.eye(state.dim, dtype=complex)
            rho = gradient_crush(QuantumState(rho, check=False)).rho
            continue
        pending = event_unitary(event, n, system, backend, clock) @ pending
        clock += event_duration(event, backend)
    rho = pending @ rho @ pending.conj().T
    return QuantumState(rho)


def event_substeps(
    event: PulseEvent, n_steps: int, system: SpinSystem | None, backend: Backend = IDEAL,
    clock: float = 0.0,
) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Split an event into ``(dt, U_step, rf_axis)`` pieces for trajectory sampling.

    Ideal rotations are divided into equal angle increments; shaped pulses
    are divided along their slices.  ``rf_axis`` is the unit rotation axis in
    the transverse plane (zero for free precession and z rotations).
    """
    n_spins = system.n_spins if system is not None else 2
    zero = np.zeros(3)
    axis = np.array([np.cos(event.phase), np.sin(event.phase), 0.0])
    n_steps = max(1, int(n_steps))
    kind = event.kind
    if kind == GRADIENT:
        raise PulseError("gradients have no trajectory")
    shaped_like = kind == SHAPED or (backend.is_shaped and kind in (SELECTIVE, COMPOSITE_Z))
    if shaped_like and kind == COMPOSITE_Z:
        steps = []
        for part in composite_z_rotation(event.target, event.angle):
            steps.extend(event_substeps(part, max(1, n_steps // 3), system, backend, clock))
            clock += event_duration(part, backend)
        return steps
    if shaped_like:
        sys_ = _require_system(system, event)
        dur = event.duration or backend.duration
        env = event.shape if kind == SHAPED else backend.envelope
        phase = _carrier_phase(event, sys_, backend, clock)
        slices = shaped_slices(sys_, event.target, event.angle, phase, dur, env,
                               backend.n_slices, backend.truncation)
        groups = np.array_split(np.arange(len(slices)), min(n_steps, len(slices)))
        dt = dur / len(slices)
        return [(dt * len(g), _ordered_product(slices[g]), axis) for g in groups]
    if kind == DELAY:
        sys_ = _require_system(system, event)
        dt = event.duration / n_steps
        return [(dt, free_propagator(sys_, dt), zero)] * n_steps
    if kind == COMPOSITE_Z:
        u = z_rotation(event.target, event.angle / n_steps, n_spins)
        return [(0.0, u, zero)] * n_steps
    step = replace(event, angle=event.angle / n_steps)
    return [(0.0, event_unitary(step, n_spins, system, IDEAL), axis)] * n_steps
