"""Thermal equilibrium and the |00> pseudopure state by spatial averaging."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gates import coupling_evolution
from .pulse import MINUS_Y, X, PulseSequence, QuantumState, apply, gradient, hard
from .spinsys import SpinSystem, single_spin_operator

# Relative gyromagnetic ratios; gamma_H / gamma_C is close to 4.
GAMMA_WEIGHTS = {"1H": 4.0, "13C": 1.0}


class PrepError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DeviationState:
    deviation: np.ndarray
    identity_weight: float
    gamma_weights: tuple[float, ...] = ()

    def __post_init__(self):
        if abs(np.trace(self.deviation)) > 1e-12:
            raise PrepError("deviation must be traceless")

    @classmethod
    def from_state(cls, state: QuantumState, gamma_weights: Sequence[float] = ()) -> "DeviationState":
        return cls(state.deviation(), 1.0 / state.dim, tuple(gamma_weights))

    def to_state(self) -> QuantumState:
        d = self.deviation.shape[0]
        return QuantumState(self.identity_weight * np.eye(d) + self.deviation)


def gamma_weights_for(system: SpinSystem) -> tuple[float, ...]:
    try:
        return tuple(GAMMA_WEIGHTS[label] for label in system.labels)
    except KeyError as exc:
        raise PrepError(f"no default gyromagnetic weight for nucleus {exc.args[0]!r}") from None


def equilibrium_state(system: SpinSystem, gamma_weights: Sequence[float] | None = None,
                      polarization: float = 0.1) -> QuantumState:
    """High-temperature equilibrium: I/d + eps * sum_i gamma_i Iz_i.

    ``polarization`` sets eps as a fraction of the largest value keeping the
    state positive.  All dynamics are linear in the deviation, so it only
    scales the signal.
    """
    if gamma_weights is None:
        gamma_weights = gamma_weights_for(system)
    weights = np.asarray(gamma_weights, dtype=float)
    if weights.shape != (system.n_spins,):
        raise PrepError(f"need {system.n_spins} gyromagnetic weights, got {len(weights)}")
    if np.any(weights <= 0):
        raise PrepError("gyromagnetic weights must be positive")
    if not 0 < polarization <= 1:
        raise PrepError("polarization must lie in (0, 1]")
    dev = sum(w * single_spin_operator(system, s, "z") for s, w in enumerate(weights))
    d = system.dim
    eps = polarization / (d * weights.sum() / 2)
    return QuantumState(np.eye(d) / d + eps * dev)


def pseudopure_sequence(system: SpinSystem, gamma_weights: Sequence[float] | None = None,
                        pulse_spin: int | None = None) -> PulseSequence:
    """(a)^2_x - G_z - (pi/4)^2_x - 1/(2J) - (pi/4)^2_-y - G_z.

    Pulses act on the spin with the larger gyromagnetic weight.  The first
    flip angle is arccos(2 g_other / g_pulsed), which is pi/3 for a 4:1
    weight ratio.
    """
    if system.n_spins != 2:
        raise PrepError("pseudopure preparation is defined for two spins")
    jval = system.coupling(0, 1)
    if jval == 0:
        raise PrepError("J = 0: the 1/(2J) delay is undefined")
    if gamma_weights is None:
        gamma_weights = gamma_weights_for(system)
    w = np.asarray(gamma_weights, dtype=float)
    if pulse_spin is None:
        pulse_spin = int(np.argmax(w))
    other = 1 - pulse_spin
    ratio = 2 * w[other] / w[pulse_spin]
    if ratio > 1:
        raise PrepError("the pulsed spin needs at least twice the other spin's weight")
    first = float(np.arccos(ratio))
    return PulseSequence(
        [
            hard(pulse_spin, first, X),
            gradient(),
            hard(pulse_spin, np.pi / 4, X),
            *coupling_evolution(system, 1 / (2 * jval)),
            hard(pulse_spin, np.pi / 4, MINUS_Y),
            gradient(),
        ]
    )


def prepare_pseudopure_00(system: SpinSystem, gamma_weights: Sequence[float] | None = None,
                          polarization: float = 0.1) -> QuantumState:
    """Equilibrium followed by the spatial-averaging sequence."""
    if gamma_weights is None:
        gamma_weights = gamma_weights_for(system)
    state = equilibrium_state(system, gamma_weights, polarization)
    return apply(state, pseudopure_sequence(system, gamma_weights), system)


def pseudopure_contrast(state: QuantumState, label: str = "00") -> float:
    """Population contrast relative to an ideal pseudopure state on ``label``.

    Returns p in rho = (1 - p) I/d + p |label><label| when the state has
    that form; 1 means a pure state.
    """
    d = state.dim
    k = int(label, 2)
    dev = state.deviation().real
    return float(dev[k, k] * d / (d - 1))
