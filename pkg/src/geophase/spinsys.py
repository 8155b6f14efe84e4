"""Spin systems, the weak-coupling internal Hamiltonian, and spin operators.

Basis ordering puts spin 0 in the most significant bit, so for two spins the
computational basis is |00>, |01>, |10>, |11>.  A bit value of 0 is spin up
(I_z = +1/2).  Spin indices are 0-based throughout the package; spin 0 is the
"first qubit".

Hamiltonians are angular frequencies (rad/s); user-facing inputs are in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

PAULI_HALF = {
    "x": np.array([[0, 0.5], [0.5, 0]], dtype=complex),
    "y": np.array([[0, -0.5j], [0.5j, 0]], dtype=complex),
    "z": np.array([[0.5, 0], [0, -0.5]], dtype=complex),
}

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12


class SpinSystemError(ValueError):
    """Raised for an invalid spin system, spin index, or transition."""


@dataclass(frozen=True)
class SpinSystem:
    """Coupled spin-1/2 system in the rotating frame.

    ``offsets`` are per-spin rotating-frame offsets in Hz and ``j_couplings``
    maps ``(i, j)`` with ``i < j`` to the scalar coupling in Hz.
    """

    n_spins: int
    offsets: tuple[float, ...]
    j_couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.n_spins, (int, np.integer)) or self.n_spins < 1:
            raise SpinSystemError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        if len(self.offsets) != self.n_spins:
            raise SpinSystemError(
                f"expected {self.n_spins} offsets, got {len(self.offsets)}"
            )
        if not all(math.isfinite(v) for v in self.offsets):
            raise SpinSystemError("offsets must be finite")
        if self.labels and len(self.labels) != self.n_spins:
            raise SpinSystemError(f"expected {self.n_spins} labels, got {len(self.labels)}")
        for (i, j), value in self.j_couplings.items():
            if i == j:
                raise SpinSystemError(f"self-coupling J({i},{j}) is not allowed")
            if not (0 <= i < j < self.n_spins):
                raise SpinSystemError(f"coupling ({i},{j}) does not reference a valid spin pair")
            if not math.isfinite(value):
                raise SpinSystemError(f"J({i},{j}) must be finite")

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    def coupling(self, i: int, j: int) -> float:
        i, j = min(i, j), max(i, j)
        return float(self.j_couplings.get((i, j), 0.0))

    def basis_label(self, index: int) -> str:
        return format(index, f"0{self.n_spins}b")

    def basis_index(self, label: str) -> int:
        if len(label) != self.n_spins or set(label) - {"0", "1"}:
            raise SpinSystemError(f"invalid basis label {label!r} for {self.n_spins} spins")
        return int(label, 2)

    def with_offsets(self, offsets: Sequence[float]) -> "SpinSystem":
        return SpinSystem(self.n_spins, tuple(float(v) for v in offsets), dict(self.j_couplings), self.labels)


def build_system(
    spins: int | Sequence[str],
    offsets: Sequence[float] | None = None,
    couplings: Mapping[tuple[int, int], float] | None = None,
) -> SpinSystem:
    """Validate inputs and return a :class:`SpinSystem`.

    ``spins`` is either a spin count or a sequence of nucleus labels such as
    ``("13C", "1H")``.  Coupling keys are normalised to ``(low, high)``;
    giving the same pair twice is an error.
    """
    if isinstance(spins, (int, np.integer)):
        n, labels = int(spins), ()
    else:
        labels = tuple(str(s) for s in spins)
        n = len(labels)
    if n < 1:
        raise SpinSystemError("a spin system needs at least one spin")
    if offsets is None:
        offsets = (0.0,) * n
    offsets = tuple(float(v) for v in offsets)
    normalised: dict[tuple[int, int], float] = {}
    for (i, j), value in (couplings or {}).items():
        if i == j:
            raise SpinSystemError(f"self-coupling J({i},{j}) is not allowed")
        key = (min(i, j), max(i, j))
        if key in normalised:
            raise SpinSystemError(f"coupling {key} given twice")
        normalised[key] = float(value)
    return SpinSystem(n, offsets, normalised, labels)


@dataclass(frozen=True, order=True)
class TransitionId:
    """Two-level subspace spanned by basis states ``bra`` < ``ket``."""

    bra: int
    ket: int

    def __post_init__(self):
        if self.bra < 0 or self.ket < 0:
            raise SpinSystemError("transition indices must be non-negative")
        if self.bra == self.ket:
            raise SpinSystemError("a transition needs two distinct basis states")
        if self.bra > self.ket:
            raise SpinSystemError("transition must be in canonical order bra < ket")

    @classmethod
    def from_labels(cls, a: str, b: str) -> "TransitionId":
        """``TransitionId.from_labels("10", "11")`` for |10> <-> |11>."""
        i, j = int(a, 2), int(b, 2)
        return cls(min(i, j), max(i, j))

    def validate(self, n_spins: int) -> None:
        if self.ket >= 2**n_spins:
            raise SpinSystemError(f"transition {self} out of range for {n_spins} spins")

    def flipped_spin(self, n_spins: int) -> int | None:
        """Index of the single spin flipped by this transition, else ``None``."""
        diff = self.bra ^ self.ket
        if diff & (diff - 1):
            return None
        return n_spins - diff.bit_length()

    def label(self, n_spins: int) -> str:
        fmt = f"0{n_spins}b"
        return f"|{self.bra:{fmt}}>-|{self.ket:{fmt}}>"


def transition(a: int | str, b: int | str) -> TransitionId:
    """Build a canonical :class:`TransitionId` from indices or bit labels."""
    i = int(a, 2) if isinstance(a, str) else int(a)
    j = int(b, 2) if isinstance(b, str) else int(b)
    if i == j:
        raise SpinSystemError("a transition needs two distinct basis states")
    return TransitionId(min(i, j), max(i, j))


def _n_spins(system_or_n: SpinSystem | int) -> int:
    return system_or_n.n_spins if isinstance(system_or_n, SpinSystem) else int(system_or_n)


def single_spin_operator(system: SpinSystem | int, spin: int, axis: str) -> np.ndarray:
    """Kronecker lift of the spin-1/2 operator ``I_axis`` onto ``spin``."""
    n = _n_spins(system)
    if axis not in PAULI_HALF:
        raise SpinSystemError(f"axis must be one of x, y, z; got {axis!r}")
    if not 0 <= spin < n:
        raise SpinSystemError(f"spin index {spin} out of range for {n} spins")
    left = np.eye(2**spin)
    right = np.eye(2 ** (n - spin - 1))
    return np.kron(np.kron(left, PAULI_HALF[axis]), right)


def iz_eigenvalues(n_spins: int, spin: int) -> np.ndarray:
    """Diagonal of ``I_z`` on ``spin`` (+1/2 where the bit is 0)."""
    idx = np.arange(2**n_spins)
    bits = (idx >> (n_spins - 1 - spin)) & 1
    return 0.5 - bits


def magnetic_numbers(n_spins: int) -> np.ndarray:
    """Total M = sum_i m_i for every basis state."""
    return sum(iz_eigenvalues(n_spins, s) for s in range(n_spins))


def internal_hamiltonian_diagonal(system: SpinSystem) -> np.ndarray:
    """Diagonal of the weak-coupling Hamiltonian in rad/s."""
    n = system.n_spins
    mz = [iz_eigenvalues(n, s) for s in range(n)]
    h = np.zeros(system.dim)
    for s, nu in enumerate(system.offsets):
        h += 2 * np.pi * nu * mz[s]
    for (i, j), jval in system.j_couplings.items():
        h += 2 * np.pi * jval * mz[i] * mz[j]
    return h


def internal_hamiltonian(system: SpinSystem) -> np.ndarray:
    """H = sum 2 pi nu_i Iz_i + sum_{i<j} 2 pi J_ij Iz_i Iz_j (rad/s)."""
    return np.diag(internal_hamiltonian_diagonal(system)).astype(complex)


def fictitious_operators(
    system: SpinSystem | int, t: TransitionId
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fictitious spin-1/2 operators (Ix, Iy, Iz) on the subspace of ``t``."""
    n = _n_spins(system)
    t.validate(n)
    dim = 2**n
    b, k = t.bra, t.ket
    ix = np.zeros((dim, dim), dtype=complex)
    iy = np.zeros((dim, dim), dtype=complex)
    iz = np.zeros((dim, dim), dtype=complex)
    ix[b, k] = ix[k, b] = 0.5
    iy[b, k] = -0.5j
    iy[k, b] = 0.5j
    iz[b, b] = 0.5
    iz[k, k] = -0.5
    return ix, iy, iz


def transition_frequencies(system: SpinSystem, spin: int) -> list[tuple[TransitionId, float]]:
    """Single-quantum lines of ``spin`` as (transition, frequency in Hz).

    The frequency is the precession rate of the coherence rho[ket, bra], which
    is what a quadrature receiver records.
    """
    n = system.n_spins
    h = internal_hamiltonian_diagonal(system)
    mask = 1 << (n - 1 - spin)
    lines = []
    for b in range(system.dim):
        if b & mask:
            continue
        k = b | mask
        lines.append((TransitionId(b, k), (h[b] - h[k]) / (2 * np.pi)))
    return lines


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= tol)
