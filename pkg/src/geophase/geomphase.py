"""Slice and triangular circuits, Bloch trajectories and enclosed solid angles.

The circuits are written in the literature as operator products, e.g.
A.B = (pi)_theta . (pi)_(theta+pi+phi).  The sequences built here are time
ordered, so the factor written last is applied first.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pulse import (
    IDEAL,
    Backend,
    PulseSequence,
    QuantumState,
    composite_z,
    event_substeps,
    selective,
)
from .spinsys import SpinSystem, TransitionId, internal_hamiltonian_diagonal

THETA_DEFAULT = 3 * np.pi / 2


class GeometryError(ValueError):
    pass


def slice_circuit(t: TransitionId, theta: float, phi: float) -> PulseSequence:
    """Two pi pulses on ``t`` whose product is diag(e^{i phi}, e^{-i phi}) on (bra, ket)."""
    return PulseSequence(
        [
            selective(t, np.pi, theta + np.pi + phi),
            selective(t, np.pi, theta),
        ]
    )


def triangle_circuit(t: TransitionId, theta: float, phi: float) -> PulseSequence:
    """(pi/2)_theta . (phi)_z . (pi/2)_(theta+pi-phi), giving diag(e^{-i phi/2}, e^{i phi/2})."""
    return PulseSequence(
        [
            selective(t, np.pi / 2, theta + np.pi - phi),
            composite_z(t, phi),
            selective(t, np.pi / 2, theta),
        ]
    )


@dataclass(frozen=True, eq=False)
class BlochPath:
    """Sampled polarization direction of a two-level subspace.

    ``axes`` holds the transverse rf axis active while each sample was taken
    (zero vector for free precession, z rotations and the initial point).
    """

    times: np.ndarray
    vectors: np.ndarray
    axes: np.ndarray
    magnitudes: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def is_closed(self) -> bool:
        return bool(np.linalg.norm(self.vectors[0] - self.vectors[-1]) <= 1e-6)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "z"])
        for t, (x, y, z) in zip(self.times, self.vectors):
            w.writerow([f"{t:.9g}", f"{x:.12f}", f"{y:.12f}", f"{z:.12f}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def subspace_bloch_vector(rho: np.ndarray, t: TransitionId) -> np.ndarray:
    """Unnormalised Bloch vector of the 2x2 block of ``t`` (bra is +z)."""
    b, k = t.bra, t.ket
    return np.array(
        [2 * rho[b, k].real, 2 * rho[k, b].imag, (rho[b, b] - rho[k, k]).real]
    )


def _step_weight(event, system: SpinSystem | None) -> float:
    if event.kind == "delay" and system is not None:
        h = internal_hamiltonian_diagonal(system)
        return (h.max() - h.min()) * event.duration
    return abs(event.angle) if event.kind != "delay" else 0.0


def bloch_trajectory(
    sequence: PulseSequence,
    t: TransitionId,
    initial: QuantumState,
    n_samples: int = 400,
    system: SpinSystem | None = None,
    backend: Backend = IDEAL,
) -> BlochPath:
    """Sample the polarization direction of subspace ``t`` along ``sequence``.

    Samples are spread over events in proportion to the rotation they
    produce; every event gets at least two.
    """
    n = initial.n_spins
    t.validate(n)
    v0 = subspace_bloch_vector(initial.rho, t)
    if np.linalg.norm(v0) < 1e-12:
        raise GeometryError(f"no polarization in subspace {t.label(n)}")
    weights = np.array([_step_weight(e, system) for e in sequence], dtype=float)
    total = weights.sum()
    budget = max(n_samples - 1, 2 * len(sequence))
    counts = [
        max(2, int(round(budget * w / total))) if total > 0 else 2 for w in weights
    ]

    rho = initial.rho
    clock = 0.0
    times, vectors, axes, mags = [0.0], [v0 / np.linalg.norm(v0)], [np.zeros(3)], [np.linalg.norm(v0)]
    for event, count in zip(sequence, counts):
        for dt, u, axis in event_substeps(event, count, system, backend, clock):
            rho = u @ rho @ u.conj().T
            clock += dt
            v = subspace_bloch_vector(rho, t)
            norm = np.linalg.norm(v)
            if norm < 1e-12:
                raise GeometryError("subspace polarization vanished along the path")
            times.append(clock)
            vectors.append(v / norm)
            axes.append(axis)
            mags.append(norm)
    if len(sequence) == 0:
        times.append(0.0)
        vectors.append(vectors[0])
        axes.append(np.zeros(3))
        mags.append(mags[0])
    return BlochPath(np.array(times), np.array(vectors), np.array(axes), np.array(mags))


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z**2)
    az = np.pi * (1 + 5**0.5) * i
    return np.stack([r * np.cos(az), r * np.sin(az), z], axis=1)


def _reference_point(points: np.ndarray) -> np.ndarray:
    """Direction whose own and antipodal positions are far from every sample."""
    candidates = _fibonacci_sphere(256)
    # |p.r| close to 1 means r or -r sits near a sample
    closeness = np.abs(points @ candidates.T).max(axis=0)
    return candidates[np.argmin(closeness)]


def _triangle_solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Signed solid angle of geodesic triangles (Van Oosterom-Strackee)."""
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2 * np.arctan2(num, den)


def enclosed_solid_angle(path: BlochPath) -> float:
    """Signed solid angle of the closed geodesic polygon through the samples.

    Positive for counter-clockwise traversal seen from outside the sphere.
    The area is fan-triangulated from a reference direction chosen away from
    the path, so it is defined modulo 4 pi; the result lies in (-2 pi, 2 pi].
    """
    pts = path.vectors
    if not path.is_closed:
        raise GeometryError("path is not closed")
    if len(pts) < 3:
        return 0.0
    ref = _reference_point(pts)
    a = np.broadcast_to(ref, (len(pts) - 1, 3))
    total = float(_triangle_solid_angle(a, pts[:-1], pts[1:]).sum())
    total = (total + 2 * np.pi) % (4 * np.pi) - 2 * np.pi
    if np.isclose(total, -2 * np.pi, atol=1e-12):
        total = 2 * np.pi
    return 0.0 if abs(total) < 1e-12 else total


def wrap_solid_angle(omega: float) -> float:
    """Map a solid angle into (-2 pi, 2 pi]."""
    w = (omega + 2 * np.pi) % (4 * np.pi) - 2 * np.pi
    return 2 * np.pi if np.isclose(w, -2 * np.pi) else w


def coherence_phase(state: QuantumState, t: TransitionId) -> float:
    """Phase of the coherence rho[ket, bra], in (-pi, pi].

    For a state |bra> + e^{i a}|ket> this returns ``a``.
    """
    t.validate(state.n_spins)
    c = state.rho[t.ket, t.bra]
    if abs(c) <= 1e-12:
        raise GeometryError(f"coherence {t.label(state.n_spins)} vanishes")
    phase = float(np.angle(c))
    return np.pi if phase <= -np.pi else phase
