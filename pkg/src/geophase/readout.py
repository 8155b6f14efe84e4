"""Simulated detection: FIDs, spectra, peak phases, tomography and fidelities."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pulse import (
    IDEAL,
    X,
    Backend,
    PulseSequence,
    QuantumState,
    StateError,
    apply,
    gradient_crush,
    hard,
    sequence_unitary,
)
from .spinsys import (
    SpinSystem,
    internal_hamiltonian_diagonal,
    magnetic_numbers,
    transition_frequencies,
)

PEAK_THRESHOLD = 0.05


class ReadoutError(ValueError):
    pass


class TomographyError(ReadoutError):
    pass


@dataclass(frozen=True, eq=False)
class Fid:
    """Complex free induction decay s(k dwell)."""

    samples: np.ndarray
    dwell: float
    spin: int
    t2: float | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or len(s) < 2:
            raise ReadoutError("an FID needs at least two samples")
        if not self.dwell > 0:
            raise ReadoutError("dwell must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dwell


@dataclass(frozen=True)
class Peak:
    frequency: float
    amplitude: complex

    @property
    def phase(self) -> float:
        return float(np.angle(self.amplitude))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """FFT of an FID with the first point halved; axis centred on 0 Hz.

    ``values`` are normalized by the number of points, so an on-bin line of
    FID amplitude a has a peak close to a.
    """

    values: np.ndarray
    freqs: np.ndarray
    peaks: tuple[Peak, ...] = field(default=())

    def __post_init__(self):
        if np.any(np.diff(self.freqs) <= 0):
            raise ReadoutError("frequency axis must be increasing")

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["frequency_hz", "real", "imag"])
        for f, v in zip(self.freqs, self.values):
            w.writerow([f"{f:.6f}", f"{v.real:.12e}", f"{v.imag:.12e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _line_frequencies(system: SpinSystem, spin: int) -> np.ndarray:
    return np.array([f for _, f in transition_frequencies(system, spin)])


def simulate_fid(system: SpinSystem, state: QuantumState, spin: int, n_points: int = 1000,
                 dwell: float = 1e-3, t2: float | None = None) -> Fid:
    """s(t) = 2 tr(rho(t) (Ix + i Iy)) on ``spin`` under free evolution.

    A coherence rho[ket, bra] on a line of ``spin`` contributes
    2 rho[ket, bra] exp(i (E_bra - E_ket) t).
    """
    if n_points < 2:
        raise ReadoutError("n_points must be at least 2")
    if not dwell > 0:
        raise ReadoutError("dwell must be positive")
    if t2 is not None and not t2 > 0:
        raise ReadoutError("t2 must be positive")
    if system.dim != state.dim:
        raise ReadoutError("state and system dimensions differ")
    nyquist = 0.5 / dwell
    lines = _line_frequencies(system, spin)
    if np.any(np.abs(lines) >= nyquist):
        raise ReadoutError(
            f"line at {np.max(np.abs(lines)):g} Hz exceeds the Nyquist limit {nyquist:g} Hz"
        )
    h = internal_hamiltonian_diagonal(system)
    t = np.arange(n_points) * dwell
    s = np.zeros(n_points, dtype=complex)
    for tr, _ in transition_frequencies(system, spin):
        amp = 2 * state.rho[tr.ket, tr.bra]
        if amp != 0:
            s += amp * np.exp(1j * (h[tr.bra] - h[tr.ket]) * t)
    if t2 is not None:
        s *= np.exp(-t / t2)
    return Fid(s, dwell, spin, t2)


def _find_peaks(values: np.ndarray, freqs: np.ndarray, threshold: float) -> tuple[Peak, ...]:
    mag = np.abs(values)
    top = mag.max() if len(mag) else 0.0
    if top <= 1e-14:
        return ()
    padded = np.concatenate([[-np.inf], mag, [-np.inf]])
    is_max = (padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:])
    idx = np.flatnonzero(is_max & (mag >= threshold * top))
    return tuple(Peak(float(freqs[i]), complex(values[i])) for i in idx)


def spectrum(fid: Fid, threshold: float = PEAK_THRESHOLD) -> Spectrum:
    s = fid.samples.copy()
    s[0] *= 0.5
    n = len(s)
    values = np.fft.fftshift(np.fft.fft(s)) / n
    freqs = np.fft.fftshift(np.fft.fftfreq(n, fid.dwell))
    return Spectrum(values, freqs, _find_peaks(values, freqs, threshold))


def parseval_error(fid: Fid, spec: Spectrum) -> float:
    """Relative mismatch of the energy of the (halved-first-point) FID and the spectrum."""
    s = fid.samples.copy()
    s[0] *= 0.5
    e_time = np.sum(np.abs(s) ** 2)
    e_freq = len(s) * np.sum(np.abs(spec.values) ** 2)
    if e_time == 0:
        return float(e_freq)
    return float(abs(e_time - e_freq) / e_time)


def peak_phase(spec: Spectrum, frequency: float, tol: float | None = None) -> float:
    """Phase of the strongest peak within ``tol`` Hz of ``frequency``.

    This is minus the zero-order phase correction that makes the line
    absorptive.  ``tol`` defaults to one frequency bin.
    """
    if tol is None:
        tol = spec.freqs[1] - spec.freqs[0]
    near = [p for p in spec.peaks if abs(p.frequency - frequency) <= tol + 1e-9]
    if not near:
        raise ReadoutError(f"no peak within {tol:g} Hz of {frequency:g} Hz")
    best = max(near, key=lambda p: abs(p.amplitude))
    phase = best.phase
    return np.pi if phase <= -np.pi else phase


# --------------------------------------------------------------------------
# tomography


def line_amplitudes(state: QuantumState, n_spins: int | None = None) -> np.ndarray:
    """Integrated complex amplitudes 2 rho[ket, bra] of every single-quantum line.

    Ordered by spin, then by the state of the other spins.
    """
    n = state.n_spins if n_spins is None else n_spins
    out = []
    for spin in range(n):
        bit = 1 << (n - 1 - spin)
        for bra in range(2**n):
            if not bra & bit:
                out.append(2 * state.rho[bra | bit, bra])
    return np.array(out)


def readout_settings(n_spins: int = 2) -> list[tuple[bool, PulseSequence]]:
    """(crush first?, read pulses) for the eight tomography experiments."""
    if n_spins != 2:
        raise TomographyError("tomography is implemented for two spins")
    reads = [
        PulseSequence([]),
        PulseSequence([hard(0, np.pi / 2, X)]),
        PulseSequence([hard(1, np.pi / 2, X)]),
        PulseSequence([hard(0, np.pi / 2, X), hard(1, np.pi / 2, X)]),
    ]
    return [(crush, r) for crush in (False, True) for r in reads]


def _readout_matrix(n_spins: int, system: SpinSystem | None, backend: Backend) -> np.ndarray:
    """Linear map from vec(rho) to all measured line amplitudes plus the trace."""
    d = 2**n_spins
    rows = []
    for k in range(d * d):
        basis = np.zeros(d * d, dtype=complex)
        basis[k] = 1
        e = basis.reshape(d, d)
        col = []
        for crush, read in readout_settings(n_spins):
            m = e
            if crush:
                mz = magnetic_numbers(n_spins)
                m = np.where(np.isclose(mz[:, None], mz[None, :]), m, 0)
            u = sequence_unitary(read, n_spins, system, backend)
            m = u @ m @ u.conj().T
            col.extend(line_amplitudes(QuantumState(m, check=False), n_spins))
        col.append(np.trace(e))
        rows.append(col)
    return np.array(rows).T


def measure(state: QuantumState, system: SpinSystem | None = None,
            backend: Backend = IDEAL) -> np.ndarray:
    """Line amplitudes of all readout experiments, concatenated."""
    data = []
    for crush, read in readout_settings(state.n_spins):
        s = state
        if crush:
            s = gradient_crush(s)
        s = apply(s, read, system, backend)
        data.extend(line_amplitudes(s))
    return np.array(data)


def tomograph(system: SpinSystem | None, state: QuantumState,
              backend: Backend = IDEAL, cond_limit: float = 1e8) -> np.ndarray:
    """Reconstruct rho from emulated readouts by linear inversion.

    Each experiment records the complex line amplitudes of both spins,
    optionally after a gradient crush and (pi/2)_x read pulses.  The
    unit-trace condition is appended as one more equation.
    """
    n = state.n_spins
    a = _readout_matrix(n, system, backend)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > cond_limit:
        raise TomographyError("readout set does not determine the density matrix")
    b = np.concatenate([measure(state, system, backend), [1.0]])
    vec, *_ = np.linalg.lstsq(a, b, rcond=None)
    d = 2**n
    rho = vec.reshape(d, d)
    return 0.5 * (rho + rho.conj().T)


# --------------------------------------------------------------------------
# fidelities


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, QuantumState):
        return x.rho
    m = np.asarray(x, dtype=complex)
    QuantumState(m)  # validates
    return m


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    # round-off eigenvalues of a rank-deficient state would leak through the root
    w = np.where(w > 1e-13 * max(w.max(), 1e-300), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    try:
        r, s = _as_matrix(rho), _as_matrix(sigma)
    except StateError as exc:
        raise ReadoutError(f"not a density matrix: {exc}") from None
    if r.shape != s.shape:
        raise ReadoutError("dimension mismatch")
    # F = ||sqrt(rho) sqrt(sigma)||_1^2; singular values stay accurate when the
    # product is rank deficient, unlike square roots of its eigenvalues
    f = float(np.sum(np.linalg.svd(_psd_sqrt(r) @ _psd_sqrt(s), compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0)


def correlation_fidelity(rho, sigma) -> float:
    """tr(dr ds) / sqrt(tr dr^2 tr ds^2) on the deviation (traceless) parts.

    Clipped to [0, 1]: anti-correlated states score 0.
    """
    r = rho.rho if isinstance(rho, QuantumState) else np.asarray(rho, dtype=complex)
    s = sigma.rho if isinstance(sigma, QuantumState) else np.asarray(sigma, dtype=complex)
    d = r.shape[0]
    dr = r - np.trace(r) * np.eye(d) / d
    ds = s - np.trace(s) * np.eye(d) / d
    den = np.sqrt(np.real(np.trace(dr @ dr)) * np.real(np.trace(ds @ ds)))
    if den == 0:
        raise ReadoutError("correlation fidelity is undefined for a state without deviation")
    f = float(np.real(np.trace(dr @ ds)) / den)
    return min(max(f, 0.0), 1.0)


def effective_pure_state(state: QuantumState) -> QuantumState:
    """Rescale the deviation so that a pseudopure state becomes pure.

    rho_eff = I/d + dev / p with p = sqrt(tr dev^2 * d / (d - 1)), the
    contrast a pseudopure state (1 - p) I/d + p |psi><psi| would have.
    """
    dev = state.deviation()
    d = state.dim
    norm = np.real(np.trace(dev @ dev))
    if norm <= 0:
        raise ReadoutError("state has no deviation from the identity")
    p = np.sqrt(norm * d / (d - 1))
    rho = np.eye(d) / d + dev / p
    return QuantumState(rho, check=False)


def density_matrix_json(rho: np.ndarray, path: str | Path | None = None) -> str:
    rho = np.asarray(rho, dtype=complex)
    text = json.dumps({"re": rho.real.round(12).tolist(), "im": rho.imag.round(12).tolist()}, indent=1)
    if path is not None:
        Path(path).write_text(text)
    return text
