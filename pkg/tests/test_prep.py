import numpy as np
import pytest
from scipy.linalg import expm

from geophase.gates import pseudo_hadamard
from geophase.prep import (
    DeviationState,
    PrepError,
    equilibrium_state,
    gamma_weights_for,
    prepare_pseudopure_00,
    pseudopure_contrast,
    pseudopure_sequence,
)
from geophase.pulse import PulseSequence, QuantumState, apply, gradient_crush
from geophase.spinsys import build_system

J = 210.0
CHCL3 = build_system(["1H", "13C"], couplings={(0, 1): J})


def proportional(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.dot(a, b) / np.dot(b, b)
    return np.allclose(a, scale * b, atol=1e-12) and scale > 0


def test_equilibrium_weights_4_1():
    dev = equilibrium_state(CHCL3, (4.0, 1.0)).deviation()
    assert np.allclose(dev, np.diag(np.diag(dev)))
    assert proportional(np.diag(dev).real, [5, 3, -3, -5])


def test_equilibrium_symmetric_and_single_spin():
    dev = equilibrium_state(build_system(2), (1.0, 1.0)).deviation()
    assert proportional(np.diag(dev).real, [1, 0, 0, -1])
    dev = equilibrium_state(build_system(1), (1.0,)).deviation()
    assert proportional(np.diag(dev).real, [0.5, -0.5])


def test_equilibrium_errors():
    with pytest.raises(PrepError):
        equilibrium_state(CHCL3, (4.0, 0.0))
    with pytest.raises(PrepError):
        equilibrium_state(CHCL3, (4.0,))
    with pytest.raises(PrepError):
        equilibrium_state(build_system(["19F", "1H"]))


def test_default_weights_follow_labels():
    assert gamma_weights_for(CHCL3) == (4.0, 1.0)
    assert gamma_weights_for(build_system(["13C", "1H"])) == (1.0, 4.0)


@pytest.mark.parametrize("labels,offsets", [(["1H", "13C"], (0, 0)), (["13C", "1H"], (0, 0)),
                                            (["1H", "13C"], (37.0, -80.0))])
def test_pseudopure(labels, offsets):
    system = build_system(labels, offsets=offsets, couplings={(0, 1): J})
    state = prepare_pseudopure_00(system)
    dev = state.deviation()
    lead = abs(dev[0, 0])
    assert np.max(np.abs(dev - np.diag(np.diag(dev)))) <= 1e-9 * lead
    assert proportional(np.diag(dev).real, [3, -1, -1, -1])
    assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(gradient_crush(state).rho, state.rho)


def test_pseudopure_matches_brute_force():
    """Apply the printed sequence step by step with explicit matrices."""
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.diag([0.5, -0.5])
    i2 = np.eye(2)
    # pulses on the proton (spin 0 here)
    ix, iy = np.kron(sx, i2), np.kron(sy, i2)
    zz = np.kron(sz, sz)
    rho = equilibrium_state(CHCL3).rho

    def rot(op, a):
        u = expm(-1j * a * op)
        return lambda r: u @ r @ u.conj().T

    def crush(r):
        m = np.array([1, 0, 0, -1])
        return np.where(m[:, None] == m[None, :], r, 0)

    steps = [rot(ix, np.pi / 3), crush, rot(ix, np.pi / 4), rot(2 * np.pi * J * zz, 1 / (2 * J)),
             rot(-iy, np.pi / 4), crush]
    for step in steps:
        rho = step(rho)
    assert np.allclose(prepare_pseudopure_00(CHCL3).rho, rho, atol=1e-12)


def test_pseudopure_requires_coupling():
    with pytest.raises(PrepError):
        pseudopure_sequence(build_system(["1H", "13C"]))
    with pytest.raises(PrepError):
        prepare_pseudopure_00(build_system(["1H", "13C"]))


def test_pseudopure_first_pulse_angle():
    seq = pseudopure_sequence(CHCL3)
    assert seq[0].target == 0 and seq[0].angle == pytest.approx(np.pi / 3)
    with pytest.raises(PrepError):
        pseudopure_sequence(build_system(2, couplings={(0, 1): J}), (1.0, 1.0))


def test_hadamard_after_prep_creates_coherence():
    state = prepare_pseudopure_00(CHCL3)
    out = apply(state, PulseSequence([pseudo_hadamard(0)]), CHCL3)
    dev = out.deviation()
    assert abs(dev[0, 2]) > 0.1 * abs(dev[0, 0])
    assert dev[0, 2].real > 0 and abs(dev[0, 2].imag) < 1e-12


def test_contrast():
    assert pseudopure_contrast(QuantumState.basis("00")) == pytest.approx(1.0)
    state = prepare_pseudopure_00(CHCL3)
    p = pseudopure_contrast(state)
    expect = (1 - p) * np.eye(4) / 4 + p * QuantumState.basis("00").rho
    assert np.allclose(state.rho, expect, atol=1e-12)


def test_deviation_state_roundtrip():
    state = equilibrium_state(CHCL3)
    ds = DeviationState.from_state(state, (4.0, 1.0))
    assert np.allclose(ds.to_state().rho, state.rho)
    with pytest.raises(PrepError):
        DeviationState(np.eye(2), 0.5)
