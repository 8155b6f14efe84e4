import numpy as np
import pytest

from geophase.algos import (
    DJ_TABLES,
    AlgorithmError,
    DJFunction,
    diffusion_operator,
    grover_oracle,
    hadamards,
    refocus_phase_gates,
    run_dj,
    run_grover,
    uf_propagator,
)
from geophase.gates import BASIS_LABELS, CPHASE_TAG, GateError, phase_distance
from geophase.pulse import HARD, IDEAL, PulseSequence, QuantumState, sequence_unitary, shaped_backend
from geophase.spinsys import build_system

J = 210.0
SYSTEM = build_system(["1H", "13C"], couplings={(0, 1): J})


def oracle_matrix(table):
    """U_f |x, y> = |x, y xor f(x)>, built from the truth table."""
    u = np.zeros((4, 4))
    for x in (0, 1):
        for y in (0, 1):
            u[2 * x + (y ^ table[x]), 2 * x + y] = 1
    return u


def test_truth_tables():
    assert DJFunction("f00").is_constant and DJFunction("f11").is_constant
    assert not DJFunction("f10").is_constant and not DJFunction("f01").is_constant
    assert [DJFunction("f10")(x) for x in (0, 1)] == [0, 1]
    with pytest.raises(AlgorithmError):
        DJFunction("f22")


@pytest.mark.parametrize("label", list(DJ_TABLES))
def test_uf_propagators(label):
    u = sequence_unitary(uf_propagator(label))
    assert phase_distance(u, oracle_matrix(DJ_TABLES[label])) <= 1e-12
    assert np.max(np.abs(np.abs(u) - oracle_matrix(DJ_TABLES[label]))) <= 1e-12


def test_f00_is_empty():
    assert len(uf_propagator("f00")) == 0


@pytest.mark.parametrize("x", BASIS_LABELS)
def test_grover_oracle(x):
    expect = np.eye(4)
    expect[int(x, 2), int(x, 2)] = -1
    assert phase_distance(sequence_unitary(grover_oracle(x)), expect) <= 1e-12
    with pytest.raises(GateError):
        grover_oracle("2")


def test_diffusion_operator():
    s = sequence_unitary(hadamards()) @ np.array([1, 0, 0, 0])
    expect = np.eye(4) - 2 * np.outer(s, s.conj())
    d = sequence_unitary(diffusion_operator())
    assert phase_distance(d, expect) <= 1e-12
    # the mean state is a fixed point up to phase
    out = d @ s
    assert abs(abs(np.vdot(s, out)) - 1) <= 1e-12


@pytest.mark.parametrize("f", list(DJ_TABLES))
def test_dj_ideal(f):
    res = run_dj(SYSTEM, f)
    table = DJ_TABLES[f]
    assert res.answer == ("constant" if table[0] == table[1] else "balanced")
    assert res.dominant == ("00" if table[0] == table[1] else "10")
    assert res.fidelity == pytest.approx(1, abs=1e-10)
    assert res.oracle_calls == 1
    assert [name for name, _ in res.stages] == ["prepared", "superposition", "oracle", "final"]


@pytest.mark.parametrize("x", BASIS_LABELS)
def test_grover_ideal(x):
    res = run_grover(SYSTEM, x)
    assert res.dominant == x and res.correct
    assert res.probability == pytest.approx(1, abs=1e-10)
    eff = res.state.deviation()
    assert np.max(np.abs(eff - np.diag(np.diag(eff)))) <= 1e-10


def test_runs_from_pure_initial_state():
    res = run_grover(SYSTEM, "10", initial=QuantumState.basis("00"))
    assert np.allclose(res.state.rho, QuantumState.basis("10").rho, atol=1e-12)


def test_invalid_grover_target():
    with pytest.raises(GateError):
        run_grover(SYSTEM, "12")


def test_refocus_wraps_only_phase_gates():
    backend = shaped_backend(13.2e-3)
    seq = uf_propagator("f10")
    wrapped = refocus_phase_gates(seq, backend)
    # hadamards stay outside, the tagged block gains four refocusing pulses
    assert wrapped[0] == seq[0] and wrapped[-1] == seq[-1]
    assert wrapped.count(HARD) == seq.count(HARD) + 4
    assert sum(e.tag == CPHASE_TAG for e in wrapped) == sum(e.tag == CPHASE_TAG for e in seq)
    # with instantaneous gates the refocusing periods cancel exactly
    ideal = refocus_phase_gates(seq, IDEAL, tau=1 / (2 * J))
    assert phase_distance(sequence_unitary(ideal, 2, SYSTEM), sequence_unitary(seq)) <= 1e-10
    assert refocus_phase_gates(PulseSequence(), backend) == PulseSequence()


@pytest.mark.parametrize("f", ["f10", "f01"])
def test_dj_shaped(f):
    res = run_dj(SYSTEM, f, shaped_backend(13.2e-3))
    assert res.dominant == "10" and res.fidelity >= 0.9


@pytest.mark.parametrize("x", BASIS_LABELS)
def test_grover_shaped(x):
    res = run_grover(SYSTEM, x, shaped_backend(13.2e-3))
    assert res.dominant == x
    assert res.probability >= 0.85


def test_ideal_backend_ignores_refocus_flags():
    a = run_dj(SYSTEM, "f01", IDEAL)
    b = run_dj(SYSTEM, "f01", IDEAL, refocus=True, calibrate=True)
    assert np.allclose(a.state.rho, b.state.rho, atol=1e-12)
