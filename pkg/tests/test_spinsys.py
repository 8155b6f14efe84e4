import itertools

import numpy as np
import pytest

from geophase.spinsys import (
    SpinSystemError,
    TransitionId,
    build_system,
    fictitious_operators,
    internal_hamiltonian,
    is_hermitian,
    magnetic_numbers,
    single_spin_operator,
    transition,
    transition_frequencies,
)

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def comm(a, b):
    return a @ b - b @ a


def test_chloroform_like_system():
    s = build_system(["13C", "1H"], couplings={(0, 1): 210.0})
    assert s.n_spins == 2 and s.dim == 4
    assert s.coupling(1, 0) == 210.0
    assert s.labels == ("13C", "1H")


def test_single_spin_system():
    s = build_system(1)
    assert s.dim == 2 and s.j_couplings == {}


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(spins=2, couplings={(1, 1): 5.0}),
        dict(spins=2, couplings={(0, 2): 5.0}),
        dict(spins=2, couplings={(0, 1): 5.0, (1, 0): 6.0}),
        dict(spins=2, offsets=[0.0]),
        dict(spins=2, offsets=[0.0, np.nan]),
        dict(spins=0),
    ],
)
def test_invalid_systems(kwargs):
    with pytest.raises(SpinSystemError):
        build_system(**kwargs)


def test_hamiltonian_j_only():
    s = build_system(2, couplings={(0, 1): 210.0})
    w = 2 * np.pi * 52.5
    assert np.allclose(internal_hamiltonian(s), np.diag([w, -w, -w, w]), atol=1e-12)


def test_hamiltonian_zero_and_single_spin():
    assert np.all(internal_hamiltonian(build_system(2)) == 0)
    nu = 37.5
    h = internal_hamiltonian(build_system(1, offsets=[nu]))
    assert np.allclose(h, np.diag([np.pi * nu, -np.pi * nu]))


def test_hamiltonian_matches_kronecker_sum():
    s = build_system(3, offsets=[10.0, -20.0, 5.0], couplings={(0, 1): 7.0, (1, 2): -3.0, (0, 2): 1.5})
    eye = np.eye(2)
    iz = [np.kron(np.kron(SZ, eye), eye), np.kron(np.kron(eye, SZ), eye), np.kron(np.kron(eye, eye), SZ)]
    h = 2 * np.pi * (10 * iz[0] - 20 * iz[1] + 5 * iz[2])
    h = h + 2 * np.pi * (7 * iz[0] @ iz[1] - 3 * iz[1] @ iz[2] + 1.5 * iz[0] @ iz[2])
    assert np.allclose(internal_hamiltonian(s), h, atol=1e-12)
    for k in range(3):
        assert np.allclose(comm(internal_hamiltonian(s), single_spin_operator(s, k, "z")), 0)


def test_fictitious_operators_10_11():
    ix, iy, iz = fictitious_operators(2, TransitionId.from_labels("10", "11"))
    expect_x = np.zeros((4, 4), complex)
    expect_x[2, 3] = expect_x[3, 2] = 0.5
    expect_y = np.zeros((4, 4), complex)
    expect_y[2, 3], expect_y[3, 2] = -0.5j, 0.5j
    assert np.array_equal(ix, expect_x)
    assert np.array_equal(iy, expect_y)
    assert np.array_equal(np.diag(iz), [0, 0, 0.5, -0.5])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fictitious_su2_algebra(n):
    for a, b in itertools.combinations(range(2**n), 2):
        ix, iy, iz = fictitious_operators(n, TransitionId(a, b))
        assert np.allclose(comm(ix, iy), 1j * iz)
        assert np.allclose(comm(iy, iz), 1j * ix)
        assert np.allclose(comm(iz, ix), 1j * iy)
        assert all(is_hermitian(m) for m in (ix, iy, iz))


def test_single_spin_operator_ordering():
    assert np.allclose(single_spin_operator(2, 0, "z"), np.kron(SZ, np.eye(2)))
    assert np.allclose(np.diag(single_spin_operator(2, 0, "z")), [0.5, 0.5, -0.5, -0.5])
    assert np.allclose(single_spin_operator(1, 0, "x"), SX)
    assert np.allclose(single_spin_operator(3, 1, "y"), np.kron(np.kron(np.eye(2), SY), np.eye(2)))
    with pytest.raises(SpinSystemError):
        single_spin_operator(2, 0, "w")
    with pytest.raises(SpinSystemError):
        single_spin_operator(2, 2, "x")


def test_transition_validation():
    assert transition("11", "10") == TransitionId(2, 3)
    with pytest.raises(SpinSystemError):
        TransitionId(3, 2)
    with pytest.raises(SpinSystemError):
        transition(1, 1)
    with pytest.raises(SpinSystemError):
        TransitionId(0, 4).validate(2)
    assert TransitionId(0, 2).flipped_spin(2) == 0
    assert TransitionId(2, 3).flipped_spin(2) == 1
    assert TransitionId(0, 3).flipped_spin(2) is None


def test_magnetic_numbers():
    assert np.allclose(magnetic_numbers(2), [1, 0, 0, -1])


def test_transition_frequencies():
    s = build_system(2, offsets=[100.0, -40.0], couplings={(0, 1): 210.0})
    lines = dict(transition_frequencies(s, 0))
    # spin 0 lines sit at nu_0 +- J/2 depending on the state of spin 1
    assert lines[TransitionId(0, 2)] == pytest.approx(100 + 105)
    assert lines[TransitionId(1, 3)] == pytest.approx(100 - 105)
    lines = dict(transition_frequencies(s, 1))
    assert lines[TransitionId(0, 1)] == pytest.approx(-40 + 105)
    assert lines[TransitionId(2, 3)] == pytest.approx(-40 - 105)
