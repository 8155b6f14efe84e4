import numpy as np
import pytest

from geophase.experiments import circuit_trajectory, phase_experiment, preset_system
from geophase.geomphase import (
    THETA_DEFAULT,
    BlochPath,
    GeometryError,
    bloch_trajectory,
    coherence_phase,
    enclosed_solid_angle,
    slice_circuit,
    subspace_bloch_vector,
    triangle_circuit,
    wrap_solid_angle,
)
from geophase.pulse import PulseSequence, QuantumState, sequence_unitary
from geophase.spinsys import SpinSystemError, TransitionId

T1011 = TransitionId(2, 3)
GRID = np.linspace(0, 2 * np.pi, 16, endpoint=False)


def block_diag(a, b):
    return np.diag([1, 1, a, b])


@pytest.mark.parametrize("theta", [0.0, np.pi / 2, 3 * np.pi / 2])
def test_slice_operator(theta):
    for phi in GRID:
        u = sequence_unitary(slice_circuit(T1011, theta, phi))
        assert np.allclose(u, block_diag(np.exp(1j * phi), np.exp(-1j * phi)), atol=1e-12)


def test_slice_special_values():
    assert np.allclose(sequence_unitary(slice_circuit(T1011, THETA_DEFAULT, 0.0)), np.eye(4))
    assert np.allclose(sequence_unitary(slice_circuit(T1011, THETA_DEFAULT, np.pi)), block_diag(-1, -1))


@pytest.mark.parametrize("theta", [0.0, np.pi / 2, 3 * np.pi / 2])
def test_triangle_operator(theta):
    for phi in GRID:
        u = sequence_unitary(triangle_circuit(T1011, theta, phi))
        assert np.allclose(u, block_diag(np.exp(-1j * phi / 2), np.exp(1j * phi / 2)), atol=1e-12)


def test_triangle_special_values():
    assert np.allclose(sequence_unitary(triangle_circuit(T1011, THETA_DEFAULT, 0.0)), np.eye(4))
    assert np.allclose(sequence_unitary(triangle_circuit(T1011, THETA_DEFAULT, 2 * np.pi)), block_diag(-1, -1))
    assert np.allclose(sequence_unitary(triangle_circuit(T1011, THETA_DEFAULT, np.pi)), block_diag(-1j, 1j))


def test_slice_to_triangle_ratio():
    for phi in GRID[1:8]:
        s = np.angle(sequence_unitary(slice_circuit(T1011, 0, phi))[2, 2])
        t = np.angle(sequence_unitary(triangle_circuit(T1011, 0, phi))[2, 2])
        assert abs(s) / abs(t) == pytest.approx(2.0, rel=1e-12)


def test_invalid_transition():
    with pytest.raises(SpinSystemError):
        sequence_unitary(slice_circuit(TransitionId(2, 5), 0.0, 1.0))


@pytest.mark.parametrize("phi", [np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2])
@pytest.mark.parametrize("kind,factor", [("slice", -2.0), ("triangle", 1.0)])
def test_solid_angle(kind, factor, phi):
    path = circuit_trajectory(kind, phi, n_samples=200)
    assert path.is_closed
    assert np.allclose(np.linalg.norm(path.vectors, axis=1), 1, atol=1e-9)
    omega = enclosed_solid_angle(path)
    # the signed area carries the traversal orientation and is defined modulo 4 pi
    expected = factor * phi
    assert abs(wrap_solid_angle(omega - expected)) <= 0.01 * abs(expected)


def test_slice_path_visits_south_pole_on_two_meridians():
    path = circuit_trajectory("slice", np.pi / 2, n_samples=200)
    assert np.allclose(path.vectors[0], [0, 0, 1])
    assert path.vectors[:, 2].min() == pytest.approx(-1, abs=1e-9)
    down = path.vectors[len(path) // 4]
    up = path.vectors[3 * len(path) // 4]
    # the two legs run on meridians a quarter turn (phi) apart
    az_down, az_up = np.arctan2(down[1], down[0]), np.arctan2(up[1], up[0])
    assert abs(np.angle(np.exp(1j * (az_down - az_up)))) == pytest.approx(np.pi / 2, abs=1e-9)


def test_triangle_path_reaches_equator():
    path = circuit_trajectory("triangle", np.pi / 2, n_samples=200)
    on_equator = np.abs(path.vectors[:, 2]) < 1e-9
    assert on_equator.sum() >= 2


def test_parallel_transport_slice():
    path = circuit_trajectory("slice", 0.9, n_samples=400)
    assert np.max(np.abs(np.einsum("ij,ij->i", path.axes, path.vectors))) <= 1e-6


def test_empty_sequence_trajectory():
    path = bloch_trajectory(PulseSequence(), T1011, QuantumState.basis("10"))
    assert len(path) == 2 and np.allclose(path.vectors[0], path.vectors[1])
    assert enclosed_solid_angle(path) == 0.0


def test_degenerate_path_has_no_area():
    assert enclosed_solid_angle(circuit_trajectory("slice", 0.0)) == 0.0


def test_no_polarization_error():
    with pytest.raises(GeometryError):
        bloch_trajectory(slice_circuit(T1011, 0, 1.0), T1011, QuantumState.basis("00"))


def test_open_path_error():
    half = PulseSequence([slice_circuit(T1011, 0, 1.0)[0]])
    path = bloch_trajectory(half, T1011, QuantumState.basis("10"))
    assert not path.is_closed
    with pytest.raises(GeometryError):
        enclosed_solid_angle(path)


def test_spherical_cap_area():
    # a circle of colatitude a traced counter-clockwise encloses 2 pi (1 - cos a)
    a = 0.7
    az = np.linspace(0, 2 * np.pi, 721)
    v = np.stack([np.sin(a) * np.cos(az), np.sin(a) * np.sin(az), np.full_like(az, np.cos(a))], axis=1)
    path = BlochPath(az, v, np.zeros_like(v), np.ones(len(az)))
    assert enclosed_solid_angle(path) == pytest.approx(2 * np.pi * (1 - np.cos(a)), rel=1e-4)


def test_subspace_vector_and_csv():
    rho = QuantumState.from_vector([0, 0, 1, 1j]).rho
    assert np.allclose(subspace_bloch_vector(rho, T1011), [0, 1, 0])
    text = circuit_trajectory("triangle", 1.0, n_samples=50).to_csv()
    assert text.splitlines()[0] == "t,x,y,z"


def test_coherence_phase_cases():
    t = TransitionId(0, 2)
    assert coherence_phase(QuantumState.from_vector([1, 0, 1, 0]), t) == 0.0
    assert coherence_phase(QuantumState.from_vector([1, 0, np.exp(0.4j), 0]), t) == pytest.approx(0.4)
    assert coherence_phase(QuantumState.from_vector([1, 0, -1, 0]), t) == pytest.approx(np.pi)
    with pytest.raises(GeometryError):
        coherence_phase(QuantumState.basis("00"), t)


@pytest.mark.parametrize("phi", [0.3, 1.2, 2.5])
def test_phase_is_minus_half_solid_angle(phi):
    system = preset_system("phase")
    for kind in ("slice", "triangle"):
        m = phase_experiment(system, kind, phi)
        assert abs(np.angle(np.exp(1j * (m.phase + m.solid_angle / 2)))) <= 0.01 * abs(m.solid_angle) / 2


def test_phase_independent_of_theta():
    system = preset_system("phase")
    phases = [phase_experiment(system, "triangle", 1.1, theta).phase for theta in (0.0, 1.0, np.pi / 2)]
    assert np.ptp(phases) < 1e-12
