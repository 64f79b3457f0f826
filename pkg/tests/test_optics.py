import numpy as np
import pytest

from conftest import haar_unitary
from qchansim.matops import ID2, PAULI_X, Q0, phase_invariant_distance
from qchansim.optics import (
    AxisAngle,
    EulerAngles,
    GateElement,
    WaveplateTriple,
    bloch_rotation,
    dove,
    dove_pair_for_ry,
    euler_from_su2,
    gate_list_from_json,
    gate_list_to_json,
    hwp,
    qwp,
    rot2,
    ry_rotation,
    su2_from_axis_angle,
    su2_from_euler,
    su2_from_rotation,
    triple_to_unitary,
    waveplates_from_euler,
)

U_BPF = np.diag([-1.0j, 1.0j])


def test_qwp_at_zero_is_q0():
    assert np.allclose(qwp(0.0), Q0, atol=1e-15)


def test_hwp_at_quarter_pi_is_sigma_x():
    # R(pi/4) H0 R(-pi/4) multiplied out by hand gives sigma_x.
    assert np.allclose(hwp(np.pi / 4.0), PAULI_X, atol=1e-15)


def test_dove_squares_to_identity():
    assert np.allclose(dove(0.0) @ dove(0.0), ID2, atol=1e-15)


def test_dove_equals_hwp_everywhere():
    for gamma in np.linspace(-np.pi, np.pi, 37):
        assert np.allclose(dove(gamma), hwp(gamma), atol=1e-12)


def test_triple_identity():
    assert np.allclose(triple_to_unitary(WaveplateTriple(0.0, 0.0, 0.0)), ID2, atol=1e-15)


def test_triple_bit_phase_flip_unitary():
    u = triple_to_unitary(WaveplateTriple(-np.pi / 2.0, np.pi / 2.0, 0.0))
    assert np.abs(u - U_BPF).max() <= 1e-12


def test_triple_coefficient_formulas():
    # u, w from the closed-form coefficient relations, against the product.
    rng = np.random.default_rng(20)
    for _ in range(1000):
        eta1, tau, eta2 = rng.uniform(-np.pi, np.pi, size=3)
        lam = 2.0 * tau - eta1 - eta2
        plus, minus = eta1 + eta2, eta1 - eta2
        u = np.cos(lam) * np.cos(minus) - 1j * np.sin(lam) * np.sin(plus)
        w = np.cos(lam) * np.sin(minus) + 1j * np.sin(lam) * np.cos(plus)
        expected = np.array([[u, -np.conj(w)], [w, np.conj(u)]])
        got = triple_to_unitary(WaveplateTriple(eta1, tau, eta2))
        assert np.linalg.norm(got - expected) <= 1e-12
        assert abs(abs(u) ** 2 + abs(w) ** 2 - 1.0) <= 1e-12


def test_su2_from_euler_identity():
    assert np.allclose(su2_from_euler(EulerAngles(0.0, 0.0, 0.0)), ID2, atol=1e-15)


def test_su2_from_euler_matches_rotation_product():
    # Independent path: Ry(phi) Rz(-xi) Ry(zeta) as an explicit product,
    # with Rz(xi) = diag(e^{-i xi}, e^{i xi}).
    rng = np.random.default_rng(26)
    for _ in range(200):
        phi, xi, zeta = rng.uniform(-np.pi, np.pi, size=3)
        product = rot2(phi) @ np.diag([np.exp(1j * xi), np.exp(-1j * xi)]) @ rot2(zeta)
        assert np.linalg.norm(su2_from_euler(EulerAngles(phi, xi, zeta)) - product) <= 1e-12


def test_su2_from_axis_angle_example():
    u = su2_from_axis_angle(AxisAngle(psi=np.pi / 2.0, theta=np.pi / 2.0, phi=0.0))
    assert np.allclose(u, -1j * PAULI_X, atol=1e-12)


def test_euler_and_axis_angle_agree():
    rng = np.random.default_rng(21)
    for _ in range(200):
        a = AxisAngle(psi=rng.uniform(0.0, np.pi), theta=rng.uniform(0.0, np.pi), phi=rng.uniform(0.0, 2 * np.pi))
        u = su2_from_axis_angle(a)
        e = euler_from_su2(u)
        assert phase_invariant_distance(su2_from_euler(e), u) <= 1e-10


def test_waveplates_from_euler_at_origin():
    triple = waveplates_from_euler(EulerAngles(0.0, 0.0, 0.0))
    assert triple == WaveplateTriple(-np.pi / 4.0, -np.pi / 4.0, -np.pi / 4.0)
    assert phase_invariant_distance(triple_to_unitary(triple), ID2) <= 1e-12


def test_waveplates_for_bit_phase_flip():
    e = euler_from_su2(U_BPF)
    triple = waveplates_from_euler(e)
    reference = triple_to_unitary(WaveplateTriple(-np.pi / 2.0, np.pi / 2.0, 0.0))
    assert phase_invariant_distance(triple_to_unitary(triple), reference) <= 1e-12


def test_waveplate_synthesis_round_trip():
    rng = np.random.default_rng(22)
    for _ in range(1000):
        e = EulerAngles(*rng.uniform(-np.pi, np.pi, size=3))
        u = su2_from_euler(e)
        assert phase_invariant_distance(triple_to_unitary(waveplates_from_euler(e)), u) <= 1e-10


def test_euler_from_su2_canonical_cases():
    assert euler_from_su2(ID2) == EulerAngles(0.0, 0.0, 0.0)
    e = euler_from_su2(U_BPF)
    assert phase_invariant_distance(su2_from_euler(e), U_BPF) <= 1e-12


def test_euler_round_trip_random_unitaries():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        u = haar_unitary(rng)
        e = euler_from_su2(u)
        assert phase_invariant_distance(su2_from_euler(e), u) <= 1e-10


def test_ry_rotation_examples():
    assert np.allclose(ry_rotation(0.0), ID2, atol=1e-15)
    assert np.allclose(ry_rotation(np.pi) @ np.array([1.0, 0.0]), [0.0, 1.0], atol=1e-12)


def test_dove_pair_realizes_half_angle_rotation():
    rng = np.random.default_rng(24)
    for _ in range(100):
        gamma = rng.uniform(-2 * np.pi, 2 * np.pi)
        pair = dove_pair_for_ry(gamma)
        assert pair.delta == pytest.approx(gamma / 4.0)
        assert np.linalg.norm(pair.to_matrix() - ry_rotation(gamma)) <= 1e-12


def test_printed_dove_composition_is_full_angle():
    # DP(g/2) DP(0) rotates by the full angle g, twice the circuit reading.
    for gamma in np.linspace(-np.pi, np.pi, 17):
        assert np.linalg.norm(dove(gamma / 2.0) @ dove(0.0) - rot2(gamma)) <= 1e-12


def test_waveplates_square_to_identity_up_to_phase():
    for angle in np.linspace(-np.pi, np.pi, 19):
        assert phase_invariant_distance(hwp(angle) @ hwp(angle), ID2) <= 1e-12
        q4 = np.linalg.matrix_power(qwp(angle), 4)
        assert phase_invariant_distance(q4, ID2) <= 1e-12


def test_bloch_rotation_round_trip():
    rng = np.random.default_rng(25)
    for _ in range(200):
        u = haar_unitary(rng)
        r = bloch_rotation(u)
        assert np.linalg.norm(r @ r.T - np.eye(3)) <= 1e-10
        assert phase_invariant_distance(su2_from_rotation(r), u) <= 1e-10


def test_gate_element_validation():
    with pytest.raises(ValueError):
        GateElement("LENS", 0.0, "pol")
    with pytest.raises(ValueError):
        GateElement("QWP", 0.0, "beam")


def test_gate_list_json_round_trip():
    gates = [
        GateElement("DP", 0.0, "mode"),
        GateElement("CNOT", None, "both"),
        GateElement("QWP", -np.pi / 4.0, "pol"),
    ]
    assert gate_list_from_json(gate_list_to_json(gates)) == gates
