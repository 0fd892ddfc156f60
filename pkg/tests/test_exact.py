import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbmreweight.exact import (InfeasibleSize, PauliString, apply_pauli, chsh, dumps_state,
                               full_sum_expectation, ground_state, loads_state,
                               network_state_vector, pauli_expectation, tfim_hamiltonian)
from rbmreweight.network import NetworkParams
from rbmreweight.states import bell_imaginary, ghz

SQRT2 = np.sqrt(2)


def test_state_vector_bell():
    psi = network_state_vector(bell_imaginary())
    phase = psi[1] / abs(psi[1])
    np.testing.assert_allclose(psi / phase, [0, 1 / SQRT2, 1 / SQRT2, 0], atol=1e-12)


def test_state_vector_ghz3():
    psi = np.abs(network_state_vector(ghz(3)))
    expected = np.zeros(8)
    expected[[0, 7]] = 1 / SQRT2
    np.testing.assert_allclose(psi, expected, atol=1e-12)


def test_state_vector_zero_params():
    np.testing.assert_allclose(network_state_vector(NetworkParams.zeros(1, 1)),
                               [1 / SQRT2, 1 / SQRT2], atol=1e-15)


def test_state_vector_size_limit():
    with pytest.raises(InfeasibleSize):
        network_state_vector(NetworkParams.zeros(27, 1))


def test_tfim_n2_classical():
    np.testing.assert_array_equal(tfim_hamiltonian(2, 1.0, 0.0), np.diag([-2.0, 2, 2, -2]))


def test_tfim_ground_energies():
    assert ground_state(tfim_hamiltonian(2))[0] == pytest.approx(-2 * SQRT2, abs=1e-12)
    assert ground_state(tfim_hamiltonian(2))[0] == pytest.approx(-2.828427, abs=1e-6)
    assert ground_state(tfim_hamiltonian(3, 1.0, 0.0))[0] == pytest.approx(-3.0, abs=1e-12)


def test_tfim_size_limit():
    with pytest.raises(InfeasibleSize):
        tfim_hamiltonian(15)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_tfim_symmetric_and_flip_invariant(n):
    H = tfim_hamiltonian(n, 0.7, 1.3)
    assert np.array_equal(H, H.T)
    flip = np.eye(1)
    for _ in range(n):
        flip = np.kron(flip, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.linalg.norm(H @ flip - flip @ H) < 1e-12


def test_ground_state_tie_and_phase():
    e, psi = ground_state(np.diag([-2.0, 2, 2, -2]))
    assert e == -2
    np.testing.assert_array_equal(psi, [1, 0, 0, 0])
    with pytest.raises(ValueError):
        ground_state(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("n, h", [(2, 1.0), (4, 0.5), (6, 1.0), (8, 2.0)])
def test_ground_state_residual(n, h):
    H = tfim_hamiltonian(n, 1.0, h)
    e, psi = ground_state(H)
    assert np.linalg.norm(H @ psi - e * psi) < 1e-10
    k = np.argmax(np.abs(psi))
    assert psi[k].real > 0 and psi[k].imag == 0


def test_pauli_expectations():
    bell = network_state_vector(bell_imaginary())
    assert pauli_expectation(bell, PauliString("ZZ")) == pytest.approx(-1, abs=1e-12)
    assert pauli_expectation(bell, PauliString("XX")) == pytest.approx(1, abs=1e-12)
    g5 = network_state_vector(ghz(5))
    assert pauli_expectation(g5, PauliString("XXXXX")) == pytest.approx(1, abs=1e-12)
    g3 = network_state_vector(ghz(3))
    for i in range(1, 4):
        assert pauli_expectation(g3, PauliString.parse(f"X{i}", 3)) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        pauli_expectation(g3, PauliString("XX"))


def test_pauli_string_parsing():
    op = PauliString.parse("X1Y3", 4)
    assert op.ops == "XIYI" and op.support == [0, 2]
    assert op.label() == "X1Y3"
    assert not op.is_diagonal
    assert PauliString.parse("zz").ops == "ZZ"
    with pytest.raises(ValueError):
        PauliString.parse("X5", 3)


def test_apply_pauli_matches_dense():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
            "Z": np.diag([1, -1])}
    for text in ["XYZ", "IYI", "ZZX", "YYY"]:
        dense = np.eye(1)
        for a in text:
            dense = np.kron(dense, mats[a])
        np.testing.assert_allclose(apply_pauli(psi, PauliString(text)), dense @ psi, atol=1e-14)


def test_full_sum_bell():
    assert full_sum_expectation(bell_imaginary(), PauliString("XX")) == pytest.approx(1, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["XIZ", "YYI", "XXX", "ZIZ", "IYX"]))
@settings(max_examples=30, deadline=None)
def test_full_sum_matches_dense(seed, text):
    rng = np.random.default_rng(seed)
    z = rng.normal(scale=0.5, size=(2, 3 * 2 + 3 + 2))
    z = z[0] + 1j * z[1]
    p = NetworkParams(z[:6].reshape(3, 2), z[6:9], z[9:])
    op = PauliString(text)
    assert full_sum_expectation(p, op) == pytest.approx(
        pauli_expectation(network_state_vector(p), op), abs=1e-12)


@pytest.mark.parametrize("xx, zz, expected", [(1, -1, 2 * SQRT2), (0, 0, 0), (1, 1, 0)])
def test_chsh(xx, zz, expected):
    assert chsh(xx, zz) == pytest.approx(expected, abs=1e-12)


@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_chsh_product_states_classical(t1, p1, t2, p2):
    def qubit(t, p):
        return np.array([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)])
    psi = np.kron(qubit(t1, p1), qubit(t2, p2))
    b = chsh(pauli_expectation(psi, PauliString("XX")), pauli_expectation(psi, PauliString("ZZ")))
    assert b <= 2 + 1e-12


def test_state_text_roundtrip():
    psi = network_state_vector(ghz(3)) * np.exp(0.3j)
    text = dumps_state(psi)
    assert text.splitlines()[0].split()[0] == "0"
    np.testing.assert_array_equal(loads_state(text), psi)
