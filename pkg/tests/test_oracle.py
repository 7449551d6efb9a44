import numpy as np
import pytest

from conftest import qft2_with_flips, random_pair
from noisyeq.circuit import gen_qft, insert_noise, random_circuit
from noisyeq.gates import builtin
from noisyeq.oracle import (
    OracleError,
    apply_gate,
    choi_state,
    circuit_unitary,
    enumerate_kraus,
    haar_average_fidelity,
    haar_states,
    jamiolkowski_fidelity_dense,
    trace_terms,
)


def test_apply_gate_against_kron():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(8) + 0j
    h, x = builtin("H"), builtin("X")
    i2 = np.eye(2)
    assert np.allclose(apply_gate(v, h, [0], 3), np.kron(h, np.kron(i2, i2)) @ v)
    assert np.allclose(apply_gate(v, x, [2], 3), np.kron(i2, np.kron(i2, x)) @ v)
    cx = builtin("CX")
    # control on qubit 2 (LSB), target on qubit 0 (MSB)
    full = np.zeros((8, 8))
    for b in range(8):
        full[b ^ 4 if b & 1 else b, b] = 1
    assert np.allclose(apply_gate(v, cx, [2, 0], 3), full @ v)


def test_qft2_traces_and_fidelity():
    p = 0.9
    ideal, noisy = qft2_with_flips(p)
    t = trace_terms(ideal, noisy)
    assert np.allclose(t, [4 * p, 0, 0, 0], atol=1e-12)
    assert jamiolkowski_fidelity_dense(ideal, noisy) == pytest.approx(p * p, abs=1e-12)
    assert jamiolkowski_fidelity_dense(ideal, ideal) == pytest.approx(1)


@pytest.mark.parametrize("seed", range(10))
def test_kraus_completeness_and_choi_trace(seed):
    _, noisy = random_pair(seed, n_range=(1, 3), max_gates=8, p=0.8)
    ks = enumerate_kraus(noisy)
    assert len(ks) == noisy.total_terms()
    total = sum(k.conj().T @ k for k in ks)
    assert np.allclose(total, np.eye(noisy.dim), atol=1e-9)
    rho = choi_state(noisy)
    assert np.trace(rho) == pytest.approx(1)
    assert np.allclose(rho, rho.conj().T)


@pytest.mark.parametrize("seed", range(10))
def test_routes_agree(seed):
    ideal, noisy = random_pair(seed, n_range=(1, 4), max_gates=12, p=0.85)
    # raises internally if the two routes differ
    f = jamiolkowski_fidelity_dense(ideal, noisy)
    assert 0 <= f <= 1 + 1e-12


def test_haar_sampling():
    rng = np.random.default_rng(1)
    psi = haar_states(4, 100, rng)
    assert np.allclose(np.linalg.norm(psi, axis=0), 1)
    a = haar_average_fidelity(*qft2_with_flips(0.9), samples=50, seed=5)
    b = haar_average_fidelity(*qft2_with_flips(0.9), samples=50, seed=5)
    assert a == b
    c = gen_qft(2)
    mean, _ = haar_average_fidelity(c, c, samples=20, seed=0)
    assert mean == pytest.approx(1, abs=1e-12)


def test_haar_mean_near_identity():
    p = 0.9
    mean, err = haar_average_fidelity(*qft2_with_flips(p), samples=10_000, seed=11)
    assert abs(mean - (4 * p * p + 1) / 5) < 3 * err


def test_limits():
    big = random_circuit(11, 1, seed=0)
    with pytest.raises(OracleError):
        circuit_unitary(big)
    with pytest.raises(OracleError):
        choi_state(random_circuit(7, 1, seed=0))
    with pytest.raises(OracleError):
        haar_average_fidelity(random_circuit(7, 1, seed=0), random_circuit(7, 1, seed=0), 1)
    c = gen_qft(2)
    with pytest.raises(OracleError):
        haar_average_fidelity(c, c, 0)
    noisy = insert_noise(c, [(0, 0, "bit_flip", 0.9)])
    with pytest.raises(OracleError):
        circuit_unitary(noisy)
    with pytest.raises(OracleError):
        jamiolkowski_fidelity_dense(c, gen_qft(3))
