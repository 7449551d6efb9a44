import numpy as np
import pytest

from noisyeq.circuit import gen_qft, insert_noise, random_circuit, random_noise_spec


def qft2_with_flips(p: float, q: float = None):
    """QFT on two qubits with a bit flip after the first H (qubit 1) and a
    phase flip after the controlled-S (qubit 0)."""
    q = p if q is None else q
    ideal = gen_qft(2)
    noisy = insert_noise(ideal, [(0, 1, "bit_flip", p), (1, 0, "phase_flip", q)])
    return ideal, noisy


def random_pair(seed: int, n_range=(2, 5), max_gates=20, max_noises=3, channel="depolarizing", p=0.999):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    ideal = random_circuit(n, int(rng.integers(1, max_gates + 1)), seed=rng)
    k = int(rng.integers(0, max_noises + 1))
    noisy = insert_noise(ideal, random_noise_spec(ideal, k, channel, p, seed=rng))
    return ideal, noisy


@pytest.fixture
def qft2_pair():
    return qft2_with_flips
