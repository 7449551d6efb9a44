"""Dense-matrix reference implementations for differential testing.

Everything here works on explicit ``2^n x 2^n`` (or larger) arrays and shares
no code path with the TDD contraction.
"""

from __future__ import annotations

import itertools
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .circuit import Circuit, CircuitError

__all__ = [
    "OracleError",
    "apply_gate",
    "circuit_unitary",
    "enumerate_kraus",
    "choi_state",
    "jamiolkowski_fidelity_dense",
    "trace_terms",
    "haar_states",
    "haar_average_fidelity",
    "contract_dense",
]

MAX_UNITARY_QUBITS = 10
MAX_KRAUS_QUBITS = 8
MAX_KRAUS_TERMS = 2 ** 16
MAX_CHOI_QUBITS = 6
MAX_HAAR_QUBITS = 6


class OracleError(RuntimeError):
    pass


def apply_gate(state: np.ndarray, matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Left-multiply ``matrix`` on ``qubits`` of an n-qubit operator or vector.

    ``state`` has leading dimension ``2^n``; trailing columns are carried
    along untouched.
    """
    k = len(qubits)
    rest = state.shape[1:]
    t = state.reshape((2,) * n + (-1,))
    g = np.asarray(matrix).reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the gate's output axes first
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return t.reshape((2 ** n,) + rest)


def _ops(c: Circuit, choice: Optional[Sequence[int]] = None):
    k = 0
    for ins in c.instructions:
        if ins.is_noise:
            if choice is None:
                raise OracleError("noisy circuit passed where an ideal one is required")
            yield c.channel_of(ins).kraus[choice[k]], ins.qubits
            k += 1
        else:
            yield ins.matrix, ins.qubits


def circuit_unitary(c: Circuit, choice: Optional[Sequence[int]] = None) -> np.ndarray:
    """Dense matrix of an ideal circuit, or of one Kraus operator of a noisy
    one when ``choice`` picks a Kraus index per noise."""
    n = c.num_qubits
    if n > MAX_UNITARY_QUBITS:
        raise OracleError(f"{n} qubits exceeds the dense oracle limit of {MAX_UNITARY_QUBITS}")
    if choice is None and not c.is_ideal:
        raise OracleError("circuit_unitary needs an ideal circuit")
    u = np.eye(2 ** n, dtype=complex)
    for m, qs in _ops(c, choice):
        u = apply_gate(u, m, qs, n)
    return u


def _choices(c: Circuit):
    sizes = [len(c.channel_of(ins).kraus) for ins in c.noises]
    return itertools.product(*(range(s) for s in sizes))


def enumerate_kraus(c: Circuit) -> List[np.ndarray]:
    """All Kraus operators of the circuit's super-operator, one per choice of
    Kraus term at every noise (lexicographic in the noise order)."""
    if c.num_qubits > MAX_KRAUS_QUBITS:
        raise OracleError(f"{c.num_qubits} qubits exceeds the Kraus oracle limit")
    if c.total_terms() > MAX_KRAUS_TERMS:
        raise OracleError(f"{c.total_terms()} Kraus terms exceeds {MAX_KRAUS_TERMS}")
    return [circuit_unitary(c, ch) for ch in _choices(c)]


def trace_terms(ideal: Circuit, noisy: Circuit) -> np.ndarray:
    """``tr(U^dagger E_i)`` for every Kraus operator, lexicographic order."""
    if ideal.num_qubits != noisy.num_qubits:
        raise OracleError("qubit-count mismatch")
    udag = circuit_unitary(ideal).conj().T
    return np.array([np.trace(udag @ e) for e in enumerate_kraus(noisy)])


def choi_state(c: Circuit) -> np.ndarray:
    """``(I (x) E)(|Psi><Psi|)`` by density-matrix simulation on a doubled
    register; the reference copy is the first (most significant) factor."""
    n = c.num_qubits
    if n > MAX_CHOI_QUBITS:
        raise OracleError(f"{n} qubits exceeds the Choi oracle limit of {MAX_CHOI_QUBITS}")
    d = 2 ** n
    psi = np.eye(d, dtype=complex).reshape(d * d) / math.sqrt(d)
    rho = np.outer(psi, psi.conj())
    for ins in c.instructions:
        qs = [n + q for q in ins.qubits]
        kraus = c.channel_of(ins).kraus if ins.is_noise else (ins.matrix,)
        out = np.zeros_like(rho)
        for k in kraus:
            t = apply_gate(rho, k, qs, 2 * n)
            out += apply_gate(t.conj().T, k, qs, 2 * n).conj().T
        rho = out
    return rho


def jamiolkowski_fidelity_dense(ideal: Circuit, noisy: Circuit, atol: float = 1e-10) -> float:
    """Fidelity of the noisy circuit against the ideal one, two ways.

    (a) sum of ``|tr(U^dagger E_i)|^2 / d^2`` over enumerated Kraus operators;
    (b) ``<Psi_U| rho_E |Psi_U>`` from the Choi states.
    Raises :class:`OracleError` if they disagree by more than ``atol``.
    """
    n = ideal.num_qubits
    if noisy.num_qubits != n:
        raise OracleError("qubit-count mismatch")
    d = 2 ** n
    fa = float(np.sum(np.abs(trace_terms(ideal, noisy)) ** 2) / d ** 2)
    rho = choi_state(noisy)
    psi = np.eye(d, dtype=complex).reshape(d * d) / math.sqrt(d)
    u = circuit_unitary(ideal)
    # (I (x) U)|Psi>: U acts on the second factor
    psi_u = (psi.reshape(d, d) @ u.T).reshape(d * d)
    fb = np.vdot(psi_u, rho @ psi_u)
    if abs(fb.imag) > atol or abs(fa - fb.real) > atol:
        raise OracleError(f"trace route {fa!r} and Choi route {fb!r} disagree")
    return fa


def haar_states(dim: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """``samples`` Haar-random pure states as columns of a ``dim x samples`` array."""
    z = rng.standard_normal((dim, samples)) + 1j * rng.standard_normal((dim, samples))
    return z / np.linalg.norm(z, axis=0)


def haar_average_fidelity(ideal: Circuit, noisy: Circuit, samples: int, seed=None) -> Tuple[float, float]:
    """Monte-Carlo estimate of the input-averaged output fidelity.

    Returns ``(mean, standard error)`` of ``<psi|U^dagger E(psi) U|psi>``
    over Haar-random ``psi``.
    """
    if samples < 1:
        raise OracleError("need at least one sample")
    n = ideal.num_qubits
    if n > MAX_HAAR_QUBITS:
        raise OracleError(f"{n} qubits exceeds the Haar oracle limit of {MAX_HAAR_QUBITS}")
    rng = np.random.default_rng(seed)
    psi = haar_states(2 ** n, samples, rng)
    udag = circuit_unitary(ideal).conj().T
    vals = np.zeros(samples)
    for e in enumerate_kraus(noisy):
        amp = np.einsum("is,is->s", psi.conj(), (udag @ e) @ psi)
        vals += np.abs(amp) ** 2
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return mean, stderr


def contract_dense(net, order=None) -> complex:
    """Contract a closed tensor network with plain numpy, pairwise in the
    given label order (default: first-seen order)."""
    tensors = []
    for t in net.tensors:
        labels = list(t.labels)
        data = t.data
        ids = {}
        sub = [ids.setdefault(l, len(ids)) for l in labels]
        keep = [l for l in dict.fromkeys(labels) if labels.count(l) == 1]
        data = np.einsum(data, sub, [ids[l] for l in keep])
        tensors.append((data, keep))
    if order is None:
        order = list(dict.fromkeys(l for _, ls in tensors for l in ls))
    value = complex(net.scale)
    for label in order:
        idx = [i for i, (_, ls) in enumerate(tensors) if label in ls]
        if not idx:
            continue
        i, j = idx
        (a, la), (b, lb) = tensors[i], tensors[j]
        shared = [l for l in la if l in lb]
        c = np.tensordot(a, b, axes=([la.index(l) for l in shared], [lb.index(l) for l in shared]))
        lc = [l for l in la if l not in shared] + [l for l in lb if l not in shared]
        tensors = [t for k, t in enumerate(tensors) if k not in (i, j)] + [(c, lc)]
    for data, ls in tensors:
        if ls:
            raise OracleError("network is not closed")
        value *= complex(data)
    return value
