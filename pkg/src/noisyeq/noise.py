"""Single-qubit Kraus channels and their superoperator matrices.

The parameter ``p`` is the probability that *no* error happens. Kraus terms
whose coefficient is exactly zero are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import gates

__all__ = ["NoiseChannel", "CHANNELS", "channel", "matrix_rep", "apply_superop"]

# name -> (error Paulis, share of the error probability each one gets)
CHANNELS = {
    "bit_flip": ("X",),
    "phase_flip": ("Z",),
    "bit_phase_flip": ("Y",),
    "depolarizing": ("X", "Y", "Z"),
}


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    label: str
    p: float
    kraus: Tuple[np.ndarray, ...] = field(repr=False)

    @property
    def arity(self) -> int:
        return int(np.log2(self.kraus[0].shape[0]))

    @property
    def key(self) -> str:
        """Stable identifier used for the channel table of a circuit."""
        return f"{self.label}:{self.p!r}"

    def __eq__(self, other):
        if not isinstance(other, NoiseChannel):
            return NotImplemented
        return (self.label, self.p) == (other.label, other.p) and len(self.kraus) == len(
            other.kraus
        ) and all(np.array_equal(a, b) for a, b in zip(self.kraus, other.kraus))

    def __hash__(self):
        return hash((self.label, self.p))

    def weights(self) -> np.ndarray:
        """Probability weight ||N_k||_F^2 / d of every Kraus term."""
        d = self.kraus[0].shape[0]
        return np.array([np.vdot(k, k).real / d for k in self.kraus])

    def check(self, atol: float = 1e-10) -> None:
        if not self.kraus:
            raise ValueError("channel has no Kraus operators")
        d = self.kraus[0].shape[0]
        total = sum(k.conj().T @ k for k in self.kraus)
        if not np.allclose(total, np.eye(d), rtol=0, atol=atol):
            raise ValueError(f"Kraus operators of {self.label} are not normalised")


def channel(name: str, p: float) -> NoiseChannel:
    """Build one of the builtin single-qubit channels.

    >>> [k.real.round(3).tolist() for k in channel("bit_flip", 0.64).kraus]
    [[[0.8, 0.0], [0.0, 0.8]], [[0.0, 0.6], [0.6, 0.0]]]
    """
    if name not in CHANNELS:
        raise ValueError(f"unknown channel {name!r}; expected one of {sorted(CHANNELS)}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability p={p} outside [0, 1]")
    paulis = CHANNELS[name]
    share = (1.0 - p) / len(paulis)
    terms = [(p, "I")] + [(share, g) for g in paulis]
    kraus = []
    for coeff, g in terms:
        if coeff == 0.0:
            continue
        k = np.sqrt(coeff) * gates.builtin(g)
        k.flags.writeable = False
        kraus.append(k)
    ch = NoiseChannel(label=name, p=p, kraus=tuple(kraus))
    ch.check()
    return ch


def matrix_rep(ch: NoiseChannel) -> np.ndarray:
    """Sum over Kraus terms of ``N (x) conj(N)``.

    The first tensor factor acts on the original qubit, the second on its
    primed copy. Under row-major vectorisation (|i><j| -> i*d + j) this is the
    superoperator matrix of the channel.
    """
    d = ch.kraus[0].shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    for k in ch.kraus:
        out += np.kron(k, k.conj())
    return out


def apply_superop(m: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a superoperator matrix to a density matrix (row-major vec)."""
    d = rho.shape[0]
    return (m @ rho.reshape(d * d)).reshape(d, d)
