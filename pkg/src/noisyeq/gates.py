"""Builtin unitary gate matrices.

Multi-qubit matrices use qubit-major bit order: the first qubit listed in an
instruction is the most significant bit of the row/column index.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "GATE_ARITY",
    "PARAM_COUNT",
    "builtin",
    "adjoint",
    "conjugate",
    "kron",
    "is_unitary",
]

_SQ2 = 1 / np.sqrt(2)

GATE_ARITY = {
    "I": 1, "X": 1, "Y": 1, "Z": 1, "H": 1,
    "S": 1, "SDG": 1, "T": 1, "TDG": 1,
    "RX": 1, "RY": 1, "RZ": 1,
    "CX": 2, "CZ": 2, "CS": 2, "CP": 2, "SWAP": 2,
}

PARAM_COUNT = {name: 0 for name in GATE_ARITY}
PARAM_COUNT.update(RX=1, RY=1, RZ=1, CP=1)

_FIXED = {
    "I": [[1, 0], [0, 1]],
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
    "H": [[_SQ2, _SQ2], [_SQ2, -_SQ2]],
    "S": [[1, 0], [0, 1j]],
    "SDG": [[1, 0], [0, -1j]],
    "T": [[1, 0], [0, np.exp(1j * np.pi / 4)]],
    "TDG": [[1, 0], [0, np.exp(-1j * np.pi / 4)]],
    "CX": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    "CZ": np.diag([1, 1, 1, -1]),
    "CS": np.diag([1, 1, 1, 1j]),
    "SWAP": [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
}


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    a.flags.writeable = False
    return a


@lru_cache(maxsize=None)
def _fixed(name: str) -> np.ndarray:
    return _frozen(_FIXED[name])


def builtin(name: str, params: Sequence[float] = ()) -> np.ndarray:
    """Return the matrix of a builtin gate.

    ``name`` is case-insensitive. Rotation gates and ``CP`` (controlled phase)
    take one angle in radians.

    >>> builtin("cs").diagonal()
    array([1.+0.j, 1.+0.j, 1.+0.j, 0.+1.j])
    """
    key = name.upper()
    if key not in GATE_ARITY:
        raise ValueError(f"unknown gate {name!r}")
    params = tuple(params)
    if len(params) != PARAM_COUNT[key]:
        raise ValueError(
            f"gate {name!r} takes {PARAM_COUNT[key]} parameter(s), got {len(params)}"
        )
    if not params:
        return _fixed(key)
    theta = float(params[0])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if key == "RX":
        m = [[c, -1j * s], [-1j * s, c]]
    elif key == "RY":
        m = [[c, -s], [s, c]]
    elif key == "RZ":
        m = [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]]
    else:
        m = np.diag([1, 1, 1, np.exp(1j * theta)])
    return _frozen(m)


def adjoint(g: np.ndarray) -> np.ndarray:
    return _frozen(np.conj(g).T)


def conjugate(g: np.ndarray) -> np.ndarray:
    return _frozen(np.conj(g))


def kron(*ms: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def is_unitary(g: np.ndarray, atol: float = 1e-12) -> bool:
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        return False
    dim = g.shape[0]
    if dim < 2 or dim & (dim - 1):
        return False
    return bool(np.allclose(g.conj().T @ g, np.eye(dim), rtol=0, atol=atol))
