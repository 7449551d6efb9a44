"""Epsilon-equivalence checking of noisy quantum circuits.

The fidelity of a noisy circuit against its ideal version is computed by
contracting tensor networks whose tensors are stored as tensor decision
diagrams (TDDs).
"""

from .circuit import (
    Circuit,
    CircuitError,
    Instruction,
    NoiseSpecEntry,
    adjoint_circuit,
    conjugate_circuit,
    gen_bv,
    gen_qft,
    insert_noise,
    load_circuit,
    parse_circuit,
    parse_noise_spec,
    random_circuit,
    random_noise_spec,
    serialize,
)
from .fidelity import (
    FidelityReport,
    WiringError,
    average_fidelity,
    check_equivalence,
    cj_metric,
    fidelity_collective,
    fidelity_individual,
    kraus_terms,
)
from .noise import CHANNELS, NoiseChannel, channel, matrix_rep
from .tdd import Session, Tdd

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CircuitError", "Instruction", "NoiseSpecEntry",
    "adjoint_circuit", "conjugate_circuit", "gen_bv", "gen_qft", "insert_noise",
    "load_circuit", "parse_circuit", "parse_noise_spec", "random_circuit",
    "random_noise_spec", "serialize",
    "FidelityReport", "WiringError", "average_fidelity", "check_equivalence",
    "cj_metric", "fidelity_collective", "fidelity_individual", "kraus_terms",
    "CHANNELS", "NoiseChannel", "channel", "matrix_rep",
    "Session", "Tdd",
]
