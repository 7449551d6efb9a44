"""Jamiolkowski fidelity of a noisy circuit against its ideal version.

Two contraction strategies are offered:

* :func:`fidelity_individual` contracts one trace network per Kraus term of
  the noisy circuit, sharing one TDD session, and can stop early once the
  partial sum already proves equivalence;
* :func:`fidelity_collective` contracts a single network on a doubled
  register in which each noise appears as its superoperator matrix.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import Circuit, CircuitError
from .network import Contractor, build_doubled_miter, build_trace_miter, circuit_to_network, optimize
from .tdd import Session

__all__ = [
    "FidelityReport",
    "WiringError",
    "AUTO_TERM_THRESHOLD",
    "MAX_TERMS",
    "kraus_terms",
    "fidelity_individual",
    "fidelity_collective",
    "check_equivalence",
    "average_fidelity",
    "cj_metric",
]

log = logging.getLogger(__name__)

AUTO_TERM_THRESHOLD = 16
MAX_TERMS = 2 ** 31
FJ_SLACK = 1e-9


class WiringError(RuntimeError):
    """The collective network produced a value that cannot be a fidelity."""


@dataclass
class FidelityReport:
    fj: float
    is_lower_bound: bool
    equivalent: Optional[str]  # "yes", "no", "yes-by-bound" or None (not decided)
    algorithm: str
    terms_evaluated: int
    total_terms: int
    peak_nodes: int
    wall_time: float
    raw_fj: float = float("nan")
    epsilon: Optional[float] = None
    per_term_traces: Optional[List[complex]] = field(default=None, repr=False)
    scalar: Optional[complex] = None

    def as_dict(self) -> dict:
        d = asdict(self)
        if self.per_term_traces is not None:
            d["per_term_traces"] = [[z.real, z.imag] for z in self.per_term_traces]
        if self.scalar is not None:
            d["scalar"] = [self.scalar.real, self.scalar.imag]
        return d


def _clamp(raw: float) -> float:
    if raw > 1 + FJ_SLACK or raw < -FJ_SLACK:
        log.warning("fidelity %.15g outside [0, 1] beyond tolerance", raw)
    return min(1.0, max(0.0, raw))


def _verdict(fj: float, epsilon: Optional[float], bound: bool = False) -> Optional[str]:
    if epsilon is None:
        return None
    if fj > 1 - epsilon:
        return "yes-by-bound" if bound else "yes"
    return "no"


def _check_pair(ideal: Circuit, noisy: Circuit) -> None:
    if not ideal.is_ideal:
        raise CircuitError("the reference circuit must be noiseless")
    if ideal.num_qubits != noisy.num_qubits:
        raise CircuitError(f"qubit-count mismatch: {ideal.num_qubits} vs {noisy.num_qubits}")


# ---------------------------------------------------------------------------
# Kraus term enumeration


def kraus_terms(noisy: Circuit, order: str = "weight") -> Iterator[Tuple[Tuple[int, ...], float]]:
    """Yield ``(choice, weight)`` for every Kraus term of ``noisy``.

    ``weight`` is the product over noises of ``||N||_F^2 / d``. With
    ``order="weight"`` terms come heaviest first (ties in lexicographic
    order); ``order="lex"`` is plain lexicographic.
    """
    weights = [noisy.channel_of(ins).weights() for ins in noisy.noises]
    if order == "lex":
        for choice in np.ndindex(*(len(w) for w in weights)):
            yield tuple(int(c) for c in choice), float(math.prod(w[c] for w, c in zip(weights, choice)))
        return
    if order != "weight":
        raise ValueError(f"unknown enumeration order {order!r}")
    # rank each noise's Kraus terms, then walk the product best-first; a tuple's
    # unique parent decrements its last nonzero rank, so no tuple repeats
    ranks = [sorted(range(len(w)), key=lambda j, w=w: (-w[j], j)) for w in weights]
    m = len(weights)

    def choice_of(r):
        return tuple(ranks[k][r[k]] for k in range(m))

    def weight_of(r):
        return math.prod(weights[k][ranks[k][r[k]]] for k in range(m))

    start = (0,) * m
    heap = [(-weight_of(start), choice_of(start), start)]
    while heap:
        negw, choice, r = heapq.heappop(heap)
        yield choice, -negw
        last = max((k for k in range(m) if r[k]), default=0)
        for k in range(last, m):
            if r[k] + 1 < len(weights[k]):
                nxt = r[:k] + (r[k] + 1,) + r[k + 1:]
                heapq.heappush(heap, (-weight_of(nxt), choice_of(nxt), nxt))


def _kraus_overrides(noisy: Circuit, choice: Sequence[int]) -> dict:
    return {k: noisy.channel_of(ins).kraus[j] for k, (ins, j) in enumerate(zip(noisy.noises, choice))}


def _trace_template(ideal: Circuit, noisy: Circuit, opt: bool):
    net = build_trace_miter(ideal, circuit_to_network(noisy, [0] * len(noisy.noises)))
    return optimize(net) if opt else net


def _worker_traces(ideal: Circuit, noisy: Circuit, opt: bool, choices, shared: bool):
    contractor = Contractor(_trace_template(ideal, noisy, opt))
    out = []
    for choice in choices:
        if not shared:
            contractor.session.reset_computed_table()
        out.append(contractor.run(_kraus_overrides(noisy, choice)))
    return out, contractor.session.peak_nodes


# ---------------------------------------------------------------------------
# algorithms


def fidelity_individual(
    ideal: Circuit,
    noisy: Circuit,
    early_exit: Optional[float] = None,
    *,
    epsilon: Optional[float] = None,
    shared_table: bool = True,
    optimize_network: bool = False,
    order: str = "weight",
    keep_traces: bool = True,
    workers: int = 1,
    chunk_size: int = 64,
    session: Optional[Session] = None,
) -> FidelityReport:
    """Sum ``|tr(U^dagger E_i)|^2 / d^2`` term by term.

    Parameters
    ----------
    early_exit : threshold epsilon; stop once the partial sum exceeds
        ``1 - epsilon`` and report it as a lower bound.
    epsilon : threshold used only for the verdict (defaults to ``early_exit``).
    shared_table : keep the computed table across terms (otherwise it is
        cleared before each term).
    workers : > 1 spreads terms over processes, each with its own session;
        results are consumed in enumeration order, so early exit decisions
        match the serial run.
    """
    t0 = time.perf_counter()
    _check_pair(ideal, noisy)
    total = noisy.total_terms()
    if total > MAX_TERMS:
        raise OverflowError(
            f"{total} Kraus terms is too many for term-by-term evaluation; "
            "use the collective algorithm"
        )
    if epsilon is None:
        epsilon = early_exit
    d2 = float(noisy.dim) ** 2
    target = None if early_exit is None else (1 - early_exit) * d2
    terms = (c for c, _ in kraus_terms(noisy, order))
    traces: List[complex] = []
    acc = 0.0
    stopped = False

    def consume(values) -> bool:
        nonlocal acc
        for v in values:
            traces.append(v)
            acc += abs(v) ** 2
            if target is not None and acc > target:
                return True
        return False

    if workers <= 1:
        if session is None:
            session = Session()
        contractor = Contractor(_trace_template(ideal, noisy, optimize_network), session=session)
        for choice in terms:
            if not shared_table:
                session.reset_computed_table()
            if consume([contractor.run(_kraus_overrides(noisy, choice))]):
                stopped = True
                break
        peak = session.peak_nodes
    else:
        peak = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = deque()

            def submit_next():
                chunk = [c for _, c in zip(range(chunk_size), terms)]
                if chunk:
                    pending.append(pool.submit(
                        _worker_traces, ideal, noisy, optimize_network, chunk, shared_table))

            for _ in range(2 * workers):
                submit_next()
            while pending:
                values, p = pending.popleft().result()
                peak = max(peak, p)
                if consume(values):
                    stopped = True
                    break
                submit_next()
            for fut in pending:
                fut.cancel()

    raw = acc / d2
    evaluated = len(traces)
    bound = stopped and evaluated < total
    return FidelityReport(
        fj=_clamp(raw),
        is_lower_bound=bound,
        equivalent=_verdict(raw, epsilon, bound),
        algorithm="individual",
        terms_evaluated=evaluated,
        total_terms=total,
        peak_nodes=peak,
        wall_time=time.perf_counter() - t0,
        raw_fj=raw,
        epsilon=epsilon,
        per_term_traces=traces if keep_traces else None,
    )


def fidelity_collective(
    ideal: Circuit,
    noisy: Circuit,
    *,
    epsilon: Optional[float] = None,
    optimize_network: bool = False,
    session: Optional[Session] = None,
) -> FidelityReport:
    """Contract the doubled network once; its value divided by ``d^2`` is the fidelity."""
    t0 = time.perf_counter()
    _check_pair(ideal, noisy)
    net = build_doubled_miter(ideal, noisy)
    if optimize_network:
        net = optimize(net)
    if session is None:
        session = Session()
    scalar = Contractor(net, session=session).run()
    if abs(scalar.imag) >= 1e-9 * max(1.0, abs(scalar)):
        raise WiringError(f"collective contraction returned non-real value {scalar!r}")
    raw = scalar.real / float(noisy.dim) ** 2
    return FidelityReport(
        fj=_clamp(raw),
        is_lower_bound=False,
        equivalent=_verdict(raw, epsilon),
        algorithm="collective",
        terms_evaluated=noisy.total_terms(),
        total_terms=noisy.total_terms(),
        peak_nodes=session.peak_nodes,
        wall_time=time.perf_counter() - t0,
        raw_fj=raw,
        epsilon=epsilon,
        scalar=scalar,
    )


def check_equivalence(
    ideal: Circuit,
    noisy: Circuit,
    epsilon: float,
    algorithm: str = "auto",
    *,
    early_exit: bool = True,
    auto_threshold: int = AUTO_TERM_THRESHOLD,
    **kwargs,
) -> FidelityReport:
    """Decide whether ``noisy`` is epsilon-equivalent to ``ideal`` (fidelity > 1 - epsilon).

    ``algorithm="auto"`` picks the term-by-term method when the noisy circuit
    has at most ``auto_threshold`` Kraus terms, the collective one otherwise.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon={epsilon} outside [0, 1]")
    if algorithm == "auto":
        algorithm = "individual" if noisy.total_terms() <= auto_threshold else "collective"
    if algorithm == "individual":
        return fidelity_individual(
            ideal, noisy, epsilon if early_exit else None, epsilon=epsilon, **kwargs
        )
    if algorithm == "collective":
        return fidelity_collective(ideal, noisy, epsilon=epsilon, **kwargs)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def average_fidelity(fj: float, d: int) -> float:
    """Haar-averaged state fidelity implied by a Jamiolkowski fidelity."""
    return (d * fj + 1) / (d + 1)


def cj_metric(fj: float) -> float:
    return math.sqrt(max(0.0, 1.0 - fj))
