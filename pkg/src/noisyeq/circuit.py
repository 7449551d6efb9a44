"""Circuit representation, text format, transforms and benchmark generators.

Text format, one instruction per line (``#`` starts a comment)::

    qubits 2
    h 0
    cs 1 0
    noise phase_flip 0 0.95
    h 1
    swap 0 1

Gate lines are ``<name> <qubit>... [<angle>]``. A gate name may carry the
suffixes ``.dg`` (adjoint) and ``.conj`` (entry-wise conjugate); transforms
emit them only when no builtin gate expresses the result.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import gates
from .noise import CHANNELS, NoiseChannel, channel

__all__ = [
    "CircuitError",
    "Instruction",
    "Circuit",
    "NoiseSpecEntry",
    "parse_circuit",
    "load_circuit",
    "serialize",
    "adjoint_circuit",
    "conjugate_circuit",
    "insert_noise",
    "parse_noise_spec",
    "random_noise_spec",
    "gen_qft",
    "gen_bv",
    "random_circuit",
]


class CircuitError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_SELF_ADJOINT = {"I", "X", "Y", "Z", "H", "CX", "CZ", "SWAP"}
_REAL = {"I", "X", "Z", "H", "CX", "CZ", "SWAP", "RY"}
_NEGATE_ON_ADJOINT = {"RX", "RY", "RZ", "CP"}
_NEGATE_ON_CONJ = {"RX", "RZ", "CP"}
_PAIRS = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}


@dataclass(frozen=True)
class Instruction:
    """A gate application or a noise placement.

    For noise, ``name`` is the key of the channel in ``Circuit.channels``.
    """

    kind: str
    name: str
    qubits: Tuple[int, ...]
    params: Tuple[float, ...] = ()
    dagger: bool = False
    conj: bool = False

    @property
    def is_noise(self) -> bool:
        return self.kind == "noise"

    @property
    def matrix(self) -> np.ndarray:
        if self.is_noise:
            raise TypeError("noise placements have no unitary matrix")
        m = gates.builtin(self.name, self.params)
        if self.conj:
            m = gates.conjugate(m)
        if self.dagger:
            m = gates.adjoint(m)
        return m

    @property
    def label(self) -> str:
        if self.is_noise:
            return self.name
        s = self.name.lower()
        if self.dagger:
            s += ".dg"
        if self.conj:
            s += ".conj"
        return s


def gate(name: str, *qubits: int, params: Sequence[float] = ()) -> Instruction:
    return Instruction("gate", name.upper(), tuple(qubits), tuple(float(p) for p in params))


def _canonical(ins: Instruction) -> Instruction:
    name, params, dagger, conj = ins.name, ins.params, ins.dagger, ins.conj
    if conj:
        if name in _REAL:
            conj = False
        elif name in _PAIRS:
            name, conj = _PAIRS[name], False
        elif name in _NEGATE_ON_CONJ:
            params, conj = tuple(-p for p in params), False
        elif name == "CS":
            # CS* == CS^dagger
            conj, dagger = False, not dagger
    if dagger:
        if name in _SELF_ADJOINT:
            dagger = False
        elif name in _PAIRS:
            name, dagger = _PAIRS[name], False
        elif name in _NEGATE_ON_ADJOINT:
            params, dagger = tuple(-p for p in params), False
    params = tuple(0.0 if p == 0 else p for p in params)
    return replace(ins, name=name, params=params, dagger=dagger, conj=conj)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    instructions: Tuple[Instruction, ...] = ()
    channels: Mapping[str, NoiseChannel] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        object.__setattr__(self, "instructions", tuple(self.instructions))
        for ins in self.instructions:
            _check_qubits(ins.qubits, self.num_qubits)
            if ins.is_noise:
                if ins.name not in self.channels:
                    raise CircuitError(f"unresolved channel {ins.name!r}")
                if len(ins.qubits) != self.channels[ins.name].arity:
                    raise CircuitError(f"channel {ins.name!r} arity mismatch")
            elif len(ins.qubits) != gates.GATE_ARITY[ins.name]:
                raise CircuitError(f"gate {ins.name} acts on {gates.GATE_ARITY[ins.name]} qubit(s)")

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits

    @property
    def is_ideal(self) -> bool:
        return not any(ins.is_noise for ins in self.instructions)

    @property
    def noises(self) -> List[Instruction]:
        return [ins for ins in self.instructions if ins.is_noise]

    @property
    def gate_count(self) -> int:
        return sum(not ins.is_noise for ins in self.instructions)

    def channel_of(self, ins: Instruction) -> NoiseChannel:
        return self.channels[ins.name]

    def total_terms(self) -> int:
        """Number of Kraus operators of the whole circuit (product over noises)."""
        return math.prod(len(self.channels[ins.name].kraus) for ins in self.noises)

    def __len__(self):
        return len(self.instructions)

    def with_qubits(self, num_qubits: int) -> "Circuit":
        """Same instructions on a register widened with idle qubits."""
        if num_qubits < self.num_qubits:
            raise CircuitError("cannot shrink a circuit")
        return replace(self, num_qubits=num_qubits)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise CircuitError("qubit-count mismatch")
        chans = dict(self.channels)
        chans.update(other.channels)
        return Circuit(self.num_qubits, self.instructions + other.instructions, chans)


def _check_qubits(qubits: Sequence[int], n: int, line: Optional[int] = None) -> None:
    for q in qubits:
        if not 0 <= q < n:
            raise CircuitError(f"qubit index {q} out of range for {n} qubit(s)", line)
    if len(set(qubits)) != len(qubits):
        raise CircuitError(f"repeated qubit in {list(qubits)}", line)


# ---------------------------------------------------------------------------
# text format

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_angle(text: str) -> float:
    """Evaluate a numeric literal, allowing ``pi`` and basic arithmetic."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(text)

    return ev(ast.parse(text, mode="eval"))


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitError(f"expected an integer, got {tok!r}", lineno) from None


def parse_circuit(text: str) -> Circuit:
    n = None
    instructions = []
    channels: Dict[str, NoiseChannel] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0].lower()
        if n is None:
            if head != "qubits" or len(toks) != 2:
                raise CircuitError("expected header 'qubits <n>'", lineno)
            n = _parse_int(toks[1], lineno)
            if n < 1:
                raise CircuitError("qubit count must be positive", lineno)
            continue
        if head == "qubits":
            raise CircuitError("duplicate 'qubits' header", lineno)
        if head == "noise":
            if len(toks) != 4:
                raise CircuitError("expected 'noise <channel> <qubit> <p>'", lineno)
            try:
                ch = channel(toks[1], float(toks[3]))
            except ValueError as exc:
                raise CircuitError(str(exc), lineno) from None
            q = _parse_int(toks[2], lineno)
            _check_qubits([q], n, lineno)
            channels[ch.key] = ch
            instructions.append(Instruction("noise", ch.key, (q,)))
            continue
        base, *mods = head.split(".")
        name = base.upper()
        if name not in gates.GATE_ARITY:
            raise CircuitError(f"unknown gate {base!r}", lineno)
        if any(m not in ("dg", "conj") for m in mods):
            raise CircuitError(f"unknown gate modifier in {head!r}", lineno)
        arity = gates.GATE_ARITY[name]
        nparams = gates.PARAM_COUNT[name]
        if len(toks) != 1 + arity + nparams:
            raise CircuitError(
                f"gate {base} expects {arity} qubit(s) and {nparams} parameter(s)", lineno
            )
        qubits = tuple(_parse_int(t, lineno) for t in toks[1:1 + arity])
        _check_qubits(qubits, n, lineno)
        try:
            params = tuple(_eval_angle(t) for t in toks[1 + arity:])
        except (ValueError, SyntaxError, ZeroDivisionError):
            raise CircuitError(f"bad angle in {line!r}", lineno) from None
        instructions.append(
            Instruction("gate", name, qubits, params, dagger="dg" in mods, conj="conj" in mods)
        )
    if n is None:
        raise CircuitError("missing 'qubits <n>' header")
    return Circuit(n, tuple(instructions), channels)


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


def serialize(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for ins in c.instructions:
        if ins.is_noise:
            ch = c.channels[ins.name]
            lines.append(f"noise {ch.label} {ins.qubits[0]} {ch.p!r}")
        else:
            toks = [ins.label, *map(str, ins.qubits), *(repr(p) for p in ins.params)]
            lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# transforms


def _require_ideal(c: Circuit, what: str) -> None:
    if not c.is_ideal:
        raise CircuitError(f"{what} is only defined for noiseless circuits")


def adjoint_circuit(c: Circuit) -> Circuit:
    """Circuit of the inverse unitary: reversed order, each gate adjointed."""
    _require_ideal(c, "adjoint")
    ins = tuple(_canonical(replace(i, dagger=not i.dagger)) for i in reversed(c.instructions))
    return Circuit(c.num_qubits, ins)


def conjugate_circuit(c: Circuit) -> Circuit:
    """Circuit of the entry-wise conjugate unitary; order is kept."""
    _require_ideal(c, "conjugate")
    ins = tuple(_canonical(replace(i, conj=not i.conj)) for i in c.instructions)
    return Circuit(c.num_qubits, ins)


# ---------------------------------------------------------------------------
# noise insertion


@dataclass(frozen=True)
class NoiseSpecEntry:
    """Place ``channel(p)`` on ``qubit`` right after instruction ``after``.

    ``after`` indexes the ideal circuit's instructions (0-based); ``-1`` puts
    the noise before the first instruction.
    """

    after: int
    qubit: int
    channel: str
    p: float

    @classmethod
    def coerce(cls, item) -> "NoiseSpecEntry":
        if isinstance(item, cls):
            return item
        if isinstance(item, Mapping):
            missing = {"after", "qubit", "channel", "p"} - set(item)
            if missing:
                raise CircuitError(f"noise spec entry missing {sorted(missing)}")
            return cls(int(item["after"]), int(item["qubit"]), str(item["channel"]), float(item["p"]))
        return cls(*item)


def parse_noise_spec(text: str) -> List[NoiseSpecEntry]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"noise spec is not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise CircuitError("noise spec must be a JSON array")
    return [NoiseSpecEntry.coerce(d) for d in data]


def insert_noise(c: Circuit, spec: Iterable) -> Circuit:
    entries = [NoiseSpecEntry.coerce(e) for e in spec]
    m = len(c.instructions)
    buckets: Dict[int, List[Instruction]] = {}
    channels = dict(c.channels)
    for e in entries:
        if not -1 <= e.after < m:
            raise CircuitError(f"noise position {e.after} out of range for {m} instruction(s)")
        _check_qubits([e.qubit], c.num_qubits)
        if e.channel not in CHANNELS:
            raise CircuitError(f"unknown channel {e.channel!r}")
        if not 0.0 <= e.p <= 1.0:
            raise CircuitError(f"probability p={e.p} outside [0, 1]")
        ch = channel(e.channel, e.p)
        channels[ch.key] = ch
        buckets.setdefault(e.after, []).append(Instruction("noise", ch.key, (e.qubit,)))
    out = list(buckets.get(-1, []))
    for k, ins in enumerate(c.instructions):
        out.append(ins)
        out.extend(buckets.get(k, []))
    return Circuit(c.num_qubits, tuple(out), channels)


def random_noise_spec(
    c: Circuit, count: int, channel_name: str = "depolarizing", p: float = 0.999, seed=None
) -> List[NoiseSpecEntry]:
    """``count`` noises at random gate positions, each on a qubit the gate touches.

    Entries are ordered by draw, so the spec for ``count=k`` is a prefix of
    the spec for ``count=k+1`` under the same seed.
    """
    if not c.instructions:
        raise CircuitError("cannot place noise in an empty circuit")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.integers(len(c.instructions)))
        q = int(rng.choice(c.instructions[k].qubits))
        out.append(NoiseSpecEntry(k, q, channel_name, p))
    return out


# ---------------------------------------------------------------------------
# generators


def gen_qft(n: int) -> Circuit:
    """Textbook QFT: H and controlled phases per qubit, then reversing swaps.

    Controlled rotations by pi/2 use ``CS``; smaller ones use ``CP``.
    """
    if n < 1:
        raise CircuitError("qft needs at least one qubit")
    ins = []
    for j in range(n):
        ins.append(gate("H", j))
        for k in range(j + 1, n):
            if k - j == 1:
                ins.append(gate("CS", k, j))
            else:
                ins.append(gate("CP", k, j, params=[math.pi / 2 ** (k - j)]))
    for j in range(n // 2):
        ins.append(gate("SWAP", j, n - 1 - j))
    return Circuit(n, tuple(ins))


def gen_bv(n: int, secret: Optional[str] = None, flip_ancilla: bool = False) -> Circuit:
    """Bernstein-Vazirani circuit; the last qubit is the oracle ancilla.

    ``secret`` has length ``n - 1`` (default all ones). With
    ``flip_ancilla`` an X on the ancilla precedes the first H layer.
    """
    if n < 1:
        raise CircuitError("bv needs at least one qubit")
    if secret is None:
        secret = "1" * (n - 1)
    if len(secret) != n - 1 or set(secret) - {"0", "1"}:
        raise CircuitError(f"secret must be a bitstring of length {n - 1}")
    anc = n - 1
    ins = [gate("X", anc)] if flip_ancilla else []
    ins += [gate("H", q) for q in range(n)]
    ins += [gate("CX", i, anc) for i, b in enumerate(secret) if b == "1"]
    ins += [gate("H", q) for q in range(n)]
    return Circuit(n, tuple(ins))


_RANDOM_POOL = ("H", "X", "Y", "Z", "S", "T", "SDG", "RX", "RY", "RZ", "CX", "CZ", "CS", "CP", "SWAP")


def random_circuit(n: int, num_gates: int, seed=None, pool: Sequence[str] = _RANDOM_POOL) -> Circuit:
    rng = np.random.default_rng(seed)
    names = [g for g in pool if gates.GATE_ARITY[g] <= n]
    ins = []
    for _ in range(num_gates):
        name = names[int(rng.integers(len(names)))]
        qubits = rng.choice(n, size=gates.GATE_ARITY[name], replace=False)
        params = [float(rng.uniform(-math.pi, math.pi))] * gates.PARAM_COUNT[name]
        ins.append(gate(name, *map(int, qubits), params=params))
    return Circuit(n, tuple(ins))
