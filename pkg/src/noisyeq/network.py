"""Tensor networks built from circuits, and their contraction over TDDs.

Wire labels are tuples ``(qubit, copy, segment)``: ``copy`` is 0 for the
original register and 1 for the primed register of a doubled network, and
``segment`` counts the gates the wire has passed. A gate on ``k`` qubits is a
tensor with ``2k`` axes, outputs first, inputs second, each group in the
order the qubits are listed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import gates
from .circuit import Circuit, CircuitError, adjoint_circuit, conjugate_circuit
from .noise import matrix_rep
from .tdd import Session, Tdd

__all__ = [
    "Tensor",
    "TensorNetwork",
    "circuit_to_network",
    "build_trace_miter",
    "build_doubled_miter",
    "optimize",
    "contraction_order",
    "Contractor",
    "contract",
]

Label = Tuple[int, int, int]
Wire = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Tensor:
    data: np.ndarray
    labels: Tuple[Label, ...]
    name: str = ""
    slot: Optional[int] = None  # index of the noise placement it stands for
    unitary: bool = False

    @property
    def arity(self) -> int:
        return len(self.labels) // 2

    @property
    def outputs(self) -> Tuple[Label, ...]:
        return self.labels[: self.arity]

    @property
    def inputs(self) -> Tuple[Label, ...]:
        return self.labels[self.arity:]

    @property
    def matrix(self) -> np.ndarray:
        d = 2 ** self.arity
        return self.data.reshape(d, d)


@dataclass(frozen=True, eq=False)
class TensorNetwork:
    tensors: Tuple[Tensor, ...]
    inputs: Mapping[Wire, Label]
    outputs: Mapping[Wire, Label]
    closed: bool = False
    scale: complex = 1.0
    num_slots: int = 0

    @property
    def open_indices(self) -> Tuple[Label, ...]:
        if self.closed:
            return ()
        return tuple(self.inputs.values()) + tuple(self.outputs.values())

    @property
    def labels(self) -> List[Label]:
        seen = {}
        for t in self.tensors:
            for l in t.labels:
                seen[l] = None
        return list(seen)

    def __len__(self):
        return len(self.tensors)


def _tensor(matrix: np.ndarray, outs, ins, **kw) -> Tensor:
    k = len(outs)
    data = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    return Tensor(data, tuple(outs) + tuple(ins), **kw)


def _wire_up(ops, wires: Sequence[Wire], num_slots: int = 0) -> TensorNetwork:
    """Lay ``ops`` = [(matrix, wires, name, slot, unitary)] on fresh wires."""
    seg = {w: 0 for w in wires}
    tensors = []
    for matrix, ws, name, slot, unitary in ops:
        ins = [(*w, seg[w]) for w in ws]
        for w in ws:
            seg[w] += 1
        outs = [(*w, seg[w]) for w in ws]
        tensors.append(_tensor(matrix, outs, ins, name=name, slot=slot, unitary=unitary))
    return TensorNetwork(
        tuple(tensors),
        inputs={w: (*w, 0) for w in wires},
        outputs={w: (*w, seg[w]) for w in wires},
        num_slots=num_slots,
    )


def _gate_ops(c: Circuit, copy: int = 0, conj: bool = False):
    for ins in c.instructions:
        m = ins.matrix
        if conj:
            m = m.conj()
        yield (m, [(q, copy) for q in ins.qubits], ins.label + ("*" if conj else ""), None, True)


def circuit_to_network(c: Circuit, kraus_choice: Optional[Sequence[int]] = None) -> TensorNetwork:
    """Open network of one circuit; each noise is replaced by one Kraus operator.

    ``kraus_choice[k]`` selects the Kraus operator of the k-th noise
    placement. The resulting noise tensors remember their placement index
    (``slot``) so other choices can be substituted later.
    """
    noises = c.noises
    if kraus_choice is None:
        if noises:
            raise CircuitError("noisy circuit needs a Kraus choice for every noise")
        kraus_choice = ()
    if len(kraus_choice) != len(noises):
        raise CircuitError(
            f"expected {len(noises)} Kraus choice(s), got {len(kraus_choice)}"
        )
    ops = []
    k = 0
    for ins in c.instructions:
        if ins.is_noise:
            kraus = c.channel_of(ins).kraus
            j = kraus_choice[k]
            if not 0 <= j < len(kraus):
                raise CircuitError(f"Kraus choice {j} out of range for noise {k}")
            ops.append((kraus[j], [(q, 0) for q in ins.qubits], f"{ins.name}[{j}]", k, False))
            k += 1
        else:
            ops.append((ins.matrix, [(q, 0) for q in ins.qubits], ins.label, None, True))
    return _wire_up(ops, [(q, 0) for q in range(c.num_qubits)], num_slots=len(noises))


def _relabel(t: Tensor, mapping: Mapping[Label, Label]) -> Tensor:
    return replace(t, labels=tuple(mapping.get(l, l) for l in t.labels))


def _compose(a: TensorNetwork, b: TensorNetwork) -> TensorNetwork:
    """``b`` after ``a`` on the same wires (b's inputs glued to a's outputs)."""
    if set(a.outputs) != set(b.inputs):
        raise CircuitError("networks act on different wires")
    shift = {w: a.outputs[w][2] for w in a.outputs}
    mapping = {}
    for t in b.tensors:
        for l in t.labels:
            mapping[l] = (l[0], l[1], l[2] + shift[(l[0], l[1])])
    tensors = a.tensors + tuple(_relabel(t, mapping) for t in b.tensors)
    outputs = {w: (w[0], w[1], b.outputs[w][2] + shift[w]) for w in b.outputs}
    slots = max(a.num_slots, b.num_slots)
    return TensorNetwork(tensors, dict(a.inputs), outputs, scale=a.scale * b.scale, num_slots=slots)


def _close(net: TensorNetwork) -> TensorNetwork:
    """Trace closure: every output wire is glued to its own input wire."""
    mapping = {}
    scale = net.scale
    for w, out in net.outputs.items():
        inp = net.inputs[w]
        if out == inp:
            scale *= 2  # bare wire closes into a loop: tr(I_2)
        else:
            mapping[out] = inp
    tensors = tuple(_relabel(t, mapping) for t in net.tensors)
    return replace(net, tensors=tensors, closed=True, scale=scale)


def build_trace_miter(ideal: Circuit, noisy_instance: TensorNetwork) -> TensorNetwork:
    """Closed network whose value is ``tr(U^dagger E)``."""
    if set(noisy_instance.inputs) != {(q, 0) for q in range(ideal.num_qubits)}:
        raise CircuitError("qubit-count mismatch between ideal circuit and noisy network")
    udag = _wire_up(_gate_ops(adjoint_circuit(ideal)), [(q, 0) for q in range(ideal.num_qubits)])
    return _close(_compose(noisy_instance, udag))


def build_doubled_miter(ideal: Circuit, noisy: Circuit) -> TensorNetwork:
    """Closed network on a doubled register whose value is
    ``tr((U^dagger (x) U^T) M)`` = sum over Kraus terms of ``|tr(U^dagger E_i)|^2``.

    Every unitary V of the noisy circuit becomes V on the original wires and
    conj(V) on the primed wires; every noise becomes its superoperator matrix
    across the (original, primed) pair.
    """
    n = ideal.num_qubits
    if noisy.num_qubits != n:
        raise CircuitError(f"qubit-count mismatch: {n} vs {noisy.num_qubits}")
    wires = [(q, c) for q in range(n) for c in (0, 1)]
    ops = []
    k = 0
    for ins in noisy.instructions:
        if ins.is_noise:
            ch = noisy.channel_of(ins)
            ws = [(q, 0) for q in ins.qubits] + [(q, 1) for q in ins.qubits]
            ops.append((matrix_rep(ch), ws, f"M[{ins.name}]", k, False))
            k += 1
        else:
            m = ins.matrix
            ops.append((m, [(q, 0) for q in ins.qubits], ins.label, None, True))
            ops.append((m.conj(), [(q, 1) for q in ins.qubits], ins.label + "*", None, True))
    noisy_net = _wire_up(ops, wires, num_slots=k)
    ideal_ops = list(_gate_ops(adjoint_circuit(ideal), copy=0))
    ideal_ops += _gate_ops(adjoint_circuit(conjugate_circuit(ideal)), copy=1)
    return _close(_compose(noisy_net, _wire_up(ideal_ops, wires)))


# ---------------------------------------------------------------------------
# local optimisation

_SWAP = gates.builtin("SWAP")


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.get(x, x)
        if p == x:
            return x
        r = self.find(p)
        self.parent[x] = r
        return r

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller label as representative for determinism
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def optimize(net: TensorNetwork, swaps: bool = True, cancel: bool = True, atol: float = 1e-12) -> TensorNetwork:
    """Remove SWAP tensors and adjacent mutually inverse gate pairs.

    SWAPs are dropped by joining each input wire to the output it feeds.
    A pair cancels when one unitary's outputs are exactly the next one's
    inputs (same order) and their product is the identity. Wires that end up
    with no tensor close into loops and contribute a factor 2 each. Noise
    tensors are never touched, so the result is valid for every Kraus choice.
    """
    if not net.closed:
        raise ValueError("optimize expects a closed miter network")
    uf = _UnionFind()
    universe = net.labels
    internal = []  # wires strictly between two cancelled gates
    alive = list(net.tensors)

    if swaps:
        kept = []
        for t in alive:
            if t.unitary and t.arity == 2 and np.array_equal(t.matrix, _SWAP):
                o1, o2, i1, i2 = t.labels
                uf.union(o1, i2)
                uf.union(o2, i1)
            else:
                kept.append(t)
        alive = kept

    while cancel:
        cur = [[uf.find(l) for l in t.labels] for t in alive]
        consumer = {}
        for ti, (t, ls) in enumerate(zip(alive, cur)):
            for pos, l in enumerate(ls[t.arity:]):
                consumer[l] = (ti, pos)
        dead = set()
        for gi, (g, gl) in enumerate(zip(alive, cur)):
            if gi in dead or not g.unitary or g.slot is not None:
                continue
            k = g.arity
            first = consumer.get(gl[0])
            if first is None:
                continue
            hi = first[0]
            if hi == gi or hi in dead:
                continue
            h = alive[hi]
            if not h.unitary or h.slot is not None or h.arity != k:
                continue
            if any(consumer.get(gl[i]) != (hi, i) for i in range(k)):
                continue
            if not np.allclose(h.matrix @ g.matrix, np.eye(2 ** k), rtol=0, atol=atol):
                continue
            hl = cur[hi]
            for i in range(k):
                uf.union(gl[k + i], hl[i])
            internal.extend(gl[:k])
            dead.update((gi, hi))
        if not dead:
            break
        alive = [t for i, t in enumerate(alive) if i not in dead]

    tensors = tuple(replace(t, labels=tuple(uf.find(l) for l in t.labels)) for t in alive)
    used = {l for t in tensors for l in t.labels}
    loops = {uf.find(l) for l in universe} - used - {uf.find(l) for l in internal}
    return replace(net, tensors=tensors, scale=net.scale * 2 ** len(loops))


# ---------------------------------------------------------------------------
# contraction order


def _self_trace(data: np.ndarray, labels: Sequence[Label]):
    """Sum out labels that occur twice on one tensor."""
    labels = list(labels)
    if len(set(labels)) == len(labels):
        return data, tuple(labels)
    ids = {}
    sub = [ids.setdefault(l, len(ids)) for l in labels]
    keep = [l for l in dict.fromkeys(labels) if labels.count(l) == 1]
    out = np.einsum(data, sub, [ids[l] for l in keep])
    return out, tuple(keep)


def _line_graph(tensors: Iterable[Tuple[np.ndarray, Sequence[Label]]]) -> Dict[Label, set]:
    adj: Dict[Label, set] = {}
    for _, ls in tensors:
        for a in ls:
            adj.setdefault(a, set()).update(b for b in ls if b != a)
    return adj


def _fill(adj, v) -> int:
    nb = sorted(adj[v])
    missing = 0
    for i, a in enumerate(nb):
        na = adj[a]
        for b in nb[i + 1:]:
            if b not in na:
                missing += 1
    return missing


def contraction_order(net: TensorNetwork) -> List[Label]:
    """Greedy min-fill elimination order over the network's line graph.

    Vertices are index labels; two labels are adjacent when they sit on the
    same tensor. Ties go to the lexicographically smallest label.
    """
    prepared = [_self_trace(t.data, t.labels) for t in net.tensors]
    adj = _line_graph(prepared)
    fill = {v: _fill(adj, v) for v in adj}
    order = []
    while fill:
        v = min(fill, key=lambda u: (fill[u], u))
        nb = adj.pop(v)
        del fill[v]
        order.append(v)
        for a in nb:
            adj[a].discard(v)
            adj[a].update(b for b in nb if b != a)
        touched = set(nb)
        for a in nb:
            touched |= adj[a]
        for u in touched:
            fill[u] = _fill(adj, u)
    return order


# ---------------------------------------------------------------------------
# contraction


class Contractor:
    """Contracts a closed network over TDDs, reusing its structure.

    The elimination order and the TDDs of all fixed tensors are computed once;
    :meth:`run` then only rebuilds tensors of noise slots that are overridden.
    """

    def __init__(self, net: TensorNetwork, session: Optional[Session] = None,
                 order: Optional[Sequence[Label]] = None, var_key=None):
        if not net.closed:
            raise ValueError("only closed networks contract to a scalar")
        self.net = net
        self.session = session if session is not None else Session()
        self.scale = complex(net.scale)
        self.slots: Dict[int, Tuple[int, Tuple[Label, ...]]] = {}
        prepared = []
        for t in net.tensors:
            data, labels = _self_trace(t.data, t.labels)
            if t.slot is not None:
                self.slots[t.slot] = (len(prepared), t.labels)
            prepared.append((data, labels))
        all_labels = sorted({l for _, ls in prepared for l in ls}, key=var_key)
        self.session.extend_order(all_labels)
        self.order = list(order) if order is not None else contraction_order(net)
        self.prepared = prepared
        self.fixed = [self.session.from_tensor(data, labels) for data, labels in prepared]

    def _instantiate(self, overrides: Optional[Mapping[int, np.ndarray]]) -> List[Tdd]:
        tdds = list(self.fixed)
        if overrides:
            for slot, matrix in overrides.items():
                pos, raw_labels = self.slots[slot]
                data = np.asarray(matrix, dtype=complex).reshape((2,) * len(raw_labels))
                data, labels = _self_trace(data, raw_labels)
                tdds[pos] = self.session.from_tensor(data, labels)
        return tdds

    def run(self, overrides: Optional[Mapping[int, np.ndarray]] = None,
            order: Optional[Sequence[Label]] = None) -> complex:
        """Value of the network, with noise slots replaced by ``overrides``
        (slot -> matrix)."""
        s = self.session
        tdds = self._instantiate(overrides)
        alive: Dict[int, Tdd] = {}
        owners: Dict[Label, List[int]] = {}
        for i, t in enumerate(tdds):
            s.note_peak(t)
            alive[i] = t
            for l in t.index_set:
                owners.setdefault(l, []).append(i)
        next_id = len(tdds)
        for label in (order if order is not None else self.order):
            own = owners.get(label)
            if own is None:
                continue
            a, b = own
            ta, tb = alive.pop(a), alive.pop(b)
            shared = ta.index_set & tb.index_set
            tc = s.contract(ta, tb, shared)
            s.note_peak(tc)
            for l in shared:
                del owners[l]
            for l in tc.index_set:
                owners[l] = [next_id if x in (a, b) else x for x in owners[l]]
            alive[next_id] = tc
            next_id += 1
            s.maybe_collect(list(alive.values()) + self.fixed)
        if owners:
            raise RuntimeError(f"elimination order misses labels {sorted(owners)[:5]}")
        value = self.scale
        for t in alive.values():
            value *= t.scalar()
        return value


def contract(net: TensorNetwork, session: Optional[Session] = None,
             order: Optional[Sequence[Label]] = None) -> complex:
    """One-shot contraction of a closed network to its scalar value."""
    return Contractor(net, session=session, order=order).run()
