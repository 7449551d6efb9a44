"""Tensor decision diagrams over binary indices.

A TDD is an edge ``(weight, node)`` into a DAG of nodes. Each node branches
on one index; the global order of indices is fixed per :class:`Session`
(smaller level = closer to the root). Nodes are kept reduced and normalized:

* a node whose two outgoing edges coincide is skipped;
* the outgoing weight of larger magnitude is exactly 1 (the low edge wins
  ties), the factor moves to the incoming edge;
* zero edges always point at the single terminal node, whose value is 1.

Unique-table and computed-table keys round weights to 12 decimals; stored
weights stay unrounded.
"""

from __future__ import annotations

import sys
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

__all__ = ["Node", "Tdd", "Session", "TERMINAL_VAR"]

TERMINAL_VAR = sys.maxsize
DIGITS = 12


class Node:
    __slots__ = ("id", "var", "w0", "n0", "w1", "n1")

    def __init__(self, id, var, w0=0j, n0=None, w1=0j, n1=None):
        self.id = id
        self.var = var
        self.w0 = w0
        self.n0 = n0
        self.w1 = w1
        self.n1 = n1

    @property
    def is_terminal(self) -> bool:
        return self.var == TERMINAL_VAR

    def __repr__(self):
        if self.is_terminal:
            return "Node(terminal)"
        return f"Node(id={self.id}, var={self.var})"


@dataclass(frozen=True, eq=False)
class Tdd:
    """A tensor: root edge plus the labels it is indexed by."""

    weight: complex
    node: Node
    index_set: frozenset
    session: "Session"

    @property
    def is_scalar(self) -> bool:
        return not self.index_set

    def scalar(self) -> complex:
        if self.index_set:
            raise ValueError(f"TDD still has open indices {sorted(self.index_set, key=str)}")
        return self.weight

    def node_count(self) -> int:
        return node_count(self.node)

    def evaluate(self, assignment: Mapping[Hashable, int]) -> complex:
        levels = {self.session.level(l): int(b) for l, b in assignment.items()}
        w, node = self.weight, self.node
        while not node.is_terminal:
            if levels[node.var]:
                w, node = w * node.w1, node.n1
            else:
                w, node = w * node.w0, node.n0
        return w

    def to_array(self, labels: Optional[Sequence[Hashable]] = None) -> np.ndarray:
        """Dense tensor with axes in ``labels`` order (default: level order)."""
        s = self.session
        if labels is None:
            labels = sorted(self.index_set, key=s.level)
        labels = list(labels)
        missing = set(self.index_set) - set(labels)
        if missing:
            raise ValueError(f"labels {missing} missing from requested axes")
        by_level = sorted(range(len(labels)), key=lambda i: s.level(labels[i]))
        lv = [s.level(labels[i]) for i in by_level]

        def dense(w, node, i):
            if i == len(lv):
                return np.asarray(w, dtype=complex)
            if node.var == lv[i]:
                lo = dense(w * node.w0, node.n0, i + 1)
                hi = dense(w * node.w1, node.n1, i + 1)
            else:
                lo = hi = dense(w, node, i + 1)
            return np.stack([lo, hi])

        arr = dense(self.weight, self.node, 0)
        return np.transpose(arr, np.argsort(by_level)) if labels else arr

    def same_as(self, other: "Tdd") -> bool:
        """Structural equality (canonical form makes it tensor equality)."""
        return (
            self.node is other.node
            and self.index_set == other.index_set
            and _wkey(self.weight) == _wkey(other.weight)
        )


def _wkey(w: complex) -> Tuple[float, float]:
    return (round(w.real, DIGITS) + 0.0, round(w.imag, DIGITS) + 0.0)


_ZERO_KEY = (0.0, 0.0)


def node_count(root: Node) -> int:
    """Non-terminal nodes reachable from ``root``."""
    seen = set()
    stack = [root]
    while stack:
        n = stack.pop()
        if n.var == TERMINAL_VAR or n.id in seen:
            continue
        seen.add(n.id)
        stack.append(n.n0)
        stack.append(n.n1)
    return len(seen)


class Session:
    """Unique table, computed table and index order for a family of TDDs.

    Not thread-safe; parallel callers need one session each.

    Parameters
    ----------
    order : iterable of labels, smallest level first.
    gc_threshold : unique-table size above which :meth:`maybe_collect`
        sweeps nodes unreachable from the given roots.
    """

    def __init__(self, order: Iterable[Hashable] = (), gc_threshold: int = 1 << 20):
        self.terminal = Node(0, TERMINAL_VAR)
        self.unique: Dict[tuple, Node] = {}
        self.computed: Dict[tuple, Tuple[complex, Node]] = {}
        self.gc_threshold = gc_threshold
        self._levels: Dict[Hashable, int] = {}
        self._sums: Dict[tuple, int] = {}
        self._sum_sets: List[frozenset] = []
        self._next_id = 1
        self.peak_nodes = 0
        self.lookups = 0
        self.hits = 0
        self.extend_order(order)

    # -- index order --------------------------------------------------------

    def extend_order(self, labels: Iterable[Hashable]) -> None:
        """Append labels to the global order (existing levels never change)."""
        for l in labels:
            if l not in self._levels:
                self._levels[l] = len(self._levels)

    def level(self, label: Hashable) -> int:
        try:
            return self._levels[label]
        except KeyError:
            raise KeyError(f"label {label!r} is not in the global index order") from None

    # -- tables ---------------------------------------------------------------

    def reset_computed_table(self) -> None:
        self.computed.clear()

    def note_peak(self, t: Tdd) -> int:
        c = t.node_count()
        if c > self.peak_nodes:
            self.peak_nodes = c
        return c

    def maybe_collect(self, roots: Iterable[Tdd]) -> bool:
        """Drop unique-table entries unreachable from ``roots`` once the table
        is over the threshold. The computed table is cleared as well."""
        if len(self.unique) <= self.gc_threshold:
            return False
        live = set()
        stack = [t.node for t in roots]
        while stack:
            n = stack.pop()
            if n.var == TERMINAL_VAR or n.id in live:
                continue
            live.add(n.id)
            stack.append(n.n0)
            stack.append(n.n1)
        self.unique = {k: n for k, n in self.unique.items() if n.id in live}
        self.computed.clear()
        return True

    # -- construction -------------------------------------------------------

    def _make(self, var: int, w0: complex, n0: Node, w1: complex, n1: Node) -> Tuple[complex, Node]:
        T = self.terminal
        k0 = (round(w0.real, DIGITS) + 0.0, round(w0.imag, DIGITS) + 0.0)
        k1 = (round(w1.real, DIGITS) + 0.0, round(w1.imag, DIGITS) + 0.0)
        if k0 == _ZERO_KEY:
            if k1 == _ZERO_KEY:
                return 0j, T
            w0, n0 = 0j, T
        elif k1 == _ZERO_KEY:
            w1, n1 = 0j, T
        elif n0 is n1 and k0 == k1:
            return w0, n0
        if round(abs(w1), DIGITS) > round(abs(w0), DIGITS):
            w = w1
            w0 = w0 / w1
            w1 = 1 + 0j
            k0 = (round(w0.real, DIGITS) + 0.0, round(w0.imag, DIGITS) + 0.0)
            key = (var, k0, n0.id, (1.0, 0.0), n1.id)
        else:
            w = w0
            w1 = w1 / w0
            w0 = 1 + 0j
            k1 = (round(w1.real, DIGITS) + 0.0, round(w1.imag, DIGITS) + 0.0)
            key = (var, (1.0, 0.0), n0.id, k1, n1.id)
        node = self.unique.get(key)
        if node is None:
            node = Node(self._next_id, var, w0, n0, w1, n1)
            self._next_id += 1
            self.unique[key] = node
        return w, node

    def zero(self, labels: Iterable[Hashable] = ()) -> Tdd:
        return Tdd(0j, self.terminal, frozenset(labels), self)

    def constant(self, value: complex) -> Tdd:
        value = complex(value)
        if _wkey(value) == _ZERO_KEY:
            return self.zero()
        return Tdd(value, self.terminal, frozenset(), self)

    def from_tensor(self, array, labels: Sequence[Hashable]) -> Tdd:
        """TDD of a dense tensor whose axes (each of size 2) carry ``labels``."""
        arr = np.asarray(array, dtype=complex)
        labels = list(labels)
        if arr.ndim != len(labels) or any(s != 2 for s in arr.shape):
            raise ValueError(f"tensor of shape {arr.shape} does not match {len(labels)} binary labels")
        if len(set(labels)) != len(labels):
            raise ValueError("repeated label on one tensor")
        levels = [self.level(l) for l in labels]
        perm = sorted(range(len(labels)), key=levels.__getitem__)
        arr = np.transpose(arr, perm)
        lv = [levels[i] for i in perm]
        make = self._make
        T = self.terminal

        def build(a, i):
            if i == len(lv):
                v = complex(a)
                if _wkey(v) == _ZERO_KEY:
                    return 0j, T
                return v, T
            w0, n0 = build(a[0], i + 1)
            w1, n1 = build(a[1], i + 1)
            return make(lv[i], w0, n0, w1, n1)

        w, n = build(arr, 0)
        return Tdd(w, n, frozenset(labels), self)

    # -- addition -------------------------------------------------------------

    def _add(self, w0: complex, n0: Node, w1: complex, n1: Node) -> Tuple[complex, Node]:
        if w0 == 0:
            return w1, n1
        if w1 == 0:
            return w0, n0
        if n0 is n1:
            w = w0 + w1
            if _wkey(w) == _ZERO_KEY:
                return 0j, self.terminal
            return w, n0
        if n0.id > n1.id:
            w0, n0, w1, n1 = w1, n1, w0, n0
        r = w1 / w0
        key = ("+", n0.id, n1.id, round(r.real, DIGITS) + 0.0, round(r.imag, DIGITS) + 0.0)
        self.lookups += 1
        hit = self.computed.get(key)
        if hit is not None:
            self.hits += 1
            return w0 * hit[0], hit[1]
        x = n0.var if n0.var < n1.var else n1.var
        if n0.var == x:
            a0w, a0n, a1w, a1n = n0.w0, n0.n0, n0.w1, n0.n1
        else:
            a0w, a0n, a1w, a1n = 1, n0, 1, n0
        if n1.var == x:
            b0w, b0n, b1w, b1n = r * n1.w0, n1.n0, r * n1.w1, n1.n1
        else:
            b0w, b0n, b1w, b1n = r, n1, r, n1
        lo = self._add(a0w, a0n, b0w, b0n)
        hi = self._add(a1w, a1n, b1w, b1n)
        res = self._make(x, lo[0], lo[1], hi[0], hi[1])
        self.computed[key] = res
        return w0 * res[0], res[1]

    def add(self, a: Tdd, b: Tdd) -> Tdd:
        """Element-wise sum; an index missing from one operand broadcasts."""
        w, n = self._add(a.weight, a.node, b.weight, b.node)
        return Tdd(w, n, a.index_set | b.index_set, self)

    def scale(self, a: Tdd, factor: complex) -> Tdd:
        w = a.weight * factor
        if _wkey(w) == _ZERO_KEY:
            return self.zero(a.index_set)
        return Tdd(w, a.node, a.index_set, self)

    # -- contraction --------------------------------------------------------

    def _sum_key(self, levels: Tuple[int, ...]) -> int:
        k = self._sums.get(levels)
        if k is None:
            k = self._sums[levels] = len(self._sum_sets)
            self._sum_sets.append(frozenset(levels))
        return k

    def _cont(self, n0: Node, n1: Node, S: Tuple[int, ...], SS: frozenset, skey: int):
        """Sum over indices in ``S`` at or below the top variable of the pair."""
        if n0.var == TERMINAL_VAR and n1.var == TERMINAL_VAR:
            return 1 + 0j, n0
        if n0.id > n1.id:
            n0, n1 = n1, n0
        key = ("*", n0.id, n1.id, skey)
        self.lookups += 1
        hit = self.computed.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        x = n0.var if n0.var < n1.var else n1.var
        if n0.var == x:
            a = ((n0.w0, n0.n0), (n0.w1, n0.n1))
        else:
            a = ((1, n0), (1, n0))
        if n1.var == x:
            b = ((n1.w0, n1.n0), (n1.w1, n1.n1))
        else:
            b = ((1, n1), (1, n1))
        lo_x = bisect_right(S, x)
        out = []
        for (aw, an), (bw, bn) in zip(a, b):
            w = aw * bw
            if w == 0:
                out.append((0j, self.terminal))
                continue
            cw, cn = self._cont(an, bn, S, SS, skey)
            if cw == 0:
                out.append((0j, self.terminal))
                continue
            top = an.var if an.var < bn.var else bn.var
            skipped = bisect_left(S, top) - lo_x
            if skipped:
                w *= 1 << skipped
            out.append((w * cw, cn))
        (w0, m0), (w1, m1) = out
        if x in SS:
            res = self._add(w0, m0, w1, m1)
        else:
            res = self._make(x, w0, m0, w1, m1)
        self.computed[key] = res
        return res

    def contract(self, a: Tdd, b: Tdd, shared: Iterable[Hashable]) -> Tdd:
        """Product of ``a`` and ``b`` summed over ``shared`` labels.

        Common labels not listed in ``shared`` stay open (element-wise product).
        """
        shared = frozenset(shared)
        S = tuple(sorted(self.level(l) for l in shared))
        index_set = (a.index_set | b.index_set) - shared
        w = a.weight * b.weight
        if w == 0:
            return self.zero(index_set)
        skey = self._sum_key(S)
        cw, cn = self._cont(a.node, b.node, S, self._sum_sets[skey], skey)
        if cw == 0:
            return self.zero(index_set)
        top = min(a.node.var, b.node.var)
        below = bisect_left(S, top)
        w = w * cw * (1 << below)
        return Tdd(w, cn, index_set, self)

    # -- inspection -----------------------------------------------------------

    def check_invariants(self, t: Tdd) -> None:
        """Raise AssertionError if ordering/reduction/normalization fails."""
        seen = set()
        stack = [t.node]
        while stack:
            n = stack.pop()
            if n.is_terminal or n.id in seen:
                continue
            seen.add(n.id)
            for w, c in ((n.w0, n.n0), (n.w1, n.n1)):
                assert c.var > n.var, "successor level not below parent"
                if w == 0:
                    assert c.is_terminal, "zero edge must point at the terminal"
            assert not (n.n0 is n.n1 and _wkey(n.w0) == _wkey(n.w1)), "redundant node"
            assert 1 + 0j in (n.w0, n.w1), "node not normalized"
            if n.w1 == 1 and n.w0 != 1:
                assert round(abs(n.w0), DIGITS) < 1, "tie must normalize the low edge"
            assert abs(n.w0) <= 1 + 1e-12 and abs(n.w1) <= 1 + 1e-12
            key = (n.var, _wkey(n.w0), n.n0.id, _wkey(n.w1), n.n1.id)
            assert self.unique.get(key) is n, "node missing from unique table"
            stack.extend((n.n0, n.n1))

    def to_dot(self, t: Tdd, name: str = "tdd") -> str:
        """Graphviz description of ``t`` (labels shown by name)."""
        inv = {v: k for k, v in self._levels.items()}

        def fmt(w):
            return f"{w.real:.4g}{w.imag:+.4g}i"

        lines = [f"digraph {name} {{", '  root [shape=point];']
        lines.append(f'  root -> n{t.node.id} [label="{fmt(t.weight)}"];')
        seen = set()
        stack = [t.node]
        while stack:
            n = stack.pop()
            if n.id in seen:
                continue
            seen.add(n.id)
            if n.is_terminal:
                lines.append(f'  n{n.id} [shape=box, label="1"];')
                continue
            lines.append(f'  n{n.id} [label="{inv.get(n.var, n.var)}"];')
            for bit, (w, c) in enumerate(((n.w0, n.n0), (n.w1, n.n1))):
                style = "dashed" if bit == 0 else "solid"
                lines.append(f'  n{n.id} -> n{c.id} [style={style}, label="{fmt(w)}"];')
                stack.append(c)
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dump_dot(self, t: Tdd, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_dot(t))
