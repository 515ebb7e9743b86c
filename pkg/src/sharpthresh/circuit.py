"""Bounded-depth Boolean circuits with unbounded fan-in AND/OR gates.

Negations live only at the input level (``NEG_INPUT`` gates). Gates are
stored in topological order with dense integer ids, so a child id is always
smaller than its parent's id. INPUT and NEG_INPUT gates carry a single
"child" which is an input *position*, not a gate id.

Evaluation is bit-parallel: a batch of inputs is packed into 64-bit words
per gate and each layer is reduced with ``np.bitwise_and.reduceat`` /
``np.bitwise_or.reduceat``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

KINDS = ("INPUT", "NEG_INPUT", "CONST0", "CONST1", "AND", "OR")
INPUT, NEG_INPUT, CONST0, CONST1, AND, OR = range(6)
_KIND_CODE = {name: code for code, name in enumerate(KINDS)}


class CircuitError(ValueError):
    """Raised for malformed circuits, streams, or mismatched arities."""

    def __init__(self, message: str, gate_id: int | None = None):
        if gate_id is not None:
            message = f"gate {gate_id}: {message}"
        super().__init__(message)
        self.gate_id = gate_id


@dataclass(frozen=True)
class Measure:
    size: int
    depth: int


class Circuit:
    """Immutable layered circuit.

    Parameters
    ----------
    input_width : int
        Number of input bits N.
    kinds : sequence of int
        Gate kind codes (see ``KINDS``), one per gate, in topological order.
    children : sequence of sequence of int
        Child ids per gate. For INPUT/NEG_INPUT this is ``[position]``;
        for constants it is empty.
    outputs : sequence of int
        Output gate ids.
    """

    def __init__(self, input_width: int, kinds, children, outputs):
        self.input_width = int(input_width)
        self.kinds = np.asarray(kinds, dtype=np.int8)
        lens = np.fromiter((len(c) for c in children), dtype=np.int64, count=len(children))
        self.indptr = np.zeros(len(children) + 1, dtype=np.int64)
        np.cumsum(lens, out=self.indptr[1:])
        if len(children):
            self.indices = np.fromiter(
                (x for c in children for x in c), dtype=np.int64, count=int(self.indptr[-1])
            )
        else:
            self.indices = np.zeros(0, dtype=np.int64)
        self.outputs = np.asarray(outputs, dtype=np.int64)
        self.kinds.setflags(write=False)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.outputs.setflags(write=False)
        self._validate()

    # -- structure ---------------------------------------------------------

    @property
    def num_gates(self) -> int:
        return len(self.kinds)

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def children(self, gate: int) -> np.ndarray:
        return self.indices[self.indptr[gate]:self.indptr[gate + 1]]

    def gate_records(self):
        """Yield ``(id, kind_name, children)`` triples in id order."""
        for g in range(self.num_gates):
            yield g, KINDS[self.kinds[g]], self.children(g).tolist()

    def _validate(self):
        if self.input_width < 1:
            raise CircuitError("input_width must be >= 1")
        if len(self.outputs) < 1:
            raise CircuitError("circuit needs at least one output")
        kinds = self.kinds
        if kinds.size and (kinds.min() < 0 or kinds.max() >= len(KINDS)):
            raise CircuitError("unknown gate kind")
        fanin = np.diff(self.indptr)
        gate_ids = np.arange(self.num_gates)
        owner = np.repeat(gate_ids, fanin)

        leaf = (kinds == INPUT) | (kinds == NEG_INPUT)
        bad = np.flatnonzero(leaf & (fanin != 1))
        if bad.size:
            raise CircuitError("input gate must reference exactly one position", int(bad[0]))
        const = (kinds == CONST0) | (kinds == CONST1)
        bad = np.flatnonzero(const & (fanin != 0))
        if bad.size:
            raise CircuitError("constant gate takes no children", int(bad[0]))
        logic = (kinds == AND) | (kinds == OR)
        bad = np.flatnonzero(logic & (fanin < 1))
        if bad.size:
            raise CircuitError("AND/OR gate needs fan-in >= 1", int(bad[0]))

        is_leaf_edge = leaf[owner]
        pos = self.indices[is_leaf_edge]
        if pos.size and (pos.min() < 0 or pos.max() >= self.input_width):
            g = int(owner[is_leaf_edge][np.flatnonzero((pos < 0) | (pos >= self.input_width))[0]])
            raise CircuitError("input position out of range", g)
        ch = self.indices[~is_leaf_edge]
        own = owner[~is_leaf_edge]
        bad = np.flatnonzero((ch < 0) | (ch >= own))
        if bad.size:
            raise CircuitError(f"child {int(ch[bad[0]])} does not precede its parent", int(own[bad[0]]))
        if self.outputs.min() < 0 or self.outputs.max() >= self.num_gates:
            raise CircuitError("dangling output id")

    # -- measurement -------------------------------------------------------

    @cached_property
    def levels(self) -> np.ndarray:
        """AND/OR depth of every gate (leaves and constants are level 0)."""
        lev = np.zeros(self.num_gates, dtype=np.int64)
        kinds, indptr, indices = self.kinds, self.indptr, self.indices
        for g in np.flatnonzero((kinds == AND) | (kinds == OR)):
            lev[g] = 1 + lev[indices[indptr[g]:indptr[g + 1]]].max()
        return lev

    def measure(self) -> Measure:
        size = int(np.count_nonzero((self.kinds == AND) | (self.kinds == OR)))
        depth = int(self.levels[self.outputs].max())
        return Measure(size=size, depth=depth)

    @property
    def size(self) -> int:
        return self.measure().size

    @property
    def depth(self) -> int:
        return self.measure().depth

    # -- evaluation --------------------------------------------------------

    @cached_property
    def _plan(self):
        kinds, lev = self.kinds, self.levels
        plan = []
        for level in range(1, int(lev.max(initial=0)) + 1):
            for kind, ufunc in ((AND, np.bitwise_and), (OR, np.bitwise_or)):
                gates = np.flatnonzero((lev == level) & (kinds == kind))
                if gates.size == 0:
                    continue
                starts, stops = self.indptr[gates], self.indptr[gates + 1]
                flat = np.concatenate([self.indices[a:b] for a, b in zip(starts, stops)])
                offsets = np.concatenate(([0], np.cumsum(stops - starts)[:-1]))
                plan.append((gates, flat, offsets, ufunc))
        return plan

    def evaluate_batch(self, inputs, chunk: int = 4096) -> np.ndarray:
        """Evaluate on a ``(batch, N)`` array of bits; returns ``(batch, outputs)`` bools."""
        x = np.asarray(inputs)
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise CircuitError(
                f"input width mismatch: expected (*, {self.input_width}), got {x.shape}"
            )
        out = np.empty((x.shape[0], self.num_outputs), dtype=bool)
        for a in range(0, x.shape[0], chunk):
            out[a:a + chunk] = self._evaluate_packed(x[a:a + chunk].astype(bool, copy=False))
        return out

    def _evaluate_packed(self, x: np.ndarray) -> np.ndarray:
        batch = x.shape[0]
        words = -(-batch // 64)
        packed = np.packbits(x, axis=0, bitorder="little")
        pad = words * 8 - packed.shape[0]
        if pad:
            packed = np.concatenate([packed, np.zeros((pad, x.shape[1]), np.uint8)])
        inp = np.ascontiguousarray(packed.T).view(np.uint64)  # (N, words)

        vals = np.zeros((self.num_gates, words), dtype=np.uint64)
        kinds = self.kinds
        g_in = np.flatnonzero(kinds == INPUT)
        if g_in.size:
            vals[g_in] = inp[self.indices[self.indptr[g_in]]]
        g_neg = np.flatnonzero(kinds == NEG_INPUT)
        if g_neg.size:
            vals[g_neg] = ~inp[self.indices[self.indptr[g_neg]]]
        vals[kinds == CONST1] = np.uint64(0xFFFFFFFFFFFFFFFF)
        for gates, flat, offsets, ufunc in self._plan:
            vals[gates] = ufunc.reduceat(vals[flat], offsets, axis=0)

        res = vals[self.outputs]  # (outputs, words)
        bits = np.unpackbits(res.view(np.uint8), axis=1, bitorder="little")[:, :batch]
        return bits.T.astype(bool)

    def evaluate(self, bits: Sequence[int]) -> np.ndarray:
        """Evaluate on one input vector; returns one bit per output."""
        x = np.asarray(bits)
        if x.ndim != 1:
            raise CircuitError("evaluate expects a single bit-vector")
        return self.evaluate_batch(x[None, :])[0].astype(np.uint8)

    # -- misc --------------------------------------------------------------

    def __repr__(self):
        m = self.measure()
        return (f"Circuit(N={self.input_width}, gates={self.num_gates}, "
                f"outputs={self.num_outputs}, size={m.size}, depth={m.depth})")

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.input_width == other.input_width
                and np.array_equal(self.kinds, other.kinds)
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.outputs, other.outputs))

    __hash__ = None


def evaluate(circuit: Circuit, bits) -> np.ndarray:
    return circuit.evaluate(bits)


def measure(circuit: Circuit) -> Measure:
    return circuit.measure()


class CircuitBuilder:
    """Incremental construction helper; hash-conses leaves and constants."""

    def __init__(self, input_width: int):
        self.input_width = input_width
        self.kinds: list[int] = []
        self.children: list[list[int]] = []
        self._leaf: dict[tuple[int, int], int] = {}

    def _add(self, kind, children):
        self.kinds.append(kind)
        self.children.append(children)
        return len(self.kinds) - 1

    def _leaf_gate(self, kind, pos):
        key = (kind, pos)
        if key not in self._leaf:
            if kind in (INPUT, NEG_INPUT) and not 0 <= pos < self.input_width:
                raise CircuitError(f"input position {pos} out of range")
            self._leaf[key] = self._add(kind, [pos] if kind in (INPUT, NEG_INPUT) else [])
        return self._leaf[key]

    def input(self, i: int) -> int:
        return self._leaf_gate(INPUT, int(i))

    def neg(self, i: int) -> int:
        return self._leaf_gate(NEG_INPUT, int(i))

    def const(self, value: int) -> int:
        return self._leaf_gate(CONST1 if value else CONST0, -1)

    def and_(self, children: Iterable[int]) -> int:
        return self._add(AND, [int(c) for c in children])

    def or_(self, children: Iterable[int]) -> int:
        return self._add(OR, [int(c) for c in children])

    def embed(self, circuit: Circuit, wiring: Sequence[int], neg_wiring: Sequence[int] | None = None) -> list[int]:
        """Copy ``circuit`` in, feeding its input j from gate ``wiring[j]``.

        ``neg_wiring[j]`` must supply the complement of ``wiring[j]`` when the
        circuit uses NEG_INPUT j. Returns the new ids of its outputs.
        """
        remap = np.empty(circuit.num_gates, dtype=np.int64)
        for g, kind, ch in circuit.gate_records():
            code = _KIND_CODE[kind]
            if code == INPUT:
                remap[g] = wiring[ch[0]]
            elif code == NEG_INPUT:
                if neg_wiring is None or neg_wiring[ch[0]] is None:
                    raise CircuitError(f"no complement available for input {ch[0]}", g)
                remap[g] = neg_wiring[ch[0]]
            elif code in (CONST0, CONST1):
                remap[g] = self.const(code == CONST1)
            else:
                remap[g] = self._add(code, remap[ch].tolist())
        return remap[circuit.outputs].tolist()

    def build(self, outputs: Sequence[int]) -> Circuit:
        return Circuit(self.input_width, self.kinds, self.children, list(outputs))


def identity(n: int) -> Circuit:
    """The wiring circuit whose i-th output is input i."""
    b = CircuitBuilder(n)
    return b.build([b.input(i) for i in range(n)])


def dual(circuit: Circuit) -> Circuit:
    """De Morgan dual: computes the bitwise complement of every output."""
    swap = {INPUT: NEG_INPUT, NEG_INPUT: INPUT, CONST0: CONST1, CONST1: CONST0, AND: OR, OR: AND}
    kinds = [swap[int(k)] for k in circuit.kinds]
    children = [circuit.children(g).tolist() for g in range(circuit.num_gates)]
    return Circuit(circuit.input_width, kinds, children, circuit.outputs.tolist())


def _output_cone(circuit: Circuit, roots) -> np.ndarray:
    mark = np.zeros(circuit.num_gates, dtype=bool)
    mark[np.asarray(roots, dtype=np.int64)] = True
    kinds = circuit.kinds
    for g in range(circuit.num_gates - 1, -1, -1):
        if mark[g] and kinds[g] in (AND, OR):
            mark[circuit.children(g)] = True
    return mark


def compose(outer: Circuit, inner: Circuit) -> Circuit:
    """Feed the outputs of ``inner`` into the inputs of ``outer``.

    When ``outer`` negates one of its inputs, the De Morgan dual of the
    corresponding output cone of ``inner`` is added, so size then exceeds
    ``size(outer) + size(inner)`` by the size of that dual cone.
    """
    if inner.num_outputs != outer.input_width:
        raise CircuitError(
            f"arity mismatch: inner has {inner.num_outputs} outputs, outer expects {outer.input_width}"
        )
    b = CircuitBuilder(inner.input_width)
    wiring = b.embed(inner, [b.input(i) for i in range(inner.input_width)],
                     [b.neg(i) for i in range(inner.input_width)])
    negated = sorted({int(ch[0]) for _, k, ch in outer.gate_records() if k == "NEG_INPUT"})
    neg_wiring: list[int | None] = [None] * outer.input_width
    if negated:
        inv = dual(inner)
        roots = inv.outputs[negated]
        cone = _output_cone(inv, roots)
        sub_ids = np.flatnonzero(cone)
        renum = {int(g): i for i, g in enumerate(sub_ids)}
        kinds, children = [], []
        for g in sub_ids:
            k = int(inv.kinds[g])
            ch = inv.children(g).tolist()
            kinds.append(k)
            children.append(ch if k in (INPUT, NEG_INPUT) else [renum[c] for c in ch])
        sub = Circuit(inv.input_width, kinds, children, [renum[int(r)] for r in roots])
        outs = b.embed(sub, [b.input(i) for i in range(inner.input_width)],
                       [b.neg(i) for i in range(inner.input_width)])
        for j, g in zip(negated, outs):
            neg_wiring[j] = g
    outputs = b.embed(outer, wiring, neg_wiring)
    return b.build(outputs)


def negate_inputs(circuit: Circuit) -> Circuit:
    """Swap INPUT and NEG_INPUT: the result on x equals the original on NOT x."""
    swap = {INPUT: NEG_INPUT, NEG_INPUT: INPUT}
    kinds = [swap.get(int(k), int(k)) for k in circuit.kinds]
    children = [circuit.children(g).tolist() for g in range(circuit.num_gates)]
    return Circuit(circuit.input_width, kinds, children, circuit.outputs.tolist())


# -- serialization ---------------------------------------------------------

def to_dict(circuit: Circuit) -> dict:
    return {
        "input_width": circuit.input_width,
        "outputs": circuit.outputs.tolist(),
        "gates": [{"id": g, "kind": k, "children": ch} for g, k, ch in circuit.gate_records()],
    }


def serialize(circuit: Circuit, meta: dict | None = None) -> bytes:
    """Canonical JSON text: fixed key order, one gate record per line.

    ``meta`` is an optional provenance record written first and ignored on load.
    """
    head_doc = {} if meta is None else {"meta": meta}
    head_doc.update(input_width=circuit.input_width, outputs=circuit.outputs.tolist())
    head = json.dumps(head_doc, sort_keys=False)
    lines = [head[:-1] + ', "gates": [']
    records = [
        json.dumps({"id": g, "kind": k, "children": ch}, separators=(", ", ": "))
        for g, k, ch in circuit.gate_records()
    ]
    lines.append(",\n".join("  " + r for r in records))
    lines.append("]}\n")
    return "\n".join(lines).encode("utf-8")


def deserialize(data: bytes | str) -> Circuit:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"malformed circuit stream: {exc}") from None
    if not isinstance(doc, dict) or set(doc) - {"meta"} != {"input_width", "outputs", "gates"}:
        raise CircuitError("circuit document needs exactly input_width, outputs, gates (plus optional meta)")
    kinds, children = [], []
    for expected, rec in enumerate(doc["gates"]):
        try:
            gid, kind, ch = rec["id"], rec["kind"], rec["children"]
        except (KeyError, TypeError):
            raise CircuitError("gate record needs id, kind, children", expected) from None
        if gid != expected:
            raise CircuitError(f"gate ids must be dense and ordered (expected {expected})", gid)
        if kind not in _KIND_CODE:
            raise CircuitError(f"unknown kind {kind!r}", gid)
        if not isinstance(ch, list) or not all(isinstance(c, int) for c in ch):
            raise CircuitError("children must be a list of integers", gid)
        kinds.append(_KIND_CODE[kind])
        children.append(ch)
    width, outputs = doc["input_width"], doc["outputs"]
    if not isinstance(width, int) or not isinstance(outputs, list):
        raise CircuitError("input_width must be an integer and outputs a list")
    return Circuit(width, kinds, children, outputs)


def random_layered(n_inputs: int, layers: Sequence[int], fanin: int, n_outputs: int = 1,
                   seed: int = 0) -> Circuit:
    """Random alternating AND/OR layered circuit, mainly for stress tests."""
    rng = np.random.default_rng(seed)
    b = CircuitBuilder(n_inputs)
    prev = [b.input(i) for i in range(n_inputs)] + [b.neg(i) for i in range(n_inputs)]
    for depth, width in enumerate(layers):
        make = b.and_ if depth % 2 == 0 else b.or_
        picks = rng.integers(0, len(prev), size=(width, fanin))
        prev = [make(sorted({prev[j] for j in row})) for row in picks]
    return b.build(prev[:n_outputs])
