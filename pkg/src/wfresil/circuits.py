"""Boolean circuits for succinctly represented directed graphs.

A circuit is a list of topologically ordered gates over named input bits.
The file format is line oriented:

    inputs: <id>*
    gate <id> = AND <a> <b> | OR <a> <b> | NOT <a> | CONST0 | CONST1 | INPUT <input-id>
    output: <id>
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

GATE_ARITY = {"AND": 2, "OR": 2, "NOT": 1, "INPUT": 1, "CONST0": 0, "CONST1": 0}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    gid: str
    kind: str
    operands: tuple[str, ...]


@dataclass(frozen=True)
class BooleanCircuit:
    inputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    output: str


def validate_circuit(c: BooleanCircuit) -> BooleanCircuit:
    known = set(c.inputs)
    if len(known) != len(c.inputs):
        raise CircuitError("duplicate input names")
    for g in c.gates:
        if g.kind not in GATE_ARITY:
            raise CircuitError(f"unknown gate kind {g.kind!r}")
        if len(g.operands) != GATE_ARITY[g.kind]:
            raise CircuitError(f"gate {g.gid} has wrong arity for {g.kind}")
        if g.gid in known:
            raise CircuitError(f"duplicate wire name {g.gid!r}")
        if g.kind == "INPUT":
            if g.operands[0] not in c.inputs:
                raise CircuitError(f"gate {g.gid} references unknown input")
        else:
            for op in g.operands:
                if op not in known:
                    raise CircuitError(f"gate {g.gid} operand {op!r} does not precede it")
        known.add(g.gid)
    if c.output not in {g.gid for g in c.gates}:
        raise CircuitError("output must name a gate")
    return c


def eval_circuit(c: BooleanCircuit, bits: Mapping[str, int]) -> int:
    """Gate-by-gate evaluation; ``bits`` must cover every input."""

    values: dict[str, int] = {name: 1 if bits[name] else 0 for name in c.inputs}
    for g in c.gates:
        if g.kind == "AND":
            v = values[g.operands[0]] & values[g.operands[1]]
        elif g.kind == "OR":
            v = values[g.operands[0]] | values[g.operands[1]]
        elif g.kind == "NOT":
            v = 1 - values[g.operands[0]]
        elif g.kind == "INPUT":
            v = values[g.operands[0]]
        elif g.kind == "CONST0":
            v = 0
        else:
            v = 1
        values[g.gid] = v
    return values[c.output]


def circuit_size(c: BooleanCircuit) -> int:
    return len(c.gates)


def parse_circuit(text: str) -> BooleanCircuit:
    inputs: list[str] = []
    gates: list[Gate] = []
    output: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("inputs:"):
            inputs.extend(line[len("inputs:") :].split())
        elif line.startswith("output:"):
            parts = line[len("output:") :].split()
            if len(parts) != 1:
                raise CircuitError(f"line {lineno}: output expects one gate id")
            output = parts[0]
        elif line.startswith("gate "):
            rest = line[len("gate ") :]
            if "=" not in rest:
                raise CircuitError(f"line {lineno}: expected 'gate <id> = <kind> ...'")
            gid, rhs = rest.split("=", 1)
            parts = rhs.split()
            if not parts:
                raise CircuitError(f"line {lineno}: missing gate kind")
            gates.append(Gate(gid.strip(), parts[0], tuple(parts[1:])))
        else:
            raise CircuitError(f"line {lineno}: unknown clause {line.split()[0]!r}")
    if output is None:
        raise CircuitError("missing output: clause")
    return validate_circuit(BooleanCircuit(tuple(inputs), tuple(gates), output))


def format_circuit(c: BooleanCircuit) -> str:
    lines = ["inputs: " + " ".join(c.inputs)]
    for g in c.gates:
        rhs = " ".join((g.kind,) + g.operands)
        lines.append(f"gate {g.gid} = {rhs}")
    lines.append(f"output: {c.output}")
    return "\n".join(lines) + "\n"


class CircuitBuilder:
    """Grows a circuit gate by gate; used to compose reachability circuits."""

    def __init__(self, inputs: tuple[str, ...]):
        self.inputs = inputs
        self.gates: list[Gate] = []
        self._n = 0

    def gate(self, kind: str, *operands: str) -> str:
        self._n += 1
        gid = f"g{self._n}"
        self.gates.append(Gate(gid, kind, operands))
        return gid

    def instantiate(self, sub: BooleanCircuit, args: tuple[str, ...]) -> str:
        """Inline a copy of ``sub`` applied to the given wires; INPUT gates
        alias away so the copy adds only logic gates."""

        if len(args) != len(sub.inputs):
            raise CircuitError("instantiation arity mismatch")
        wire: dict[str, str] = dict(zip(sub.inputs, args))
        for g in sub.gates:
            if g.kind == "INPUT":
                wire[g.gid] = wire[g.operands[0]]
            else:
                wire[g.gid] = self.gate(g.kind, *(wire[o] for o in g.operands))
        return wire[sub.output]

    def finish(self, output: str) -> BooleanCircuit:
        if not any(g.gid == output for g in self.gates):
            output = self.gate("INPUT", output)
            return self.finish(output)
        return validate_circuit(
            BooleanCircuit(self.inputs, tuple(self.gates), output)
        )


def equality_wire(b: CircuitBuilder, xs: tuple[str, ...], ys: tuple[str, ...]) -> str:
    """Wire computing bit-vector equality of xs and ys."""

    bits = []
    for x, y in zip(xs, ys):
        both = b.gate("AND", x, y)
        nx = b.gate("NOT", x)
        ny = b.gate("NOT", y)
        neither = b.gate("AND", nx, ny)
        bits.append(b.gate("OR", both, neither))
    acc = bits[0]
    for w in bits[1:]:
        acc = b.gate("AND", acc, w)
    return acc


def build_reach_circuit(bc_g: BooleanCircuit, n: int, k: int) -> BooleanCircuit:
    """Reachability within ``k`` hops for the adjacency circuit ``bc_g``.

    The result takes (k+1) n-bit vectors x, y, z^1 .. z^{k-1}, and is true
    when y equals x, or is adjacent to x, or is reached by a walk through
    z^1 .. z^i for some i < k.
    """

    if len(bc_g.inputs) != 2 * n:
        raise CircuitError(f"adjacency circuit must have {2 * n} inputs")
    if k < 2:
        raise CircuitError("radius bound k must be at least 2")
    xs = tuple(f"x{i}" for i in range(1, n + 1))
    ys = tuple(f"y{i}" for i in range(1, n + 1))
    zs = [tuple(f"z{j}_{i}" for i in range(1, n + 1)) for j in range(1, k)]
    b = CircuitBuilder(xs + ys + tuple(w for vec in zs for w in vec))

    disjuncts = [equality_wire(b, xs, ys), b.instantiate(bc_g, xs + ys)]
    for i in range(1, k):
        hops = [xs] + zs[:i] + [ys]
        legs = [
            b.instantiate(bc_g, hops[j] + hops[j + 1]) for j in range(len(hops) - 1)
        ]
        acc = legs[0]
        for leg in legs[1:]:
            acc = b.gate("AND", acc, leg)
        disjuncts.append(acc)
    acc = disjuncts[0]
    for d in disjuncts[1:]:
        acc = b.gate("OR", acc, d)
    return b.finish(acc)
