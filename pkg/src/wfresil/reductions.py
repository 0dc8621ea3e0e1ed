"""Hardness-construction instance generators with brute-force source oracles.

Two constructions:

* dynamic-Hamiltonian-circuit instances become static-resiliency instances
  (vertex/edge steps, user copies, incidence and distinctness entailments);
* bounded-radius instances over circuit-represented graphs become one-shot
  resiliency instances (bit/gate steps, boolean-valued users, gate-table
  constraints, an output pin, and an ordering gadget on the adversary-priced
  user class).

The brute-force deciders for the source problems are deliberately
independent of the game oracles so the two can cross-validate each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Mapping

from .circuits import BooleanCircuit, build_reach_circuit, eval_circuit
from .model import (
    Entailment,
    GateSemantics,
    Relation,
    WorkflowPolicy,
    validate_policy,
)

Edge = tuple[str, str]  # canonical: lexicographically sorted endpoints


class TooLarge(ValueError):
    """Instance exceeds the desk-scale cap of a brute-force decider."""


def edge(a: str, b: str) -> Edge:
    if a == b:
        raise ValueError(f"loop edge on {a!r} not allowed in a simple graph")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph without loops or multi-edges."""

    vertices: tuple[str, ...]
    edges: frozenset[Edge]

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertices")
        for a, b in self.edges:
            if a == b:
                raise ValueError("loops not allowed")
            if a not in vs or b not in vs:
                raise ValueError(f"edge ({a}, {b}) mentions unknown vertex")
            if (a, b) != edge(a, b):
                raise ValueError("edges must be canonically ordered pairs")


def parse_graph(text: str) -> SimpleGraph:
    vertices: list[str] = []
    edges: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vertices:"):
            vertices.extend(line[len("vertices:") :].split())
        elif line.startswith("edge:"):
            parts = line[len("edge:") :].split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: edge expects two vertices")
            edges.add(edge(*parts))
        else:
            raise ValueError(f"line {lineno}: unknown clause")
    return SimpleGraph(tuple(vertices), frozenset(edges))


def parse_edge_list(spec: str, g: SimpleGraph) -> frozenset[Edge]:
    """Parse ``a-b,c-d`` into a set of edges of ``g``."""

    out: set[Edge] = set()
    if not spec.strip():
        return frozenset()
    for part in spec.split(","):
        ends = part.strip().split("-")
        if len(ends) != 2:
            raise ValueError(f"bad edge spec {part!r}")
        e = edge(*ends)
        if e not in g.edges:
            raise ValueError(f"edge {part!r} not in the graph")
        out.add(e)
    return frozenset(out)


def hamiltonian_permutations(g: SimpleGraph) -> list[tuple[str, ...]]:
    """Vertex orderings that traverse an edge between every consecutive pair
    and from the last vertex back to the first (exhaustive permutation check)."""

    def ok(seq: tuple[str, ...]) -> bool:
        m = len(seq)
        return all(edge(seq[i], seq[(i + 1) % m]) in g.edges for i in range(m))

    if len(g.vertices) == 1:
        return []  # the wrap-around would need a loop
    return [seq for seq in permutations(g.vertices) if ok(seq)]


def is_hamiltonian(g: SimpleGraph) -> bool:
    if len(g.vertices) <= 1:
        return False
    first = g.vertices[0]
    for rest in permutations(g.vertices[1:]):
        seq = (first,) + rest
        if all(edge(seq[i], seq[(i + 1) % len(seq)]) in g.edges for i in range(len(seq))):
            return True
    return False


def dhc_decide_bruteforce(g: SimpleGraph, b: frozenset[Edge]) -> bool:
    """Does every deletion D of at most |B|/2 edges of B leave the graph
    Hamiltonian?  Exhaustive over D and over vertex permutations."""

    if len(g.vertices) > 8:
        raise TooLarge("brute force capped at 8 vertices")
    if not b <= g.edges:
        raise ValueError("B must be a subset of the edges")
    bound = len(b) // 2
    blist = sorted(b)
    for size in range(bound + 1):
        for d in combinations(blist, size):
            if not is_hamiltonian(SimpleGraph(g.vertices, g.edges - set(d))):
                return False
    return True


@dataclass(frozen=True)
class ReductionOutput:
    policy: WorkflowPolicy
    budget: int
    provenance: Mapping[str, str]


def _vertex_user(v: str, i: int) -> str:
    return f"v_{v}_{i}"


def _edge_user(e: Edge, i: int) -> str:
    return f"e_{e[0]}_{e[1]}_{i}"


def dhc_to_srcp(g: SimpleGraph, b: frozenset[Edge]) -> ReductionOutput:
    """Static-resiliency instance whose resiliency answer matches the
    dynamic-Hamiltonian-circuit answer for (g, b).

    2N steps model the positions of a length-N circuit: vertex-position
    steps and edge-position steps, unordered.  Every vertex and every edge
    outside ``b`` gets t+1 user copies (beyond the adversary's reach); edges
    in ``b`` get a single copy.  Incidence entailments make a valid plan
    trace a closed walk; distinctness entailments across vertex positions
    make the walk Hamiltonian.
    """

    if not b <= g.edges:
        raise ValueError("B must be a subset of the edges")
    n = len(g.vertices)
    t = len(b) // 2
    sv = [f"sv{i}" for i in range(1, n + 1)]
    se = [f"se{i}" for i in range(1, n + 1)]

    edges = sorted(g.edges)
    uv: dict[str, list[str]] = {
        v: [_vertex_user(v, i) for i in range(1, t + 2)] for v in g.vertices
    }
    ue: dict[Edge, list[str]] = {
        e: [_edge_user(e, i) for i in range(1, (2 if e in b else t + 2))]
        for e in edges
    }
    vertex_users = [u for v in g.vertices for u in uv[v]]
    edge_users = [u for e in edges for u in ue[e]]
    users = vertex_users + edge_users

    auth = [(s, u) for s in sv for u in vertex_users] + [
        (s, u) for s in se for u in edge_users
    ]

    incident_pairs = set()
    for e in edges:
        for eu in ue[e]:
            for v in e:
                for vu in uv[v]:
                    incident_pairs.add((eu, vu))
    incident = Relation("incident", frozenset(incident_pairs))
    incident_inv = Relation(
        "incident_inv", frozenset((b2, a2) for (a2, b2) in incident_pairs)
    )
    distinct = Relation(
        "distinct",
        frozenset(
            (u1, u2)
            for v1 in g.vertices
            for v2 in g.vertices
            if v1 != v2
            for u1 in uv[v1]
            for u2 in uv[v2]
        ),
    )

    constraints = []
    constraints += [
        Entailment(incident_inv, (sv[i],), (se[i],)) for i in range(n)
    ]
    constraints += [
        Entailment(incident, (se[i],), (sv[i + 1],)) for i in range(n - 1)
    ]
    if n >= 1:
        constraints.append(Entailment(incident, (se[n - 1],), (sv[0],)))
    constraints += [
        Entailment(distinct, (sv[i],), (sv[j],))
        for i in range(n)
        for j in range(i + 1, n)
    ]

    policy = validate_policy(
        WorkflowPolicy(
            steps=tuple(sv + se),
            order=frozenset(),
            users=tuple(users),
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )
    provenance = {f"sv{i + 1}": f"circuit position {i + 1} (vertex)" for i in range(n)}
    provenance |= {f"se{i + 1}": f"circuit position {i + 1} (edge)" for i in range(n)}
    for v in g.vertices:
        for i, u in enumerate(uv[v], start=1):
            provenance[u] = f"vertex {v} copy {i}"
    for e in edges:
        for i, u in enumerate(ue[e], start=1):
            tag = "in B" if e in b else "outside B"
            provenance[u] = f"edge {e[0]}-{e[1]} copy {i} ({tag})"
    return ReductionOutput(policy=policy, budget=t, provenance=provenance)


def plan_vertex_sequences(policy_plans, provenance) -> set[tuple[str, ...]]:
    """Map valid plans of a DHC reduction back to vertex orderings."""

    out = set()
    for plan in policy_plans:
        seq = []
        i = 1
        while f"sv{i}" in plan:
            desc = provenance[plan[f"sv{i}"]]
            seq.append(desc.split()[1])
            i += 1
        out.add(tuple(seq))
    return out


# ---------------------------------------------------------------------------
# Bounded radius of a succinctly represented graph
# ---------------------------------------------------------------------------


def _bits(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def succrad_decide_bruteforce(bc_g: BooleanCircuit, n: int, k: int) -> bool:
    """Is the radius of the circuit-represented graph at most k?  The
    adjacency matrix is materialized via circuit evaluation and eccentricities
    come from breadth-first search."""

    if n > 3:
        raise TooLarge("brute force capped at n = 3 (8 vertices)")
    if len(bc_g.inputs) != 2 * n:
        raise ValueError(f"adjacency circuit must have {2 * n} inputs")
    size = 1 << n
    adj = [
        [
            bool(
                eval_circuit(
                    bc_g,
                    dict(zip(bc_g.inputs, _bits(x, n) + _bits(y, n))),
                )
            )
            for y in range(size)
        ]
        for x in range(size)
    ]
    best = None
    for src in range(size):
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for x in frontier:
                for y in range(size):
                    if adj[x][y] and y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        if len(dist) == size:
            ecc = max(dist.values())
            best = ecc if best is None else min(best, ecc)
    return best is not None and best <= k


def succrad_to_orcp(bc_g: BooleanCircuit, n: int, k: int) -> ReductionOutput:
    """One-shot-resiliency instance capturing the radius-at-most-k question.

    Steps hold the bits flowing through the reachability circuit, staged so
    the source vector comes first, then the target vector, then the witness
    vectors, the gates, and one output step.  Boolean values are users: the
    plentiful variant (n+1 copies per value) for source/witness/gate steps,
    and a scarce indexed variant (n copies per value) for the target vector.
    With budget n, a strike can wipe n scarce users, and the ordering gadget
    linearizes the survivors into the target bit vector: the adversary picks
    the target, which is exactly the universal quantifier in the middle.
    """

    reach = build_reach_circuit(bc_g, n, k)
    s_x = [f"x{i}" for i in range(1, n + 1)]
    s_y = [f"y{i}" for i in range(1, n + 1)]
    s_z = [f"z{j}_{i}" for j in range(1, k) for i in range(1, n + 1)]
    s_gate = [g.gid for g in reach.gates]
    out = "out"
    steps = s_x + s_y + s_z + s_gate + [out]

    u_bot = [f"bot_{i}" for i in range(1, n + 2)]
    u_top = [f"top_{i}" for i in range(1, n + 2)]
    u_star = [f"{'f' if i % 2 else 't'}_{i}" for i in range(1, 2 * n + 1)]
    users = u_bot + u_top + u_star
    u_bool = u_bot + u_top
    true_users = frozenset(u_top) | frozenset(u for u in u_star if u.startswith("t"))
    false_users = frozenset(u_bot) | frozenset(u for u in u_star if u.startswith("f"))

    auth = [(s, u) for s in s_x + s_z + s_gate for u in u_bool]
    auth += [(out, u) for u in u_top]
    auth += [(s, u) for s in s_y for u in u_star]

    order = frozenset(zip(steps, steps[1:]))  # staged chain

    constraints: list = []
    for g in reach.gates:
        kind = g.kind.lower()
        operands = g.operands
        if kind == "input":
            kind = "id"
        elif kind in ("and", "or") and len(set(operands)) == 1:
            kind = "id"  # x AND x == x OR x == x
            operands = operands[:1]
        constraints.append(
            GateSemantics(
                kind=kind,
                out_step=g.gid,
                in_steps=operands,
                true_users=true_users,
                false_users=false_users,
            )
        )
    equal = Relation(
        "equal",
        frozenset(
            (u1, u2)
            for u1 in users
            for u2 in users
            if (u1 in true_users) == (u2 in true_users)
        ),
    )
    constraints.append(Entailment(equal, (out,), (reach.output,)))
    star_index = {u: int(u.split("_")[1]) for u in u_star}
    order_rel = Relation(
        "order",
        frozenset(
            (u1, u2) for u1 in u_star for u2 in u_star if star_index[u1] < star_index[u2]
        ),
    )
    constraints += [
        Entailment(order_rel, (s_y[i],), (s_y[i + 1],)) for i in range(n - 1)
    ]

    policy = validate_policy(
        WorkflowPolicy(
            steps=tuple(steps),
            order=order,
            users=tuple(users),
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )
    provenance = {s: f"source bit {s}" for s in s_x}
    provenance |= {s: f"target bit {s}" for s in s_y}
    provenance |= {s: f"witness bit {s}" for s in s_z}
    provenance |= {
        g.gid: f"gate {g.gid} = {g.kind}({', '.join(g.operands)})" for g in reach.gates
    }
    provenance[out] = "circuit output pin (forced true)"
    provenance |= {u: f"false value, plentiful copy {i}" for i, u in enumerate(u_bot, 1)}
    provenance |= {u: f"true value, plentiful copy {i}" for i, u in enumerate(u_top, 1)}
    provenance |= {
        u: f"{'true' if u.startswith('t') else 'false'} value, scarce index {star_index[u]}"
        for u in u_star
    }
    provenance["__solver__"] = (
        "gate constraints exceed the program encoders' fragment; decide with "
        "the game oracles"
    )
    return ReductionOutput(policy=policy, budget=n, provenance=provenance)
