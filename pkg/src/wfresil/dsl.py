"""Textual policy format: one clause per line, `#` comments.

Grammar (whitespace-insensitive within a line, `;`-separated tuples):

    steps: <id>*
    order: <id> < <id>
    users: <id>*
    auth: (<step> <user>)(; <step> <user>)*
    relation <name>: (<user> <user>)(; <user> <user>)*
    constraint: sod <s1> <s2>
    constraint: bod <s1> <s2>
    constraint: entail <rel> { <step>+ } { <step>+ }
    constraint: allow { <step>+ } (<user>+)(; <user>+)*
    budget: <t>

Parsing is total: every input yields either a :class:`PolicyDocument` or a
positioned :class:`DslSyntaxError`; semantic problems propagate from
``validate_policy``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    BoD,
    Constraint,
    Entailment,
    Extensional,
    PolicyError,
    Relation,
    SoD,
    WorkflowPolicy,
    validate_policy,
)

_ID = re.compile(r"[A-Za-z0-9_]+\Z")


class DslSyntaxError(ValueError):
    """Positioned syntax error in policy text."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class PolicyDocument:
    """A validated policy plus its named relations and optional default budget."""

    policy: WorkflowPolicy
    named_relations: tuple[Relation, ...]
    default_budget: int | None = None


class _LineScanner:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.pos = 0

    def error(self, message: str) -> DslSyntaxError:
        return DslSyntaxError(self.lineno, self.pos + 1, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"expected {literal!r}")
        self.pos += len(literal)

    def try_take(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        self.skip_ws()
        m = re.match(r"[A-Za-z0-9_]+", self.text[self.pos :])
        if not m:
            raise self.error(f"expected {what}")
        self.pos += m.end()
        return m.group()

    def idents(self) -> list[str]:
        out = []
        while True:
            self.skip_ws()
            m = re.match(r"[A-Za-z0-9_]+", self.text[self.pos :])
            if not m:
                return out
            self.pos += m.end()
            out.append(m.group())

    def integer(self) -> int:
        tok = self.ident("integer")
        if not tok.isdigit():
            raise self.error(f"expected integer, got {tok!r}")
        return int(tok)


def _idset(sc: _LineScanner) -> tuple[str, ...]:
    sc.take("{")
    ids = sc.idents()
    sc.take("}")
    if not ids:
        raise sc.error("expected at least one identifier in { }")
    return tuple(ids)


def parse_policy(text: str) -> PolicyDocument:
    """Parse policy text into a document; validates via the core model."""

    steps: list[str] = []
    users: list[str] = []
    order: list[tuple[str, str]] = []
    auth: list[tuple[str, str]] = []
    relations: dict[str, Relation] = {}
    relation_order: list[str] = []
    constraints: list[Constraint] = []
    budget: int | None = None
    saw_steps = saw_users = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        sc = _LineScanner(line, lineno)
        head = sc.ident("clause keyword")
        if head == "steps":
            sc.take(":")
            steps.extend(sc.idents())
            saw_steps = True
        elif head == "users":
            sc.take(":")
            users.extend(sc.idents())
            saw_users = True
        elif head == "order":
            sc.take(":")
            a = sc.ident("step")
            sc.take("<")
            b = sc.ident("step")
            order.append((a, b))
        elif head == "auth":
            sc.take(":")
            while not sc.at_end():
                s = sc.ident("step")
                u = sc.ident("user")
                auth.append((s, u))
                if not sc.try_take(";"):
                    break
        elif head == "relation":
            name = sc.ident("relation name")
            sc.take(":")
            pairs = []
            while not sc.at_end():
                u1 = sc.ident("user")
                u2 = sc.ident("user")
                pairs.append((u1, u2))
                if not sc.try_take(";"):
                    break
            if name in relations:
                raise sc.error(f"relation {name!r} declared twice")
            relations[name] = Relation(name=name, pairs=frozenset(pairs))
            relation_order.append(name)
        elif head == "constraint":
            sc.take(":")
            kind = sc.ident("constraint kind")
            if kind == "sod":
                constraints.append(SoD(sc.ident("step"), sc.ident("step")))
            elif kind == "bod":
                constraints.append(BoD(sc.ident("step"), sc.ident("step")))
            elif kind == "entail":
                rel_name = sc.ident("relation name")
                if rel_name not in relations:
                    raise sc.error(f"unknown relation {rel_name!r}")
                set1 = _idset(sc)
                set2 = _idset(sc)
                constraints.append(Entailment(relations[rel_name], set1, set2))
            elif kind == "allow":
                scope = _idset(sc)
                allowed = []
                while not sc.at_end():
                    combo = []
                    for _ in scope:
                        combo.append(sc.ident("user"))
                    allowed.append(tuple(combo))
                    if not sc.try_take(";"):
                        break
                constraints.append(Extensional(scope, frozenset(allowed)))
            else:
                raise sc.error(f"unknown constraint kind {kind!r}")
        elif head == "budget":
            sc.take(":")
            budget = sc.integer()
        else:
            raise sc.error(f"unknown clause {head!r}")
        if not sc.at_end():
            raise sc.error("trailing input after clause")

    if not saw_steps:
        raise DslSyntaxError(1, 1, "missing steps: clause")
    if not saw_users:
        raise DslSyntaxError(1, 1, "missing users: clause")

    policy = validate_policy(
        WorkflowPolicy(
            steps=tuple(steps),
            order=frozenset(order),
            users=tuple(users),
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )
    return PolicyDocument(
        policy=policy,
        named_relations=tuple(relations[n] for n in relation_order),
        default_budget=budget,
    )


def _relations_of(doc: PolicyDocument) -> list[Relation]:
    """Named relations plus any relation reachable only through a constraint."""

    named = {r.name: r for r in doc.named_relations}
    out = list(doc.named_relations)
    for c in doc.policy.constraints:
        if isinstance(c, Entailment) and c.rel.name not in named:
            named[c.rel.name] = c.rel
            out.append(c.rel)
    return out


def serialize_policy(doc: PolicyDocument) -> str:
    """Canonical text for a validated document; parse(serialize(d)) == d."""

    policy = doc.policy
    lines = []
    lines.append("steps: " + " ".join(policy.steps) if policy.steps else "steps:")
    for a, b in sorted(policy.order, key=lambda p: (policy.steps.index(p[0]), policy.steps.index(p[1]))):
        lines.append(f"order: {a} < {b}")
    lines.append("users: " + " ".join(policy.users) if policy.users else "users:")
    auth = sorted(policy.auth, key=lambda p: (policy.steps.index(p[0]), policy.users.index(p[1])))
    if auth:
        lines.append("auth: " + "; ".join(f"{s} {u}" for s, u in auth))
    user_pos = {u: i for i, u in enumerate(policy.users)}
    for rel in _relations_of(doc):
        pairs = sorted(rel.pairs, key=lambda p: (user_pos[p[0]], user_pos[p[1]]))
        body = "; ".join(f"{a} {b}" for a, b in pairs)
        lines.append(f"relation {rel.name}: {body}" if body else f"relation {rel.name}:")
    for c in policy.constraints:
        lines.append("constraint: " + _format_constraint(c, policy))
    if doc.default_budget is not None:
        lines.append(f"budget: {doc.default_budget}")
    return "\n".join(lines) + "\n"


def _format_constraint(c: Constraint, policy: WorkflowPolicy) -> str:
    if isinstance(c, SoD):
        return f"sod {c.s1} {c.s2}"
    if isinstance(c, BoD):
        return f"bod {c.s1} {c.s2}"
    if isinstance(c, Entailment):
        return "entail {} {{ {} }} {{ {} }}".format(
            c.rel.name, " ".join(c.set1), " ".join(c.set2)
        )
    if not isinstance(c, Extensional):
        c = c.to_extensional()
    user_pos = {u: i for i, u in enumerate(policy.users)}
    combos = sorted(c.allowed, key=lambda t: tuple(user_pos[u] for u in t))
    body = "; ".join(" ".join(t) for t in combos)
    scope = " ".join(c.scope)
    return f"allow {{ {scope} }} {body}" if body else f"allow {{ {scope} }}"


def document_for(policy: WorkflowPolicy, budget: int | None = None) -> PolicyDocument:
    """Wrap a bare policy, collecting relations out of its constraints."""

    rels = []
    seen = set()
    for c in policy.constraints:
        if isinstance(c, Entailment) and c.rel.name not in seen:
            seen.add(c.rel.name)
            rels.append(c.rel)
    return PolicyDocument(policy=policy, named_relations=tuple(rels), default_budget=budget)
