"""Workflow authorization policies: plans, validity checking, and projection.

A policy is the 5-tuple of steps, a strict precedence relation over them,
users, a step/user authorization relation, and a list of constraints.  Plans
are plain ``dict[str, str]`` mappings from step names to user names.  All
policy values are immutable once validated; every operation here is a pure
function, so concurrent readers need no locking.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterable, Iterator, Mapping

TOKEN_RE = re.compile(r"[A-Za-z0-9_]+\Z")

Plan = Mapping[str, str]


class PolicyError(ValueError):
    """A policy value violates a structural invariant."""


class CyclicOrder(PolicyError):
    """The step precedence relation has a cycle (or a reflexive pair)."""


class DanglingReference(PolicyError):
    """Authorization or a constraint mentions an undeclared step or user."""


class MalformedConstraint(PolicyError):
    """A constraint violates its own invariants."""


class InvalidSeed(PolicyError):
    """A single-assignment seed handed to project() is not a valid partial plan."""


class Status(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    PENDING = "pending"


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """A named binary relation over user names."""

    name: str
    pairs: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class SoD:
    """Separation of duty: the two steps must be performed by distinct users."""

    s1: str
    s2: str


@dataclass(frozen=True)
class BoD:
    """Binding of duty: the two steps must be performed by the same user."""

    s1: str
    s2: str


@dataclass(frozen=True)
class Entailment:
    """Some step in ``set1`` and some step in ``set2`` are related by ``rel``."""

    rel: Relation
    set1: tuple[str, ...]
    set2: tuple[str, ...]

    @property
    def is_type1(self) -> bool:
        return len(self.set1) == 1 and len(self.set2) == 1


@dataclass(frozen=True)
class Extensional:
    """Explicit list of permitted assignments over ``scope``.

    ``allowed`` holds user tuples positionally aligned with ``scope``.  This
    is the normal form for constraints residualized by :func:`project`.
    """

    scope: tuple[str, ...]
    allowed: frozenset[tuple[str, ...]]


@dataclass(frozen=True)
class GateSemantics:
    """Truth-table constraint tying a gate-output step to its operand steps.

    Users are split into a "true" class and a "false" class; the constraint
    permits an assignment when the output step's class equals the gate
    function applied to the operand classes.  Compiled to :class:`Extensional`
    on demand (projection, serialization).
    """

    kind: str  # "and" | "or" | "not" | "id" | "const0" | "const1"
    out_step: str
    in_steps: tuple[str, ...]
    true_users: frozenset[str]
    false_users: frozenset[str]

    ARITY = {"and": 2, "or": 2, "not": 1, "id": 1, "const0": 0, "const1": 0}

    def evaluate(self, bits: tuple[bool, ...]) -> bool:
        if self.kind == "and":
            return bits[0] and bits[1]
        if self.kind == "or":
            return bits[0] or bits[1]
        if self.kind == "not":
            return not bits[0]
        if self.kind == "id":
            return bits[0]
        if self.kind == "const0":
            return False
        return True

    def permits(self, assignment: Mapping[str, str]) -> bool:
        classes = []
        for s in (self.out_step, *self.in_steps):
            u = assignment[s]
            if u in self.true_users:
                classes.append(True)
            elif u in self.false_users:
                classes.append(False)
            else:
                return False
        return classes[0] == self.evaluate(tuple(classes[1:]))

    def to_extensional(self) -> Extensional:
        scope = (self.out_step, *self.in_steps)
        domain = sorted(self.true_users | self.false_users)
        allowed = frozenset(
            combo
            for combo in product(domain, repeat=len(scope))
            if self.permits(dict(zip(scope, combo)))
        )
        return Extensional(scope=scope, allowed=allowed)


Constraint = SoD | BoD | Entailment | Extensional | GateSemantics


def constraint_scope(c: Constraint) -> frozenset[str]:
    if isinstance(c, (SoD, BoD)):
        return frozenset((c.s1, c.s2))
    if isinstance(c, Entailment):
        return frozenset(c.set1) | frozenset(c.set2)
    if isinstance(c, Extensional):
        return frozenset(c.scope)
    return frozenset((c.out_step, *c.in_steps))


# ---------------------------------------------------------------------------
# Policy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkflowPolicy:
    """The 5-tuple of steps, step order, users, authorization, constraints.

    ``order`` holds the declared strict precedence pairs.  After
    :func:`validate_policy` the instance also carries the transitive
    reduction and transitive closure of the order.
    """

    steps: tuple[str, ...]
    order: frozenset[tuple[str, str]]
    users: tuple[str, ...]
    auth: frozenset[tuple[str, str]]
    constraints: tuple[Constraint, ...]
    order_reduction: frozenset[tuple[str, str]] | None = field(default=None, compare=False)
    order_closure: frozenset[tuple[str, str]] | None = field(default=None, compare=False)

    @property
    def checked(self) -> bool:
        return self.order_closure is not None

    def closure(self) -> frozenset[tuple[str, str]]:
        if self.order_closure is None:
            raise PolicyError("policy has not been validated")
        return self.order_closure

    def predecessors(self, s: str) -> frozenset[str]:
        return frozenset(a for (a, b) in self.closure() if b == s)

    def authorized(self, s: str) -> tuple[str, ...]:
        return tuple(u for u in self.users if (s, u) in self.auth)


def make_policy(
    steps: Iterable[str],
    users: Iterable[str],
    order: Iterable[tuple[str, str]] = (),
    auth: Iterable[tuple[str, str]] | None = None,
    constraints: Iterable[Constraint] = (),
) -> WorkflowPolicy:
    """Build and validate a policy.  ``auth=None`` grants every user every step."""

    steps = tuple(steps)
    users = tuple(users)
    if auth is None:
        auth = [(s, u) for s in steps for u in users]
    return validate_policy(
        WorkflowPolicy(
            steps=steps,
            order=frozenset(order),
            users=users,
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )


def transitive_closure(
    pairs: Iterable[tuple[str, str]], elems: Iterable[str]
) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = {e: set() for e in elems}
    for a, b in pairs:
        succ[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in succ:
            new = set()
            for b in succ[a]:
                new |= succ[b]
            if not new <= succ[a]:
                succ[a] |= new
                changed = True
    return frozenset((a, b) for a, bs in succ.items() for b in bs)


def transitive_reduction(
    closure: frozenset[tuple[str, str]],
) -> frozenset[tuple[str, str]]:
    return frozenset(
        (a, b)
        for (a, b) in closure
        if not any((a, c) in closure and (c, b) in closure for c in {x for (_, x) in closure})
    )


def _check_token(kind: str, name: str) -> None:
    if not TOKEN_RE.match(name):
        raise MalformedConstraint(f"{kind} name {name!r} is not a token over [A-Za-z0-9_]")


def validate_policy(policy: WorkflowPolicy) -> WorkflowPolicy:
    """Verify every structural invariant; return the policy with its order's
    transitive reduction and closure attached.

    Raises :class:`CyclicOrder`, :class:`DanglingReference`, or
    :class:`MalformedConstraint`.
    """

    step_set = set(policy.steps)
    user_set = set(policy.users)
    if len(step_set) != len(policy.steps):
        raise MalformedConstraint("duplicate step names")
    if len(user_set) != len(policy.users):
        raise MalformedConstraint("duplicate user names")
    for s in policy.steps:
        _check_token("step", s)
    for u in policy.users:
        _check_token("user", u)

    for a, b in policy.order:
        if a not in step_set or b not in step_set:
            raise DanglingReference(f"order pair ({a}, {b}) mentions undeclared step")
    closure = transitive_closure(policy.order, policy.steps)
    if any(a == b for (a, b) in closure):
        raise CyclicOrder("step order has a cycle")

    for s, u in policy.auth:
        if s not in step_set:
            raise DanglingReference(f"auth mentions undeclared step {s!r}")
        if u not in user_set:
            raise DanglingReference(f"auth mentions undeclared user {u!r}")

    for c in policy.constraints:
        scope = constraint_scope(c)
        if not scope <= step_set:
            raise DanglingReference(f"constraint {c!r} mentions undeclared steps")
        if isinstance(c, (SoD, BoD)) and c.s1 == c.s2:
            raise MalformedConstraint(f"{type(c).__name__}({c.s1}, {c.s2}) needs distinct steps")
        if isinstance(c, Entailment):
            if not c.set1 or not c.set2:
                raise MalformedConstraint("entailment step sets must be non-empty")
            for u1, u2 in c.rel.pairs:
                if u1 not in user_set or u2 not in user_set:
                    raise DanglingReference(
                        f"relation {c.rel.name!r} mentions undeclared user"
                    )
        if isinstance(c, Extensional):
            if len(set(c.scope)) != len(c.scope) or not c.scope:
                raise MalformedConstraint("extensional scope must be a non-empty set")
            for combo in c.allowed:
                if len(combo) != len(c.scope):
                    raise MalformedConstraint("extensional tuple arity differs from scope")
                for u in combo:
                    if u not in user_set:
                        raise DanglingReference(
                            f"extensional constraint mentions undeclared user {u!r}"
                        )
        if isinstance(c, GateSemantics):
            if len(c.in_steps) != GateSemantics.ARITY[c.kind]:
                raise MalformedConstraint(f"gate {c.kind} has wrong operand count")
            if len({c.out_step, *c.in_steps}) != 1 + len(c.in_steps):
                raise MalformedConstraint("gate steps must be distinct")
            if not (c.true_users | c.false_users) <= user_set:
                raise DanglingReference("gate user class mentions undeclared user")
            if c.true_users & c.false_users:
                raise MalformedConstraint("gate user classes overlap")

    return replace(
        policy,
        order_reduction=transitive_reduction(closure),
        order_closure=closure,
    )


# ---------------------------------------------------------------------------
# Plans and validity
# ---------------------------------------------------------------------------


def is_causally_closed(domain: Iterable[str], policy: WorkflowPolicy) -> bool:
    """True iff every predecessor of a domain step is also in the domain."""

    dom = set(domain)
    closure = policy.closure()
    return all(a in dom for (a, b) in closure if b in dom)


def constraint_status(c: Constraint, plan: Plan) -> Status:
    """Pending while the plan does not cover the constraint's scope; otherwise
    Satisfied or Violated according to the constraint's semantics."""

    scope = constraint_scope(c)
    if not scope <= plan.keys():
        return Status.PENDING
    if isinstance(c, SoD):
        ok = plan[c.s1] != plan[c.s2]
    elif isinstance(c, BoD):
        ok = plan[c.s1] == plan[c.s2]
    elif isinstance(c, Entailment):
        ok = any(
            (plan[s1], plan[s2]) in c.rel.pairs for s1 in c.set1 for s2 in c.set2
        )
    elif isinstance(c, Extensional):
        ok = tuple(plan[s] for s in c.scope) in c.allowed
    else:
        ok = c.permits(plan)
    return Status.SATISFIED if ok else Status.VIOLATED


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    causally_closed: bool
    unauthorized: tuple[tuple[str, str], ...]
    violated: tuple[Constraint, ...]


def check_validity(plan: Plan, policy: WorkflowPolicy) -> ValidityResult:
    """Check a partial plan: causal closure, authorization, and constraints.

    A plan is additionally complete when its domain covers every step;
    completeness is the caller's concern (see :func:`is_complete`).
    """

    closed = is_causally_closed(plan.keys(), policy)
    unauthorized = tuple(
        (s, u) for s, u in plan.items() if (s, u) not in policy.auth
    )
    violated = tuple(
        c for c in policy.constraints if constraint_status(c, plan) is Status.VIOLATED
    )
    return ValidityResult(
        valid=closed and not unauthorized and not violated,
        causally_closed=closed,
        unauthorized=unauthorized,
        violated=violated,
    )


def is_complete(plan: Plan, policy: WorkflowPolicy) -> bool:
    return set(plan.keys()) == set(policy.steps)


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


def _residualize(
    c: Constraint, s: str, u: str, policy: WorkflowPolicy
) -> Constraint:
    """Residual of a constraint with ``s`` in scope after committing s -> u.

    Follows the selected-completions semantics: keep exactly the permitted
    assignments consistent with s -> u, with s dropped from the scope.  The
    Extensional form is the normal form for residuals.
    """

    if isinstance(c, SoD):
        other = c.s2 if c.s1 == s else c.s1
        return Extensional(
            scope=(other,),
            allowed=frozenset((v,) for v in policy.users if v != u),
        )
    if isinstance(c, BoD):
        other = c.s2 if c.s1 == s else c.s1
        return Extensional(scope=(other,), allowed=frozenset({(u,)}))
    if isinstance(c, Extensional):
        i = c.scope.index(s)
        rest = c.scope[:i] + c.scope[i + 1 :]
        allowed = frozenset(
            combo[:i] + combo[i + 1 :] for combo in c.allowed if combo[i] == u
        )
        return Extensional(scope=rest, allowed=allowed)
    if isinstance(c, GateSemantics):
        return _residualize(c.to_extensional(), s, u, policy)
    # Entailment: enumerate completions of the remaining scope.
    scope = sorted(constraint_scope(c), key=policy.steps.index)
    rest = tuple(x for x in scope if x != s)
    allowed = set()
    for combo in product(policy.users, repeat=len(rest)):
        full = dict(zip(rest, combo))
        full[s] = u
        if constraint_status(c, full) is Status.SATISFIED:
            allowed.add(combo)
    return Extensional(scope=rest, allowed=frozenset(allowed))


def seed_error(policy: WorkflowPolicy, s: str, u: str) -> str | None:
    """Why {(s, u)} is not a valid partial plan for ``policy`` (None if it is)."""

    if s not in policy.steps:
        return f"step {s!r} not in policy"
    if u not in policy.users:
        return f"user {u!r} not in policy"
    if policy.predecessors(s):
        return f"step {s!r} has unassigned predecessors"
    if (s, u) not in policy.auth:
        return f"user {u!r} not authorized for step {s!r}"
    for c in policy.constraints:
        if constraint_scope(c) == {s} and constraint_status(c, {s: u}) is Status.VIOLATED:
            return f"assignment violates unary constraint {c!r}"
    return None


def project(policy: WorkflowPolicy, s: str, u: str) -> WorkflowPolicy:
    """The residual policy after committing the assignment s -> u.

    Requires {(s, u)} to be a valid partial plan (s minimal in the step
    order, authorized, no unary constraint violated); raises
    :class:`InvalidSeed` otherwise.  Constraints not mentioning s are kept;
    multi-step constraints mentioning s are residualized; constraints whose
    scope is exactly {s} are dropped (the precondition already checked them).
    """

    err = seed_error(policy, s, u)
    if err is not None:
        raise InvalidSeed(err)

    steps = tuple(x for x in policy.steps if x != s)
    step_set = set(steps)
    constraints = []
    for c in policy.constraints:
        scope = constraint_scope(c)
        if s not in scope:
            constraints.append(c)
        elif len(scope) > 1:
            constraints.append(_residualize(c, s, u, policy))
    return validate_policy(
        WorkflowPolicy(
            steps=steps,
            order=frozenset((a, b) for (a, b) in policy.order if a in step_set and b in step_set),
            users=policy.users,
            auth=frozenset((a, v) for (a, v) in policy.auth if a in step_set),
            constraints=tuple(constraints),
        )
    )


def restrict_users(policy: WorkflowPolicy, removed: Iterable[str]) -> WorkflowPolicy:
    """The policy with authorizations for ``removed`` users deleted."""

    gone = set(removed)
    return replace(
        policy,
        auth=frozenset((s, u) for (s, u) in policy.auth if u not in gone),
    )


def canonical_key(policy: WorkflowPolicy) -> tuple:
    """Hashable identity of a policy for memoization purposes."""

    return (
        policy.steps,
        policy.order,
        policy.users,
        policy.auth,
        frozenset(policy.constraints),
    )
