"""Compilation of resiliency instances into saturation-based logic programs.

Two targets:

* ``srcp_complement`` — the program is satisfiable iff the policy is NOT
  statically resilient for the budget; every stable model carries the
  adversary's removal set in its ``removed/1`` atoms.
* ``orcp`` — the program is satisfiable iff the policy is one-shot resilient;
  ``assign/2`` and ``order/2`` atoms of a stable model encode the winning
  strategy.

Both encodings share one fact schema (``step/1``, ``before/2``, ``user/1``,
``auth/2``, ``sod/2``); ``before/2`` is omitted for the SRCP target and
``sod/2`` for the ORCP target, which checks separation inline.  Emitted text
is deterministic and byte-stable: it depends only on the policy's declaration
order and the budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .model import Entailment, SoD, WorkflowPolicy

SRCP_COMPLEMENT = "srcp_complement"
ORCP = "orcp"


class UnsupportedConstraint(ValueError):
    """The policy uses a constraint outside the target encoding's fragment."""


@dataclass(frozen=True)
class AtomMap:
    """Interpretation of emitted atoms back to policy entities."""

    predicates: Mapping[str, str]
    steps: Mapping[str, str]  # ASP term -> policy step name
    users: Mapping[str, str]  # ASP constant -> policy user name
    relations: Mapping[str, str]  # relation predicate -> relation name


@dataclass(frozen=True)
class AspProgram:
    text: str
    atom_map: AtomMap
    target: str


def sanitize_tokens(names) -> dict[str, str]:
    """Injective, deterministic map from policy tokens to ASP constants:
    lowercase first character, ``x`` prefix for leading digits or
    underscores, numeric suffix on collision."""

    taken: set[str] = set()
    out: dict[str, str] = {}
    for name in names:
        base = name
        if base[0].isdigit() or base[0] == "_":
            base = "x" + base
        base = base[0].lower() + base[1:]
        cand = base
        k = 2
        while cand in taken:
            cand = f"{base}_{k}"
            k += 1
        taken.add(cand)
        out[name] = cand
    return out


def _require_checked(policy: WorkflowPolicy) -> None:
    if not policy.checked:
        raise ValueError("policy must pass validate_policy first")


def _check_supported(policy: WorkflowPolicy, target: str) -> None:
    for c in policy.constraints:
        if isinstance(c, SoD):
            continue
        if target == ORCP and isinstance(c, Entailment) and c.is_type1:
            continue
        raise UnsupportedConstraint(
            f"{type(c).__name__} constraint not supported by the {target} encoding"
        )


def _step_terms(policy: WorkflowPolicy, target: str) -> dict[str, str]:
    if target == ORCP:
        # the satisfiability rule is positional, so steps get integer ids
        return {s: str(i) for i, s in enumerate(policy.steps, start=1)}
    return sanitize_tokens(policy.steps)


def emit_instance_facts(policy: WorkflowPolicy, target: str) -> str:
    """The fact part of either encoding (one fact per line).

    ``before/2`` pairs come from the transitive reduction of the step order
    and appear only for the ORCP target; ``sod/2`` facts appear only for the
    SRCP target, whose common rules test them.
    """

    _require_checked(policy)
    _check_supported(policy, target)
    steps = _step_terms(policy, target)
    users = sanitize_tokens(policy.users)
    sidx = {s: i for i, s in enumerate(policy.steps)}
    uidx = {u: i for i, u in enumerate(policy.users)}

    lines = [f"step({steps[s]})." for s in policy.steps]
    if target == ORCP:
        reduction = sorted(policy.order_reduction, key=lambda p: (sidx[p[0]], sidx[p[1]]))
        lines += [f"before({steps[a]}, {steps[b]})." for a, b in reduction]
    lines += [f"user({users[u]})." for u in policy.users]
    auth = sorted(policy.auth, key=lambda p: (sidx[p[0]], uidx[p[1]]))
    lines += [f"auth({steps[s]}, {users[u]})." for s, u in auth]
    if target == SRCP_COMPLEMENT:
        lines += [
            f"sod({steps[c.s1]}, {steps[c.s2]})."
            for c in policy.constraints
            if isinstance(c, SoD)
        ]
    return "\n".join(lines) + ("\n" if lines else "")


_SRCP_PREDICATES = {
    "step/1": "workflow step",
    "user/1": "user",
    "auth/2": "step authorization",
    "sod/2": "separation-of-duty constraint",
    "removed/1": "user removed by the adversary",
    "avail/2": "authorized and not removed",
    "assign/2": "plan assignment",
    "violation/0": "saturation marker: candidate plan breaks a constraint",
}

_ORCP_PREDICATES = {
    "step/1": "workflow step (integer id)",
    "before/2": "step precedence (transitive reduction)",
    "user/1": "user",
    "auth/2": "step authorization",
    "assign/2": "planned assignment (strategy, part 1)",
    "order/2": "assignment ordering (strategy, part 2)",
    "pre/1": "step executed before the strike",
    "post/1": "step executed after the strike",
    "removed/1": "user removed by the strike",
    "preserved/1": "user kept by the strike",
    "avail/2": "assignments still open after the strike",
    "sat/0": "saturation marker: the strike fails",
}


def emit_srcp_program(policy: WorkflowPolicy, t: int) -> AspProgram:
    """Complement-of-static-resiliency program: instance facts plus the six
    common rules, with the budget substituted into the choice rule."""

    if t < 0:
        raise ValueError("budget t must be non-negative")
    facts = emit_instance_facts(policy, SRCP_COMPLEMENT)
    steps = _step_terms(policy, SRCP_COMPLEMENT)
    users = sanitize_tokens(policy.users)
    text = (
        "% Instance-specific facts\n"
        + facts
        + "\n% Generate Player 2's strike\n"
        + f"{{ removed(U) : user(U) }} {t}.\n"
        + "\n% Generate Player 1's assignment\n"
        + "avail(S, U) :- auth(S, U), not removed(U).\n"
        + "assign(S, U) : avail(S, U) :- step(S).\n"
        + "\n% Test separation-of-duty constraints\n"
        + "violation :- sod(S1, S2), assign(S1, U), assign(S2, U).\n"
        + "\n% Model saturation\n"
        + "assign(S, U) :- violation, avail(S, U).\n"
        + "\n% Reject unsaturated models\n"
        + ":- not violation.\n"
    )
    return AspProgram(
        text=text,
        atom_map=AtomMap(
            predicates=dict(_SRCP_PREDICATES),
            steps={v: k for k, v in steps.items()},
            users={v: k for k, v in users.items()},
            relations={},
        ),
        target=SRCP_COMPLEMENT,
    )


def emit_orcp_program(policy: WorkflowPolicy, t: int) -> AspProgram:
    """One-shot resiliency program: facts with integer step ids, the fixed
    rule block, and one generated instance-specific satisfiability rule whose
    body enumerates ``avail(i, Ui)`` for every step and checks each supported
    constraint inline."""

    if t < 0:
        raise ValueError("budget t must be non-negative")
    facts = emit_instance_facts(policy, ORCP)
    steps = _step_terms(policy, ORCP)
    users = sanitize_tokens(policy.users)
    uidx = {u: i for i, u in enumerate(policy.users)}

    rel_preds: dict[str, str] = {}
    rel_facts: list[str] = []
    rel_names = sanitize_tokens(
        dict.fromkeys(
            c.rel.name for c in policy.constraints if isinstance(c, Entailment)
        )
    )
    for c in policy.constraints:
        if isinstance(c, Entailment) and c.rel.name not in rel_preds.values():
            pred = f"rel_{rel_names[c.rel.name]}"
            rel_preds[pred] = c.rel.name
            pairs = sorted(c.rel.pairs, key=lambda p: (uidx[p[0]], uidx[p[1]]))
            rel_facts += [f"{pred}({users[a]}, {users[b]})." for a, b in pairs]

    body = [f"avail({steps[s]}, U{steps[s]})" for s in policy.steps]
    for c in policy.constraints:
        if isinstance(c, SoD):
            body.append(f"U{steps[c.s1]} != U{steps[c.s2]}")
        elif isinstance(c, Entailment):
            pred = f"rel_{rel_names[c.rel.name]}"
            body.append(f"{pred}(U{steps[c.set1[0]]}, U{steps[c.set2[0]]})")
    sat_rule = "sat :- " + ", ".join(body) + ".\n" if body else "sat.\n"

    mapping_comment = "".join(
        f"% step {steps[s]} = {s}\n" for s in policy.steps
    )
    text = (
        "% Instance-specific facts\n"
        + mapping_comment
        + facts
        + ("".join(line + "\n" for line in rel_facts))
        + "\n% Generate a plan as part of Player 1's strategy\n"
        + "1 { assign(S, U) : auth(S, U) } 1 :- step(S).\n"
        + "\n% Generate a total ordering of steps as part of\n"
        + "% Player 1's strategy\n"
        + "order(X, Y); order(Y, X) :- step(X), step(Y), X != Y.\n"
        + "order(X, Y) :- before(X, Y).\n"
        + "order(X, Z) :- order(X, Y), order(Y, Z).\n"
        + "\n% Generate strike point of Player 2\n"
        + "post(S); pre(S) :- step(S).\n"
        + "post(S2) :- post(S1), order(S1, S2).\n"
        + "\n% Generate strike set of Player 2\n"
        + "removed(U); preserved(U) :- user(U).\n"
        + "\n% Available assignments for Player 1\n"
        + "avail(S, U) :- pre(S), assign(S, U).\n"
        + "avail(S, U) :- post(S), auth(S, U), preserved(U).\n"
        + "\n% Detect satisfiability\n"
        + sat_rule
        + "\n% Player 2 loses if it removes more than t users\n"
        + f"sat :- {t + 1} {{ removed(U) : user(U) }}.\n"
        + "\n% Model saturation\n"
        + "pre(S) :- sat, step(S).\n"
        + "post(S) :- sat, step(S).\n"
        + "removed(U) :- sat, user(U).\n"
        + "preserved(U) :- sat, user(U).\n"
        + "avail(S, U) :- sat, auth(S, U).\n"
        + "\n% Reject unsaturated models\n"
        + ":- not sat.\n"
    )
    predicates = dict(_ORCP_PREDICATES)
    for pred, name in rel_preds.items():
        predicates[f"{pred}/2"] = f"entailment relation {name}"
    return AspProgram(
        text=text,
        atom_map=AtomMap(
            predicates=predicates,
            steps={v: k for k, v in steps.items()},
            users={v: k for k, v in users.items()},
            relations=rel_preds,
        ),
        target=ORCP,
    )
