"""Random-instance generation and oracle/solver cross-validation campaigns.

Each campaign instance is reproducible from its seed alone.  A cross-check
report records both verdicts and, on any disagreement, both witnesses; a
disagreement is never swallowed.  Instances whose exploration cap is hit are
reported as skipped, not passed.

The static-resiliency campaign keeps every step's authorization strictly
above the budget (``min_auth_margin``), which is the domain where the
complement encoding is provably equivalent to the game oracle; see
``tests/test_aspgen.py`` for the boundary behaviour outside that domain.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .aspgen import emit_orcp_program, emit_srcp_program
from .games import (
    Counterexample,
    GameConfig,
    StateBudgetExceeded,
    WinningPlay,
    decide_crcp,
    decide_drcp,
    decide_orcp,
    decide_srcp,
    decide_wsp,
    verify_winning_play,
)
from .model import Entailment, Relation, SoD, WorkflowPolicy, restrict_users, validate_policy
from .solver import SolverConfig, default_solver_config, solve_orcp, solve_srcp, timed


@dataclass(frozen=True)
class GenParams:
    """Knobs for the seeded random policy generator."""

    steps: tuple[int, int] = (1, 3)
    users: tuple[int, int] = (1, 4)
    order_density: float = 0.3
    auth_density: float = 0.7
    sod: tuple[int, int] = (0, 2)
    entailments: tuple[int, int] = (0, 0)
    seed: int = 0
    min_auth_per_step: int = 1

    def __post_init__(self):
        for name in ("steps", "users", "sod", "entailments"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"empty range for {name}")
        if not (0.0 <= self.order_density <= 1.0):
            raise ValueError("order_density out of [0, 1]")
        if not (0.0 < self.auth_density <= 1.0):
            raise ValueError("auth_density out of (0, 1]")


def random_policy(params: GenParams) -> WorkflowPolicy:
    """Deterministic function of the seed; always validates."""

    rng = random.Random(params.seed)
    n_steps = rng.randint(*params.steps)
    n_users = rng.randint(*params.users)
    steps = [f"s{i}" for i in range(1, n_steps + 1)]
    users = [f"u{i}" for i in range(1, n_users + 1)]

    order = {
        (steps[i], steps[j])
        for i in range(n_steps)
        for j in range(i + 1, n_steps)
        if rng.random() < params.order_density
    }
    auth = {
        (s, u) for s in steps for u in users if rng.random() < params.auth_density
    }
    for s in steps:
        have = [u for u in users if (s, u) in auth]
        need = min(params.min_auth_per_step, n_users)
        missing = [u for u in users if (s, u) not in auth]
        while len(have) < need and missing:
            pick = missing.pop(rng.randrange(len(missing)))
            auth.add((s, pick))
            have.append(pick)

    constraints = []
    if n_steps >= 2:
        pairs = [(a, b) for i, a in enumerate(steps) for b in steps[i + 1 :]]
        n_sod = rng.randint(*params.sod)
        for s1, s2 in rng.sample(pairs, min(n_sod, len(pairs))):
            constraints.append(SoD(s1, s2))
        n_ent = rng.randint(*params.entailments)
        for k in range(n_ent):
            s1, s2 = rng.choice(pairs)
            pool = [(a, b) for a in users for b in users]
            size = rng.randint(1, len(pool))
            rel = Relation(f"r{k + 1}", frozenset(rng.sample(pool, size)))
            constraints.append(Entailment(rel, (s1,), (s2,)))

    return validate_policy(
        WorkflowPolicy(
            steps=tuple(steps),
            order=frozenset(order),
            users=tuple(users),
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )


@dataclass
class XCheckReport:
    """One cross-validated instance; serializable as a JSON object."""

    instance: str
    seed: int | None
    analysis: str
    oracle: bool | None = None
    asp: bool | None = None
    agree: bool | None = None
    witness_ok: bool | None = None
    chain: dict | None = None
    chain_ok: bool | None = None
    skipped: str | None = None
    oracle_witness: str | None = None
    asp_witness: str | None = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        if self.skipped is not None:
            return True  # skip-with-reason is not a failure, and not a pass
        checks = [self.agree, self.witness_ok, self.chain_ok]
        return all(c is not False for c in checks)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def xcheck_srcp(
    policy: WorkflowPolicy,
    t: int,
    solver: SolverConfig | None = None,
    instance: str = "",
    seed: int | None = None,
    config: GameConfig = GameConfig(),
) -> XCheckReport:
    """Compare the game oracle with the program pipeline on one instance; a
    satisfiable program's removal set must itself defeat satisfiability."""

    report = XCheckReport(instance=instance, seed=seed, analysis="srcp")
    try:
        (oracle, asp_pair), report.elapsed = timed(
            lambda: (
                decide_srcp(policy, t, config),
                solve_srcp(emit_srcp_program(policy, t), solver),
            )
        )
    except StateBudgetExceeded as exc:
        report.skipped = str(exc)
        return report
    verdict, _ = asp_pair
    report.oracle = oracle.decision
    report.asp = verdict.decision
    report.agree = oracle.decision == verdict.decision
    if isinstance(oracle.witness, Counterexample):
        report.oracle_witness = f"removed={sorted(oracle.witness.removed)}"
    if not verdict.decision and isinstance(verdict.witness, Counterexample):
        delta = verdict.witness.removed
        report.asp_witness = f"removed={sorted(delta)}"
        report.witness_ok = not decide_wsp(restrict_users(policy, delta), config).decision
    return report


def xcheck_orcp(
    policy: WorkflowPolicy,
    t: int,
    solver: SolverConfig | None = None,
    instance: str = "",
    seed: int | None = None,
    config: GameConfig = GameConfig(),
) -> XCheckReport:
    """Compare the one-shot oracle with the program pipeline; a satisfiable
    program's recovered play must survive the independent prefix re-check."""

    report = XCheckReport(instance=instance, seed=seed, analysis="orcp")
    try:
        (oracle, asp_pair), report.elapsed = timed(
            lambda: (
                decide_orcp(policy, t, config),
                solve_orcp(emit_orcp_program(policy, t), solver),
            )
        )
    except StateBudgetExceeded as exc:
        report.skipped = str(exc)
        return report
    verdict, _ = asp_pair
    report.oracle = oracle.decision
    report.asp = verdict.decision
    report.agree = oracle.decision == verdict.decision
    if isinstance(oracle.witness, WinningPlay):
        report.oracle_witness = f"play={list(oracle.witness.moves)}"
    if verdict.decision and isinstance(verdict.witness, WinningPlay):
        report.asp_witness = f"play={list(verdict.witness.moves)}"
        report.witness_ok = verify_winning_play(policy, t, verdict.witness, config)
    return report


CHAIN = ("drcp", "crcp", "orcp", "srcp", "wsp")


def inclusion_chain_check(
    policy: WorkflowPolicy,
    t: int,
    instance: str = "",
    seed: int | None = None,
    config: GameConfig = GameConfig(),
) -> XCheckReport:
    """All five verdicts plus the implication chain
    drcp => crcp => orcp => srcp => wsp; any violation is flagged."""

    report = XCheckReport(instance=instance, seed=seed, analysis="chain")
    try:
        verdicts, report.elapsed = timed(
            lambda: {
                "wsp": decide_wsp(policy, config).decision,
                "srcp": decide_srcp(policy, t, config).decision,
                "orcp": decide_orcp(policy, t, config).decision,
                "crcp": decide_crcp(policy, t, config).decision,
                "drcp": decide_drcp(policy, t, config).decision,
            }
        )
    except StateBudgetExceeded as exc:
        report.skipped = str(exc)
        return report
    report.chain = verdicts
    report.chain_ok = all(
        not verdicts[a] or verdicts[b] for a, b in zip(CHAIN, CHAIN[1:])
    )
    return report


def srcp_campaign_params(seed: int, t: int) -> GenParams:
    """Criterion-scale SRCP instance: SoD-only, every step authorized to more
    users than the budget can remove."""

    return GenParams(
        steps=(1, 3),
        users=(max(t + 1, 1), 4),
        auth_density=0.8,
        sod=(0, 3),
        seed=seed,
        min_auth_per_step=t + 1,
    )


def orcp_campaign_params(seed: int, t: int) -> GenParams:
    return GenParams(
        steps=(1, 3),
        users=(1, 3),
        auth_density=0.8,
        sod=(0, 2),
        entailments=(0, 1),
        seed=seed,
        min_auth_per_step=1,
    )


def run_srcp_campaign(
    count: int,
    base_seed: int = 1,
    solver: SolverConfig | None = None,
    budgets: Iterable[int] = (0, 1, 2),
) -> list[XCheckReport]:
    solver = solver or default_solver_config()
    budgets = tuple(budgets)
    reports = []
    for i in range(count):
        seed = base_seed + i
        t = budgets[i % len(budgets)]
        policy = random_policy(srcp_campaign_params(seed, t))
        reports.append(
            xcheck_srcp(policy, t, solver, instance=f"srcp-{seed}-t{t}", seed=seed)
        )
    return reports


def run_orcp_campaign(
    count: int,
    base_seed: int = 1,
    solver: SolverConfig | None = None,
    budgets: Iterable[int] = (0, 1),
) -> list[XCheckReport]:
    solver = solver or default_solver_config()
    budgets = tuple(budgets)
    reports = []
    for i in range(count):
        seed = base_seed + i
        t = budgets[i % len(budgets)]
        policy = random_policy(orcp_campaign_params(seed, t))
        reports.append(
            xcheck_orcp(policy, t, solver, instance=f"orcp-{seed}-t{t}", seed=seed)
        )
    return reports


def run_chain_campaign(
    count: int,
    base_seed: int = 1,
    budgets: Iterable[int] = (0, 1, 2),
) -> list[XCheckReport]:
    budgets = tuple(budgets)
    reports = []
    for i in range(count):
        seed = base_seed + i
        t = budgets[i % len(budgets)]
        policy = random_policy(srcp_campaign_params(seed, t))
        reports.append(
            inclusion_chain_check(policy, t, instance=f"chain-{seed}-t{t}", seed=seed)
        )
    return reports


def find_separation_witnesses(
    reports: Iterable[XCheckReport],
) -> dict[str, list[str]]:
    """Instances sitting in exactly one gap of the chain; the one-shot versus
    decremental gap may come up empty at desk scale and that is reported
    honestly by its absence."""

    gaps: dict[str, list[str]] = {
        "srcp_not_orcp": [],
        "orcp_not_crcp": [],
        "crcp_not_drcp": [],
    }
    for r in reports:
        if r.chain is None:
            continue
        if r.chain["srcp"] and not r.chain["orcp"]:
            gaps["srcp_not_orcp"].append(r.instance)
        if r.chain["orcp"] and not r.chain["crcp"]:
            gaps["orcp_not_crcp"].append(r.instance)
        if r.chain["crcp"] and not r.chain["drcp"]:
            gaps["crcp_not_drcp"].append(r.instance)
    return gaps
