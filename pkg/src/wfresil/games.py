"""Exact deciders for workflow satisfiability and the four resiliency games.

These are the ground-truth oracles the ASP pipeline and the reduction
generators are validated against.  All deciders are pure functions of
(policy, budget, config); independent calls are safe to run concurrently.

Search notes:

* ``decide_wsp`` backtracks over steps in a fixed topological order, pruning
  any partial plan that is already invalid.
* ``decide_srcp`` enumerates removal sets of size exactly ``min(t, |U|)``;
  shrinking a removal set only enlarges the plan space, so smaller sets never
  need separate checks.  The first counterexample in canonical enumeration
  order is reported.
* ``decide_orcp`` is a deterministic depth-first replacement for the
  guess-a-play algorithm: it extends a play one valid assignment at a time
  and demands that the policy remaining before each move is statically
  resilient.  Adversary strikes between moves are therefore checked exactly
  at prefix boundaries.
* ``decide_crcp`` / ``decide_drcp`` are straight minimax over game
  configurations with memoization on canonical keys.  Player 1 moves that
  would invalidate the partial plan are pruned instead of modelled as an
  explicit immediate loss; the winner is the same.  If a plan is already
  complete and valid, Player 1 has won even when no users remain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .model import (
    Status,
    WorkflowPolicy,
    canonical_key,
    constraint_scope,
    constraint_status,
    is_causally_closed,
    project,
    restrict_users,
    seed_error,
)


class StateBudgetExceeded(RuntimeError):
    """The configured exploration cap was hit; the verdict is unknown."""


@dataclass(frozen=True)
class GameConfig:
    max_states: int = 5_000_000
    memoize: bool = True


DEFAULT_CONFIG = GameConfig()


@dataclass(frozen=True)
class ValidPlan:
    assignments: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Counterexample:
    removed: frozenset[str]


@dataclass(frozen=True)
class WinningPlay:
    moves: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class StrikeFound:
    trigger_length: int
    removed: frozenset[str]


Witness = ValidPlan | Counterexample | WinningPlay | StrikeFound | None


@dataclass(frozen=True)
class GameVerdict:
    decision: bool
    witness: Witness = None


class _Budget:
    """Mutable state counter shared across one decider invocation."""

    def __init__(self, config: GameConfig):
        self.limit = config.max_states
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise StateBudgetExceeded(f"exceeded {self.limit} explored states")


def _require(policy: WorkflowPolicy, t: int | None = None) -> None:
    if not policy.checked:
        raise ValueError("policy must pass validate_policy first")
    if t is not None and t < 0:
        raise ValueError("budget t must be non-negative")


def _topological(policy: WorkflowPolicy) -> list[str]:
    closure = policy.closure()
    remaining = list(policy.steps)
    out: list[str] = []
    placed: set[str] = set()
    while remaining:
        for s in remaining:
            if all(a in placed for (a, b) in closure if b == s):
                out.append(s)
                placed.add(s)
                remaining.remove(s)
                break
        else:
            raise AssertionError("validated policies cannot have order cycles")
    return out


def _search_plan(policy: WorkflowPolicy, order: list[str], budget: _Budget) -> dict | None:
    """First complete valid plan along ``order``, or None.  Prunes on any
    constraint that is already violated by the partial assignment.

    Failed subtrees are memoized on the assignments still visible to future
    constraints (the "live" frontier), which collapses the interchangeable
    user copies that reduction-generated instances are full of.
    """

    plan: dict[str, str] = {}
    scoped = [
        [c for c in policy.constraints if s in constraint_scope(c)] for s in order
    ]
    # live[i]: already-assigned steps some constraint crossing position i reads
    live: list[tuple[str, ...]] = []
    for i in range(len(order)):
        done = set(order[:i])
        future = set(order[i:])
        crossing: set[str] = set()
        for c in policy.constraints:
            scope = constraint_scope(c)
            if scope & future:
                crossing |= scope & done
        live.append(tuple(s for s in order[:i] if s in crossing))
    failed: set = set()

    def extend(i: int) -> bool:
        budget.tick()
        if i == len(order):
            return True
        key = (i, tuple(plan[s] for s in live[i]))
        if key in failed:
            return False
        s = order[i]
        for u in policy.users:
            if (s, u) not in policy.auth:
                continue
            plan[s] = u
            if all(constraint_status(c, plan) is not Status.VIOLATED for c in scoped[i]):
                if extend(i + 1):
                    return True
            del plan[s]
        failed.add(key)
        return False

    return dict(plan) if extend(0) else None


def decide_wsp(
    policy: WorkflowPolicy, config: GameConfig = DEFAULT_CONFIG
) -> GameVerdict:
    """Does at least one valid complete plan exist?"""

    _require(policy)
    budget = _Budget(config)
    plan = _search_plan(policy, _topological(policy), budget)
    if plan is None:
        return GameVerdict(False)
    return GameVerdict(True, ValidPlan(tuple(plan.items())))


def enumerate_valid_plans(policy: WorkflowPolicy, config: GameConfig = DEFAULT_CONFIG):
    """Yield every valid complete plan once, in lexicographic order of the
    canonical step and user declaration order."""

    _require(policy)
    budget = _Budget(config)
    order = list(policy.steps)
    scoped = [
        [c for c in policy.constraints if s in constraint_scope(c)] for s in order
    ]
    plan: dict[str, str] = {}

    def extend(i: int):
        budget.tick()
        if i == len(order):
            yield dict(plan)
            return
        s = order[i]
        for u in policy.users:
            if (s, u) not in policy.auth:
                continue
            plan[s] = u
            if all(constraint_status(c, plan) is not Status.VIOLATED for c in scoped[i]):
                yield from extend(i + 1)
            del plan[s]

    yield from extend(0)


def _srcp(
    policy: WorkflowPolicy,
    t: int,
    budget: _Budget,
    cache: dict | None,
) -> tuple[bool, frozenset[str] | None]:
    key = None
    if cache is not None:
        key = (canonical_key(policy), t)
        hit = cache.get(key)
        if hit is not None:
            return hit
    k = min(t, len(policy.users))
    order = _topological(policy)
    result: tuple[bool, frozenset[str] | None] = (True, None)
    for delta in combinations(policy.users, k):
        budget.tick()
        restricted = restrict_users(policy, delta)
        if _search_plan(restricted, order, budget) is None:
            result = (False, frozenset(delta))
            break
    if cache is not None:
        cache[key] = result
    return result


def decide_srcp(
    policy: WorkflowPolicy, t: int, config: GameConfig = DEFAULT_CONFIG
) -> GameVerdict:
    """Static resiliency: every removal of at most ``t`` users leaves the
    policy satisfiable.  On failure the witness is the removal set."""

    _require(policy, t)
    budget = _Budget(config)
    ok, delta = _srcp(policy, t, budget, {} if config.memoize else None)
    if ok:
        return GameVerdict(True)
    return GameVerdict(False, Counterexample(delta))


def _ready_steps(policy: WorkflowPolicy) -> list[str]:
    closure = policy.closure()
    blocked = {b for (_, b) in closure}
    return [s for s in policy.steps if s not in blocked]


def decide_orcp(
    policy: WorkflowPolicy, t: int, config: GameConfig = DEFAULT_CONFIG
) -> GameVerdict:
    """One-shot resiliency: the adversary may strike once, at a round of its
    choosing, removing at most ``t`` users permanently.

    Searches for a play whose induced plan is a valid complete plan and whose
    every proper prefix (including the empty one) leaves a statically
    resilient remaining policy.  Witness: the play on success, a successful
    strike (trigger length plus removal set) on failure.
    """

    _require(policy, t)
    budget = _Budget(config)
    srcp_cache: dict | None = {} if config.memoize else None
    fail_cache: set = set()
    first_strike: list[StrikeFound] = []

    def search(pol: WorkflowPolicy, depth: int) -> tuple[tuple[str, str], ...] | None:
        budget.tick()
        if not pol.steps:
            return ()
        key = (canonical_key(pol),) if config.memoize else None
        if key is not None and key in fail_cache:
            return None
        ok, delta = _srcp(pol, t, budget, srcp_cache)
        if not ok:
            if not first_strike:
                first_strike.append(StrikeFound(depth, delta))
            if key is not None:
                fail_cache.add(key)
            return None
        for s in _ready_steps(pol):
            for u in pol.users:
                if seed_error(pol, s, u) is None:
                    rest = search(project(pol, s, u), depth + 1)
                    if rest is not None:
                        return ((s, u),) + rest
        if key is not None:
            fail_cache.add(key)
        return None

    play = search(policy, 0)
    if play is None:
        witness = first_strike[0] if first_strike else None
        return GameVerdict(False, witness)
    return GameVerdict(True, WinningPlay(play))


def verify_winning_play(
    policy: WorkflowPolicy, t: int, play, config: GameConfig = DEFAULT_CONFIG
) -> bool:
    """Independent re-check of a one-shot winning play: the induced plan must
    be a valid complete plan and no strike at any proper prefix may succeed
    (the remaining policy stays statically resilient)."""

    moves = tuple(play.moves if isinstance(play, WinningPlay) else play)
    if len({s for s, _ in moves}) != len(moves) or len(moves) != len(policy.steps):
        return False
    pol = policy
    for s, u in moves:
        if not decide_srcp(pol, t, config).decision:
            return False
        if seed_error(pol, s, u) is not None:
            return False
        pol = project(pol, s, u)
    return not pol.steps


def _legal_moves(policy, plan, removed, order_closure):
    """Assignments (step, user) Player 1 may make: step unassigned and ready,
    user not removed, and the extension still a valid partial plan."""

    moves = []
    for s in policy.steps:
        if s in plan:
            continue
        if any(a not in plan for (a, b) in order_closure if b == s):
            continue
        for u in policy.users:
            if u in removed or (s, u) not in policy.auth:
                continue
            plan[s] = u
            ok = all(
                constraint_status(c, plan) is not Status.VIOLATED
                for c in policy.constraints
                if s in constraint_scope(c)
            )
            del plan[s]
            if ok:
                moves.append((s, u))
    return moves


def decide_crcp(
    policy: WorkflowPolicy, t: int, config: GameConfig = DEFAULT_CONFIG
) -> GameVerdict:
    """Decremental resiliency: removals accumulate across rounds, capped at
    ``t`` in total; removed users never return."""

    _require(policy, t)
    budget = _Budget(config)
    closure = policy.closure()
    users = policy.users
    memo: dict = {}

    def p1_wins(removed: frozenset[str], plan_items: frozenset) -> bool:
        budget.tick()
        key = (removed, plan_items)
        if config.memoize and key in memo:
            return memo[key]
        plan = dict(plan_items)
        if len(plan) == len(policy.steps):
            result = True
        else:
            result = True
            room = t - len(removed)
            pool = [u for u in users if u not in removed]
            for extra in range(0, room + 1):
                for grown in combinations(pool, extra):
                    new_removed = removed | frozenset(grown)
                    if not p1_turn(new_removed, plan_items):
                        result = False
                        break
                if not result:
                    break
        if config.memoize:
            memo[key] = result
        return result

    def p1_turn(removed: frozenset[str], plan_items: frozenset) -> bool:
        plan = dict(plan_items)
        if len(removed) == len(users):
            return False
        moves = _legal_moves(policy, plan, removed, closure)
        if not moves:
            return False
        for s, u in moves:
            if p1_wins(removed, plan_items | {(s, u)}):
                return True
        return False

    decision = p1_wins(frozenset(), frozenset())
    return GameVerdict(decision)


def decide_drcp(
    policy: WorkflowPolicy, t: int, config: GameConfig = DEFAULT_CONFIG
) -> GameVerdict:
    """Dynamic resiliency: each round the adversary blocks a fresh set of at
    most ``t`` users; blocked users return the next round."""

    _require(policy, t)
    budget = _Budget(config)
    closure = policy.closure()
    users = policy.users
    memo: dict = {}

    def p1_wins(plan_items: frozenset) -> bool:
        budget.tick()
        if config.memoize and plan_items in memo:
            return memo[plan_items]
        plan = dict(plan_items)
        if len(plan) == len(policy.steps):
            result = True
        else:
            result = True
            k = min(t, len(users))
            for delta in combinations(users, k):
                blocked = frozenset(delta)
                if blocked == frozenset(users):
                    result = False
                    break
                moves = _legal_moves(policy, plan, blocked, closure)
                if not any(p1_wins(plan_items | {m}) for m in moves):
                    result = False
                    break
        if config.memoize:
            memo[plan_items] = result
        return result

    decision = p1_wins(frozenset())
    return GameVerdict(decision)
