import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfresil.model import (
    BoD,
    CyclicOrder,
    DanglingReference,
    Entailment,
    Extensional,
    GateSemantics,
    InvalidSeed,
    MalformedConstraint,
    Relation,
    SoD,
    Status,
    WorkflowPolicy,
    check_validity,
    constraint_status,
    is_causally_closed,
    make_policy,
    project,
    transitive_closure,
    validate_policy,
)


def sod_pair(users=("u1", "u2")):
    return make_policy(["a", "b"], users, order=[("a", "b")], constraints=[SoD("a", "b")])


class TestValidatePolicy:
    def test_accepts_sod_pair(self):
        policy = sod_pair()
        assert policy.checked
        assert policy.order_closure == frozenset({("a", "b")})

    def test_cyclic_order_rejected(self):
        with pytest.raises(CyclicOrder):
            make_policy(["a", "b"], ["u1"], order=[("a", "b"), ("b", "a")])

    def test_reflexive_order_rejected(self):
        with pytest.raises(CyclicOrder):
            make_policy(["a"], ["u1"], order=[("a", "a")])

    def test_sod_same_step_rejected(self):
        with pytest.raises(MalformedConstraint):
            make_policy(["a"], ["u1"], constraints=[SoD("a", "a")])

    def test_dangling_auth_rejected(self):
        with pytest.raises(DanglingReference):
            validate_policy(
                WorkflowPolicy(("a",), frozenset(), ("u1",), frozenset({("a", "zz")}), ())
            )

    def test_dangling_constraint_step_rejected(self):
        with pytest.raises(DanglingReference):
            make_policy(["a"], ["u1"], constraints=[SoD("a", "zz")])

    def test_extensional_arity_mismatch_rejected(self):
        bad = Extensional(scope=("a",), allowed=frozenset({("u1", "u2")}))
        with pytest.raises(MalformedConstraint):
            make_policy(["a"], ["u1", "u2"], constraints=[bad])

    def test_transitive_reduction_of_chain(self):
        policy = make_policy(
            ["a", "b", "c"], ["u1"], order=[("a", "b"), ("b", "c"), ("a", "c")]
        )
        assert policy.order_reduction == frozenset({("a", "b"), ("b", "c")})
        assert policy.order_closure == frozenset({("a", "b"), ("b", "c"), ("a", "c")})

    def test_closure_matches_graph_reachability(self):
        # independent oracle: DFS reachability
        import random

        rng = random.Random(7)
        for _ in range(60):
            n = rng.randint(1, 5)
            steps = [f"s{i}" for i in range(n)]
            pairs = {
                (steps[i], steps[j])
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.4
            }
            adj = {s: [b for (a, b) in pairs if a == s] for s in steps}

            def reach(src):
                seen, stack = set(), [src]
                while stack:
                    for nxt in adj[stack.pop()]:
                        if nxt not in seen:
                            seen.add(nxt)
                            stack.append(nxt)
                return seen

            expected = {(a, b) for a in steps for b in reach(a)}
            assert transitive_closure(pairs, steps) == frozenset(expected)


class TestCausalClosure:
    def test_empty_domain(self):
        assert is_causally_closed(set(), sod_pair())

    def test_missing_predecessor(self):
        assert not is_causally_closed({"b"}, sod_pair())

    def test_minimal_step_alone(self):
        assert is_causally_closed({"a"}, sod_pair())


class TestConstraintStatus:
    def test_sod_pending(self):
        assert constraint_status(SoD("a", "b"), {"a": "u1"}) is Status.PENDING

    def test_sod_violated(self):
        assert constraint_status(SoD("a", "b"), {"a": "u1", "b": "u1"}) is Status.VIOLATED

    def test_sod_satisfied(self):
        assert constraint_status(SoD("a", "b"), {"a": "u1", "b": "u2"}) is Status.SATISFIED

    def test_bod(self):
        assert constraint_status(BoD("a", "b"), {"a": "u1", "b": "u1"}) is Status.SATISFIED
        assert constraint_status(BoD("a", "b"), {"a": "u1", "b": "u2"}) is Status.VIOLATED

    def test_entailment_satisfied(self):
        rel = Relation("r", frozenset({("u1", "u2")}))
        c = Entailment(rel, ("a",), ("b",))
        assert constraint_status(c, {"a": "u1", "b": "u2"}) is Status.SATISFIED
        assert constraint_status(c, {"a": "u2", "b": "u1"}) is Status.VIOLATED

    def test_extensional(self):
        c = Extensional(("a", "b"), frozenset({("u1", "u2")}))
        assert constraint_status(c, {"a": "u1", "b": "u2"}) is Status.SATISFIED
        assert constraint_status(c, {"a": "u2", "b": "u1"}) is Status.VIOLATED

    def test_gate_semantics_and(self):
        c = GateSemantics(
            kind="and",
            out_step="g",
            in_steps=("a", "b"),
            true_users=frozenset({"t1"}),
            false_users=frozenset({"f1"}),
        )
        assert constraint_status(c, {"g": "t1", "a": "t1", "b": "t1"}) is Status.SATISFIED
        assert constraint_status(c, {"g": "t1", "a": "t1", "b": "f1"}) is Status.VIOLATED
        assert constraint_status(c, {"g": "f1", "a": "t1", "b": "f1"}) is Status.SATISFIED

    def test_gate_extensional_agrees_with_permits(self):
        c = GateSemantics(
            kind="or",
            out_step="g",
            in_steps=("a", "b"),
            true_users=frozenset({"t1", "t2"}),
            false_users=frozenset({"f1"}),
        )
        ext = c.to_extensional()
        users = sorted(c.true_users | c.false_users)
        for combo in itertools.product(users, repeat=3):
            plan = dict(zip(ext.scope, combo))
            assert (constraint_status(ext, plan) is Status.SATISFIED) == c.permits(plan)

    @given(
        st.dictionaries(st.sampled_from(["a", "b"]), st.sampled_from(["u1", "u2"])),
        st.sampled_from(["a", "b"]),
        st.sampled_from(["u1", "u2"]),
    )
    @settings(max_examples=200)
    def test_pending_never_comes_back(self, plan, extra_step, extra_user):
        """Adding assignments can move Pending only to Satisfied/Violated."""
        c = SoD("a", "b")
        before = constraint_status(c, plan)
        extended = dict(plan)
        extended.setdefault(extra_step, extra_user)
        after = constraint_status(c, extended)
        if before is not Status.PENDING:
            assert after is before
        if len(extended) == 2:
            assert after is not Status.PENDING


class TestCheckValidity:
    def test_empty_plan_valid(self):
        assert check_validity({}, sod_pair()).valid

    def test_distinct_users_valid(self):
        assert check_validity({"a": "u1", "b": "u2"}, sod_pair()).valid

    def test_same_user_invalid(self):
        result = check_validity({"a": "u1", "b": "u1"}, sod_pair())
        assert not result.valid
        assert result.violated == (SoD("a", "b"),)
        assert result.causally_closed

    def test_closure_flag(self):
        result = check_validity({"b": "u1"}, sod_pair())
        assert not result.valid
        assert not result.causally_closed

    def test_unauthorized(self):
        policy = make_policy(["a"], ["u1", "u2"], auth=[("a", "u1")])
        result = check_validity({"a": "u2"}, policy)
        assert not result.valid
        assert result.unauthorized == (("a", "u2"),)


def brute_complete_plans(policy):
    """Matrix-style enumeration over all of U^S, filtered by check_validity."""

    out = []
    for combo in itertools.product(policy.users, repeat=len(policy.steps)):
        plan = dict(zip(policy.steps, combo))
        if check_validity(plan, policy).valid:
            out.append(plan)
    return out


class TestProject:
    def test_sod_residual(self):
        policy = make_policy(["a", "b"], ["u1", "u2"], constraints=[SoD("a", "b")])
        residual = project(policy, "a", "u1")
        assert residual.steps == ("b",)
        (c,) = residual.constraints
        assert c == Extensional(("b",), frozenset({("u2",)}))

    def test_bod_residual(self):
        policy = make_policy(["a", "b"], ["u1", "u2"], constraints=[BoD("a", "b")])
        (c,) = project(policy, "a", "u1").constraints
        assert c == Extensional(("b",), frozenset({("u1",)}))

    def test_seed_must_be_minimal(self):
        with pytest.raises(InvalidSeed):
            project(sod_pair(), "b", "u1")

    def test_seed_must_be_authorized(self):
        policy = make_policy(["a"], ["u1", "u2"], auth=[("a", "u1")])
        with pytest.raises(InvalidSeed):
            project(policy, "a", "u2")

    def test_unary_constraint_blocks_seed(self):
        only_u2 = Extensional(("a",), frozenset({("u2",)}))
        policy = make_policy(["a", "b"], ["u1", "u2"], constraints=[only_u2])
        with pytest.raises(InvalidSeed):
            project(policy, "a", "u1")
        assert project(policy, "a", "u2").steps == ("b",)

    def _seeds(self, policy):
        from wfresil.model import seed_error

        return [
            (s, u)
            for s in policy.steps
            for u in policy.users
            if seed_error(policy, s, u) is None
        ]

    @pytest.mark.parametrize("seed", range(40))
    def test_projection_soundness_exhaustive(self, seed):
        """Valid plans of project(W, s, u) are exactly the valid plans of W
        through s -> u, with that assignment removed.  Exhaustive over all
        valid seeds of randomized desk-scale instances."""

        from wfresil.harness import GenParams, random_policy

        policy = random_policy(
            GenParams(
                steps=(1, 3),
                users=(1, 3),
                auth_density=0.8,
                sod=(0, 2),
                entailments=(0, 1),
                seed=seed,
            )
        )
        whole = brute_complete_plans(policy)
        for s, u in self._seeds(policy):
            residual = project(policy, s, u)
            got = {
                tuple(sorted(p.items())) for p in brute_complete_plans(residual)
            }
            expected = {
                tuple(sorted((k, v) for k, v in p.items() if k != s))
                for p in whole
                if p[s] == u
            }
            assert got == expected, f"projection mismatch for seed {(s, u)}"

    @pytest.mark.parametrize("seed", range(20))
    def test_prefix_of_valid_plan_is_valid(self, seed):
        """Every order-respecting prefix of a valid complete plan is valid."""

        from wfresil.harness import GenParams, random_policy

        policy = random_policy(
            GenParams(steps=(1, 3), users=(1, 3), auth_density=0.8, sod=(0, 2), seed=seed)
        )
        closure = policy.closure()
        for plan in brute_complete_plans(policy):
            remaining = list(policy.steps)
            taken: dict = {}
            while remaining:
                ready = [
                    s
                    for s in remaining
                    if all(a in taken for (a, b) in closure if b == s)
                ]
                s = ready[0]
                taken[s] = plan[s]
                remaining.remove(s)
                assert check_validity(taken, policy).valid
