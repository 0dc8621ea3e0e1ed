import random

import pytest

from wfresil.dsl import DslSyntaxError, PolicyDocument, document_for, parse_policy, serialize_policy
from wfresil.model import BoD, CyclicOrder, Entailment, Extensional, Relation, SoD, WorkflowPolicy, validate_policy


SOD_TEXT = """\
steps: a b
users: u1 u2
auth: a u1; a u2; b u1; b u2
constraint: sod a b
"""


class TestParse:
    def test_sod_example(self):
        doc = parse_policy(SOD_TEXT)
        assert doc.policy.steps == ("a", "b")
        assert doc.policy.users == ("u1", "u2")
        assert len(doc.policy.auth) == 4
        assert doc.policy.constraints == (SoD("a", "b"),)

    def test_cyclic_order_propagates(self):
        with pytest.raises(CyclicOrder):
            parse_policy("steps: b\nusers: u\norder: b < b\n")

    def test_positioned_error(self):
        with pytest.raises(DslSyntaxError) as err:
            parse_policy("steps: a\nusers: u\nconstraint: sod a\n")
        assert err.value.line == 3

    def test_unknown_clause(self):
        with pytest.raises(DslSyntaxError):
            parse_policy("steps: a\nusers: u\nfrobnicate: yes\n")

    def test_comments_and_blank_lines(self):
        doc = parse_policy("# header\nsteps: a  # trailing\n\nusers: u\n")
        assert doc.policy.steps == ("a",)

    def test_relation_and_entailment(self):
        doc = parse_policy(
            "steps: a b\nusers: u1 u2\nauth: a u1; b u2\n"
            "relation boss: u1 u2\n"
            "constraint: entail boss { a } { b }\n"
            "budget: 2\n"
        )
        (c,) = doc.policy.constraints
        assert isinstance(c, Entailment) and c.rel.pairs == frozenset({("u1", "u2")})
        assert doc.default_budget == 2

    def test_unknown_relation(self):
        with pytest.raises(DslSyntaxError):
            parse_policy("steps: a b\nusers: u\nconstraint: entail nope { a } { b }\n")

    def test_allow_positional_tuples(self):
        doc = parse_policy(
            "steps: a b\nusers: u1 u2\nauth: a u1; a u2; b u1; b u2\n"
            "constraint: allow { a b } u1 u2; u2 u1\n"
        )
        (c,) = doc.policy.constraints
        assert c == Extensional(("a", "b"), frozenset({("u1", "u2"), ("u2", "u1")}))

    def test_missing_steps_clause(self):
        with pytest.raises(DslSyntaxError):
            parse_policy("users: u\n")


class TestSerialize:
    def test_empty_policy_canonical(self):
        doc = parse_policy("steps:\nusers:\n")
        assert serialize_policy(doc) == "steps:\nusers:\n"

    def test_sod_reserialization_is_canonical(self):
        doc = parse_policy(SOD_TEXT)
        text = serialize_policy(doc)
        assert text == (
            "steps: a b\n"
            "users: u1 u2\n"
            "auth: a u1; a u2; b u1; b u2\n"
            "constraint: sod a b\n"
        )

    def test_round_trip_identity(self):
        doc = parse_policy(SOD_TEXT)
        assert parse_policy(serialize_policy(doc)) == doc


def random_document(rng: random.Random) -> PolicyDocument:
    n_steps = rng.randint(0, 4)
    n_users = rng.randint(0, 4)
    steps = [f"s{i}" for i in range(n_steps)]
    users = [f"u{i}" for i in range(n_users)]
    order = {
        (steps[i], steps[j])
        for i in range(n_steps)
        for j in range(i + 1, n_steps)
        if rng.random() < 0.3
    }
    auth = {(s, u) for s in steps for u in users if rng.random() < 0.6}
    relations = []
    constraints = []
    pairs = [(a, b) for i, a in enumerate(steps) for b in steps[i + 1 :]]
    if pairs and users:
        for _ in range(rng.randint(0, 2)):
            kind = rng.choice(["sod", "bod", "entail", "allow"])
            s1, s2 = rng.choice(pairs)
            if kind == "sod":
                constraints.append(SoD(s1, s2))
            elif kind == "bod":
                constraints.append(BoD(s1, s2))
            elif kind == "entail":
                name = f"r{len(relations)}"
                pool = [(a, b) for a in users for b in users]
                rel = Relation(
                    name, frozenset(rng.sample(pool, rng.randint(0, len(pool))))
                )
                relations.append(rel)
                constraints.append(Entailment(rel, (s1,), (s2,)))
            else:
                scope = (s1, s2)
                allowed = {
                    (rng.choice(users), rng.choice(users))
                    for _ in range(rng.randint(0, 3))
                }
                constraints.append(Extensional(scope, frozenset(allowed)))
    policy = validate_policy(
        WorkflowPolicy(
            steps=tuple(steps),
            order=frozenset(order),
            users=tuple(users),
            auth=frozenset(auth),
            constraints=tuple(constraints),
        )
    )
    budget = rng.choice([None, 0, 1, 3])
    return PolicyDocument(
        policy=policy, named_relations=tuple(relations), default_budget=budget
    )


class TestRoundTripProperty:
    def test_hundred_random_documents(self):
        rng = random.Random(42)
        for i in range(100):
            doc = random_document(rng)
            text = serialize_policy(doc)
            again = parse_policy(text)
            assert again == doc, f"round trip broke on sample {i}:\n{text}"
            assert serialize_policy(again) == text  # serialize is injective / stable

    def test_document_for_collects_relations(self):
        rel = Relation("r", frozenset({("u1", "u1")}))
        policy = validate_policy(
            WorkflowPolicy(
                ("a", "b"),
                frozenset(),
                ("u1",),
                frozenset({("a", "u1"), ("b", "u1")}),
                (Entailment(rel, ("a",), ("b",)),),
            )
        )
        doc = document_for(policy, budget=1)
        assert parse_policy(serialize_policy(doc)).policy == policy


class TestParseTotality:
    def test_fuzz_never_crashes(self):
        """Every input yields a document or a positioned error (10^4 samples)."""

        rng = random.Random(7)
        alphabet = "abAB01_ :;<>{}#\n\t-"
        for _ in range(10_000):
            text = "".join(
                rng.choice(alphabet) for _ in range(rng.randint(0, 60))
            )
            try:
                parse_policy(text)
            except (DslSyntaxError, ValueError):
                pass  # positioned syntax error or semantic validation error

    def test_fuzz_random_bytes(self):
        rng = random.Random(11)
        for _ in range(2_000):
            blob = bytes(rng.randrange(256) for _ in range(rng.randint(0, 40)))
            try:
                parse_policy(blob.decode("utf-8", errors="replace"))
            except (DslSyntaxError, ValueError):
                pass
