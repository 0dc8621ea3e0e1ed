"""Small grounder and stable-model solver for saturation-style programs.

This backs the solver bridge when no external ASP system is installed.  It
speaks the clingo subprocess protocol (program on stdin, ``Answer:`` lines on
stdout, exit codes 10/20) so the bridge treats it exactly like any other
solver executable: ``python -m wfresil.asplite``.

Supported fragment (what the program emitters produce, plus a little):

* facts, normal rules, integrity constraints;
* disjunctive heads ``a ; b :- body`` and conditional head elements
  ``h(X) : c(X)`` (the disjunction ranges over instances whose condition
  holds in the model; an element never derives its own condition);
* choice rules ``l { h(X) : c(X) } u :- body`` with optional bounds;
* body literals: atoms, ``not`` atoms, comparisons, and lower-bounded
  cardinality literals ``k { e : c }``;
* ``%`` comments.

Semantics: disjunctive stable models.  Choice rules are translated into
auxiliary disjunctive pairs plus bound constraints; candidates are classical
models found by a small DPLL with completion-style support pruning, and each
candidate is certified by an explicit reduct minimality check (no proper
subset may satisfy the reduct), which is what makes the saturation technique
come out right.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from typing import Iterable, Iterator

Term = int | str  # variables are strings starting with an uppercase letter or '_'


def is_var(t: Term) -> bool:
    return isinstance(t, str) and (t[0].isupper() or t[0] == "_")


Atom = tuple[str, tuple[Term, ...]]  # (predicate, args)


@dataclass(frozen=True)
class Comparison:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class CardLiteral:
    bound: int
    elements: tuple[tuple[Atom, tuple[Atom, ...]], ...]  # (atom, condition)


@dataclass(frozen=True)
class Rule:
    heads: tuple[tuple[Atom, tuple[Atom, ...]], ...]  # (atom, condition)
    pos: tuple[Atom, ...]
    neg: tuple[Atom, ...]
    cmps: tuple[Comparison, ...]
    cards: tuple[CardLiteral, ...]
    choice: tuple[int | None, int | None] | None = None  # (lower, upper)


class AspSyntaxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<comment>%[^\n]*)
      | (?P<int>\d+)
      | (?P<name>[a-z_][A-Za-z0-9_]*)
      | (?P<var>[A-Z][A-Za-z0-9_]*)
      | (?P<punct>:-|!=|<=|>=|=|<|>|[(){},;:.])
    )""",
    re.VERBOSE,
)

_CMP_OPS = {"!=", "=", "<", "<=", ">", ">="}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise AspSyntaxError(f"cannot tokenize near {text[pos:pos + 20]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "comment":
            tokens.append((kind, m.group(kind)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.i = 0

    def peek(self, offset: int = 0) -> tuple[str, str]:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else ("eof", "")

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, v = self.next()
        if v != value:
            raise AspSyntaxError(f"expected {value!r}, got {v!r}")

    def at(self, value: str) -> bool:
        return self.peek()[1] == value

    def term(self) -> Term:
        kind, v = self.next()
        if kind == "int":
            return int(v)
        if kind in ("name", "var"):
            return v
        raise AspSyntaxError(f"expected term, got {v!r}")

    def atom(self) -> Atom:
        kind, v = self.next()
        if kind != "name":
            raise AspSyntaxError(f"expected predicate name, got {v!r}")
        args: list[Term] = []
        if self.at("("):
            self.next()
            args.append(self.term())
            while self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
        return (v, tuple(args))

    def condition(self) -> tuple[Atom, ...]:
        # after ':' inside an element: comma-separated atoms; elements are
        # closed by ';', '}', ':-', or '.'
        conds = [self.atom()]
        while self.at(",") and self.peek(1)[0] == "name":
            self.next()
            conds.append(self.atom())
        return tuple(conds)

    def element(self) -> tuple[Atom, tuple[Atom, ...]]:
        a = self.atom()
        cond: tuple[Atom, ...] = ()
        if self.at(":"):
            self.next()
            cond = self.condition()
        return (a, cond)

    def elements(self, closer: str) -> tuple[tuple[Atom, tuple[Atom, ...]], ...]:
        out = [self.element()]
        while self.at(";"):
            self.next()
            out.append(self.element())
        self.expect(closer)
        return tuple(out)

    def body(self) -> tuple[list[Atom], list[Atom], list[Comparison], list[CardLiteral]]:
        pos: list[Atom] = []
        neg: list[Atom] = []
        cmps: list[Comparison] = []
        cards: list[CardLiteral] = []
        while True:
            kind, v = self.peek()
            if v == "not":
                self.next()
                neg.append(self.atom())
            elif kind == "int" and self.peek(1)[1] == "{":
                bound = int(self.next()[1])
                self.expect("{")
                cards.append(CardLiteral(bound, self.elements("}")))
            elif kind in ("var", "int"):
                left = self.term()
                op = self.next()[1]
                if op not in _CMP_OPS:
                    raise AspSyntaxError(f"expected comparison operator, got {op!r}")
                cmps.append(Comparison(op, left, self.term()))
            elif kind == "name":
                # could be an atom or the left side of a comparison
                if self.peek(1)[1] in _CMP_OPS and self.peek(1)[1] != "=":
                    left = self.term()
                    op = self.next()[1]
                    cmps.append(Comparison(op, left, self.term()))
                else:
                    pos.append(self.atom())
            else:
                raise AspSyntaxError(f"expected body literal, got {v!r}")
            if self.at(","):
                self.next()
                continue
            break
        return pos, neg, cmps, cards

    def statement(self) -> Rule:
        heads: tuple[tuple[Atom, tuple[Atom, ...]], ...] = ()
        choice: tuple[int | None, int | None] | None = None
        kind, v = self.peek()
        if v == ":-":
            pass  # integrity constraint
        elif v == "{" or (kind == "int" and self.peek(1)[1] == "{"):
            lower: int | None = None
            if kind == "int":
                lower = int(self.next()[1])
            self.expect("{")
            heads = self.elements("}")
            upper: int | None = None
            if self.peek()[0] == "int":
                upper = int(self.next()[1])
            choice = (lower, upper)
        else:
            heads = (self.element(),)
            while self.at(";"):
                self.next()
                heads = heads + (self.element(),)
        pos: list[Atom] = []
        neg: list[Atom] = []
        cmps: list[Comparison] = []
        cards: list[CardLiteral] = []
        if self.at(":-"):
            self.next()
            pos, neg, cmps, cards = self.body()
        self.expect(".")
        return Rule(heads, tuple(pos), tuple(neg), tuple(cmps), tuple(cards), choice)


def parse_program(text: str) -> list[Rule]:
    parser = _Parser(_tokenize(text))
    rules = []
    while parser.peek()[0] != "eof":
        rules.append(parser.statement())
    return rules


# ---------------------------------------------------------------------------
# Grounding
# ---------------------------------------------------------------------------


def _match(pattern: Atom, ground: Atom, subst: dict[str, Term]) -> dict[str, Term] | None:
    if pattern[0] != ground[0] or len(pattern[1]) != len(ground[1]):
        return None
    out = subst
    for p, g in zip(pattern[1], ground[1]):
        if is_var(p):
            bound = out.get(p)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[p] = g
            elif bound != g:
                return None
        elif p != g:
            return None
    return out


def _substitute(atom: Atom, subst: dict[str, Term]) -> Atom:
    return (atom[0], tuple(subst.get(a, a) if is_var(a) else a for a in atom[1]))


def _is_ground(atom: Atom) -> bool:
    return not any(is_var(a) for a in atom[1])


def _cmp_holds(c: Comparison, subst: dict[str, Term]) -> bool:
    def val(t: Term):
        t = subst.get(t, t) if is_var(t) else t
        if is_var(t):
            raise AspSyntaxError(f"comparison on unbound variable {t!r}")
        return (0, t) if isinstance(t, int) else (1, t)

    l, r = val(c.left), val(c.right)
    return {
        "=": l == r,
        "!=": l != r,
        "<": l < r,
        "<=": l <= r,
        ">": l > r,
        ">=": l >= r,
    }[c.op]


class _Grounder:
    def __init__(self, rules: list[Rule]):
        self.rules = rules
        self.possible: dict[str, set[Atom]] = {}

    def _add_possible(self, atom: Atom) -> bool:
        bucket = self.possible.setdefault(atom[0], set())
        if atom in bucket:
            return False
        bucket.add(atom)
        return True

    def _joins(self, pos: Iterable[Atom], cmps: Iterable[Comparison]) -> Iterator[dict[str, Term]]:
        """All substitutions matching the positive literals against the
        possible-atom base, filtered by the comparisons that are bound."""

        substs: list[dict[str, Term]] = [{}]
        for pat in pos:
            new: list[dict[str, Term]] = []
            for s in substs:
                inst = _substitute(pat, s)
                for g in self.possible.get(pat[0], ()):
                    s2 = _match(inst, g, s)
                    if s2 is not None:
                        new.append(s2 if s2 is not s else dict(s))
            substs = new
            if not substs:
                return
        for s in substs:
            if all(_cmp_holds(c, s) for c in cmps):
                yield s

    def _expand_elements(self, elements, subst) -> list[tuple[Atom, tuple[Atom, ...]]]:
        """Instantiate element-local variables against the possible base."""

        out = []
        for atom, cond in elements:
            locals_: list[dict[str, Term]] = [subst]
            viable = True
            for c in cond:
                new = []
                for s in locals_:
                    inst = _substitute(c, s)
                    for g in self.possible.get(c[0], ()):
                        s2 = _match(inst, g, s)
                        if s2 is not None:
                            new.append(s2 if s2 is not s else dict(s))
                locals_ = new
                if not locals_:
                    viable = False
                    break
            if not viable:
                continue
            for s in locals_:
                ga = _substitute(atom, s)
                if not _is_ground(ga):
                    raise AspSyntaxError(f"unsafe element atom {ga!r}")
                gc = tuple(_substitute(c, s) for c in cond)
                out.append((ga, gc))
        return out

    def ground(self) -> list[Rule]:
        # Fixpoint over the possibly-true base (negation ignored).
        changed = True
        while changed:
            changed = False
            for rule in self.rules:
                for subst in self._joins(rule.pos, rule.cmps):
                    for atom, _ in self._expand_elements(rule.heads, subst):
                        if self._add_possible(atom):
                            changed = True

        ground_rules: list[Rule] = []
        seen: set = set()
        for rule in self.rules:
            for subst in self._joins(rule.pos, rule.cmps):
                pos = tuple(_substitute(a, subst) for a in rule.pos)
                neg_all = tuple(_substitute(a, subst) for a in rule.neg)
                if any(not _is_ground(a) for a in pos + neg_all):
                    raise AspSyntaxError(f"unsafe rule: {rule}")
                # negative literals over impossible atoms are trivially true
                neg = tuple(
                    a for a in neg_all if a in self.possible.get(a[0], ())
                )
                heads = tuple(self._expand_elements(rule.heads, subst))
                cards = tuple(
                    CardLiteral(c.bound, tuple(self._expand_elements(c.elements, subst)))
                    for c in rule.cards
                )
                g = Rule(heads, pos, neg, (), cards, rule.choice)
                key = (heads, pos, neg, cards, rule.choice)
                if key not in seen:
                    seen.add(key)
                    ground_rules.append(g)
        return ground_rules


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


@dataclass
class _Option:
    """One way to satisfy a clause: a conjunction of requirements."""

    trues: tuple[int, ...] = ()
    falses: tuple[int, ...] = ()
    cards_ge: tuple[tuple[int, tuple[tuple[int, tuple[int, ...]], ...]], ...] = ()
    cards_lt: tuple[tuple[int, tuple[tuple[int, tuple[int, ...]], ...]], ...] = ()


class _Clause:
    __slots__ = ("options",)

    def __init__(self, options: list[_Option]):
        self.options = options


class Solver:
    """Ground-program solver: enumerate stable models deterministically."""

    def __init__(self, ground_rules: list[Rule]):
        self.atom_ids: dict[Atom, int] = {}
        self.atoms: list[Atom] = []
        self.facts: set[int] = set()
        self.rules: list[dict] = []  # solver-form disjunctive rules
        self.constraints: list[dict] = []
        self._aux_count = 0
        self._build(ground_rules)

    # -- construction -------------------------------------------------------

    def _aid(self, atom: Atom) -> int:
        i = self.atom_ids.get(atom)
        if i is None:
            i = len(self.atoms)
            self.atom_ids[atom] = i
            self.atoms.append(atom)
        return i

    def _aux(self) -> int:
        self._aux_count += 1
        return self._aid(("__aux", (self._aux_count,)))

    def _card(self, c: CardLiteral):
        elems = tuple(
            (self._aid(a), tuple(self._aid(x) for x in cond)) for a, cond in c.elements
        )
        return (c.bound, elems)

    def _build(self, ground_rules: list[Rule]) -> None:
        plain: list[Rule] = []
        for r in ground_rules:
            if r.choice is None and len(r.heads) == 1 and not r.heads[0][1] and not (
                r.pos or r.neg or r.cards
            ):
                self.facts.add(self._aid(r.heads[0][0]))
            else:
                plain.append(r)

        for r in plain:
            pos = [self._aid(a) for a in r.pos]
            neg = [self._aid(a) for a in r.neg]
            cards = [self._card(c) for c in r.cards]
            if r.choice is not None:
                lower, upper = r.choice
                elems = []
                for atom, cond in r.heads:
                    a = self._aid(atom)
                    cond_ids = tuple(self._aid(c) for c in cond)
                    aux = self._aux()
                    elems.append((a, cond_ids))
                    self.rules.append(
                        {
                            "heads": [(a, ())],
                            "pos": pos + list(cond_ids),
                            "neg": neg + [aux],
                            "cards": cards,
                        }
                    )
                    self.rules.append(
                        {
                            "heads": [(aux, ())],
                            "pos": pos + list(cond_ids),
                            "neg": neg + [a],
                            "cards": cards,
                        }
                    )
                celems = tuple(elems)
                if lower is not None and lower > 0:
                    self.constraints.append(
                        {"pos": pos, "neg": neg, "cards": cards,
                         "cards_lt": [(lower, celems)]}
                    )
                if upper is not None:
                    self.constraints.append(
                        {"pos": pos, "neg": neg,
                         "cards": cards + [(upper + 1, celems)], "cards_lt": []}
                    )
            elif r.heads:
                self.rules.append(
                    {
                        "heads": [
                            (self._aid(a), tuple(self._aid(c) for c in cond))
                            for a, cond in r.heads
                        ],
                        "pos": pos,
                        "neg": neg,
                        "cards": cards,
                    }
                )
            else:
                self.constraints.append(
                    {"pos": pos, "neg": neg, "cards": cards, "cards_lt": []}
                )

    # -- clause assembly ----------------------------------------------------

    def _body_options(self, rule: dict) -> list[_Option]:
        opts = [_Option(falses=(b,)) for b in rule["pos"]]
        opts += [_Option(trues=(b,)) for b in rule["neg"]]
        opts += [_Option(cards_lt=(c,)) for c in rule["cards"]]
        opts += [_Option(cards_ge=(c,)) for c in rule.get("cards_lt", ())]
        return opts

    def _candidate_clauses(self) -> list[_Clause]:
        clauses = []
        for rule in self.rules:
            opts = self._body_options(rule)
            for h, cond in rule["heads"]:
                opts.append(_Option(trues=(h,) + cond))
            clauses.append(_Clause(opts))
        for con in self.constraints:
            clauses.append(_Clause(self._body_options(con)))
        # completion-style support: a true atom needs a rule that derives it
        support: dict[int, list[_Option]] = {}
        for rule in self.rules:
            for h, cond in rule["heads"]:
                support.setdefault(h, []).append(
                    _Option(
                        trues=tuple(rule["pos"]) + cond,
                        falses=tuple(rule["neg"]),
                        cards_ge=tuple(rule["cards"]),
                    )
                )
        for a in range(len(self.atoms)):
            if a in self.facts:
                continue
            clauses.append(_Clause([_Option(falses=(a,))] + support.get(a, [])))
        return clauses

    def _reduct_clauses(self, model: list[bool]) -> list[_Clause] | None:
        """Clauses demanding a proper submodel of the reduct; None when the
        model has no non-fact atoms (trivially stable)."""

        clauses = []
        for rule in self.rules:
            if any(model[b] for b in rule["neg"]):
                continue  # dropped by the reduct
            if any(not model[b] for b in rule["pos"]):
                continue  # body can never hold inside the submodel
            opts = [_Option(falses=(b,)) for b in rule["pos"]]
            opts += [_Option(cards_lt=(c,)) for c in rule["cards"]]
            for h, cond in rule["heads"]:
                need = (h,) + cond
                if all(model[x] for x in need):
                    opts.append(_Option(trues=need))
            clauses.append(_Clause(opts))
        shrink = [
            _Option(falses=(a,))
            for a in range(len(self.atoms))
            if model[a] and a not in self.facts
        ]
        if not shrink:
            return None
        clauses.append(_Clause(shrink))
        return clauses

    # -- DPLL ---------------------------------------------------------------

    def _enumerate(
        self, clauses: list[_Clause], frozen_false: list[bool] | None = None
    ) -> Iterator[list[bool]]:
        n = len(self.atoms)
        UNKNOWN, TRUE, FALSE = 0, 1, 2
        values = [UNKNOWN] * n
        touched: dict[int, list[int]] = {a: [] for a in range(n)}
        for ci, cl in enumerate(clauses):
            involved = set()
            for o in cl.options:
                involved.update(o.trues)
                involved.update(o.falses)
                for bound, elems in o.cards_ge + o.cards_lt:
                    for a, cond in elems:
                        involved.add(a)
                        involved.update(cond)
            for a in involved:
                touched[a].append(ci)

        def card_counts(card, vals):
            bound, elems = card
            true_n = 0
            possible_n = 0
            for a, cond in elems:
                comps = (a,) + cond
                if all(vals[x] == TRUE for x in comps):
                    true_n += 1
                    possible_n += 1
                elif all(vals[x] != FALSE for x in comps):
                    possible_n += 1
            return true_n, possible_n

        def opt_state(o: _Option, vals) -> int:
            # 0 dead, 1 satisfied, 2 pending
            sat = True
            for a in o.trues:
                if vals[a] == FALSE:
                    return 0
                if vals[a] == UNKNOWN:
                    sat = False
            for a in o.falses:
                if vals[a] == TRUE:
                    return 0
                if vals[a] == UNKNOWN:
                    sat = False
            for card in o.cards_ge:
                t, p = card_counts(card, vals)
                if p < card[0]:
                    return 0
                if t < card[0]:
                    sat = False
            for card in o.cards_lt:
                t, p = card_counts(card, vals)
                if t >= card[0]:
                    return 0
                if p >= card[0]:
                    sat = False
            return 1 if sat else 2

        trail: list[int] = []

        def assign(a: int, v: int) -> bool:
            if values[a] != UNKNOWN:
                return values[a] == v
            values[a] = v
            trail.append(a)
            return True

        def propagate(dirty: list[int]) -> bool:
            queue = list(dirty)
            qi = 0
            while qi < len(queue):
                pending_clauses = set()
                while qi < len(queue):
                    pending_clauses.update(touched[queue[qi]])
                    qi += 1
                before = len(trail)
                for ci in sorted(pending_clauses):
                    cl = clauses[ci]
                    live = []
                    satisfied = False
                    for o in cl.options:
                        st = opt_state(o, values)
                        if st == 1:
                            satisfied = True
                            break
                        if st == 2:
                            live.append(o)
                    if satisfied:
                        continue
                    if not live:
                        return False
                    if len(live) == 1:
                        o = live[0]
                        for a in o.trues:
                            if not assign(a, TRUE):
                                return False
                        for a in o.falses:
                            if not assign(a, FALSE):
                                return False
                queue.extend(trail[before:])
            return True

        def final_check() -> bool:
            return all(
                any(opt_state(o, values) == 1 for o in cl.options) for cl in clauses
            )

        def search() -> Iterator[list[bool]]:
            a = next((i for i in range(n) if values[i] == UNKNOWN), None)
            if a is None:
                if final_check():
                    yield [v == TRUE for v in values]
                return
            for v in (TRUE, FALSE):
                mark = len(trail)
                values[a] = v
                trail.append(a)
                if propagate([a]):
                    yield from search()
                while len(trail) > mark:
                    values[trail.pop()] = UNKNOWN

        base: list[int] = []
        for a in self.facts:
            values[a] = TRUE
            trail.append(a)
            base.append(a)
        if frozen_false:
            for a in range(n):
                if frozen_false[a] and values[a] == UNKNOWN:
                    values[a] = FALSE
                    trail.append(a)
                    base.append(a)
        if propagate(base):
            yield from search()

    # -- stable models ------------------------------------------------------

    def is_stable(self, model: list[bool]) -> bool:
        clauses = self._reduct_clauses(model)
        if clauses is None:
            return True
        frozen = [not model[a] for a in range(len(self.atoms))]
        for _ in self._enumerate(clauses, frozen_false=frozen):
            return False
        return True

    def stable_models(self) -> Iterator[set[Atom]]:
        clauses = self._candidate_clauses()
        for model in self._enumerate(clauses):
            if self.is_stable(model):
                yield {
                    self.atoms[a]
                    for a in range(len(self.atoms))
                    if model[a] and self.atoms[a][0] != "__aux"
                }


def solve_text(text: str, models: int = 1) -> tuple[list[set[Atom]], bool]:
    """Ground and solve; returns (found models, satisfiable)."""

    rules = parse_program(text)
    ground = _Grounder(rules).ground()
    solver = Solver(ground)
    found = []
    for m in solver.stable_models():
        found.append(m)
        if models and len(found) >= models:
            break
    return found, bool(found)


def format_atom(atom: Atom) -> str:
    pred, args = atom
    if not args:
        return pred
    return f"{pred}({','.join(str(a) for a in args)})"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wfresil-asp", description="Minimal ASP solver (clingo-compatible protocol)"
    )
    parser.add_argument("files", nargs="*", help="program files; '-' or none reads stdin")
    parser.add_argument("--models", type=int, default=1)
    args = parser.parse_args(argv)

    text = ""
    for f in args.files or ["-"]:
        if f == "-":
            text += sys.stdin.read()
        else:
            with open(f, encoding="utf-8") as fh:
                text += fh.read()

    try:
        found, sat = solve_text(text, models=args.models)
    except AspSyntaxError as exc:
        print(f"*** ERROR: {exc}", file=sys.stderr)
        return 65

    print("wfresil-asp 0.1.0")
    print("Solving...")
    for i, model in enumerate(found, start=1):
        print(f"Answer: {i}")
        print(" ".join(sorted(format_atom(a) for a in model)))
    if sat:
        print("SATISFIABLE")
        return 10
    print("UNSATISFIABLE")
    return 20


if __name__ == "__main__":
    sys.exit(main())
