"""Subprocess bridge to a clingo-compatible ASP solver.

The program is piped to the solver on standard input; the first answer set
is read back from the line following ``Answer:`` and the status is decoded
from the exit code (10/30 satisfiable, 20 unsatisfiable, clingo convention),
cross-checked against the textual SATISFIABLE/UNSATISFIABLE markers.  A
disagreement between the two is an :class:`OutputParseError`, never a guess.

Solver resolution order: the ``WFRESIL_ASP_SOLVER`` environment variable, a
``clingo`` binary on PATH, then the bundled ``wfresil.asplite`` interpreter.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass

from .aspgen import ORCP, SRCP_COMPLEMENT, AspProgram
from .games import Counterexample, GameVerdict, WinningPlay

ENV_SOLVER = "WFRESIL_ASP_SOLVER"


class SolverError(RuntimeError):
    pass


class SolverNotFound(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class OutputParseError(SolverError):
    pass


class IndeterminateResult(SolverError):
    """The solver finished without a usable verdict."""


class InconsistentStrategy(SolverError):
    """A satisfiable one-shot model failed to encode a coherent play."""


@dataclass(frozen=True)
class SolverConfig:
    executable: str
    extra_args: tuple[str, ...] = ("--models=1", "-")
    timeout: float = 60.0


def bundled_solver_config(timeout: float = 60.0) -> SolverConfig:
    return SolverConfig(
        executable=sys.executable,
        extra_args=("-m", "wfresil.asplite", "--models=1", "-"),
        timeout=timeout,
    )


def default_solver_config(timeout: float = 60.0) -> SolverConfig:
    """Environment override, then clingo on PATH, then the bundled solver."""

    env = os.environ.get(ENV_SOLVER)
    if env:
        parts = shlex.split(env)
        return SolverConfig(
            executable=parts[0],
            extra_args=tuple(parts[1:]) + ("--models=1", "-"),
            timeout=timeout,
        )
    if shutil.which("clingo"):
        return SolverConfig(executable="clingo", timeout=timeout)
    return bundled_solver_config(timeout=timeout)


SATISFIABLE = "satisfiable"
UNSATISFIABLE = "unsatisfiable"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class SolverOutcome:
    status: str
    answer_set: frozenset[tuple[str, tuple[str, ...]]] | None
    raw: str

    def atoms(self, predicate: str) -> list[tuple[str, ...]]:
        assert self.answer_set is not None
        return sorted(args for (p, args) in self.answer_set if p == predicate)


_ATOM_RE = re.compile(r"([a-z_][A-Za-z0-9_]*)(?:\(([^()]*)\))?\Z")


def _parse_atom(token: str) -> tuple[str, tuple[str, ...]]:
    m = _ATOM_RE.match(token)
    if not m:
        raise OutputParseError(f"malformed atom {token!r} in answer set")
    args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2) else ()
    return (m.group(1), args)


def run_solver(program: AspProgram | str, config: SolverConfig) -> SolverOutcome:
    """Pipe the program to the solver and decode its outcome."""

    text = program.text if isinstance(program, AspProgram) else program
    cmd = [config.executable, *config.extra_args]
    try:
        proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,  # lets the timeout kill the whole tree
        )
    except FileNotFoundError as exc:
        raise SolverNotFound(f"solver executable {config.executable!r} not found") from exc
    try:
        out, err = proc.communicate(text, timeout=config.timeout)
    except subprocess.TimeoutExpired as exc:
        import signal

        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except ProcessLookupError:
            pass
        try:
            proc.communicate(timeout=1.0)
        except subprocess.TimeoutExpired:
            pass
        raise SolverTimeout(f"solver exceeded {config.timeout}s") from exc

    raw = out + ("\n" + err if err else "")
    code = proc.returncode
    by_code = {10: SATISFIABLE, 30: SATISFIABLE, 20: UNSATISFIABLE}.get(code, UNKNOWN)
    markers = set()
    for line in out.splitlines():
        stripped = line.strip()
        if stripped == "SATISFIABLE":
            markers.add(SATISFIABLE)
        elif stripped == "UNSATISFIABLE":
            markers.add(UNSATISFIABLE)
    if markers and by_code != UNKNOWN and by_code not in markers:
        raise OutputParseError(
            f"exit code {code} disagrees with output markers {sorted(markers)}"
        )
    status = by_code if by_code != UNKNOWN else (markers.pop() if len(markers) == 1 else UNKNOWN)

    answer = None
    if status == SATISFIABLE:
        lines = out.splitlines()
        answer_line = None
        for i, line in enumerate(lines):
            if line.startswith("Answer:"):
                answer_line = lines[i + 1] if i + 1 < len(lines) else ""
        if answer_line is None:
            raise OutputParseError("satisfiable outcome without an Answer: line")
        answer = frozenset(_parse_atom(tok) for tok in answer_line.split())
    return SolverOutcome(status=status, answer_set=answer, raw=raw)


def interpret_srcp(outcome: SolverOutcome, program: AspProgram) -> GameVerdict:
    """Complement semantics: unsatisfiable means resilient; a model's
    ``removed/1`` atoms name the users whose removal defeats the policy."""

    if program.target != SRCP_COMPLEMENT:
        raise ValueError("outcome does not come from an SRCP-complement program")
    if outcome.status == UNKNOWN:
        raise IndeterminateResult("solver returned no verdict")
    if outcome.status == UNSATISFIABLE:
        return GameVerdict(True)
    users = program.atom_map.users
    delta = frozenset(users[args[0]] for args in outcome.atoms("removed"))
    return GameVerdict(False, Counterexample(delta))


def interpret_orcp(outcome: SolverOutcome, program: AspProgram) -> GameVerdict:
    """Satisfiable means one-shot resilient; the play is rebuilt from the
    ``assign/2`` atoms sequenced by the ``order/2`` atoms.  Saturation never
    inflates those two predicates, so the witness survives saturation."""

    if program.target != ORCP:
        raise ValueError("outcome does not come from an ORCP program")
    if outcome.status == UNKNOWN:
        raise IndeterminateResult("solver returned no verdict")
    if outcome.status == UNSATISFIABLE:
        return GameVerdict(False)

    steps = program.atom_map.steps
    users = program.atom_map.users
    assigns: dict[str, str] = {}
    for sid, uid in outcome.atoms("assign"):
        if sid in assigns:
            raise InconsistentStrategy(f"two assignments for step {steps.get(sid, sid)}")
        assigns[sid] = uid
    if set(assigns) != set(steps):
        raise InconsistentStrategy("assignment atoms do not cover the steps")
    order_pairs = set(outcome.atoms("order"))
    ids = sorted(steps)
    for a in ids:
        for b in ids:
            if a != b and ((a, b) in order_pairs) == ((b, a) in order_pairs):
                raise InconsistentStrategy(
                    f"order atoms fail to totally order steps {a}, {b}"
                )
    ranked = sorted(ids, key=lambda s: sum(1 for (a, _) in order_pairs if a == s), reverse=True)
    moves = tuple((steps[sid], users[assigns[sid]]) for sid in ranked)
    return GameVerdict(True, WinningPlay(moves))


def solve_srcp(
    program: AspProgram, config: SolverConfig | None = None
) -> tuple[GameVerdict, SolverOutcome]:
    config = config or default_solver_config()
    outcome = run_solver(program, config)
    return interpret_srcp(outcome, program), outcome


def solve_orcp(
    program: AspProgram, config: SolverConfig | None = None
) -> tuple[GameVerdict, SolverOutcome]:
    config = config or default_solver_config()
    outcome = run_solver(program, config)
    return interpret_orcp(outcome, program), outcome


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start
