import os
import stat
import sys
import textwrap

import pytest

from wfresil.aspgen import emit_orcp_program, emit_srcp_program
from wfresil.games import decide_orcp, decide_srcp, decide_wsp, verify_winning_play
from wfresil.model import SoD, make_policy, restrict_users
from wfresil.solver import (
    ENV_SOLVER,
    OutputParseError,
    SolverConfig,
    SolverNotFound,
    SolverTimeout,
    default_solver_config,
    interpret_orcp,
    interpret_srcp,
    run_solver,
    solve_orcp,
    solve_srcp,
)


def fake_solver(tmp_path, body: str) -> SolverConfig:
    path = tmp_path / "fake-solver"
    path.write_text("#!/bin/sh\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return SolverConfig(executable=str(path), extra_args=(), timeout=5.0)


class TestRunSolver:
    def test_single_fact(self, solver_config):
        outcome = run_solver("a.", solver_config)
        assert outcome.status == "satisfiable"
        assert ("a", ()) in outcome.answer_set

    def test_unsatisfiable_constraint(self, solver_config):
        outcome = run_solver(":- not a.", solver_config)
        assert outcome.status == "unsatisfiable"
        assert outcome.answer_set is None

    def test_atoms_with_arguments(self, solver_config):
        outcome = run_solver("p(a, 1). q :- p(a, 1).", solver_config)
        assert ("p", ("a", "1")) in outcome.answer_set
        assert ("q", ()) in outcome.answer_set

    def test_solver_not_found(self):
        config = SolverConfig(executable="/nonexistent/solver", timeout=2.0)
        with pytest.raises(SolverNotFound):
            run_solver("a.", config)

    def test_timeout(self, tmp_path):
        config = fake_solver(tmp_path, "sleep 30\n")
        config = SolverConfig(config.executable, (), timeout=0.5)
        import time

        start = time.monotonic()
        with pytest.raises(SolverTimeout):
            run_solver("a.", config)
        assert time.monotonic() - start < 1.5  # timeout + 1s contract

    def test_exit_code_marker_disagreement(self, tmp_path):
        config = fake_solver(tmp_path, 'cat > /dev/null\necho "SATISFIABLE"\nexit 20\n')
        with pytest.raises(OutputParseError):
            run_solver("a.", config)

    def test_malformed_atom_line(self, tmp_path):
        config = fake_solver(
            tmp_path,
            'cat > /dev/null\necho "Answer: 1"\necho "p(()"\necho "SATISFIABLE"\nexit 10\n',
        )
        with pytest.raises(OutputParseError):
            run_solver("a.", config)

    def test_exit_30_is_satisfiable(self, tmp_path):
        config = fake_solver(
            tmp_path,
            'cat > /dev/null\necho "Answer: 1"\necho "a"\necho "SATISFIABLE"\nexit 30\n',
        )
        assert run_solver("a.", config).status == "satisfiable"

    def test_env_override_selects_solver(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_SOLVER, f"{sys.executable} -m wfresil.asplite")
        config = default_solver_config()
        assert config.executable == sys.executable
        assert run_solver("a.", config).status == "satisfiable"


def sod_policy(n_users):
    users = [f"u{i}" for i in range(1, n_users + 1)]
    return make_policy(["a", "b"], users, constraints=[SoD("a", "b")])


class TestInterpretSrcp:
    def test_unsat_means_resilient(self, solver_config):
        verdict, _ = solve_srcp(emit_srcp_program(sod_policy(3), 1), solver_config)
        assert verdict.decision and verdict.witness is None

    def test_sat_yields_verified_removal_set(self, solver_config):
        policy = sod_policy(2)
        verdict, outcome = solve_srcp(emit_srcp_program(policy, 1), solver_config)
        assert not verdict.decision
        delta = verdict.witness.removed
        assert len(delta) <= 1
        assert not decide_wsp(restrict_users(policy, delta)).decision

    def test_wrong_target_rejected(self, solver_config):
        program = emit_orcp_program(sod_policy(2), 1)
        outcome = run_solver(program, solver_config)
        with pytest.raises(ValueError):
            interpret_srcp(outcome, program)


class TestInterpretOrcp:
    def test_unsat_means_not_resilient(self, solver_config):
        verdict, _ = solve_orcp(emit_orcp_program(sod_policy(2), 1), solver_config)
        assert not verdict.decision

    def test_sat_play_passes_independent_recheck(self, solver_config):
        policy = sod_policy(3)
        verdict, _ = solve_orcp(emit_orcp_program(policy, 1), solver_config)
        assert verdict.decision
        assert len(verdict.witness.moves) == 2
        assert verify_winning_play(policy, 1, verdict.witness)

    def test_matches_oracle_on_spec_pairs(self, solver_config):
        for n_users, t, expected in ((3, 1, True), (2, 1, False), (2, 0, True)):
            policy = sod_policy(n_users)
            verdict, _ = solve_orcp(emit_orcp_program(policy, t), solver_config)
            assert verdict.decision == decide_orcp(policy, t).decision == expected
