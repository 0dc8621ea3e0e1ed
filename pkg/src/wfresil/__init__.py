"""Workflow resiliency analysis toolkit.

Models workflow authorization policies, decides satisfiability and four
notions of resiliency by exact game search at desk scale, compiles the
static and one-shot variants into saturation-based answer-set programs, and
cross-validates everything against brute-force oracles and two
hardness-construction instance generators.
"""

from .aspgen import AspProgram, UnsupportedConstraint, emit_instance_facts, emit_orcp_program, emit_srcp_program
from .dsl import DslSyntaxError, PolicyDocument, parse_policy, serialize_policy
from .games import (
    Counterexample,
    GameConfig,
    GameVerdict,
    StateBudgetExceeded,
    StrikeFound,
    ValidPlan,
    WinningPlay,
    decide_crcp,
    decide_drcp,
    decide_orcp,
    decide_srcp,
    decide_wsp,
    enumerate_valid_plans,
    verify_winning_play,
)
from .model import (
    BoD,
    Constraint,
    CyclicOrder,
    DanglingReference,
    Entailment,
    Extensional,
    GateSemantics,
    InvalidSeed,
    MalformedConstraint,
    PolicyError,
    Relation,
    SoD,
    Status,
    WorkflowPolicy,
    check_validity,
    constraint_status,
    is_causally_closed,
    make_policy,
    project,
    restrict_users,
    validate_policy,
)
from .solver import (
    SolverConfig,
    SolverError,
    SolverNotFound,
    SolverOutcome,
    SolverTimeout,
    default_solver_config,
    interpret_orcp,
    interpret_srcp,
    run_solver,
)

__version__ = "0.1.0"
