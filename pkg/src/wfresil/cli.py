"""Command-line front end: check, encode, solve, generate, xcheck.

Exit codes: 0 the analysis ran and answered yes, 1 it ran and answered no,
2 usage or input error, 3 solver or runtime error.  Verdicts go to standard
output as JSON; generated programs and policies go out as plain text.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import dsl
from .aspgen import UnsupportedConstraint, emit_orcp_program, emit_srcp_program
from .circuits import CircuitError, parse_circuit
from .games import (
    Counterexample,
    StateBudgetExceeded,
    StrikeFound,
    ValidPlan,
    WinningPlay,
    decide_crcp,
    decide_drcp,
    decide_orcp,
    decide_srcp,
    decide_wsp,
)
from .harness import (
    GenParams,
    find_separation_witnesses,
    inclusion_chain_check,
    random_policy,
    run_orcp_campaign,
    run_srcp_campaign,
    run_chain_campaign,
)
from .model import PolicyError
from .reductions import (
    TooLarge,
    dhc_to_srcp,
    parse_edge_list,
    parse_graph,
    succrad_to_orcp,
)
from .solver import (
    SolverConfig,
    SolverError,
    default_solver_config,
    solve_orcp,
    solve_srcp,
)

YES, NO, USAGE_ERROR, RUNTIME_ERROR = 0, 1, 2, 3

_DECIDERS = {
    "wsp": lambda policy, t: decide_wsp(policy),
    "srcp": decide_srcp,
    "orcp": decide_orcp,
    "crcp": decide_crcp,
    "drcp": decide_drcp,
}


def _fail(message: str, code: int) -> int:
    print(f"wfresil: {message}", file=sys.stderr)
    return code


def _load_document(path: str) -> dsl.PolicyDocument:
    with open(path, encoding="utf-8") as fh:
        return dsl.parse_policy(fh.read())


def _resolve_budget(args, doc: dsl.PolicyDocument, needed: bool) -> int | None:
    if args.t is not None:
        return args.t
    if doc.default_budget is not None:
        return doc.default_budget
    if needed:
        raise ValueError("no budget: pass -t or add a budget: clause to the policy")
    return None


def _witness_json(witness):
    if isinstance(witness, ValidPlan):
        return {"kind": "plan", "assignments": dict(witness.assignments)}
    if isinstance(witness, Counterexample):
        return {"kind": "removed_users", "removed": sorted(witness.removed)}
    if isinstance(witness, WinningPlay):
        return {"kind": "play", "moves": [list(m) for m in witness.moves]}
    if isinstance(witness, StrikeFound):
        return {
            "kind": "strike",
            "trigger_length": witness.trigger_length,
            "removed": sorted(witness.removed),
        }
    return None


def _solver_config(args) -> SolverConfig:
    if getattr(args, "solver", None):
        return SolverConfig(executable=args.solver, timeout=args.solver_timeout)
    return default_solver_config(timeout=args.solver_timeout)


def _emit(args, payload: dict) -> None:
    if not args.quiet:
        print(json.dumps(payload, sort_keys=True, indent=None if args.json else 2))


def cmd_check(args) -> int:
    doc = _load_document(args.file)
    t = _resolve_budget(args, doc, needed=args.analysis != "wsp")
    start = time.perf_counter()
    verdict = _DECIDERS[args.analysis](doc.policy, t)
    payload = {
        "analysis": args.analysis,
        "budget": t,
        "decision": verdict.decision,
        "resilient": verdict.decision if args.analysis != "wsp" else None,
        "witness": _witness_json(verdict.witness),
        "elapsed": round(time.perf_counter() - start, 6),
    }
    _emit(args, payload)
    return YES if verdict.decision else NO


def cmd_encode(args) -> int:
    doc = _load_document(args.file)
    t = _resolve_budget(args, doc, needed=True)
    emit = emit_srcp_program if args.target == "srcp" else emit_orcp_program
    sys.stdout.write(emit(doc.policy, t).text)
    return YES


def cmd_solve(args) -> int:
    doc = _load_document(args.file)
    t = _resolve_budget(args, doc, needed=True)
    config = _solver_config(args)
    start = time.perf_counter()
    if args.target == "srcp":
        verdict, outcome = solve_srcp(emit_srcp_program(doc.policy, t), config)
    else:
        verdict, outcome = solve_orcp(emit_orcp_program(doc.policy, t), config)
    payload = {
        "analysis": args.target,
        "budget": t,
        "decision": verdict.decision,
        "resilient": verdict.decision,
        "witness": _witness_json(verdict.witness),
        "solver_status": outcome.status,
        "elapsed": round(time.perf_counter() - start, 6),
    }
    _emit(args, payload)
    return YES if verdict.decision else NO


def cmd_generate(args) -> int:
    if args.kind == "random":
        params = GenParams(
            steps=(args.min_steps, args.max_steps),
            users=(args.min_users, args.max_users),
            order_density=args.order_density,
            auth_density=args.auth_density,
            sod=(args.min_sod, args.max_sod),
            entailments=(args.min_entail, args.max_entail),
            seed=args.seed,
        )
        policy = random_policy(params)
        budget = args.t
        provenance = {"generator": "random", "seed": args.seed}
    elif args.kind == "dhc":
        with open(args.graph, encoding="utf-8") as fh:
            graph = parse_graph(fh.read())
        out = dhc_to_srcp(graph, parse_edge_list(args.b, graph))
        policy, budget, provenance = out.policy, out.budget, dict(out.provenance)
    else:  # succrad
        with open(args.circuit, encoding="utf-8") as fh:
            circuit = parse_circuit(fh.read())
        out = succrad_to_orcp(circuit, args.n, args.k)
        policy, budget, provenance = out.policy, out.budget, dict(out.provenance)
    sys.stdout.write(dsl.serialize_policy(dsl.document_for(policy, budget)))
    if args.provenance:
        sys.stdout.write(json.dumps(provenance, sort_keys=True) + "\n")
    return YES


def cmd_xcheck(args) -> int:
    solver = _solver_config(args)
    reports = []
    if args.analysis in ("srcp", "all"):
        reports += run_srcp_campaign(args.count, args.seed, solver)
    if args.analysis in ("orcp", "all"):
        reports += run_orcp_campaign(max(1, args.count // 2), args.seed, solver)
    if args.analysis in ("chain", "all"):
        chain_reports = run_chain_campaign(args.count, args.seed)
        reports += chain_reports
        if not args.quiet:
            gaps = find_separation_witnesses(chain_reports)
            print(
                json.dumps({"separation_witnesses": {k: v[:3] for k, v in gaps.items()}}),
                file=sys.stderr,
            )
    failures = 0
    for r in reports:
        print(r.to_json())
        if r.skipped is None and not r.ok:
            failures += 1
    return YES if failures == 0 else NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfresil",
        description="Workflow resiliency analysis: exact deciders and ASP pipelines",
    )
    parser.add_argument("--json", action="store_true", help="compact JSON output")
    parser.add_argument("--quiet", action="store_true", help="suppress verdict output")
    parser.add_argument("--solver", help="ASP solver executable (default: clingo, else bundled)")
    parser.add_argument("--solver-timeout", type=float, default=60.0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide an analysis with the exact game oracles")
    p.add_argument("file")
    p.add_argument("--analysis", choices=sorted(_DECIDERS), required=True)
    p.add_argument("-t", type=int, default=None, help="budget (overrides budget: clause)")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("encode", help="emit the logic program for an instance")
    p.add_argument("file")
    p.add_argument("--target", choices=("srcp", "orcp"), required=True)
    p.add_argument("-t", type=int, default=None)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("solve", help="encode, run the ASP solver, interpret")
    p.add_argument("file")
    p.add_argument("--target", choices=("srcp", "orcp"), required=True)
    p.add_argument("-t", type=int, default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("generate", help="produce instances (random or reductions)")
    gen = p.add_subparsers(dest="kind", required=True)
    g = gen.add_parser("random")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--min-steps", type=int, default=1)
    g.add_argument("--max-steps", type=int, default=3)
    g.add_argument("--min-users", type=int, default=1)
    g.add_argument("--max-users", type=int, default=4)
    g.add_argument("--order-density", type=float, default=0.3)
    g.add_argument("--auth-density", type=float, default=0.7)
    g.add_argument("--min-sod", type=int, default=0)
    g.add_argument("--max-sod", type=int, default=2)
    g.add_argument("--min-entail", type=int, default=0)
    g.add_argument("--max-entail", type=int, default=0)
    g.add_argument("-t", type=int, default=None, help="budget clause for the output")
    g.add_argument("--provenance", action="store_true")
    g.set_defaults(fn=cmd_generate)
    g = gen.add_parser("dhc")
    g.add_argument("--graph", required=True)
    g.add_argument("--b", default="", help='edge set, e.g. "a-b,c-d"')
    g.add_argument("--provenance", action="store_true")
    g.set_defaults(fn=cmd_generate)
    g = gen.add_parser("succrad")
    g.add_argument("--circuit", required=True)
    g.add_argument("-n", type=int, required=True, help="bits per vertex")
    g.add_argument("-k", type=int, required=True, help="radius bound")
    g.add_argument("--provenance", action="store_true")
    g.set_defaults(fn=cmd_generate)

    p = sub.add_parser("xcheck", help="run cross-validation campaigns")
    p.add_argument("--analysis", choices=("srcp", "orcp", "chain", "all"), default="all")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(fn=cmd_xcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        return _fail(str(exc), USAGE_ERROR)
    except (dsl.DslSyntaxError, PolicyError, UnsupportedConstraint, CircuitError) as exc:
        return _fail(str(exc), USAGE_ERROR)
    except (ValueError, TooLarge) as exc:
        return _fail(str(exc), USAGE_ERROR)
    except SolverError as exc:
        return _fail(str(exc), RUNTIME_ERROR)
    except StateBudgetExceeded as exc:
        return _fail(str(exc), RUNTIME_ERROR)


if __name__ == "__main__":
    sys.exit(main())
