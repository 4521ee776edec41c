"""Command-line interface: plan, dump-smt, validate, check, explain-synonymy.

Exit codes: 0 success / plan found, 1 diagnostics or plan violations,
2 no plan within the bound, 3 solver or infrastructure error, 64 usage,
65 malformed model document, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import expr as ex
from . import oracle
from .encoder import build
from .errors import CapPlanError, SchemaError, SolverError
from .model import CapabilityModel, load_model, validate
from .planner import (
    Explanation,
    Happening,
    Plan,
    PlannerConfig,
    explain,
    plan,
)
from .smtlib import SolverConfig, emit
from .synonymy import build_index

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66


def _value_doc(value):
    if isinstance(value, bool):
        return value
    return ex.number_to_text(value)


def _value_from_doc(value):
    if isinstance(value, bool):
        return value
    return ex.parse_number(value)


def plan_to_document(result: Plan) -> dict:
    return {
        "boundHappenings": result.bound_happenings,
        "happenings": [
            {
                "applied": list(h.applied),
                "layer0": {k: _value_doc(v) for k, v in sorted(h.layer0.items())},
                "layer1": {k: _value_doc(v) for k, v in sorted(h.layer1.items())},
            }
            for h in result.happenings
        ],
        "parameters": {k: _value_doc(v) for k, v in sorted(result.parameters.items())},
        "classes": {k: list(v) for k, v in sorted(result.classes.items())},
    }


def plan_from_document(document) -> Plan:
    if isinstance(document, str):
        document = json.loads(document)
    happenings = tuple(
        Happening(
            applied=tuple(h.get("applied", [])),
            layer0={k: _value_from_doc(v) for k, v in h.get("layer0", {}).items()},
            layer1={k: _value_from_doc(v) for k, v in h.get("layer1", {}).items()},
        )
        for h in document.get("happenings", [])
    )
    return Plan(
        happenings=happenings,
        bound_happenings=document.get("boundHappenings", len(happenings)),
        classes={k: tuple(v) for k, v in document.get("classes", {}).items()},
        parameters={
            k: _value_from_doc(v) for k, v in document.get("parameters", {}).items()
        },
    )


def explanation_to_document(explanation: Explanation) -> dict:
    return {
        "core": list(explanation.core_names),
        "elements": [
            {
                "name": e.name,
                "family": e.family,
                "element": e.element_id,
                **({"happening": e.happening} if e.happening is not None else {}),
                "constraint": e.rendering,
            }
            for e in explanation.elements
        ],
    }


def _emit_output(args, document) -> None:
    if args.format == "json":
        text = json.dumps(document, indent=2)
    else:
        text = _render_text(document)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _render_text(document, indent=0) -> str:
    pad = "  " * indent
    if isinstance(document, dict):
        lines = []
        for key, value in document.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.append(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
        return "\n".join(lines)
    if isinstance(document, list):
        lines = []
        for value in document:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}- {value}")
        return "\n".join(lines)
    return f"{pad}{document}"


def _load(args) -> CapabilityModel:
    paths = [p for p in (getattr(args, "domain", None),
                         getattr(args, "problem", None),
                         getattr(args, "model", None)) if p]
    if not paths:
        raise SchemaError("no model documents given")
    return load_model(*paths)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        command=args.solver_cmd,
        timeout_seconds=args.timeout,
        produce_unsat_cores=True,
        random_seed=args.seed,
        transcript=args.transcript,
    )


def _cmd_plan(args) -> int:
    model = _load(args)
    diagnostics = validate(model)
    if diagnostics:
        for diag in diagnostics:
            print(f"{diag.code} {diag.element_id}: {diag.message}", file=sys.stderr)
        return EX_DATAERR
    config = PlannerConfig(
        solver=_solver_config(args),
        expanded=args.expanded_synonyms,
        incremental=args.incremental,
        minimize=args.minimize_core,
    )
    outcome = plan(model, args.max_happenings, config)
    if isinstance(outcome, Plan):
        _emit_output(args, plan_to_document(outcome))
        return 0
    document = {
        "noPlan": True,
        "allBoundsUnsat": outcome.all_unsat,
        "bounds": [
            {"bound": o.bound, "status": o.status,
             **({"reason": o.reason} if o.reason else {})}
            for o in outcome.outcomes
        ],
    }
    if outcome.last_core:
        document["explanation"] = explanation_to_document(explain(outcome, model))
    _emit_output(args, document)
    return 2


def _cmd_dump_smt(args) -> int:
    model = _load(args)
    index = build_index(model)
    encoding = build(model, index, args.bound, expanded=args.expanded_synonyms)
    text = emit(encoding, produce_cores=True, random_seed=args.seed)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        print(text, end="")
    return 0


def _synonymy_document(model) -> dict:
    index = build_index(model)
    return {
        "classes": [
            {
                "classId": cls.class_id,
                "members": list(cls.member_ids),
                "typeDescription": cls.type_description_id,
                "datatype": cls.datatype.value,
            }
            for cls in index.classes
        ]
    }


def _cmd_validate(args) -> int:
    model = _load(args)
    diagnostics = validate(model)
    document = {
        "diagnostics": [
            {"code": d.code, "element": d.element_id, "message": d.message}
            for d in diagnostics
        ]
    }
    if args.explain_synonymy:
        document.update(_synonymy_document(model))
    _emit_output(args, document)
    return 1 if diagnostics else 0


def _cmd_check(args) -> int:
    model = _load(args)
    index = build_index(model)
    with open(args.plan, "r", encoding="utf-8") as handle:
        plan_doc = json.load(handle)
    verdict = oracle.simulate(model, index, plan_from_document(plan_doc))
    document = {
        "ok": verdict.ok,
        "violations": [
            {"kind": v.kind, "happening": v.happening, "element": v.element_id,
             "message": v.message}
            for v in verdict.violations
        ],
    }
    _emit_output(args, document)
    return 0 if verdict.ok else 1


def _cmd_explain_synonymy(args) -> int:
    model = _load(args)
    _emit_output(args, _synonymy_document(model))
    return 0


def _add_model_arguments(parser, with_model_alias=False):
    parser.add_argument("--domain", help="domain document (provided capabilities)")
    parser.add_argument("--problem", help="problem document (required capability)")
    if with_model_alias:
        parser.add_argument("--model", help="single-file model document")
    parser.add_argument("--output", help="write the result here instead of stdout")
    parser.add_argument("--format", choices=("json", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capplan",
        description="Plan capability sequences with an SMT-LIB2 solver.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("plan", help="search for a minimal-length plan")
    _add_model_arguments(p, with_model_alias=True)
    p.add_argument("--max-happenings", type=int, required=True,
                   help="largest bound to try (bound k means k+1 happenings)")
    p.add_argument("--solver-cmd", required=True,
                   help="SMT-LIB2 solver command, e.g. 'capplan-refsolver' or 'z3 -in'")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--transcript", help="append solver requests/responses here")
    p.add_argument("--expanded-synonyms", action="store_true",
                   help="one variable per property with explicit propagation")
    p.add_argument("--incremental", action="store_true",
                   help="reuse one solver process across bounds (push/pop)")
    p.add_argument("--minimize-core", action="store_true",
                   help="shrink the unsat core by deletion before explaining")
    p.set_defaults(func=_cmd_plan)

    p = commands.add_parser("dump-smt", help="print the SMT-LIB2 encoding")
    _add_model_arguments(p, with_model_alias=True)
    p.add_argument("--bound", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--expanded-synonyms", action="store_true")
    p.set_defaults(func=_cmd_dump_smt)

    p = commands.add_parser("validate", help="run model diagnostics")
    _add_model_arguments(p, with_model_alias=True)
    p.add_argument("--explain-synonymy", action="store_true",
                   help="also print the synonymy partition")
    p.set_defaults(func=_cmd_validate)

    p = commands.add_parser("check", help="replay a plan against the model")
    _add_model_arguments(p, with_model_alias=True)
    p.add_argument("--plan", required=True, help="plan document to check")
    p.set_defaults(func=_cmd_check)

    p = commands.add_parser("explain-synonymy", help="print the synonymy partition")
    _add_model_arguments(p, with_model_alias=True)
    p.set_defaults(func=_cmd_explain_synonymy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EX_USAGE if exc.code not in (0, None) else 0
    if getattr(args, "max_happenings", 0) and args.max_happenings < 0:
        print("--max-happenings must be >= 0", file=sys.stderr)
        return EX_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except json.JSONDecodeError as exc:
        print(f"malformed JSON: {exc}", file=sys.stderr)
        return EX_DATAERR
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except SchemaError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except CapPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
