"""Iterative-deepening planning loop, plan extraction and explanations.

The loop encodes the problem for bound k = 0, 1, ... and stops at the
first satisfiable bound, so a returned plan always uses the smallest
possible number of happenings (bound k means k+1 happenings; the empty
plan lives at bound 0).  When every bound fails, the last unsat core is
kept so the failure can be mapped back to model elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import expr as ex
from .encoder import Encoding, VariableKey, build
from .errors import CoresUnavailable, IncompleteModel, InvalidModel
from .model import CapabilityModel, Datatype, validate
from .smtlib import (
    SmtProcess,
    SolverConfig,
    _render_term,
    emit,
    format_symbol,
    minimize_core,
    solve,
)
from .synonymy import build_index


@dataclass(frozen=True)
class Happening:
    applied: tuple
    layer0: dict
    layer1: dict


@dataclass(frozen=True)
class Plan:
    happenings: tuple
    bound_happenings: int
    classes: dict
    parameters: dict


@dataclass(frozen=True)
class BoundOutcome:
    bound: int
    status: str
    reason: Optional[str] = None
    core: Optional[tuple] = None


@dataclass
class NoPlanFound:
    outcomes: tuple
    all_unsat: bool
    last_core: Optional[list] = None
    last_encoding: Optional[Encoding] = field(default=None, repr=False)


@dataclass(frozen=True)
class ExplanationElement:
    name: str
    family: str
    element_id: str
    happening: Optional[int]
    rendering: str


@dataclass(frozen=True)
class Explanation:
    core_names: tuple
    elements: tuple


@dataclass
class PlannerConfig:
    solver: SolverConfig
    expanded: bool = False
    incremental: bool = False
    minimize: bool = False


def plan(model: CapabilityModel, max_happenings: int,
         config: PlannerConfig) -> Union[Plan, NoPlanFound]:
    """Find a minimal-bound plan within bounds 0..max_happenings."""
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModel(
            "; ".join(f"{d.code}({d.element_id}): {d.message}" for d in diagnostics)
        )
    if max_happenings < 0:
        raise ValueError("max_happenings must be >= 0")
    index = build_index(model)
    if config.incremental:
        outcome = _plan_incremental(model, index, max_happenings, config)
    else:
        outcome = _plan_oneshot(model, index, max_happenings, config)
    if isinstance(outcome, NoPlanFound) and config.minimize and outcome.last_core:
        outcome.last_core = minimize_core(
            outcome.last_encoding, outcome.last_core, config.solver
        )
    return outcome


def _plan_oneshot(model, index, max_happenings, config):
    outcomes = []
    last_core = None
    last_encoding = None
    for bound in range(max_happenings + 1):
        encoding = build(model, index, bound, expanded=config.expanded)
        text = emit(
            encoding,
            produce_cores=config.solver.produce_unsat_cores,
            random_seed=config.solver.random_seed,
        )
        result = solve(text, config.solver)
        if result.is_sat:
            return extract_plan(encoding, result.valuation)
        core = tuple(result.core) if result.core else None
        outcomes.append(BoundOutcome(bound, result.status, result.reason, core))
        if result.is_unsat:
            last_core = list(result.core) if result.core else None
            last_encoding = encoding
    return NoPlanFound(
        outcomes=tuple(outcomes),
        all_unsat=all(o.status == "unsat" for o in outcomes),
        last_core=last_core,
        last_encoding=last_encoding,
    )


def _is_pushed(assertion) -> bool:
    # Goal-side assertions move with the bound; everything else is stable
    # once its happening exists.
    return assertion.family == "goal" or assertion.name.startswith("align.goal")


def _plan_incremental(model, index, max_happenings, config):
    """One persistent solver process; each bound adds the new happening's
    declarations and assertions, and re-pins the goal under push/pop."""
    outcomes = []
    last_core = None
    last_encoding = None
    process = SmtProcess(config.solver)
    sent_symbols: set = set()
    sent_names: set = set()
    try:
        header = ["(set-option :produce-models true)"]
        if config.solver.produce_unsat_cores:
            header.append("(set-option :produce-unsat-cores true)")
        process.send("\n".join(header) + "\n")
        for bound in range(max_happenings + 1):
            encoding = build(model, index, bound, expanded=config.expanded)
            if bound == 0:
                process.send(f"(set-logic {encoding.logic})\n")
            lines = []
            for symbol, key in encoding.variables.items():
                if symbol in sent_symbols:
                    continue
                sent_symbols.add(symbol)
                sort = "Bool" if key.sort is Datatype.BOOLEAN else "Real"
                lines.append(f"(declare-const {format_symbol(symbol)} {sort})")
            static, pushed = [], []
            for assertion in encoding.assertions:
                (pushed if _is_pushed(assertion) else static).append(assertion)
            for assertion in static:
                if assertion.name in sent_names:
                    continue
                sent_names.add(assertion.name)
                lines.append(_assert_line(assertion, config))
            lines.append("(push 1)")
            for assertion in pushed:
                lines.append(_assert_line(assertion, config))
            process.send("\n".join(lines) + "\n")
            try:
                status = process.check_sat()
            except TimeoutError:
                # A wedged process cannot be reused; redo everything with
                # independent one-shot solves, which map timeouts to
                # Unknown per bound instead.
                process.close()
                return _plan_oneshot(model, index, max_happenings, config)
            if status == "sat":
                valuation = process.get_model()
                return extract_plan(encoding, valuation)
            core = None
            if status == "unsat" and config.solver.produce_unsat_cores:
                core = process.get_unsat_core()
                last_core = core
                last_encoding = encoding
            outcomes.append(
                BoundOutcome(bound, status, None, tuple(core) if core else None)
            )
            process.send("(pop 1)\n")
        return NoPlanFound(
            outcomes=tuple(outcomes),
            all_unsat=all(o.status == "unsat" for o in outcomes),
            last_core=last_core,
            last_encoding=last_encoding,
        )
    finally:
        process.close()


def _assert_line(assertion, config) -> str:
    body = _render_term(assertion.term)
    if config.solver.produce_unsat_cores:
        return f"(assert (! {body} :named {format_symbol(assertion.name)}))"
    return f"(assert {body})"


def extract_plan(encoding: Encoding, valuation: dict) -> Plan:
    """Regroup the flat variable valuation into happenings with layers."""
    for symbol in encoding.variables:
        if symbol not in valuation:
            raise IncompleteModel(f"model misses variable {symbol}")

    cap_ids = sorted(
        {key.ident for key in encoding.variables.values() if key.kind == "cap"}
    )
    happenings = []
    for t in range(encoding.bound + 1):
        applied = tuple(
            cap_id
            for cap_id in cap_ids
            if valuation[VariableKey("cap", cap_id, t).symbol] is True
        )
        layers = ({}, {})
        for class_id in encoding.classes:
            # The class representative's variable exists in both modes.
            for layer in (0, 1):
                symbol = VariableKey("prop", class_id, t, layer).symbol
                layers[layer][class_id] = valuation[symbol]
        happenings.append(
            Happening(applied=applied, layer0=layers[0], layer1=layers[1])
        )

    # Parameter values are whatever the solver chose for unbound inputs of
    # the capabilities actually applied, read at the application's layer 0.
    parameters: dict = {}
    for t, happening in enumerate(happenings):
        for cap_id in happening.applied:
            for pid, state in encoding.unbound_inputs.get(cap_id, ()):
                symbol = VariableKey("prop", state, t, 0).symbol
                parameters.setdefault(pid, valuation[symbol])
    return Plan(
        happenings=tuple(happenings),
        bound_happenings=encoding.bound + 1,
        classes=dict(encoding.classes),
        parameters=parameters,
    )


def explain(no_plan: NoPlanFound, model: CapabilityModel) -> Explanation:
    """Map unsat core names back to the originating model elements."""
    if not no_plan.last_core or no_plan.last_encoding is None:
        raise CoresUnavailable("no unsat core was produced")
    encoding = no_plan.last_encoding
    elements = []
    for name in no_plan.last_core:
        assertion = encoding.by_name.get(name)
        if assertion is None:
            continue
        elements.append(
            ExplanationElement(
                name=name,
                family=assertion.family,
                element_id=assertion.element_id,
                happening=assertion.t,
                rendering=render_term(assertion.term),
            )
        )
    return Explanation(core_names=tuple(no_plan.last_core), elements=tuple(elements))


_INFIX = {
    "eq": "=", "neq": "!=", "lt": "<", "gt": ">", "leq": "<=", "geq": ">=",
    "plus": "+", "minus": "-", "times": "*", "divide": "/",
    "and": "and", "or": "or", "implies": "=>",
}


def render_term(term) -> str:
    """Human-oriented rendering of an assertion term; variables print as
    state@(happening,layer)."""
    if isinstance(term, ex.Const):
        return ex.value_to_text(term.value)
    if isinstance(term, ex.Ref):
        symbol = term.property_id
        parts = symbol.split("#")
        if len(parts) == 3 and parts[1].startswith("t") and parts[2].startswith("l"):
            return f"{parts[0]}@({parts[1][1:]},{parts[2][1:]})"
        if len(parts) == 2 and parts[1].startswith("t"):
            return f"{parts[0]}@{parts[1][1:]}"
        return symbol
    if term.op == "not":
        return f"(not {render_term(term.args[0])})"
    symbol = _INFIX[term.op]
    return "(" + f" {symbol} ".join(render_term(a) for a in term.args) + ")"
