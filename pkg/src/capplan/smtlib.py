"""SMT-LIB2 rendering and external solver process driving.

The encoding is rendered to plain SMT-LIB2 text, piped to any solver
executable on its standard input, and the answer (sat + model, unsat +
core, unknown) is parsed back.  Values are kept as exact rationals
throughout, so a model can be rechecked against the oracle without float
drift.
"""

from __future__ import annotations

import shlex
import subprocess
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from . import expr as ex
from .encoder import Encoding
from .errors import SolverLaunchError, SolverProtocolError
from .model import Datatype

_SMT_OPS = {
    "plus": "+",
    "minus": "-",
    "times": "*",
    "divide": "/",
    "eq": "=",
    "lt": "<",
    "gt": ">",
    "leq": "<=",
    "geq": ">=",
    "and": "and",
    "or": "or",
    "not": "not",
    "implies": "=>",
}

_SIMPLE = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
              "~!@$%^&*_-+=<>.?/")


@dataclass
class SolverConfig:
    """How to reach an SMT-LIB2 solver process."""

    command: Union[str, list]
    timeout_seconds: float = 60.0
    produce_unsat_cores: bool = True
    random_seed: Optional[int] = None
    transcript: Optional[Union[str, Path]] = None

    def __post_init__(self):
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")

    def argv(self) -> list:
        if isinstance(self.command, str):
            return shlex.split(self.command)
        return list(self.command)


@dataclass
class SolveOutcome:
    status: str  # "sat" | "unsat" | "unknown"
    valuation: Optional[dict] = None
    core: Optional[list] = None
    reason: Optional[str] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"


def format_symbol(name: str) -> str:
    if name and all(c in _SIMPLE for c in name) and not name[0].isdigit():
        return name
    if "|" in name or "\\" in name:
        raise SolverProtocolError(f"symbol not representable in SMT-LIB: {name!r}")
    return f"|{name}|"


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    value = Fraction(value)
    if value < 0:
        return f"(- {format_value(-value)})"
    if value.denominator == 1:
        return f"{value.numerator}.0"
    return f"(/ {value.numerator} {value.denominator})"


def _render_term(term) -> str:
    if isinstance(term, ex.Const):
        return format_value(term.value)
    if isinstance(term, ex.Ref):
        return format_symbol(term.property_id)
    op = _SMT_OPS.get(term.op)
    if op is None:
        if term.op == "neq":
            inner = " ".join(_render_term(a) for a in term.args)
            return f"(not (= {inner}))"
        raise SolverProtocolError(f"cannot render operator {term.op!r}")
    args = " ".join(_render_term(a) for a in term.args)
    return f"({op} {args})"


def emit(encoding: Encoding, produce_cores: bool = True,
         random_seed: Optional[int] = None) -> str:
    """Render the encoding as a self-contained SMT-LIB2 script.

    Byte-deterministic: the same encoding always yields the same text.
    """
    lines = []
    has_vars = bool(encoding.variables)
    if has_vars:
        lines.append("(set-option :produce-models true)")
    if produce_cores:
        lines.append("(set-option :produce-unsat-cores true)")
    if random_seed is not None:
        lines.append(f"(set-option :random-seed {random_seed})")
    lines.append(f"(set-logic {encoding.logic})")
    for symbol, key in encoding.variables.items():
        sort = "Bool" if key.sort is Datatype.BOOLEAN else "Real"
        lines.append(f"(declare-const {format_symbol(symbol)} {sort})")
    for assertion in encoding.assertions:
        body = _render_term(assertion.term)
        if produce_cores:
            lines.append(f"(assert (! {body} :named {format_symbol(assertion.name)}))")
        else:
            lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    if has_vars:
        lines.append("(get-model)")
    if produce_cores:
        lines.append("(get-unsat-core)")
    return "\n".join(lines) + "\n"


# -- S-expression reading ----------------------------------------------------

def tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i : j + 1]
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"' and j + 1 < n and text[j + 1] == '"':
                    j += 2
                elif text[j] == '"':
                    break
                else:
                    j += 1
            yield text[i : j + 1]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();|\"":
                j += 1
            yield text[i:j]
            i = j


def parse_sexprs(text: str) -> list:
    """Parse a whole solver answer into nested lists and atom strings."""
    stack: list = [[]]
    for token in tokenize(text):
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) == 1:
                raise SolverProtocolError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) != 1:
        raise SolverProtocolError("unbalanced '(' in solver output")
    return stack[0]


def unquote(symbol: str) -> str:
    if symbol.startswith("|") and symbol.endswith("|"):
        return symbol[1:-1]
    return symbol


def parse_value(node):
    """Parse a model value S-expression into a bool or exact Fraction."""
    if isinstance(node, str):
        if node == "true":
            return True
        if node == "false":
            return False
        try:
            if "." in node:
                return Fraction(node)
            return Fraction(int(node))
        except ValueError as exc:
            raise SolverProtocolError(f"unparseable value {node!r}") from exc
    if isinstance(node, list) and node:
        if node[0] == "-" and len(node) == 2:
            return -parse_value(node[1])
        if node[0] == "/" and len(node) == 3:
            denominator = parse_value(node[2])
            if denominator == 0:
                raise SolverProtocolError("division by zero in model value")
            return parse_value(node[1]) / denominator
    raise SolverProtocolError(f"unparseable value {node!r}")


def _collect_define_funs(node, into: dict) -> None:
    if not isinstance(node, list):
        return
    if len(node) == 5 and node[0] == "define-fun" and node[2] == []:
        into[unquote(node[1])] = parse_value(node[4])
        return
    for child in node:
        _collect_define_funs(child, into)


def parse_answer(text: str, expect_core: bool) -> SolveOutcome:
    """Interpret solver stdout: status token, then model or core."""
    nodes = parse_sexprs(text)
    status = None
    rest = []
    for node in nodes:
        if isinstance(node, list) and node[:1] == ["error"]:
            continue
        if status is None and node in ("sat", "unsat", "unknown"):
            status = node
            continue
        if status is not None:
            rest.append(node)
    if status is None:
        raise SolverProtocolError(f"no sat/unsat/unknown in solver output: {text[:200]!r}")
    if status == "sat":
        valuation: dict = {}
        for node in rest:
            _collect_define_funs(node, valuation)
        return SolveOutcome(status="sat", valuation=valuation)
    if status == "unsat":
        core = None
        if expect_core:
            for node in rest:
                if isinstance(node, list) and all(isinstance(x, str) for x in node):
                    core = [unquote(x) for x in node]
                    break
        return SolveOutcome(status="unsat", core=core)
    return SolveOutcome(status="unknown", reason="solver returned unknown")


def _write_transcript(config: SolverConfig, request: str, response: str) -> None:
    if config.transcript is None:
        return
    with open(config.transcript, "a", encoding="utf-8") as handle:
        handle.write("; --- request ---\n")
        handle.write(request)
        handle.write("; --- response ---\n")
        for line in response.splitlines():
            handle.write(f"; {line}\n")


def solve(text: str, config: SolverConfig) -> SolveOutcome:
    """Run one solver process over the script and parse its answer."""
    try:
        completed = subprocess.run(
            config.argv(),
            input=text.encode("utf-8"),
            capture_output=True,
            timeout=config.timeout_seconds,
        )
    except (FileNotFoundError, PermissionError) as exc:
        raise SolverLaunchError(f"cannot launch solver {config.argv()!r}: {exc}") from exc
    except subprocess.TimeoutExpired:
        _write_transcript(config, text, "; timeout")
        return SolveOutcome(status="unknown", reason="timeout")
    stdout = completed.stdout.decode("utf-8", errors="replace")
    _write_transcript(config, text, stdout)
    if not stdout.strip():
        stderr = completed.stderr.decode("utf-8", errors="replace")
        raise SolverProtocolError(
            f"solver produced no output (stderr: {stderr.strip()[:300]!r})"
        )
    return parse_answer(stdout, expect_core=config.produce_unsat_cores)


def minimize_core(encoding: Encoding, core: list, config: SolverConfig) -> list:
    """Deletion-based core minimization via repeated one-shot solves.

    The result is a minimal unsatisfiable subset: dropping any single
    member makes the remainder satisfiable.
    """
    kept = [name for name in core if name in encoding.by_name]
    for name in list(kept):
        if name not in kept:
            continue
        trial = [n for n in kept if n != name]
        text = emit(encoding.restricted(trial), produce_cores=True,
                    random_seed=config.random_seed)
        outcome = solve(text, config)
        if outcome.is_unsat:
            kept = [n for n in trial if outcome.core is None or n in outcome.core]
    order = {a.name: i for i, a in enumerate(encoding.assertions)}
    return sorted(kept, key=lambda n: order[n])


class SmtProcess:
    """A persistent solver process for incremental (push/pop) solving."""

    def __init__(self, config: SolverConfig):
        self.config = config
        self._log: list = []
        try:
            self.proc = subprocess.Popen(
                config.argv(),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except (FileNotFoundError, PermissionError) as exc:
            raise SolverLaunchError(
                f"cannot launch solver {config.argv()!r}: {exc}"
            ) from exc

    def send(self, text: str) -> None:
        if self.proc.stdin is None:
            raise SolverProtocolError("solver stdin closed")
        self._log.append(text)
        self.proc.stdin.write(text.encode("utf-8"))
        self.proc.stdin.flush()

    def _read_until(self, done) -> str:
        """Read stdout until `done(buffer)` returns true or timeout."""
        import select

        deadline = time.monotonic() + self.config.timeout_seconds
        buffer = ""
        stream = self.proc.stdout
        while True:
            if done(buffer):
                return buffer
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("solver response timeout")
            ready, _, _ = select.select([stream], [], [], min(remaining, 0.5))
            if not ready:
                if self.proc.poll() is not None and not done(buffer):
                    raise SolverProtocolError("solver exited mid-response")
                continue
            chunk = stream.read1(65536)
            if not chunk:
                if done(buffer):
                    return buffer
                raise SolverProtocolError("solver closed its output")
            buffer += chunk.decode("utf-8", errors="replace")

    @staticmethod
    def _balanced(buffer: str) -> bool:
        depth = 0
        seen = False
        for token in tokenize(buffer):
            if token == "(":
                depth += 1
                seen = True
            elif token == ")":
                depth -= 1
                if depth == 0:
                    return True
            elif depth == 0 and token:
                return True
        return seen and depth == 0

    def check_sat(self) -> str:
        self.send("(check-sat)\n")
        answer = self._read_until(lambda b: b.strip() != "" and "\n" in b)
        self._log.append(answer)
        status = answer.strip().splitlines()[0].strip()
        if status not in ("sat", "unsat", "unknown"):
            raise SolverProtocolError(f"unexpected check-sat answer {status!r}")
        return status

    def get_model(self) -> dict:
        self.send("(get-model)\n")
        answer = self._read_until(self._balanced)
        self._log.append(answer)
        valuation: dict = {}
        for node in parse_sexprs(answer):
            _collect_define_funs(node, valuation)
        return valuation

    def get_unsat_core(self) -> Optional[list]:
        self.send("(get-unsat-core)\n")
        answer = self._read_until(self._balanced)
        self._log.append(answer)
        for node in parse_sexprs(answer):
            if isinstance(node, list) and node[:1] == ["error"]:
                return None
            if isinstance(node, list) and all(isinstance(x, str) for x in node):
                return [unquote(x) for x in node]
        return None

    def close(self) -> None:
        try:
            if self.proc.stdin is not None:
                self.proc.stdin.close()
            self.proc.wait(timeout=2)
        except Exception:
            self.proc.kill()
        if self.config.transcript is not None:
            with open(self.config.transcript, "a", encoding="utf-8") as handle:
                handle.write("".join(self._log))
