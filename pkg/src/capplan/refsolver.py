"""A small SMT-LIB2 solver for quantifier-free linear real arithmetic.

Speaks enough of the SMT-LIB2 command language on stdin/stdout to act as a
check-sat backend: declare-const, assert (with :named annotations),
push/pop, check-sat, get-model, get-unsat-core.  Boolean structure is
decided by a DPLL loop over a Tseitin CNF; conjunctions of linear
constraints are decided exactly over the rationals by Gaussian elimination
of equalities followed by Fourier-Motzkin elimination, with conflict-set
tracking so theory conflicts become learned clauses.

Limitations, by design: no uninterpreted functions, no quantifiers,
nonlinear arithmetic answers `unknown`, and the unsat core returned is the
full asserted set (clients that want a minimal core shrink it themselves
by deletion).

Run as `python -m capplan.refsolver` or through the `capplan-refsolver`
console script.
"""

from __future__ import annotations

import sys
from fractions import Fraction

EQ, LE, LT, NE = "eq", "le", "lt", "ne"


class Unsupported(Exception):
    pass


class Nonlinear(Unsupported):
    pass


# -- reading ------------------------------------------------------------------


class SexpReader:
    """Incremental S-expression reader so the solver also works
    interactively (push/pop driving)."""

    def __init__(self, stream):
        self.stream = stream
        self.buf = ""
        self.pos = 0

    def _fill(self) -> bool:
        line = self.stream.readline()
        if not line:
            return False
        self.buf = self.buf[self.pos :] + line
        self.pos = 0
        return True

    def _peek(self):
        while True:
            if self.pos < len(self.buf):
                return self.buf[self.pos]
            if not self._fill():
                return None

    def _next(self):
        c = self._peek()
        if c is not None:
            self.pos += 1
        return c

    def _skip_noise(self):
        while True:
            c = self._peek()
            if c is None:
                return
            if c in " \t\r\n":
                self.pos += 1
            elif c == ";":
                while c is not None and c != "\n":
                    c = self._next()
            else:
                return

    def read(self):
        """Return the next S-expression (nested lists/str) or None at EOF."""
        self._skip_noise()
        c = self._peek()
        if c is None:
            return None
        if c == "(":
            self._next()
            items = []
            while True:
                self._skip_noise()
                c = self._peek()
                if c is None:
                    raise Unsupported("unexpected end of input inside (")
                if c == ")":
                    self._next()
                    return items
                items.append(self.read())
        if c == ")":
            raise Unsupported("unbalanced )")
        if c == "|":
            self._next()
            out = []
            while True:
                c = self._next()
                if c is None:
                    raise Unsupported("unterminated quoted symbol")
                if c == "|":
                    return "|" + "".join(out) + "|"
                out.append(c)
        if c == '"':
            self._next()
            out = ['"']
            while True:
                c = self._next()
                if c is None:
                    raise Unsupported("unterminated string")
                out.append(c)
                if c == '"':
                    return "".join(out)
        out = []
        while True:
            c = self._peek()
            if c is None or c in " \t\r\n();|\"":
                return "".join(out)
            out.append(self._next())


def _unquote(symbol: str) -> str:
    if symbol.startswith("|") and symbol.endswith("|"):
        return symbol[1:-1]
    return symbol


def _quote(name: str) -> str:
    simple = set(
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        "~!@$%^&*_-+=<>.?/"
    )
    if name and all(c in simple for c in name) and not name[0].isdigit():
        return name
    return f"|{name}|"


# -- linear arithmetic --------------------------------------------------------


class Lin:
    """A linear term: sum of coeff*var plus a constant, exact rationals.
    Zero coefficients are never stored."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=Fraction(0)):
        self.coeffs = {
            v: Fraction(c) for v, c in (coeffs or {}).items() if c != 0
        }
        self.const = Fraction(const)

    def __add__(self, other):
        out = Lin(self.coeffs, self.const + other.const)
        for var, c in other.coeffs.items():
            new = out.coeffs.get(var, Fraction(0)) + c
            if new == 0:
                out.coeffs.pop(var, None)
            else:
                out.coeffs[var] = new
        return out

    def __neg__(self):
        return self.scale(Fraction(-1))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: Fraction):
        if factor == 0:
            return Lin()
        return Lin({v: c * factor for v, c in self.coeffs.items()}, self.const * factor)

    def evaluate(self, model, default=Fraction(0)):
        total = self.const
        for var, c in self.coeffs.items():
            total += c * model.get(var, default)
        return total

    def key(self):
        return (tuple(sorted(self.coeffs.items())), self.const)


def _resolve(term: Lin, origins: frozenset, subst: dict):
    """Substitute eliminated variables until none remain."""
    changed = True
    while changed:
        changed = False
        for var in list(term.coeffs):
            if var in subst:
                expr, expr_origins = subst[var]
                coeff = term.coeffs.pop(var)
                term = term + expr.scale(coeff)
                origins = origins | expr_origins
                changed = True
                break
    return term, origins


def _check_const(op: str, const: Fraction) -> bool:
    if op == EQ:
        return const == 0
    if op == LE:
        return const <= 0
    return const < 0


def feasible(constraints):
    """Decide a conjunction of linear constraints (term op 0).

    constraints: list of (op, Lin, origins frozenset).
    Returns ("sat", model) or ("unsat", conflict_origins).
    """
    eqs = [c for c in constraints if c[0] == EQ]
    ineqs = [c for c in constraints if c[0] in (LE, LT)]
    nes = [c for c in constraints if c[0] == NE]
    return _feasible_split(eqs, ineqs, nes)


def _feasible_split(eqs, ineqs, nes):
    res = _feasible_base(eqs, ineqs)
    if res[0] == "unsat":
        return res
    model = res[1]
    violated = None
    for i, (_, term, origins) in enumerate(nes):
        if term.evaluate(model) == 0:
            violated = i
            break
    if violated is None:
        return res
    _, term, origins = nes[violated]
    rest = nes[:violated] + nes[violated + 1 :]
    below = _feasible_split(eqs, ineqs + [(LT, term, origins)], rest)
    if below[0] == "sat":
        return below
    above = _feasible_split(eqs, ineqs + [(LT, -term, origins)], rest)
    if above[0] == "sat":
        return above
    return ("unsat", below[1] | above[1])


def _feasible_base(eqs, ineqs):
    subst: dict = {}
    sub_order: list = []
    for _, term, origins in eqs:
        term, origins = _resolve(Lin(term.coeffs, term.const), origins, subst)
        if not term.coeffs:
            if term.const != 0:
                return ("unsat", origins)
            continue
        var = min(term.coeffs)
        coeff = term.coeffs[var]
        rest = Lin({v: c for v, c in term.coeffs.items() if v != var}, term.const)
        subst[var] = (rest.scale(Fraction(-1, 1) / coeff), origins)
        sub_order.append(var)

    rows = []
    for op, term, origins in ineqs:
        term, origins = _resolve(Lin(term.coeffs, term.const), origins, subst)
        if not term.coeffs:
            if not _check_const(op, term.const):
                return ("unsat", origins)
            continue
        rows.append((op, term, origins))

    all_vars = sorted({v for _, t, _ in rows for v in t.coeffs})
    eliminated = []
    for var in all_vars:
        lows, ups, rest = [], [], []
        for op, term, origins in rows:
            coeff = term.coeffs.get(var, Fraction(0))
            if coeff == 0:
                rest.append((op, term, origins))
                continue
            bound = Lin(
                {v: c for v, c in term.coeffs.items() if v != var}, term.const
            ).scale(Fraction(-1, 1) / coeff)
            # coeff > 0: var <= bound; coeff < 0: var >= bound
            (ups if coeff > 0 else lows).append((op, bound, origins))
        new_rows = rest
        for lop, low, lorigins in lows:
            for uop, up, uorigins in ups:
                strict = lop == LT or uop == LT
                term = low - up
                origins = lorigins | uorigins
                if not term.coeffs:
                    if not _check_const(LT if strict else LE, term.const):
                        return ("unsat", origins)
                else:
                    new_rows.append((LT if strict else LE, term, origins))
        eliminated.append((var, lows, ups))
        rows = new_rows

    model: dict = {}
    for var, lows, ups in reversed(eliminated):
        low = None
        low_strict = False
        for op, bound, _ in lows:
            value = bound.evaluate(model)
            if low is None or value > low or (value == low and op == LT):
                low, low_strict = value, op == LT
        high = None
        high_strict = False
        for op, bound, _ in ups:
            value = bound.evaluate(model)
            if high is None or value < high or (value == high and op == LT):
                high, high_strict = value, op == LT
        if low is None and high is None:
            model[var] = Fraction(0)
        elif low is None:
            model[var] = high - 1 if high_strict else high
        elif high is None:
            model[var] = low + 1 if low_strict else low
        elif low == high:
            model[var] = low
        else:
            model[var] = (low + high) / 2
    for var in reversed(sub_order):
        expr, _ = subst[var]
        model[var] = expr.evaluate(model)
    return ("sat", model)


# -- boolean skeleton ---------------------------------------------------------


TRUE = ("const", True)
FALSE = ("const", False)


class Skeleton:
    """Interns boolean variables and linear atoms; builds a Tseitin CNF."""

    def __init__(self):
        self.var_count = 0
        self.bool_vars: dict = {}
        self.atom_ids: dict = {}
        self.atoms: dict = {}  # var id -> (op, Lin)
        self.aux: set = set()
        self.clauses: list = []

    def new_var(self, aux=False) -> int:
        self.var_count += 1
        if aux:
            self.aux.add(self.var_count)
        return self.var_count

    def bool_var(self, name: str) -> int:
        if name not in self.bool_vars:
            self.bool_vars[name] = self.new_var()
        return self.bool_vars[name]

    def atom(self, op: str, term: Lin) -> int:
        key = (op, term.key())
        if key not in self.atom_ids:
            var = self.new_var()
            self.atom_ids[key] = var
            self.atoms[var] = (op, term)
        return self.atom_ids[key]

    def tseitin(self, node) -> int:
        """Return a literal equisatisfiable with the (constant-free) node."""
        kind = node[0]
        if kind == "lit":
            return node[1]
        args = [self.tseitin(child) for child in node[1]]
        gate = self.new_var(aux=True)
        if kind == "and":
            for lit in args:
                self.clauses.append([-gate, lit])
            self.clauses.append([gate] + [-lit for lit in args])
        elif kind == "or":
            for lit in args:
                self.clauses.append([gate, -lit])
            self.clauses.append([-gate] + args)
        elif kind == "iff":
            a, b = args
            self.clauses.extend(
                [[-gate, -a, b], [-gate, a, -b], [gate, a, b], [gate, -a, -b]]
            )
        else:
            raise Unsupported(f"internal gate {kind}")
        return gate


def _fold(kind, children):
    """Build an and/or/iff node with constant folding and flattening."""
    if kind in ("and", "or"):
        absorbing = FALSE if kind == "and" else TRUE
        neutral = TRUE if kind == "and" else FALSE
        out = []
        for child in children:
            if child == absorbing:
                return absorbing
            if child == neutral:
                continue
            out.append(child)
        if not out:
            return neutral
        if len(out) == 1:
            return out[0]
        return (kind, out)
    a, b = children
    if a[0] == "const":
        return b if a[1] else _negate(b)
    if b[0] == "const":
        return a if b[1] else _negate(a)
    return ("iff", [a, b])


def _negate(node):
    if node[0] == "const":
        return ("const", not node[1])
    if node[0] == "lit":
        return ("lit", -node[1])
    if node[0] == "and":
        return ("or", [_negate(c) for c in node[1]])
    if node[0] == "or":
        return ("and", [_negate(c) for c in node[1]])
    if node[0] == "iff":
        a, b = node[1]
        return ("iff", [_negate(a), b])
    raise Unsupported(f"cannot negate {node[0]}")


class Translator:
    def __init__(self, sorts: dict, skeleton: Skeleton):
        self.sorts = sorts
        self.skeleton = skeleton

    def sort_of(self, node) -> str:
        if isinstance(node, str):
            name = _unquote(node)
            if name in ("true", "false"):
                return "Bool"
            if name in self.sorts:
                return self.sorts[name]
            return "Real"
        head = node[0] if node else ""
        if head in ("and", "or", "not", "=>", "=", "distinct", "<", "<=", ">", ">="):
            return "Bool"
        if head == "ite":
            return self.sort_of(node[2])
        return "Real"

    def to_bool(self, node):
        if isinstance(node, str):
            name = _unquote(node)
            if name == "true":
                return TRUE
            if name == "false":
                return FALSE
            if self.sorts.get(name) == "Bool":
                return ("lit", self.skeleton.bool_var(name))
            raise Unsupported(f"symbol {name!r} is not boolean")
        if not node:
            raise Unsupported("empty term")
        head = node[0]
        if head == "!":
            return self.to_bool(node[1])
        if head == "not":
            return _negate(self.to_bool(node[1]))
        if head == "and":
            return _fold("and", [self.to_bool(a) for a in node[1:]])
        if head == "or":
            return _fold("or", [self.to_bool(a) for a in node[1:]])
        if head == "=>":
            args = [self.to_bool(a) for a in node[1:]]
            out = args[-1]
            for a in reversed(args[:-1]):
                out = _fold("or", [_negate(a), out])
            return out
        if head == "ite":
            cond = self.to_bool(node[1])
            return _fold(
                "or",
                [
                    _fold("and", [cond, self.to_bool(node[2])]),
                    _fold("and", [_negate(cond), self.to_bool(node[3])]),
                ],
            )
        if head in ("=", "distinct"):
            if len(node) != 3:
                raise Unsupported(f"{head} with arity {len(node) - 1}")
            if self.sort_of(node[1]) == "Bool" or self.sort_of(node[2]) == "Bool":
                result = _fold("iff", [self.to_bool(node[1]), self.to_bool(node[2])])
            else:
                result = self._atom(EQ, node[1], node[2])
            return _negate(result) if head == "distinct" else result
        if head in ("<", "<=", ">", ">="):
            if len(node) != 3:
                raise Unsupported(f"{head} with arity {len(node) - 1}")
            left, right = node[1], node[2]
            if head == ">":
                return self._atom(LT, right, left)
            if head == ">=":
                return self._atom(LE, right, left)
            return self._atom(LT if head == "<" else LE, left, right)
        raise Unsupported(f"operator {head!r} in boolean context")

    def _atom(self, op, left, right):
        term = self.to_lin(left) - self.to_lin(right)
        if not term.coeffs:
            return ("const", _check_const(op, term.const))
        return ("lit", self.skeleton.atom(op, term))

    def to_lin(self, node) -> Lin:
        if isinstance(node, str):
            name = _unquote(node)
            if name in self.sorts:
                if self.sorts[name] != "Real":
                    raise Unsupported(f"boolean {name!r} in arithmetic")
                return Lin({name: Fraction(1)})
            try:
                return Lin({}, Fraction(name))
            except (ValueError, ZeroDivisionError):
                raise Unsupported(f"undeclared symbol {name!r}")
        if not node:
            raise Unsupported("empty arithmetic term")
        head = node[0]
        args = node[1:]
        if head == "+":
            out = Lin()
            for a in args:
                out = out + self.to_lin(a)
            return out
        if head == "-":
            if len(args) == 1:
                return -self.to_lin(args[0])
            out = self.to_lin(args[0])
            for a in args[1:]:
                out = out - self.to_lin(a)
            return out
        if head == "*":
            out = Lin({}, Fraction(1))
            for a in args:
                factor = self.to_lin(a)
                if out.coeffs and factor.coeffs:
                    raise Nonlinear("product of two variable terms")
                if factor.coeffs:
                    out, factor = factor, out
                out = out.scale(factor.const)
            return out
        if head == "/":
            if len(args) != 2:
                raise Unsupported("/ with arity != 2")
            num = self.to_lin(args[0])
            den = self.to_lin(args[1])
            if den.coeffs:
                raise Nonlinear("variable divisor")
            if den.const == 0:
                raise Unsupported("division by zero constant")
            return num.scale(Fraction(1, 1) / den.const)
        raise Unsupported(f"operator {head!r} in arithmetic context")


# -- DPLL ----------------------------------------------------------------------


class Dpll:
    """CDCL search: unit propagation, 1UIP conflict analysis with
    non-chronological backjumping, and an activity-driven decision
    heuristic.  Theory conflicts become learned clauses the same way
    boolean conflicts do."""

    def __init__(self, skeleton: Skeleton):
        self.sk = skeleton
        self.nvars = skeleton.var_count
        self.clauses: list = [list(c) for c in skeleton.clauses]
        self.assign: dict = {}
        self.level: dict = {}
        self.reason: dict = {}  # var -> clause index (None for decisions)
        self.trail: list = []
        self.level_marks: list = []  # trail length at each decision level
        self.occ: dict = {}
        for index, clause in enumerate(self.clauses):
            for lit in clause:
                self.occ.setdefault(lit, []).append(index)
        self.queue: list = []
        self.activity: dict = {}
        self.bump = 1.0

    @property
    def decision_level(self) -> int:
        return len(self.level_marks)

    def _add_clause(self, clause) -> int:
        index = len(self.clauses)
        self.clauses.append(list(clause))
        for lit in clause:
            self.occ.setdefault(lit, []).append(index)
        return index

    def _set(self, var, value, reason) -> None:
        self.assign[var] = value
        self.level[var] = self.decision_level
        self.reason[var] = reason
        self.trail.append(var)
        self.queue.append(var)

    def _lit_value(self, lit):
        value = self.assign.get(abs(lit))
        if value is None:
            return None
        return value if lit > 0 else not value

    def _propagate(self):
        """Unit-propagate; returns a conflicting clause index or None."""
        while self.queue:
            var = self.queue.pop()
            falsified = -var if self.assign[var] else var
            for index in self.occ.get(falsified, ()):
                clause = self.clauses[index]
                unit = None
                satisfied = False
                open_count = 0
                for lit in clause:
                    state = self._lit_value(lit)
                    if state is True:
                        satisfied = True
                        break
                    if state is None:
                        open_count += 1
                        unit = lit
                        if open_count > 1:
                            break
                if satisfied or open_count > 1:
                    continue
                if open_count == 0:
                    self.queue = []
                    return index
                self._set(abs(unit), unit > 0, index)
        return None

    def _propagate_all(self):
        for index, clause in enumerate(self.clauses):
            states = [self._lit_value(lit) for lit in clause]
            if any(s is True for s in states):
                continue
            open_lits = [lit for lit, s in zip(clause, states) if s is None]
            if not open_lits:
                return index
            if len(open_lits) == 1:
                self._set(abs(open_lits[0]), open_lits[0] > 0, index)
        return self._propagate()

    def _backjump(self, target_level) -> None:
        mark = self.level_marks[target_level]
        del self.level_marks[target_level:]
        while len(self.trail) > mark:
            var = self.trail.pop()
            del self.assign[var]
            del self.level[var]
            self.reason.pop(var, None)
        self.queue = []

    def _bump(self, var) -> None:
        self.activity[var] = self.activity.get(var, 0.0) + self.bump
        if self.activity[var] > 1e100:
            for key in self.activity:
                self.activity[key] *= 1e-100
            self.bump *= 1e-100

    def _analyze(self, conflict_index):
        """1UIP learning.  Returns (learned clause, backjump level) or None
        when the conflict is at level zero (unsat)."""
        conflict = self.clauses[conflict_index]
        top = max((self.level[abs(l)] for l in conflict), default=0)
        if top == 0:
            return None
        if top < self.decision_level:
            self._backjump(top)
        seen: set = set()
        learned: list = []
        counter = 0
        trail_index = len(self.trail) - 1
        clause = conflict
        while True:
            for lit in clause:
                var = abs(lit)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self._bump(var)
                if self.level[var] == self.decision_level:
                    counter += 1
                else:
                    learned.append(lit)
            while abs(self.trail[trail_index]) not in seen or (
                self.level[abs(self.trail[trail_index])] != self.decision_level
            ):
                trail_index -= 1
            var = abs(self.trail[trail_index])
            trail_index -= 1
            counter -= 1
            if counter == 0:
                uip = -var if self.assign[var] else var
                learned.insert(0, uip)
                break
            clause = [l for l in self.clauses[self.reason[var]] if abs(l) != var]
        self.bump *= 1.05
        if len(learned) == 1:
            return learned, 0
        back = max(self.level[abs(l)] for l in learned[1:])
        return learned, back

    def _handle_conflict(self, conflict_index) -> bool:
        result = self._analyze(conflict_index)
        if result is None:
            return False
        learned, back = result
        index = self._add_clause(learned)
        self._backjump(back)
        self._set(abs(learned[0]), learned[0] > 0, index)
        follow = self._propagate()
        while follow is not None:
            result = self._analyze(follow)
            if result is None:
                return False
            learned, back = result
            index = self._add_clause(learned)
            self._backjump(back)
            self._set(abs(learned[0]), learned[0] > 0, index)
            follow = self._propagate()
        return True

    def _theory_literals(self):
        lits = []
        for var, (op, term) in self.sk.atoms.items():
            value = self.assign.get(var)
            if value is None:
                continue
            lit = var if value else -var
            if value:
                lits.append((op, term, frozenset((lit,))))
            elif op == EQ:
                lits.append((NE, term, frozenset((lit,))))
            elif op == LE:
                lits.append((LT, -term, frozenset((lit,))))
            else:  # not (t < 0)  ->  -t <= 0
                lits.append((LE, -term, frozenset((lit,))))
        return lits

    def _theory_check(self):
        """None if consistent (also refreshes the rational model), else the
        index of a freshly learned conflict clause."""
        lits = self._theory_literals()
        self._checked_count = len(lits)
        if not lits:
            self.real_model = {}
            return None
        result = feasible(lits)
        if result[0] == "sat":
            self.real_model = result[1]
            return None
        return self._add_clause([-lit for lit in sorted(result[1])])

    def _assigned_atom_count(self) -> int:
        return sum(1 for var in self.sk.atoms if var in self.assign)

    def solve(self):
        self.real_model = {}
        self._checked_count = -1
        conflict = self._propagate_all()
        if conflict is not None and not self._handle_conflict(conflict):
            return "unsat"
        while True:
            complete = len(self.assign) >= self.nvars
            count = self._assigned_atom_count()
            if count < self._checked_count:
                self._checked_count = count
            # Full theory checks are the expensive part; run them when the
            # assignment is complete and periodically while it grows.
            if complete or count >= self._checked_count + 4:
                conflict = self._theory_check()
                if conflict is not None:
                    if not self._handle_conflict(conflict):
                        return "unsat"
                    continue
            var = self._pick()
            if var is None:
                if self._checked_count != self._assigned_atom_count():
                    conflict = self._theory_check()
                    if conflict is not None:
                        if not self._handle_conflict(conflict):
                            return "unsat"
                        continue
                return "sat"
            self.level_marks.append(len(self.trail))
            self._set(var, False, None)
            conflict = self._propagate()
            if conflict is not None and not self._handle_conflict(conflict):
                return "unsat"

    def _pick(self):
        best = None
        best_score = -1.0
        for var in range(1, self.nvars + 1):
            if var in self.assign:
                continue
            score = self.activity.get(var, 0.0)
            if score > best_score:
                best, best_score = var, score
        return best


# -- command interpreter --------------------------------------------------------


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    value = Fraction(value)
    if value < 0:
        return f"(- {_format_value(-value)})"
    if value.denominator == 1:
        return f"{value.numerator}.0"
    scaled = value
    digits = 0
    while scaled.denominator % 2 == 0:
        scaled *= 2
        digits += 1
    while scaled.denominator % 5 == 0:
        scaled *= 5
        digits += 1
    if scaled.denominator != 1:
        return f"(/ {value.numerator} {value.denominator})"
    text = str(value.numerator * 10**digits // value.denominator).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}"


class RefSolver:
    def __init__(self, out=None):
        self.out = out or sys.stdout
        self.sorts: dict = {}
        self.decl_order: list = []
        self.frames: list = [[]]
        self.auto_names = 0
        self.last_status = None
        self.last_model: dict = {}

    def _print(self, text: str) -> None:
        self.out.write(text + "\n")
        self.out.flush()

    def _error(self, message: str) -> None:
        escaped = message.replace('"', '""')
        self._print(f'(error "{escaped}")')

    def _assertions(self):
        for frame in self.frames:
            yield from frame

    def execute(self, sexp) -> bool:
        """Run one command; False stops the read loop."""
        if not isinstance(sexp, list) or not sexp:
            self._error("commands must be non-empty lists")
            return True
        head = sexp[0]
        if head in ("set-option", "set-info", "set-logic"):
            return True
        if head in ("declare-const", "declare-fun"):
            name = _unquote(sexp[1])
            sort = sexp[-1]
            if head == "declare-fun" and sexp[2] != []:
                self._error("only zero-arity declare-fun is supported")
                return True
            if sort not in ("Bool", "Real", "Int"):
                self._error(f"unsupported sort {sort}")
                return True
            if name not in self.sorts:
                self.decl_order.append(name)
            self.sorts[name] = "Bool" if sort == "Bool" else "Real"
            return True
        if head == "assert":
            term = sexp[1]
            name = None
            if isinstance(term, list) and term[:1] == ["!"]:
                for i, item in enumerate(term):
                    if item == ":named":
                        name = _unquote(term[i + 1])
                term = term[1]
            if name is None:
                self.auto_names += 1
                name = f"_a{self.auto_names}"
            self.frames[-1].append((name, term))
            return True
        if head == "push":
            count = int(sexp[1]) if len(sexp) > 1 else 1
            for _ in range(count):
                self.frames.append([])
            return True
        if head == "pop":
            count = int(sexp[1]) if len(sexp) > 1 else 1
            for _ in range(count):
                if len(self.frames) > 1:
                    self.frames.pop()
            return True
        if head == "check-sat":
            self._check_sat()
            return True
        if head == "get-model":
            self._get_model()
            return True
        if head == "get-unsat-core":
            self._get_unsat_core()
            return True
        if head == "reset":
            self.__init__(self.out)
            return True
        if head == "exit":
            return False
        self._error(f"unsupported command {head}")
        return True

    def _check_sat(self) -> None:
        skeleton = Skeleton()
        translator = Translator(self.sorts, skeleton)
        try:
            roots = []
            for _, term in self._assertions():
                node = translator.to_bool(term)
                if node == FALSE:
                    roots = None
                    break
                if node == TRUE:
                    continue
                roots.append(node)
        except Nonlinear:
            self.last_status = "unknown"
            self._print("unknown")
            return
        except Unsupported as exc:
            self.last_status = "unknown"
            self._error(str(exc))
            self._print("unknown")
            return

        if roots is None:
            self.last_status = "unsat"
            self._print("unsat")
            return
        for node in roots:
            skeleton.clauses.append([skeleton.tseitin(node)])
        dpll = Dpll(skeleton)
        status = dpll.solve()
        self.last_status = status
        if status == "sat":
            self.last_model = {}
            for name in self.decl_order:
                if self.sorts[name] == "Bool":
                    var = skeleton.bool_vars.get(name)
                    self.last_model[name] = (
                        bool(dpll.assign.get(var, False)) if var else False
                    )
                else:
                    self.last_model[name] = dpll.real_model.get(name, Fraction(0))
        self._print(status)

    def _get_model(self) -> None:
        if self.last_status != "sat":
            self._error("model is not available")
            return
        lines = ["(model"]
        for name in self.decl_order:
            sort = self.sorts[name]
            value = self.last_model.get(
                name, False if sort == "Bool" else Fraction(0)
            )
            lines.append(
                f"  (define-fun {_quote(name)} () {sort} {_format_value(value)})"
            )
        lines.append(")")
        self._print("\n".join(lines))

    def _get_unsat_core(self) -> None:
        if self.last_status != "unsat":
            self._error("unsat core is not available")
            return
        names = " ".join(_quote(name) for name, _ in self._assertions())
        self._print(f"({names})")


def main() -> int:
    reader = SexpReader(sys.stdin)
    solver = RefSolver(sys.stdout)
    while True:
        try:
            sexp = reader.read()
        except Unsupported as exc:
            solver._error(str(exc))
            return 1
        if sexp is None:
            return 0
        if not solver.execute(sexp):
            return 0


if __name__ == "__main__":
    sys.exit(main())
