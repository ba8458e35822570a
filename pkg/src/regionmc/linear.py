"""Exact linear arithmetic over named variables.

Predicates are kept in disjunctive normal form: a predicate is a tuple of
cells and a cell is a conjunction of linear constraints.  All coefficients
are fractions.Fraction; floats never enter any computation.  Emptiness of a
cell is decided by eliminating every variable (Gauss substitution for
equalities, Fourier-Motzkin for inequalities) and inspecting the ground
constraints that remain.

Variables live in a Space, which fixes their order and records which of
them range over the integers.  Constraints over integer variables are
tightened on construction (a strict bound with an integral left side
becomes a non-strict bound one unit lower), so rational emptiness checks
agree with the integer semantics for the difference-and-sign constraints
used by the bundled systems.  Divisibility reasoning is out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Space",
    "Constraint",
    "Cell",
    "LinearPredicate",
    "LinearTerm",
    "BudgetError",
    "parse_constraint",
    "parse_predicate",
]

# Relations are normalised to these three; >= and > are flipped on input.
LE = "<="
LT = "<"
EQ = "="

DEFAULT_CELL_BUDGET = 4096


class BudgetError(RuntimeError):
    """A DNF operation exceeded its cell budget.

    Carries the size that was reached so callers can report it.
    """

    def __init__(self, size: int, budget: int):
        super().__init__(f"predicate grew to {size} cells (budget {budget})")
        self.size = size
        self.budget = budget


@dataclass(frozen=True)
class Space:
    """Ordered variable names plus the subset that is integer-valued."""

    names: tuple[str, ...]
    integer: frozenset[str] = frozenset()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names: {self.names}")
        unknown = self.integer - set(self.names)
        if unknown:
            raise ValueError(f"integer flags for unknown variables: {sorted(unknown)}")

    def index(self, name: str) -> int:
        return self.names.index(name)

    def all_integer(self, support: Iterable[int]) -> bool:
        return all(self.names[i] in self.integer for i in support)

    def point(self, values: Mapping[str, int | Fraction]) -> tuple[Fraction, ...]:
        return tuple(Fraction(values[n]) for n in self.names)


def _normalize_coeffs(coeffs: Sequence[Fraction], bound: Fraction):
    """Scale to primitive integer coefficients.  Returns (coeffs, bound)."""
    denom = 1
    for c in coeffs:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    nums = [int(c * denom) for c in coeffs]
    g = 0
    for n in nums:
        g = gcd(g, abs(n))
    if g == 0:
        return tuple(Fraction(0) for _ in coeffs), bound * denom
    scale = Fraction(denom, g)
    return tuple(c * scale for c in coeffs), bound * scale


@dataclass(frozen=True)
class Constraint:
    """sum(coeffs[i] * x[i]) rel bound, with rel one of <=, <, =."""

    coeffs: tuple[Fraction, ...]
    rel: str
    bound: Fraction

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coeffs) if c != 0)

    def is_ground(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def ground_truth(self) -> bool:
        zero = Fraction(0)
        if self.rel == LE:
            return zero <= self.bound
        if self.rel == LT:
            return zero < self.bound
        return zero == self.bound

    def evaluate(self, point: Sequence[Fraction]) -> bool:
        lhs = sum((c * v for c, v in zip(self.coeffs, point)), Fraction(0))
        if self.rel == LE:
            return lhs <= self.bound
        if self.rel == LT:
            return lhs < self.bound
        return lhs == self.bound

    def negated(self) -> tuple["Constraint", ...]:
        """Constraints whose disjunction is the complement of this one."""
        neg = tuple(-c for c in self.coeffs)
        if self.rel == LE:  # not(t <= b)  is  -t < -b
            return (Constraint(neg, LT, -self.bound),)
        if self.rel == LT:
            return (Constraint(neg, LE, -self.bound),)
        return (
            Constraint(self.coeffs, LT, self.bound),
            Constraint(neg, LT, -self.bound),
        )

    def render(self, space: Space) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            name = space.names[i]
            if c == 1:
                part = name
            elif c == -1:
                part = f"-{name}"
            else:
                part = f"{c}*{name}"
            if terms and not part.startswith("-"):
                terms.append(f"+{part}")
            else:
                terms.append(part)
        lhs = "".join(terms) if terms else "0"
        rel = "=" if self.rel == EQ else self.rel
        return f"{lhs} {rel} {self.bound}"


def make_constraint(space: Space, coeffs: Sequence[Fraction], rel: str, bound) -> Constraint:
    """Normalise a raw constraint for the given space.

    Applies primitive integer scaling, a sign convention for equalities and
    integer tightening of strict/fractional bounds.
    """
    bound = Fraction(bound)
    coeffs = tuple(Fraction(c) for c in coeffs)
    if rel in (">=", ">"):
        coeffs = tuple(-c for c in coeffs)
        bound = -bound
        rel = LE if rel == ">=" else LT
    if rel == "==":
        rel = EQ
    if rel not in (LE, LT, EQ):
        raise ValueError(f"unknown relation {rel!r}")
    coeffs, bound = _normalize_coeffs(coeffs, bound)
    support = tuple(i for i, c in enumerate(coeffs) if c != 0)
    if rel == EQ and support and coeffs[support[0]] < 0:
        coeffs = tuple(-c for c in coeffs)
        bound = -bound
    if support and space.all_integer(support):
        # Coefficients are integers here, so the left side is an integer.
        if rel == LT:
            rel = LE
            bound = Fraction(ceil(bound) - 1)
        elif rel == LE and bound.denominator != 1:
            bound = Fraction(floor(bound))
    return Constraint(coeffs, rel, bound)


# --- cells -----------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """A conjunction of constraints (frozenset, canonical order irrelevant)."""

    constraints: frozenset[Constraint]

    def evaluate(self, point: Sequence[Fraction]) -> bool:
        return all(c.evaluate(point) for c in self.constraints)

    def sorted_constraints(self) -> list[Constraint]:
        return sorted(self.constraints, key=lambda c: (c.coeffs, c.rel, c.bound))

    def render(self, space: Space) -> str:
        if not self.constraints:
            return "true"
        return " & ".join(c.render(space) for c in self.sorted_constraints())


def _simplify_cell(constraints: Iterable[Constraint]) -> Cell | None:
    """Per-vector canonicalisation.  Returns None when contradiction is syntactic."""
    by_vec: dict[tuple[Fraction, ...], dict] = {}
    for c in constraints:
        if c.is_ground():
            if not c.ground_truth():
                return None
            continue
        vec = c.coeffs
        slot = by_vec.setdefault(vec, {"upper": None, "eq": None})
        if c.rel == EQ:
            if slot["eq"] is not None and slot["eq"] != c.bound:
                return None
            slot["eq"] = c.bound
        else:
            cur = slot["upper"]
            cand = (c.bound, c.rel == LT)
            if cur is None or cand[0] < cur[0] or (cand[0] == cur[0] and cand[1]):
                slot["upper"] = cand
    # Merge facing inequalities (vec and -vec) into equalities or detect gaps.
    out: set[Constraint] = set()
    done: set[tuple[Fraction, ...]] = set()
    for vec, slot in by_vec.items():
        if vec in done:
            continue
        neg = tuple(-c for c in vec)
        other = by_vec.get(neg)
        eq_b = slot["eq"]
        if other is not None:
            done.add(neg)
            oeq = other["eq"]
            if oeq is not None:
                if eq_b is not None and eq_b != -oeq:
                    return None
                eq_b = eq_b if eq_b is not None else -oeq
        if eq_b is not None:
            # check every upper bound against the fixed value
            for v, s in ((vec, slot), (neg, other or {"upper": None})):
                ub = s.get("upper")
                if ub is not None:
                    val = eq_b if v == vec else -eq_b
                    if val > ub[0] or (val == ub[0] and ub[1]):
                        return None
            cvec, cb = vec, eq_b
            if cvec[min(i for i, x in enumerate(cvec) if x != 0)] < 0:
                cvec, cb = neg, -eq_b
            out.add(Constraint(cvec, EQ, cb))
            done.add(vec)
            continue
        ub = slot["upper"]
        lb = other["upper"] if other is not None else None  # bound on -vec
        if ub is not None and lb is not None:
            # vec <= ub and vec >= -lb
            lo = -lb[0]
            if lo > ub[0]:
                return None
            if lo == ub[0]:
                if ub[1] or lb[1]:
                    return None
                cvec, cb = vec, ub[0]
                if cvec[min(i for i, x in enumerate(cvec) if x != 0)] < 0:
                    cvec, cb = neg, -ub[0]
                out.add(Constraint(cvec, EQ, cb))
                done.add(vec)
                continue
        if ub is not None:
            out.add(Constraint(vec, LT if ub[1] else LE, ub[0]))
        if lb is not None:
            out.add(Constraint(neg, LT if lb[1] else LE, lb[0]))
        done.add(vec)
    return Cell(frozenset(out))


# --- feasibility -----------------------------------------------------------

_feasible_cache: dict[frozenset[Constraint], bool] = {}


def _substitute_equality(constraints: list[Constraint], pivot: Constraint, var: int) -> list[Constraint]:
    k = pivot.coeffs[var]
    out = []
    for c in constraints:
        if c is pivot:
            continue
        cv = c.coeffs[var]
        if cv == 0:
            out.append(c)
            continue
        # c - (cv/k) * pivot eliminates var
        factor = cv / k
        coeffs = tuple(a - factor * b for a, b in zip(c.coeffs, pivot.coeffs))
        bound = c.bound - factor * pivot.bound
        out.append(Constraint(coeffs, c.rel, bound))
    return out


def _fm_eliminate_var(constraints: list[Constraint], var: int) -> list[Constraint]:
    for c in constraints:
        if c.rel == EQ and c.coeffs[var] != 0:
            return _substitute_equality(constraints, c, var)
    uppers, lowers, rest = [], [], []
    for c in constraints:
        cv = c.coeffs[var]
        if cv == 0:
            rest.append(c)
        elif cv > 0:
            uppers.append(c)
        else:
            lowers.append(c)
    for up in uppers:
        for lo in lowers:
            a = up.coeffs[var]
            b = -lo.coeffs[var]
            coeffs = tuple(b * cu + a * cl for cu, cl in zip(up.coeffs, lo.coeffs))
            bound = b * up.bound + a * lo.bound
            rel = LT if (up.rel == LT or lo.rel == LT) else LE
            rest.append(Constraint(coeffs, rel, bound))
    return rest


def _cell_feasible(cell: Cell) -> bool:
    cached = _feasible_cache.get(cell.constraints)
    if cached is not None:
        return cached
    work = list(cell.constraints)
    nvars = len(work[0].coeffs) if work else 0
    ok = True
    for var in range(nvars):
        work = _fm_eliminate_var(work, var)
        ground = [c for c in work if c.is_ground()]
        if any(not c.ground_truth() for c in ground):
            ok = False
            break
        work = [c for c in work if not c.is_ground()]
    if len(_feasible_cache) > 200_000:
        _feasible_cache.clear()
    _feasible_cache[cell.constraints] = ok
    return ok


# --- predicates ------------------------------------------------------------


@dataclass(frozen=True)
class LinearPredicate:
    """DNF predicate: disjunction of feasible, canonicalised cells."""

    space: Space
    cells: tuple[Cell, ...]

    # construction ----------------------------------------------------

    @staticmethod
    def from_cells(space: Space, raw_cells: Iterable[Iterable[Constraint]],
                   budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        cells: list[Cell] = []
        seen: set[frozenset[Constraint]] = set()
        for raw in raw_cells:
            # re-normalise so integer tightening holds no matter where the
            # constraints came from (negation and elimination bypass it)
            cell = _simplify_cell(make_constraint(space, c.coeffs, c.rel, c.bound)
                                  for c in raw)
            if cell is None or not _cell_feasible(cell):
                continue
            if cell.constraints in seen:
                continue
            seen.add(cell.constraints)
            cells.append(cell)
        cells = _absorb(cells)
        if len(cells) > budget:
            raise BudgetError(len(cells), budget)
        cells.sort(key=lambda c: tuple((k.coeffs, k.rel, k.bound) for k in c.sorted_constraints()))
        return LinearPredicate(space, tuple(cells))

    @staticmethod
    def true(space: Space) -> "LinearPredicate":
        return LinearPredicate(space, (Cell(frozenset()),))

    @staticmethod
    def false(space: Space) -> "LinearPredicate":
        return LinearPredicate(space, ())

    def is_false_syntactic(self) -> bool:
        return not self.cells

    # logical operations ------------------------------------------------

    def and_(self, other: "LinearPredicate", budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        raws = []
        for a in self.cells:
            for b in other.cells:
                raws.append(a.constraints | b.constraints)
        return LinearPredicate.from_cells(self.space, raws, budget)

    def or_(self, other: "LinearPredicate", budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        raws = [c.constraints for c in self.cells] + [c.constraints for c in other.cells]
        return LinearPredicate.from_cells(self.space, raws, budget)

    def diff(self, other: "LinearPredicate", budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        pieces = list(self.cells)
        for sub in other.cells:
            nxt: list[Cell] = []
            for piece in pieces:
                # only pieces meeting the subtracted cell need splitting
                meet = _simplify_cell(piece.constraints | sub.constraints)
                if meet is None or not _cell_feasible(meet):
                    nxt.append(piece)
                    continue
                # piece minus sub, as a disjoint union over negated constraints
                context: set[Constraint] = set(piece.constraints)
                for g in sub.sorted_constraints():
                    for ng in g.negated():
                        cell = _simplify_cell(context | {ng})
                        if cell is not None and _cell_feasible(cell):
                            nxt.append(cell)
                    context.add(g)
                if len(nxt) > budget:
                    raise BudgetError(len(nxt), budget)
            pieces = _absorb(nxt)
            if not pieces:
                break
        return LinearPredicate.from_cells(self.space, (p.constraints for p in pieces), budget)

    def is_empty(self) -> bool:
        # cells are pruned to feasible ones at construction time
        return not self.cells

    def evaluate(self, point: Sequence[Fraction]) -> bool:
        return any(c.evaluate(point) for c in self.cells)

    # variable manipulation ---------------------------------------------

    def eliminate(self, names: Sequence[str], budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        """Existentially quantify the named variables (exact, rational)."""
        idxs = [self.space.index(n) for n in names]
        out_cells = []
        for cell in self.cells:
            work = list(cell.constraints)
            dead = False
            for var in idxs:
                work = _fm_eliminate_var(work, var)
                if any(c.is_ground() and not c.ground_truth() for c in work):
                    dead = True
                    break
                work = [c for c in work if not c.is_ground()]
            if dead:
                continue
            renorm = [make_constraint(self.space, c.coeffs, c.rel, c.bound) for c in work]
            out_cells.append(renorm)
        return LinearPredicate.from_cells(self.space, out_cells, budget)

    def transfer(self, space: Space, mapping: Mapping[str, "LinearTerm"],
                 budget: int = DEFAULT_CELL_BUDGET) -> "LinearPredicate":
        """Substitute each of this predicate's variables by a term over `space`.

        Variables missing from `mapping` map to their own name in `space`.
        """
        terms = []
        for name in self.space.names:
            term = mapping.get(name)
            if term is None:
                term = LinearTerm.var(space, name)
            if term.space != space:
                raise ValueError("term space mismatch")
            terms.append(term)
        out_cells = []
        for cell in self.cells:
            raws = []
            for c in cell.constraints:
                coeffs = [Fraction(0)] * len(space.names)
                const = Fraction(0)
                for coef, term in zip(c.coeffs, terms):
                    if coef == 0:
                        continue
                    for i, tc in enumerate(term.coeffs):
                        coeffs[i] += coef * tc
                    const += coef * term.const
                raws.append(make_constraint(space, coeffs, c.rel, c.bound - const))
            out_cells.append(raws)
        return LinearPredicate.from_cells(space, out_cells, budget)

    def rename(self, space: Space, name_map: Mapping[str, str]) -> "LinearPredicate":
        mapping = {old: LinearTerm.var(space, new) for old, new in name_map.items()}
        return self.transfer(space, mapping)

    # misc ----------------------------------------------------------------

    def render(self) -> str:
        if not self.cells:
            return "false"
        parts = [c.render(self.space) for c in self.cells]
        if len(parts) == 1:
            return parts[0]
        return " | ".join(f"({p})" for p in parts)

    def size(self) -> int:
        return len(self.cells)


def _absorb(cells: list[Cell]) -> list[Cell]:
    """Drop cells whose constraint set is a superset of another cell's."""
    out = []
    for i, c in enumerate(cells):
        absorbed = False
        for j, d in enumerate(cells):
            if i == j:
                continue
            if d.constraints < c.constraints:
                absorbed = True
                break
            if d.constraints == c.constraints and j < i:
                absorbed = True
                break
        if not absorbed:
            out.append(c)
    return out


# --- affine terms and a small parser ---------------------------------------


@dataclass(frozen=True)
class LinearTerm:
    """Affine expression sum(coeffs[i]*x[i]) + const over a space."""

    space: Space
    coeffs: tuple[Fraction, ...]
    const: Fraction

    @staticmethod
    def var(space: Space, name: str) -> "LinearTerm":
        coeffs = [Fraction(0)] * len(space.names)
        coeffs[space.index(name)] = Fraction(1)
        return LinearTerm(space, tuple(coeffs), Fraction(0))

    @staticmethod
    def constant(space: Space, value) -> "LinearTerm":
        return LinearTerm(space, tuple(Fraction(0) for _ in space.names), Fraction(value))

    def plus(self, other: "LinearTerm") -> "LinearTerm":
        return LinearTerm(self.space,
                          tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
                          self.const + other.const)

    def scaled(self, k) -> "LinearTerm":
        k = Fraction(k)
        return LinearTerm(self.space, tuple(k * c for c in self.coeffs), k * self.const)


_TOKEN = re.compile(r"\s*(?:(\d+/\d+|\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z0-9_]*'?)|(<=|>=|==|[<>=+*()-])|$)")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad character in {text!r} at offset {pos}")
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok is None:
            break
        tokens.append(tok)
        pos = m.end()
    return tokens


class _TermParser:
    """expr := term (('+'|'-') term)* ; term := [k '*'] var | k"""

    def __init__(self, space: Space, tokens: list[str]):
        self.space = space
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse_expr(self) -> LinearTerm:
        term = self.parse_signed_term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.parse_signed_term()
            term = term.plus(rhs if op == "+" else rhs.scaled(-1))
        return term

    def parse_signed_term(self) -> LinearTerm:
        sign = Fraction(1)
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        tok = self.take()
        if tok is None:
            raise ValueError("unexpected end of expression")
        if re.fullmatch(r"\d+/\d+|\d+(\.\d+)?", tok):
            value = Fraction(tok)
            if self.peek() == "*":
                self.take()
                var = self.take()
                return LinearTerm.var(self.space, var).scaled(sign * value)
            return LinearTerm.constant(self.space, sign * value)
        return LinearTerm.var(self.space, tok).scaled(sign)


def parse_term(space: Space, text: str) -> LinearTerm:
    parser = _TermParser(space, _tokenize(text))
    term = parser.parse_expr()
    if parser.peek() is not None:
        raise ValueError(f"trailing tokens in term {text!r}")
    return term


def parse_constraint(space: Space, text: str) -> Constraint:
    m = re.search(r"(<=|>=|==|<|>|=)", text)
    if not m:
        raise ValueError(f"no relation in constraint {text!r}")
    lhs = parse_term(space, text[: m.start()])
    rhs = parse_term(space, text[m.end():])
    rel = m.group(1)
    diff = lhs.plus(rhs.scaled(-1))
    return make_constraint(space, diff.coeffs, rel, -diff.const)


def parse_predicate(space: Space, text: str) -> LinearPredicate:
    """Parse 'c & c & ... | c & ...' into a predicate.  No parentheses."""
    text = text.strip()
    if text in ("true", "TRUE"):
        return LinearPredicate.true(space)
    if text in ("false", "FALSE"):
        return LinearPredicate.false(space)
    cells = []
    for part in text.split("|"):
        cells.append([parse_constraint(space, c) for c in part.split("&")])
    return LinearPredicate.from_cells(space, cells)
