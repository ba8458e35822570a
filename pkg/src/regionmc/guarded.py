"""Guarded-command transition systems over integer variables.

A system is a finite list of commands over a fixed variable space.  A
command either assigns simultaneous affine expressions (the common case,
predecessor by substitution) or constrains a primed copy of the variables
with an arbitrary linear relation (predecessor by existential elimination
of the primed copy).

Enumeration-valued control variables such as program counters are declared
with a finite symbol range.  Internally every combination of control values
is a location, and a region is a mapping from locations to predicates over
the remaining numeric variables.  That keeps the polyhedral work on small
low-dimensional cells: boolean structure over the control part is handled
by the dictionary, not by the constraint solver.

States are mappings from variable names to integers.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linear import (
    DEFAULT_CELL_BUDGET,
    LinearPredicate,
    LinearTerm,
    Space,
    make_constraint,
    parse_constraint,
    parse_term,
)
from .regions import AlgebraError, RegionAlgebra

__all__ = [
    "Command",
    "GuardedCommandSystem",
    "GuardedRegionAlgebra",
    "parse_guarded",
    "render_state",
    "explicit_truncation",
    "bakery_system",
    "bakery_algebra",
    "transitive_algebra",
]

PRIME = "'"

# A region payload: control location (tuple of enum values) -> nonempty
# predicate over the numeric variables.  Empty slots are never stored.
Located = dict


@dataclass(frozen=True)
class Command:
    """guard -> update.  Exactly one of `updates` (affine assignment map,
    unlisted variables keep their value) and `relation` (predicate over the
    doubled space, primed names for post-state) is set."""

    name: str
    guard: LinearPredicate
    updates: tuple[tuple[str, LinearTerm], ...] | None = None
    relation: LinearPredicate | None = None

    def __post_init__(self):
        if (self.updates is None) == (self.relation is None):
            raise ValueError(f"command {self.name}: need updates xor relation")


@dataclass(frozen=True)
class _Entry:
    """One command specialised to a (source, target) pair of locations.

    Affine entries carry the guard (already intersected with the source
    domain slot) and the numeric substitution; relational entries carry the
    full step relation over the doubled numeric space, with both domain
    slots already conjoined.
    """

    command: str
    src: tuple[int, ...]
    dst: tuple[int, ...]
    guard: LinearPredicate | None = None
    sub: tuple[tuple[str, LinearTerm], ...] | None = None
    rel: LinearPredicate | None = None


class GuardedCommandSystem:
    """Commands plus a domain predicate delimiting the valid states."""

    def __init__(self, space: Space, domain: LinearPredicate,
                 commands: Sequence[Command], symbols: Mapping[str, int] | None = None,
                 enum_ranges: Mapping[str, int] | None = None,
                 name: str = "guarded"):
        self.space = space
        self.domain = domain
        self.commands = list(commands)
        self.symbols = dict(symbols or {})
        self.enum_ranges = dict(enum_ranges or {})
        self.name = name
        for var in self.enum_ranges:
            if var not in space.names:
                raise ValueError(f"enum range for unknown variable {var}")
        primed = tuple(n + PRIME for n in space.names)
        self.doubled = Space(space.names + primed,
                             space.integer | frozenset(n + PRIME for n in space.names
                                                       if n in space.integer))
        self.enum_vars = tuple(n for n in space.names if n in self.enum_ranges)
        self.numeric_names = tuple(n for n in space.names if n not in self.enum_ranges)
        self.nspace = Space(self.numeric_names,
                            frozenset(n for n in self.numeric_names if n in space.integer))
        nprimed = tuple(n + PRIME for n in self.numeric_names)
        self.ndoubled = Space(self.numeric_names + nprimed,
                              self.nspace.integer | frozenset(n + PRIME
                                                              for n in self.nspace.integer))
        for cmd in self.commands:
            self._validate(cmd)
        self.locations = [loc for loc in itertools.product(
            *(range(self.enum_ranges[v]) for v in self.enum_vars))]
        self.located_domain: Located = {}
        for loc in self.locations:
            slot = self.locate(domain, loc)
            if not slot.is_empty():
                self.located_domain[loc] = slot
        self._entries = [e for cmd in self.commands for e in self._compile(cmd)]

    def _validate(self, cmd: Command) -> None:
        if cmd.guard.space != self.space:
            raise ValueError(f"command {cmd.name}: guard over wrong space")
        if cmd.updates is not None:
            for var, term in cmd.updates:
                if var not in self.space.names:
                    raise ValueError(f"command {cmd.name}: unknown variable {var}")
                if term.space != self.space:
                    raise ValueError(f"command {cmd.name}: update term over wrong space")
                if any(c.denominator != 1 for c in term.coeffs) or term.const.denominator != 1:
                    raise ValueError(f"command {cmd.name}: non-integer update coefficients")
        elif cmd.relation.space != self.doubled:
            raise ValueError(f"command {cmd.name}: relation must use the doubled space")

    # -- location plumbing ---------------------------------------------------

    def locate(self, pred: LinearPredicate, loc: tuple[int, ...],
               budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        """Specialise a full-space predicate at one control location."""
        mapping = {var: LinearTerm.constant(self.nspace, val)
                   for var, val in zip(self.enum_vars, loc)}
        return pred.transfer(self.nspace, mapping, budget)

    def locate_map(self, pred: LinearPredicate,
                   budget: int = DEFAULT_CELL_BUDGET) -> Located:
        """Full-space predicate -> located payload, clipped to the domain."""
        out: Located = {}
        for loc, dom in self.located_domain.items():
            slot = dom.and_(self.locate(pred, loc, budget), budget)
            if not slot.is_empty():
                out[loc] = slot
        return out

    def unlocate(self, located: Located,
                 budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        """Located payload -> the equivalent full-space predicate."""
        out = LinearPredicate.false(self.space)
        for loc, pred in sorted(located.items()):
            anchor = [make_constraint(
                self.space,
                [Fraction(1) if n == var else Fraction(0) for n in self.space.names],
                "=", val)
                for var, val in zip(self.enum_vars, loc)]
            lifted = pred.transfer(self.space, {}, budget)
            cells = [list(cell.constraints) + anchor for cell in lifted.cells]
            out = out.or_(LinearPredicate.from_cells(self.space, cells, budget), budget)
        return out

    def located_member(self, located: Located, state: Mapping[str, int]) -> bool:
        slot = located.get(tuple(state[v] for v in self.enum_vars))
        return slot is not None and slot.evaluate(self.nspace.point(state))

    def state_location(self, state: Mapping[str, int]) -> tuple[int, ...]:
        return tuple(state[v] for v in self.enum_vars)

    # -- command compilation ---------------------------------------------------

    def _compile(self, cmd: Command) -> list[_Entry]:
        entries: list[_Entry] = []
        if cmd.updates is not None:
            assigned = dict(cmd.updates)
            numeric_idx = [self.space.index(n) for n in self.numeric_names]
            for src, dom in self.located_domain.items():
                guard = dom.and_(self.locate(cmd.guard, src))
                if guard.is_empty():
                    continue
                dst = self._enum_target(cmd, assigned, src, numeric_idx)
                if dst is None or dst not in self.located_domain:
                    continue
                sub = []
                for var in self.numeric_names:
                    term = assigned.get(var)
                    if term is None:
                        continue
                    const = term.const + sum(
                        (term.coeffs[self.space.index(e)] * v
                         for e, v in zip(self.enum_vars, src)), Fraction(0))
                    sub.append((var, LinearTerm(
                        self.nspace, tuple(term.coeffs[i] for i in numeric_idx), const)))
                entries.append(_Entry(cmd.name, src, dst, guard=guard, sub=tuple(sub)))
        else:
            full = self._full_relation(cmd)
            for src in self.located_domain:
                for dst in self.located_domain:
                    mapping = {var: LinearTerm.constant(self.ndoubled, val)
                               for var, val in zip(self.enum_vars, src)}
                    mapping.update({var + PRIME: LinearTerm.constant(self.ndoubled, val)
                                    for var, val in zip(self.enum_vars, dst)})
                    rel = full.transfer(self.ndoubled, mapping)
                    if not rel.is_empty():
                        entries.append(_Entry(cmd.name, src, dst, rel=rel))
        return entries

    def _enum_target(self, cmd: Command, assigned: Mapping[str, LinearTerm],
                     src: tuple[int, ...], numeric_idx: Sequence[int]) -> tuple[int, ...] | None:
        dst = []
        for var, val in zip(self.enum_vars, src):
            term = assigned.get(var)
            if term is None:
                dst.append(val)
                continue
            if any(term.coeffs[i] != 0 for i in numeric_idx):
                raise ValueError(
                    f"command {cmd.name}: control update for {var} depends on a numeric variable")
            target = term.const + sum(
                (term.coeffs[self.space.index(e)] * v
                 for e, v in zip(self.enum_vars, src)), Fraction(0))
            if target.denominator != 1 or not 0 <= target < self.enum_ranges[var]:
                return None
            dst.append(int(target))
        return tuple(dst)

    def _full_relation(self, cmd: Command) -> LinearPredicate:
        """guard ∧ step relation ∧ domain at both ends, over the doubled space."""
        up = cmd.guard.transfer(self.doubled, {}).and_(self.domain.transfer(self.doubled, {}))
        primed_domain = self.domain.transfer(
            self.doubled, {n: LinearTerm.var(self.doubled, n + PRIME) for n in self.space.names})
        return up.and_(primed_domain).and_(cmd.relation)

    # -- symbolic stepping ---------------------------------------------------

    def _nprime(self, pred: LinearPredicate) -> LinearPredicate:
        return pred.transfer(self.ndoubled,
                             {n: LinearTerm.var(self.ndoubled, n + PRIME)
                              for n in self.numeric_names})

    def _ndown(self, pred: LinearPredicate) -> LinearPredicate:
        """Drop primed columns; every constraint must already avoid them."""
        n = len(self.numeric_names)
        cells = []
        for cell in pred.cells:
            raws = []
            for c in cell.constraints:
                if any(k != 0 for k in c.coeffs[n:]):
                    raise AlgebraError("projection left a primed variable")
                raws.append(make_constraint(self.nspace, c.coeffs[:n], c.rel, c.bound))
            cells.append(raws)
        return LinearPredicate.from_cells(self.nspace, cells)

    def pre_map(self, payload: Located, budget: int = DEFAULT_CELL_BUDGET) -> Located:
        """Locations and states with a successor in `payload`."""
        out: Located = {}
        nprimed = [n + PRIME for n in self.numeric_names]
        for e in self._entries:
            q = payload.get(e.dst)
            if q is None:
                continue
            if e.rel is None:
                piece = e.guard.and_(q.transfer(self.nspace, dict(e.sub), budget), budget)
            else:
                combined = e.rel.and_(self._nprime(q), budget)
                piece = self._ndown(combined.eliminate(nprimed, budget))
            if piece.is_empty():
                continue
            slot = out.get(e.src)
            out[e.src] = piece if slot is None else slot.or_(piece, budget)
        return out

    def post_map(self, state: Mapping[str, int],
                 budget: int = DEFAULT_CELL_BUDGET) -> Located:
        """The successor set of one concrete state."""
        src = self.state_location(state)
        point = self.nspace.point(state)
        out: Located = {}
        for e in self._entries:
            if e.src != src:
                continue
            if e.rel is None:
                if not e.guard.evaluate(point):
                    continue
                sub = dict(e.sub)
                succ = {}
                for name in self.numeric_names:
                    term = sub.get(name)
                    succ[name] = (Fraction(state[name]) if term is None else
                                  sum((c * v for c, v in zip(term.coeffs, point)), term.const))
                dom = self.located_domain.get(e.dst)
                if dom is None or not dom.evaluate(self.nspace.point(succ)):
                    continue
                cell = [make_constraint(
                    self.nspace,
                    [Fraction(1) if n == var else Fraction(0) for n in self.numeric_names],
                    "=", value)
                    for var, value in succ.items()]
                piece = LinearPredicate.from_cells(self.nspace, [cell])
            else:
                fixed = e.rel.transfer(
                    self.ndoubled,
                    {n: LinearTerm.constant(self.ndoubled, v)
                     for n, v in zip(self.numeric_names, point)},
                    budget)
                unprimed = fixed.transfer(
                    self.ndoubled,
                    {n + PRIME: LinearTerm.var(self.ndoubled, n) for n in self.numeric_names},
                    budget)
                piece = self._ndown(unprimed)
                if piece.is_empty():
                    continue
            slot = out.get(e.dst)
            out[e.dst] = piece if slot is None else slot.or_(piece, budget)
        return out

    # Full-space views, mainly for inspection and cross-checks.

    def pre_predicate(self, pred: LinearPredicate,
                      budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        return self.unlocate(self.pre_map(self.locate_map(pred, budget), budget), budget)

    def post_predicate(self, state: Mapping[str, int],
                       budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        return self.unlocate(self.post_map(state, budget), budget)


# -- the region algebra -------------------------------------------------------


class GuardedRegionAlgebra(RegionAlgebra):
    """Regions are location-indexed linear predicates.

    There is no canonical form for predicates, so deduplication falls back
    to sample-state signatures plus difference-emptiness; `samples` should
    cover the behaviourally distinct corner of the domain.
    """

    name = "guarded"

    def __init__(self, system: GuardedCommandSystem,
                 observables: Mapping[str, LinearPredicate],
                 pairs: Iterable[tuple[str, str]] = (),
                 samples: Sequence[Mapping[str, int]] = (),
                 budget: int = DEFAULT_CELL_BUDGET):
        super().__init__()
        self.system = system
        self.budget = budget
        self._sample_states = [dict(s) for s in samples]
        self._post_cache: dict[tuple, Located] = {}
        named = {name: system.locate_map(pred, budget)
                 for name, pred in observables.items()}
        paired = set()
        for a, b in pairs:
            self.add_observable_pair(a, named[a], b, named[b])
            paired.update((a, b))
        for name in named:
            if name in paired:
                continue
            co = self._diff(dict(system.located_domain), named[name])
            self.add_observable_pair(name, named[name], f"not_{name}", co)

    def _pre(self, payload: Located) -> Located:
        return self.system.pre_map(payload, self.budget)

    def _and(self, a: Located, b: Located) -> Located:
        out: Located = {}
        for loc, pred in a.items():
            other = b.get(loc)
            if other is None:
                continue
            meet = pred.and_(other, self.budget)
            if not meet.is_empty():
                out[loc] = meet
        return out

    def _diff(self, a: Located, b: Located) -> Located:
        out: Located = {}
        for loc, pred in a.items():
            other = b.get(loc)
            if other is not None:
                pred = pred.diff(other, self.budget)
                if pred.is_empty():
                    continue
            out[loc] = pred
        return out

    def _empty(self, payload: Located) -> bool:
        return not payload

    def _member(self, state: Mapping[str, int], payload: Located) -> bool:
        return self.system.located_member(payload, state)

    def _render(self, payload: Located) -> str:
        if not payload:
            return "false"
        parts = []
        for loc in sorted(payload):
            parts.append(f"{self._loc_label(loc)}: {payload[loc].render()}")
        return " ; ".join(parts)

    def _loc_label(self, loc: tuple[int, ...]) -> str:
        back = {}
        for sym, val in self.system.symbols.items():
            back.setdefault(val, sym)
        pieces = []
        for var, val in zip(self.system.enum_vars, loc):
            pieces.append(f"{var}={back.get(val, val)}")
        return ",".join(pieces) if pieces else "()"

    def _top(self) -> Located:
        return dict(self.system.located_domain)

    def payload_size(self, payload: Located) -> int:
        return sum(pred.size() for pred in payload.values())

    def state_samples(self) -> Sequence[Mapping[str, int]]:
        return self._sample_states

    def has_successor_in(self, state: Mapping[str, int], region) -> bool:
        key = tuple(state[n] for n in self.system.space.names)
        post = self._post_cache.get(key)
        if post is None:
            post = self.system.post_map(state, self.budget)
            self._post_cache[key] = post
        return bool(self._and(post, region.payload))


def explicit_truncation(algebra: GuardedRegionAlgebra,
                        states: Sequence[Mapping[str, int]]):
    """Finite restriction of the system to the given states.

    Returns (FiniteSystem, states).  Edges leaving the state list are
    dropped, so predecessor comparisons are only exact at states whose
    successors all lie inside.
    """
    from .finite import FiniteSystem

    system = algebra.system
    states = [dict(s) for s in states]
    edges = []
    for i, s in enumerate(states):
        post = system.post_map(s)
        edges.extend((i, j) for j, t in enumerate(states)
                     if system.located_member(post, t))
    obs = {}
    for r in algebra.observables:
        obs[r.label] = frozenset(i for i, t in enumerate(states)
                                 if system.located_member(r.payload, t))
    pairs = []
    seen = set()
    for r in algebra.observables:
        co = algebra.complement_of(r)
        if r.label not in seen and co.label not in seen:
            pairs.append((r.label, co.label))
            seen.update((r.label, co.label))
    return FiniteSystem(len(states), edges, obs, pairs, validate=False), states


def render_state(system: GuardedCommandSystem, state: Mapping[str, int]) -> str:
    back = {}
    for sym, val in system.symbols.items():
        back.setdefault(val, sym)
    parts = []
    for name in system.space.names:
        val = state[name]
        sym = back.get(val) if name in system.enum_ranges else None
        parts.append(f"{name}={sym if sym is not None else val}")
    return " ".join(parts)


# -- text format ----------------------------------------------------------------
#
#   var pc1 : {N, W, C}          bounded control variable with symbolic values
#   var y1 : nat                 natural-valued; 'int' for unconstrained
#   command c1: pc1 = N -> pc1 := W, y1 := y2 + 1
#   command t:  true -> rel x' < x
#   obs p: x = 0                 observable (auto-complemented unless paired)
#   pair p q                     declare two observables as complements
#   sample y1: 0..4              sample range override (default 0..3 / -2..2)
#
# Guards and observable bodies allow &, | and parentheses over linear
# comparisons; symbolic values are spelled by name.


_VAR_LINE = re.compile(r"var\s+(\w+)\s*:\s*(.+)$")
_CMD_LINE = re.compile(r"command\s+(\w+)\s*:\s*(.+?)\s*->\s*(.+)$")
_OBS_LINE = re.compile(r"obs\s+(\w+)\s*:\s*(.+)$")
_PAIR_LINE = re.compile(r"pair\s+(\w+)\s+(\w+)$")
_SAMPLE_LINE = re.compile(r"sample\s+(\w+)\s*:\s*(-?\d+)\s*\.\.\s*(-?\d+)$")


def _substitute_symbols(text: str, symbols: Mapping[str, int]) -> str:
    if not symbols:
        return text
    pattern = re.compile(r"\b(" + "|".join(re.escape(s) for s in sorted(symbols, key=len,
                                                                        reverse=True)) + r")\b")
    return pattern.sub(lambda m: str(symbols[m.group(1)]), text)


class _BoolParser:
    """Disjunctions of conjunctions of linear comparisons, with parentheses."""

    def __init__(self, space: Space, text: str):
        self.space = space
        self.parts = [p for p in re.split(r"(\(|\)|&|\|)", text) if p.strip()]
        self.pos = 0

    def peek(self):
        return self.parts[self.pos].strip() if self.pos < len(self.parts) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> LinearPredicate:
        out = self.parse_or()
        if self.peek() is not None:
            raise ValueError(f"trailing input near {self.peek()!r}")
        return out

    def parse_or(self) -> LinearPredicate:
        out = self.parse_and()
        while self.peek() == "|":
            self.take()
            out = out.or_(self.parse_and())
        return out

    def parse_and(self) -> LinearPredicate:
        out = self.parse_atom()
        while self.peek() == "&":
            self.take()
            out = out.and_(self.parse_atom())
        return out

    def parse_atom(self) -> LinearPredicate:
        tok = self.take()
        if tok == "(":
            inner = self.parse_or()
            if self.take() != ")":
                raise ValueError("unbalanced parenthesis")
            return inner
        if tok in ("true", "TRUE"):
            return LinearPredicate.true(self.space)
        if tok in ("false", "FALSE"):
            return LinearPredicate.false(self.space)
        if tok is None or tok in ("&", "|", ")"):
            raise ValueError(f"expected a constraint, got {tok!r}")
        return LinearPredicate.from_cells(self.space,
                                          [[parse_constraint(self.space, tok)]])


def _parse_bool(space: Space, text: str, symbols: Mapping[str, int]) -> LinearPredicate:
    return _BoolParser(space, _substitute_symbols(text, symbols)).parse()


def parse_guarded(text: str, budget: int = DEFAULT_CELL_BUDGET,
                  name: str = "guarded") -> GuardedRegionAlgebra:
    var_names: list[str] = []
    enum_ranges: dict[str, int] = {}
    naturals: set[str] = set()
    symbols: dict[str, int] = {}
    command_lines: list[tuple[str, str, str]] = []
    obs_lines: list[tuple[str, str]] = []
    pair_lines: list[tuple[str, str]] = []
    sample_ranges: dict[str, range] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _VAR_LINE.match(line):
            var, kind = m.group(1), m.group(2).strip()
            var_names.append(var)
            if kind.startswith("{"):
                values = [v.strip() for v in kind.strip("{} ").split(",")]
                for i, v in enumerate(values):
                    if v in symbols and symbols[v] != i:
                        raise ValueError(f"line {lineno}: symbol {v} redefined")
                    symbols[v] = i
                enum_ranges[var] = len(values)
            elif kind == "nat":
                naturals.add(var)
            elif kind != "int":
                raise ValueError(f"line {lineno}: unknown variable kind {kind!r}")
        elif m := _CMD_LINE.match(line):
            command_lines.append((m.group(1), m.group(2), m.group(3)))
        elif m := _OBS_LINE.match(line):
            obs_lines.append((m.group(1), m.group(2)))
        elif m := _PAIR_LINE.match(line):
            pair_lines.append((m.group(1), m.group(2)))
        elif m := _SAMPLE_LINE.match(line):
            sample_ranges[m.group(1)] = range(int(m.group(2)), int(m.group(3)) + 1)
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")

    space = Space(tuple(var_names), frozenset(var_names))
    domain_cells = []
    for var in var_names:
        if var in enum_ranges:
            domain_cells.append(_parse_bool(
                space, f"{var} >= 0 & {var} <= {enum_ranges[var] - 1}", {}))
        elif var in naturals:
            domain_cells.append(_parse_bool(space, f"{var} >= 0", {}))
    domain = LinearPredicate.true(space)
    for piece in domain_cells:
        domain = domain.and_(piece)

    primed_symbols = dict(symbols)
    commands = []
    for cname, guard_text, body in command_lines:
        guard = _parse_bool(space, guard_text, symbols)
        body = body.strip()
        if body.startswith("rel "):
            doubled = Space(space.names + tuple(n + PRIME for n in space.names),
                            frozenset(space.names) | frozenset(n + PRIME for n in space.names))
            rel = _parse_bool(doubled, body[4:], primed_symbols)
            commands.append(Command(cname, guard, relation=rel))
        else:
            updates = []
            for assign in body.split(","):
                lhs, _, rhs = assign.partition(":=")
                if not rhs:
                    raise ValueError(f"command {cname}: bad assignment {assign!r}")
                updates.append((lhs.strip(),
                                parse_term(space, _substitute_symbols(rhs.strip(), symbols))))
            commands.append(Command(cname, guard, updates=tuple(updates)))

    system = GuardedCommandSystem(space, domain, commands, symbols,
                                  enum_ranges=enum_ranges, name=name)

    observables = {oname: _parse_bool(space, body, symbols) for oname, body in obs_lines}
    ranges = {}
    for var in var_names:
        if var in sample_ranges:
            ranges[var] = sample_ranges[var]
        elif var in enum_ranges:
            ranges[var] = range(enum_ranges[var])
        elif var in naturals:
            ranges[var] = range(4)
        else:
            ranges[var] = range(-2, 3)
    samples = _grid(space, domain, ranges)
    return GuardedRegionAlgebra(system, observables, pair_lines, samples, budget)


def _grid(space: Space, domain: LinearPredicate,
          ranges: Mapping[str, range]) -> list[dict[str, int]]:
    states = [{}]
    for var in space.names:
        states = [dict(s, **{var: v}) for s in states for v in ranges[var]]
    return [s for s in states if domain.evaluate(space.point(s))]


# -- bundled systems ------------------------------------------------------------


BAKERY_TEXT = """\
# Lamport's 2-process bakery protocol: two counters pick increasing tickets,
# ties broken in favour of process 1.
var pc1 : {N, W, C}
var pc2 : {N, W, C}
var y1 : nat
var y2 : nat
command c1: pc1 = N -> pc1 := W, y1 := y2 + 1
command c2: pc1 = W & (y2 = 0 | y1 <= y2) -> pc1 := C
command c3: pc1 = C -> pc1 := N, y1 := 0
command c4: pc2 = N -> pc2 := W, y2 := y1 + 1
command c5: pc2 = W & (y1 = 0 | y2 < y1) -> pc2 := C
command c6: pc2 = C -> pc2 := N, y2 := 0
obs pc1_N: pc1 = N
obs pc1_W: pc1 = W
obs pc1_C: pc1 = C
obs pc2_N: pc2 = N
obs pc2_W: pc2 = W
obs pc2_C: pc2 = C
"""

BAKERY_RICH_SUFFIX = """\
obs y1_zero: y1 = 0
obs y2_zero: y2 = 0
obs ordered: y1 <= y2
"""

TRANSITIVE_TEXT = """\
# Every smaller natural number is a successor, so Pre chains never stabilize
# setwise although their union converges after one step.
var x : nat
command down: true -> rel x' < x
obs p: x = 0
sample x: 0..8
"""


def bakery_system() -> GuardedCommandSystem:
    return parse_guarded(BAKERY_TEXT, name="bakery").system


def bakery_algebra(rich: bool = False, budget: int = DEFAULT_CELL_BUDGET) -> GuardedRegionAlgebra:
    """The bakery protocol with program-counter observables.

    With rich=True the token zero-tests and the ticket order are observable
    as well, which makes the induced bisimilarity match the full
    (pc, zero-pattern, order) classification.
    """
    text = BAKERY_TEXT + (BAKERY_RICH_SUFFIX if rich else "")
    return parse_guarded(text, budget, name="bakery")


def transitive_algebra(budget: int = DEFAULT_CELL_BUDGET) -> GuardedRegionAlgebra:
    """δ(n) = {m | m < n} over the naturals, observing zero."""
    return parse_guarded(TRANSITIVE_TEXT, budget, name="transitive")
