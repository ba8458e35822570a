"""Polyhedral hybrid automata with straight-line time predecessors.

A hybrid automaton is a finite multigraph of control locations over a fixed
tuple of real-valued variables.  Each location carries a convex invariant
(a conjunction of linear constraints) and a flow constraint on the
derivatives; each jump carries a conjunctive update relation between the
old and the new variable values.  A transition either takes a jump, or it
lets time pass inside a location: some duration delta >= 0 elapses along a
differentiable curve whose derivative satisfies the flow constraint.

Because the supported flow constraints bound each derivative by constants,
any flow curve can be replaced by the straight line between its endpoints:
the average slope of the curve satisfies the same constant bounds, and a
convex invariant that holds at both endpoints holds along the whole
segment.  The time predecessor is therefore definable with one existential
duration variable and computed exactly by rational elimination.  Two
deliberate closures of the continuous semantics are baked into both the
symbolic operator and the concrete successor oracle so the two stay in
agreement: the invariant is required at the flow endpoints (rather than on
the open interior of the duration interval), and jumps require the source
invariant.

Syntactic shape determines the automaton kind:

  timed       every flow pins every slope to 1
  singular    every flow pins every slope to a constant
  rectangular invariants and flows constrain one variable per constraint;
              jump conjuncts are ``x ~ k``, ``x' = x`` or ``x' ~ k``
  polyhedral  anything conjunctive

Predecessors are supported for the rectangular kinds and exact for them;
plain polyhedral automata are rejected.

Regions pair locations with predicates (a dict keyed by location name, as
in the guarded-command algebra) and the observables are the location
indicators: one region per location, extension location x everything.

Text format, one section keyword per line, ``#`` comments::

    kind timed                      # optional: assert the detected kind
    vars x y
    locations far near
    inv far: x >= 0 & x <= 1 & y >= 0 & y <= 1
    flow far: x' = 1 & y' = 1
    jump far -> near: x >= 1 & x' = 0 & y' = y

In a ``flow`` section a primed name is the derivative of the variable; in a
``jump`` section it is the post-jump value, and unprimed conjuncts act as
the guard.  A missing ``inv`` or ``flow`` line means ``true``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linear import (
    DEFAULT_CELL_BUDGET,
    EQ,
    LT,
    LinearPredicate,
    LinearTerm,
    Space,
    make_constraint,
    parse_constraint,
    parse_predicate,
)
from .regions import AlgebraError, Region, RegionAlgebra, RegionSet

__all__ = [
    "HybridAutomaton",
    "Jump",
    "HybridRegionAlgebra",
    "hybrid_pre",
    "detect_kind",
    "KINDS",
    "parse_hybrid",
    "discretized_reach",
    "sample_states",
    "one_clock_algebra",
    "two_clock_algebra",
    "ONE_CLOCK_TEXT",
    "TWO_CLOCK_TEXT",
]

PRIME = "'"

# Most specific first; detect_kind returns the first that matches.
KINDS = ("timed", "singular", "rectangular", "polyhedral")

# A region payload: location name -> nonempty predicate over the variables.
Located = dict


@dataclass(frozen=True)
class Jump:
    """One discrete edge.  `update` is conjunctive over the doubled space."""

    name: str
    source: str
    target: str
    update: LinearPredicate


def _conjunctive(pred: LinearPredicate, what: str) -> LinearPredicate:
    if len(pred.cells) > 1:
        raise ValueError(f"{what} must be a conjunction, got {pred.render()!r}")
    return pred


class HybridAutomaton:
    """Locations with invariants and flows, plus jumps between them.

    `space` holds the continuous variables; flow constraints live in a
    parallel space whose names are the primed variables (read: dotted),
    jump updates in the doubled space of unprimed plus primed names.
    """

    def __init__(self, space: Space, locations: Sequence[str],
                 invariants: Mapping[str, LinearPredicate],
                 flows: Mapping[str, LinearPredicate],
                 jumps: Iterable[Jump],
                 name: str = "hybrid", expect_kind: str | None = None):
        if space.integer:
            raise ValueError("hybrid variables are real-valued")
        self.space = space
        self.name = name
        self.locations = tuple(locations)
        if len(set(self.locations)) != len(self.locations):
            raise ValueError(f"duplicate locations: {self.locations}")
        primed = tuple(n + PRIME for n in space.names)
        self.dotted = Space(primed)
        self.doubled = Space(space.names + primed)
        self.invariants = {}
        self.flows = {}
        for v in self.locations:
            inv = invariants.get(v, LinearPredicate.true(space))
            if inv.space != space:
                raise ValueError(f"invariant of {v}: wrong space")
            flow = flows.get(v, LinearPredicate.true(self.dotted))
            if flow.space != self.dotted:
                raise ValueError(f"flow of {v}: wrong space")
            self.invariants[v] = _conjunctive(inv, f"inv({v})")
            self.flows[v] = _conjunctive(flow, f"flow({v})")
        for v in set(invariants) | set(flows):
            if v not in self.invariants:
                raise ValueError(f"invariant or flow for unknown location {v!r}")
        self.jumps = tuple(jumps)
        for e in self.jumps:
            if e.source not in self.invariants or e.target not in self.invariants:
                raise ValueError(f"jump {e.name}: unknown location")
            if e.update.space != self.doubled:
                raise ValueError(f"jump {e.name}: update must use the doubled space")
            _conjunctive(e.update, f"update({e.name})")
        self.kind = detect_kind(self)
        if expect_kind is not None and expect_kind != self.kind:
            raise ValueError(
                f"declared kind {expect_kind!r} but detected {self.kind!r}")

    def constants(self) -> list[Fraction]:
        """Every rhs constant of every constraint, normalised per variable."""
        out = set()
        preds = list(self.invariants.values()) + list(self.flows.values()) \
            + [e.update for e in self.jumps]
        for pred in preds:
            for cell in pred.cells:
                for c in cell.constraints:
                    support = c.support()
                    if len(support) == 1:
                        out.add(c.bound / c.coeffs[support[0]])
        return sorted(out)


# -- kind detection ---------------------------------------------------------


def _single_var_constraints(pred: LinearPredicate) -> bool:
    return all(len(c.support()) == 1
               for cell in pred.cells for c in cell.constraints)


def _is_copy_conjunct(c, n: int) -> int | None:
    """Index i when the constraint says x_i' = x_i, else None."""
    support = c.support()
    if c.rel != EQ or c.bound != 0 or len(support) != 2:
        return None
    i, j = support
    if j != i + n or c.coeffs[i] != -c.coeffs[j]:
        return None
    return i


def _flow_constraints_on(flow: LinearPredicate, idx: int) -> frozenset:
    got = set()
    for cell in flow.cells:
        for c in cell.constraints:
            if idx in c.support():
                got.add((c.coeffs, c.rel, c.bound))
    return frozenset(got)


def _rectangular(h: HybridAutomaton) -> bool:
    for v in h.locations:
        if not _single_var_constraints(h.invariants[v]):
            return False
        if not _single_var_constraints(h.flows[v]):
            return False
    n = len(h.space.names)
    for e in h.jumps:
        for cell in e.update.cells:
            for c in cell.constraints:
                if _is_copy_conjunct(c, n) is not None:
                    continue
                support = c.support()
                if len(support) != 1:
                    return False
        # The copied variables must see identical flow constraints on both
        # sides of the jump (checked on shape only, never exploited).
        for cell in e.update.cells:
            for c in cell.constraints:
                i = _is_copy_conjunct(c, n)
                if i is None:
                    continue
                src = _flow_constraints_on(h.flows[e.source], i)
                dst = _flow_constraints_on(h.flows[e.target], i)
                if src != dst:
                    return False
    return True


def slope_intervals(h: HybridAutomaton, loc: str) -> list[tuple]:
    """Per variable: (lower, lower_strict, upper, upper_strict), None = open.

    Only meaningful for flows whose constraints mention one variable each.
    """
    out = [[None, False, None, False] for _ in h.space.names]
    for cell in h.flows[loc].cells:
        for c in cell.constraints:
            support = c.support()
            if len(support) != 1:
                raise ValueError(f"flow of {loc} is not rectangular")
            i = support[0]
            k = c.coeffs[i]
            val = c.bound / k
            upper = k > 0
            if c.rel == EQ:
                sides = [(True, False), (False, False)]
            else:
                sides = [(upper, c.rel == LT)]
            for is_upper, strict in sides:
                slot = 2 if is_upper else 0
                cur = out[i][slot]
                better = (cur is None
                          or (val < cur if is_upper else val > cur)
                          or (val == cur and strict))
                if better:
                    out[i][slot] = val
                    out[i][slot + 1] = strict
    return [tuple(entry) for entry in out]


def _pinned_slopes(h: HybridAutomaton, loc: str) -> list[Fraction] | None:
    try:
        intervals = slope_intervals(h, loc)
    except ValueError:
        return None
    slopes = []
    for lo, lo_strict, hi, hi_strict in intervals:
        if lo is None or lo != hi or lo_strict or hi_strict:
            return None
        slopes.append(lo)
    return slopes


def detect_kind(h: HybridAutomaton) -> str:
    if not _rectangular(h):
        return "polyhedral"
    pinned = [_pinned_slopes(h, v) for v in h.locations]
    if any(p is None for p in pinned):
        return "rectangular"
    if all(all(k == 1 for k in p) for p in pinned):
        return "timed"
    return "singular"


# -- the symbolic transition system ----------------------------------------


class HybridSystem:
    """Predecessor and successor machinery shared by algebra and oracle."""

    def __init__(self, automaton: HybridAutomaton):
        self.h = automaton
        if automaton.kind == "polyhedral":
            raise AlgebraError(
                "predecessors are supported for timed, singular and "
                "rectangular automata only")
        names = automaton.space.names
        dt = "dt"
        while dt in names:
            dt += "_"
        self.dt = dt
        self.wide = Space((dt,) + automaton.space.names + automaton.dotted.names)
        self._scaled = {v: self._scaled_flow(v) for v in automaton.locations}
        self._wide_inv = {}
        self._wide_inv_post = {}
        for v in automaton.locations:
            inv = automaton.invariants[v]
            self._wide_inv[v] = inv.transfer(self.wide, {})
            self._wide_inv_post[v] = inv.transfer(self.wide, self._prime_map())
        self._nonneg = parse_constraint(self.wide, f"{dt} >= 0")

    def _prime_map(self):
        return {n: LinearTerm.var(self.wide, n + PRIME)
                for n in self.h.space.names}

    def _scaled_flow(self, loc: str) -> LinearPredicate:
        """Flow constraints integrated over the duration.

        sum k_i * dot(x_i) ~ k0 along the whole interval forces
        sum k_i * (x_i' - x_i) ~ k0 * dt for the endpoints, and for
        constant-bound flows the straight line witnesses the converse.
        """
        space = self.h.space
        cells = []
        for cell in self.h.flows[loc].cells:
            raws = []
            for c in cell.constraints:
                coeffs = [Fraction(0)] * len(self.wide.names)
                coeffs[0] = -c.bound
                for i, k in enumerate(c.coeffs):
                    coeffs[1 + i] = -k
                    coeffs[1 + len(space.names) + i] = k
                raws.append(make_constraint(self.wide, coeffs, c.rel, 0))
            cells.append(raws)
        return LinearPredicate.from_cells(self.wide, cells)

    def _down(self, pred: LinearPredicate, offset: int) -> LinearPredicate:
        """Keep the base-variable columns starting at `offset`, drop the rest."""
        n = len(self.h.space.names)
        cells = []
        for cell in pred.cells:
            raws = []
            for c in cell.constraints:
                kept = c.coeffs[offset:offset + n]
                rest = c.coeffs[:offset] + c.coeffs[offset + n:]
                if any(k != 0 for k in rest):
                    raise AlgebraError("projection left a quantified variable")
                raws.append(make_constraint(self.h.space, kept, c.rel, c.bound))
            cells.append(raws)
        return LinearPredicate.from_cells(self.h.space, cells)

    # continuous and discrete predecessors --------------------------------

    def time_pre(self, loc: str, target: LinearPredicate,
                 budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        """States of `loc` that reach `target` by letting time pass.

        Duration zero is included, so this always covers target /\\ inv;
        the explicit union keeps that true under strict flow bounds, where
        the scaled constraints exclude dt = 0.
        """
        inv = self.h.invariants[loc]
        still = target.and_(inv, budget)
        moved = target.transfer(self.wide, self._prime_map(), budget)
        moved = moved.and_(self._scaled[loc], budget)
        moved = moved.and_(self._wide_inv[loc], budget)
        moved = moved.and_(self._wide_inv_post[loc], budget)
        moved = LinearPredicate.from_cells(
            self.wide, [list(cell.constraints) + [self._nonneg]
                        for cell in moved.cells], budget)
        eliminated = moved.eliminate(
            [self.dt] + list(self.h.dotted.names), budget)
        return still.or_(self._down(eliminated, 1), budget)

    def jump_pre(self, jump: Jump, target: LinearPredicate,
                 budget: int = DEFAULT_CELL_BUDGET) -> LinearPredicate:
        """States that can take `jump` into `target`, clipped to inv(source)."""
        doubled = self.h.doubled
        primed = {n: LinearTerm.var(doubled, n + PRIME)
                  for n in self.h.space.names}
        shifted = target.transfer(doubled, primed, budget)
        rel = jump.update.and_(shifted, budget)
        projected = rel.eliminate(list(self.h.dotted.names), budget)
        return self._down(projected, 0).and_(self.h.invariants[jump.source], budget)

    def pre_map(self, payload: Located,
                budget: int = DEFAULT_CELL_BUDGET) -> Located:
        out: Located = {}

        def put(loc, piece):
            if piece.is_empty():
                return
            slot = out.get(loc)
            out[loc] = piece if slot is None else slot.or_(piece, budget)

        for loc, pred in payload.items():
            put(loc, self.time_pre(loc, pred, budget))
        for e in self.h.jumps:
            pred = payload.get(e.target)
            if pred is not None:
                put(e.source, self.jump_pre(e, pred, budget))
        return out

    # concrete successors ---------------------------------------------------

    def post_map(self, state, budget: int = DEFAULT_CELL_BUDGET) -> Located:
        """The successor set of one concrete state, as a located payload."""
        loc, values = state
        point = tuple(Fraction(v) for v in values)
        if not self.h.invariants[loc].evaluate(point):
            return {}
        out: Located = {}
        consts = {n: LinearTerm.constant(self.wide, v)
                  for n, v in zip(self.h.space.names, point)}
        flowed = self._scaled[loc].transfer(self.wide, consts, budget)
        flowed = flowed.and_(self._wide_inv_post[loc], budget)
        flowed = LinearPredicate.from_cells(
            self.wide, [list(cell.constraints) + [self._nonneg]
                        for cell in flowed.cells], budget)
        reach = self._down(flowed.eliminate([self.dt], budget),
                           1 + len(self.h.space.names))
        here = LinearPredicate.from_cells(
            self.h.space,
            [[make_constraint(self.h.space,
                              [Fraction(i == j) for j in range(len(point))],
                              EQ, point[i])
              for i in range(len(point))]])
        out[loc] = reach.or_(here, budget)
        dconsts = {n: LinearTerm.constant(self.h.doubled, v)
                   for n, v in zip(self.h.space.names, point)}
        for e in self.h.jumps:
            if e.source != loc:
                continue
            fixed = e.update.transfer(self.h.doubled, dconsts, budget)
            unprimed = fixed.transfer(
                self.h.doubled,
                {n + PRIME: LinearTerm.var(self.h.doubled, n)
                 for n in self.h.space.names}, budget)
            piece = self._down(unprimed, 0)
            if piece.is_empty():
                continue
            slot = out.get(e.target)
            out[e.target] = piece if slot is None else slot.or_(piece, budget)
        return out


# -- the region algebra -------------------------------------------------------


class HybridRegionAlgebra(RegionAlgebra):
    """Regions are location-indexed linear predicates over the variables.

    Observables are the location indicators, so the whole boolean and
    temporal structure a closure discovers comes out of the predecessor
    operator.  States are (location, value tuple) pairs.
    """

    name = "hybrid"

    def __init__(self, automaton: HybridAutomaton,
                 samples: Sequence[tuple] = (),
                 budget: int = DEFAULT_CELL_BUDGET):
        super().__init__()
        self.automaton = automaton
        self.system = HybridSystem(automaton)
        self.budget = budget
        self._sample_states = [
            (loc, tuple(Fraction(v) for v in values)) for loc, values in samples
        ] or sample_states(automaton)
        true = LinearPredicate.true(automaton.space)
        locs = automaton.locations
        if len(locs) == 2:
            a, b = locs
            self.add_observable_pair(f"at_{a}", {a: true}, f"at_{b}", {b: true})
        else:
            for v in locs:
                rest = {w: true for w in locs if w != v}
                self.add_observable_pair(f"at_{v}", {v: true}, f"not_at_{v}", rest)

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

    def _member(self, state, payload: Located) -> bool:
        loc, values = state
        pred = payload.get(loc)
        if pred is None:
            return False
        return pred.evaluate(tuple(Fraction(v) for v in values))

    def _render(self, payload: Located) -> str:
        if not payload:
            return "false"
        parts = [f"{loc}: {payload[loc].render()}" for loc in sorted(payload)]
        return " ; ".join(parts)

    def _top(self) -> Located:
        true = LinearPredicate.true(self.automaton.space)
        return {v: true for v in self.automaton.locations}

    def payload_size(self, payload: Located) -> int:
        return sum(pred.size() for pred in payload.values())

    def state_samples(self) -> Sequence[tuple]:
        return self._sample_states

    def has_successor_in(self, state, region: Region) -> bool:
        post = self.system.post_map(state, self.budget)
        return bool(self._and(post, region.payload))

    def time_pre(self, region: Region) -> Region:
        """The continuous-only predecessor (no jumps), as a region."""
        out: Located = {}
        for loc, pred in region.payload.items():
            piece = self.system.time_pre(loc, pred, self.budget)
            if not piece.is_empty():
                out[loc] = piece
        return Region(out, self._render(out), ("time_pre", region))


def hybrid_pre(algebra: HybridRegionAlgebra, region: Region) -> RegionSet:
    """The predecessor split into one single-location region per source.

    The union of the result equals algebra.pre(region); the pieces keep
    the per-jump and per-location time structure visible.
    """
    out = RegionSet(algebra)
    system = algebra.system
    for loc, pred in region.payload.items():
        piece = system.time_pre(loc, pred, algebra.budget)
        if not piece.is_empty():
            payload = {loc: piece}
            out.add(Region(payload, algebra._render(payload),
                           ("time_pre", region, loc)))
    for e in algebra.automaton.jumps:
        pred = region.payload.get(e.target)
        if pred is None:
            continue
        piece = system.jump_pre(e, pred, algebra.budget)
        if not piece.is_empty():
            payload = {e.source: piece}
            out.add(Region(payload, algebra._render(payload),
                           ("jump_pre", region, e.name)))
    return out


# -- concrete-state sampling and the discretized oracle ----------------------


def sample_states(h: HybridAutomaton, per_variable: int = 5,
                  limit: int = 120) -> list[tuple]:
    """A deterministic grid of states: constants, midpoints, and a step out."""
    consts = [k for k in h.constants()] or [Fraction(0)]
    values = set()
    for k in consts:
        values.update((k, k + Fraction(1, 2)))
    values.add(min(consts) - Fraction(1, 2))
    values = sorted(values)
    if len(values) > per_variable:
        step = (len(values) - 1) / (per_variable - 1)
        values = [values[round(i * step)] for i in range(per_variable)]
    grids = [()]
    for _ in h.space.names:
        grids = [g + (v,) for g in grids for v in values]
    states = [(loc, g) for loc in h.locations for g in grids]
    if len(states) > limit:
        stride = -(-len(states) // limit)
        states = states[::stride]
    return states


def _grid_values(lo: Fraction, hi: Fraction, step: Fraction) -> list[Fraction]:
    start = -(-lo // step)  # ceil(lo / step)
    stop = hi // step
    return [k * step for k in range(int(start), int(stop) + 1)]


def discretized_reach(h: HybridAutomaton, start: tuple, steps: int,
                      step: Fraction = Fraction(1, 8),
                      horizon: Fraction = Fraction(4)) -> list[set]:
    """Distance-bounded reachability along grid-duration transitions.

    Every move is a genuine transition of the automaton, so membership in
    the k-th layer is sound evidence for the symbolic k-step predecessor;
    durations are multiples of `step` up to `horizon`, which keeps
    grid-aligned states on the grid.  Supports pinned slopes and
    rectangular jump updates with bounded resets.

    Returns layers[k] = states reachable in exactly k transitions.
    """
    if h.kind not in ("timed", "singular"):
        raise ValueError("the discretized oracle needs pinned slopes")
    slopes = {v: _pinned_slopes(h, v) for v in h.locations}
    durations = [k * step for k in range(int(horizon / step) + 1)]
    n = len(h.space.names)

    def successors(state):
        loc, values = state
        point = tuple(values)
        if not h.invariants[loc].evaluate(point):
            return
        for delta in durations:
            succ = tuple(x + k * delta for x, k in zip(point, slopes[loc]))
            if h.invariants[loc].evaluate(succ):
                yield (loc, succ)
        for e in h.jumps:
            if e.source != loc:
                continue
            options = [None] * n
            ok = True
            for cell in e.update.cells:
                for c in cell.constraints:
                    i = _is_copy_conjunct(c, n)
                    if i is not None:
                        options[i] = [point[i]]
                        continue
                    support = c.support()
                    i = support[0]
                    if i < n:
                        if not c.evaluate(point + (Fraction(0),) * n):
                            ok = False
                        continue
                    i -= n
                    val = c.bound / c.coeffs[support[0]]
                    upper = c.coeffs[support[0]] > 0
                    lo, hi = (None, val) if upper else (val, None)
                    if c.rel == EQ:
                        lo = hi = val
                    cur = options[i]
                    if cur is None:
                        cur = [None, None]
                        options[i] = cur
                    if isinstance(cur, list) and len(cur) == 2:
                        if lo is not None and (cur[0] is None or lo > cur[0]):
                            cur[0] = lo
                        if hi is not None and (cur[1] is None or hi < cur[1]):
                            cur[1] = hi
            if not ok:
                continue
            choices = []
            for i, opt in enumerate(options):
                if opt is None:
                    raise ValueError(
                        f"jump {e.name}: unbounded reset of {h.space.names[i]}")
                if len(opt) == 1:
                    choices.append(list(opt))
                    continue
                lo, hi = opt
                if lo is None or hi is None:
                    raise ValueError(
                        f"jump {e.name}: unbounded reset of {h.space.names[i]}")
                choices.append(_grid_values(lo, hi, step))
            targets = [()]
            for vals in choices:
                targets = [t + (v,) for t in targets for v in vals]
            for t in targets:
                yield (e.target, t)

    layers = [{(start[0], tuple(Fraction(v) for v in start[1]))}]
    for _ in range(steps):
        front = set()
        for state in layers[-1]:
            front.update(successors(state))
        layers.append(front)
    return layers


# -- parsing ------------------------------------------------------------------


def parse_hybrid(text: str, budget: int = DEFAULT_CELL_BUDGET,
                 name: str = "hybrid") -> HybridRegionAlgebra:
    var_names: list[str] = []
    locations: list[str] = []
    expect_kind = None
    inv_lines: dict[str, str] = {}
    flow_lines: dict[str, str] = {}
    jump_lines: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "vars":
            var_names.extend(rest.split())
        elif keyword == "locations":
            locations.extend(rest.split())
        elif keyword == "kind":
            if rest not in KINDS:
                raise ValueError(f"line {lineno}: unknown kind {rest!r}")
            expect_kind = rest
        elif keyword in ("inv", "flow"):
            loc, colon, body = rest.partition(":")
            if not colon:
                raise ValueError(f"line {lineno}: expected '{keyword} LOC: ...'")
            table = inv_lines if keyword == "inv" else flow_lines
            loc = loc.strip()
            if loc in table:
                raise ValueError(f"line {lineno}: duplicate {keyword} for {loc}")
            table[loc] = body.strip()
        elif keyword == "jump":
            head, colon, body = rest.partition(":")
            source, arrow, target = head.partition("->")
            if not colon or not arrow:
                raise ValueError(f"line {lineno}: expected 'jump A -> B: ...'")
            jump_lines.append((source.strip(), target.strip(), body.strip()))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")

    space = Space(tuple(var_names))
    dotted = Space(tuple(n + PRIME for n in var_names))
    doubled = Space(space.names + dotted.names)
    invariants = {v: parse_predicate(space, body) for v, body in inv_lines.items()}
    flows = {v: parse_predicate(dotted, body) for v, body in flow_lines.items()}
    jumps = [Jump(f"e{i + 1}", src, dst, parse_predicate(doubled, body))
             for i, (src, dst, body) in enumerate(jump_lines)]
    automaton = HybridAutomaton(space, locations, invariants, flows, jumps,
                                name=name, expect_kind=expect_kind)
    return HybridRegionAlgebra(automaton, budget=budget)


# -- bundled fixtures ----------------------------------------------------------


ONE_CLOCK_TEXT = """\
# One clock that drifts up to 2, then restarts.
kind timed
vars x
locations tick
inv tick: x >= 0 & x <= 2
flow tick: x' = 1
jump tick -> tick: x >= 2 & x' = 0
"""

TWO_CLOCK_TEXT = """\
# Two unit-slope clocks alternating between two locations: the jump out of
# `far` fires once x saturates, the jump back once y does, and both clocks
# restart on every jump.  Backward analysis still grows diagonal x-y zones
# inside each location, but the resets stop them from compounding across
# jumps, which keeps the closure small.
kind timed
vars x y
locations far near
inv far: x >= 0 & x <= 1 & y >= 0 & y <= 1
inv near: x >= 0 & x <= 1 & y >= 0 & y <= 1
flow far: x' = 1 & y' = 1
flow near: x' = 1 & y' = 1
jump far -> near: x >= 1 & x' = 0 & y' = 0
jump near -> far: y >= 1 & x' = 0 & y' = 0
"""


def one_clock_algebra(budget: int = DEFAULT_CELL_BUDGET) -> HybridRegionAlgebra:
    return parse_hybrid(ONE_CLOCK_TEXT, budget, name="one_clock")


def two_clock_algebra(budget: int = DEFAULT_CELL_BUDGET) -> HybridRegionAlgebra:
    return parse_hybrid(TWO_CLOCK_TEXT, budget, name="two_clock")
