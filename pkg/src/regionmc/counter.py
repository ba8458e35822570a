"""Two-counter machines and their two-copy symbolic encoding.

A machine is a list of instructions over counters c and d; location 0 is
initial, location m (one past the last instruction) is the single stop
location, and no instruction may jump back to location 0.

The derived transition system has states (configuration, copy) with
copy in {0, 1}.  Copy 0 of every non-final configuration is wired to every
final state and to copy 1 of the same configuration; machine steps run
from copy 1 back to copy 0 of the successor.  Machine reachability
therefore appears in the system only through predecessor pairs, which is
what makes the halting formula below track one machine step per two
next-operators:

    mu x. (Final | EX EX x)

Aggregated predecessors still stabilize quickly on every machine (Final
within two iterations, Init immediately), so the encoded systems live in
the class where only bounded-step properties stay decidable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .guarded import Command, GuardedCommandSystem, GuardedRegionAlgebra, _grid, _parse_bool
from .linear import DEFAULT_CELL_BUDGET, LinearPredicate, LinearTerm, Space, parse_term

__all__ = [
    "Inc",
    "DecJZ",
    "TwoCounterMachine",
    "parse_counter",
    "render_counter",
    "sm_system",
    "sm_algebra",
    "explicit_sm",
    "HALT_FORMULA",
    "halting_line",
    "halting_branch",
    "halting_drain",
    "halting_wide",
    "looping_pair",
    "looping_self",
    "all_machines",
]

HALT_FORMULA = "mu x. (Final | EX EX x)"

COUNTERS = ("c", "d")


@dataclass(frozen=True)
class Inc:
    """counter := counter + 1, then jump."""

    counter: str
    target: int


@dataclass(frozen=True)
class DecJZ:
    """Jump to zero_target if the counter is 0, else decrement and jump."""

    counter: str
    zero_target: int
    pos_target: int


Instruction = Inc | DecJZ


@dataclass(frozen=True)
class TwoCounterMachine:
    """Deterministic program; location k runs instructions[k], location
    len(instructions) is the stop location."""

    instructions: tuple[Instruction, ...]
    name: str = "machine"

    def __post_init__(self):
        m = self.stop
        if m == 0:
            raise ValueError("a machine needs at least one instruction")
        for k, ins in enumerate(self.instructions):
            targets = ((ins.target,) if isinstance(ins, Inc)
                       else (ins.zero_target, ins.pos_target))
            if ins.counter not in COUNTERS:
                raise ValueError(f"instruction {k}: unknown counter {ins.counter!r}")
            for t in targets:
                if not 1 <= t <= m:
                    # location 0 must stay unreachable after the first step
                    raise ValueError(f"instruction {k}: target {t} out of range 1..{m}")

    @property
    def stop(self) -> int:
        return len(self.instructions)

    def step(self, config: tuple[int, int, int]) -> tuple[int, int, int] | None:
        """One machine step; None at the stop location."""
        pc, c, d = config
        if pc == self.stop:
            return None
        ins = self.instructions[pc]
        value = c if ins.counter == "c" else d
        if isinstance(ins, Inc):
            pc2, value2 = ins.target, value + 1
        elif value == 0:
            pc2, value2 = ins.zero_target, value
        else:
            pc2, value2 = ins.pos_target, value - 1
        if ins.counter == "c":
            return (pc2, value2, d)
        return (pc2, c, value2)

    def halts(self, max_steps: int = 10_000) -> bool | None:
        """Exact on machines whose run revisits a configuration or stops;
        None only when the step budget runs out first."""
        config = (0, 0, 0)
        seen = {config}
        for _ in range(max_steps):
            nxt = self.step(config)
            if nxt is None:
                return True
            if nxt in seen:
                return False
            seen.add(nxt)
            config = nxt
        return None


# -- text format:  "0: inc c -> 1"  /  "1: dec d ? 3 : 2" ------------------------

_INC_LINE = re.compile(r"(\d+)\s*:\s*inc\s+([cd])\s*->\s*(\d+)$")
_DEC_LINE = re.compile(r"(\d+)\s*:\s*dec\s+([cd])\s*\?\s*(\d+)\s*:\s*(\d+)$")


def parse_counter(text: str, name: str = "machine") -> TwoCounterMachine:
    slots: dict[int, Instruction] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _INC_LINE.match(line):
            slots[int(m.group(1))] = Inc(m.group(2), int(m.group(3)))
        elif m := _DEC_LINE.match(line):
            slots[int(m.group(1))] = DecJZ(m.group(2), int(m.group(3)), int(m.group(4)))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    if sorted(slots) != list(range(len(slots))):
        raise ValueError(f"locations must be 0..{len(slots) - 1} without gaps")
    return TwoCounterMachine(tuple(slots[k] for k in range(len(slots))), name)


def render_counter(machine: TwoCounterMachine) -> str:
    lines = []
    for k, ins in enumerate(machine.instructions):
        if isinstance(ins, Inc):
            lines.append(f"{k}: inc {ins.counter} -> {ins.target}")
        else:
            lines.append(f"{k}: dec {ins.counter} ? {ins.zero_target} : {ins.pos_target}")
    return "\n".join(lines) + "\n"


# -- the two-copy encoding ---------------------------------------------------------


def sm_system(machine: TwoCounterMachine) -> GuardedCommandSystem:
    """Guarded-command form of the two-copy system for `machine`.

    Variables: pc (location), copy (0 = first copy, 1 = second), counters
    c and d.  The domain keeps exactly the encoding's states: location 0
    only with zeroed counters, the stop location only in copy 0.
    """
    m = machine.stop
    space = Space(("pc", "copy", "c", "d"), frozenset(("pc", "copy", "c", "d")))
    domain = _parse_bool(
        space,
        f"(pc = 0 & c = 0 & d = 0 & copy >= 0 & copy <= 1)"
        f" | (pc >= 1 & pc <= {m - 1} & c >= 0 & d >= 0 & copy >= 0 & copy <= 1)"
        f" | (pc = {m} & copy = 0 & c >= 0 & d >= 0)",
        {})
    doubled = Space(space.names + tuple(n + "'" for n in space.names),
                    frozenset(space.names) | frozenset(n + "'" for n in space.names))

    commands = [
        # copy 0 of every non-final state reaches every final state
        Command("to_final",
                _parse_bool(space, f"copy = 0 & pc <= {m - 1}", {}),
                relation=_parse_bool(doubled, f"pc' = {m} & copy' = 0", {})),
        # copy 0 steps to copy 1 of the same configuration
        Command("to_copy2",
                _parse_bool(space, f"copy = 0 & pc <= {m - 1}", {}),
                updates=(("copy", parse_term(space, "1")),)),
    ]
    for k, ins in enumerate(machine.instructions):
        reset = (("copy", parse_term(space, "0")),)
        if isinstance(ins, Inc):
            commands.append(Command(
                f"i{k}_inc",
                _parse_bool(space, f"pc = {k} & copy = 1", {}),
                updates=reset + (("pc", parse_term(space, str(ins.target))),
                                 (ins.counter, parse_term(space, f"{ins.counter} + 1")))))
        else:
            commands.append(Command(
                f"i{k}_zero",
                _parse_bool(space, f"pc = {k} & copy = 1 & {ins.counter} = 0", {}),
                updates=reset + (("pc", parse_term(space, str(ins.zero_target))),)))
            commands.append(Command(
                f"i{k}_dec",
                _parse_bool(space, f"pc = {k} & copy = 1 & {ins.counter} >= 1", {}),
                updates=reset + (("pc", parse_term(space, str(ins.pos_target))),
                                 (ins.counter, parse_term(space, f"{ins.counter} - 1")))))
    return GuardedCommandSystem(space, domain, commands,
                                enum_ranges={"pc": m + 1, "copy": 2},
                                name=f"sm[{machine.name}]")


def sm_algebra(machine: TwoCounterMachine, budget: int = DEFAULT_CELL_BUDGET,
               counter_range: int = 4) -> GuardedRegionAlgebra:
    """Region algebra with the Init / Between / Final observables."""
    system = sm_system(machine)
    m = machine.stop
    space = system.space
    observables = {
        "Init": _parse_bool(space, "pc = 0 & copy = 0", {}),
        "Between": _parse_bool(space, f"(pc = 0 & copy = 1) | (pc >= 1 & pc <= {m - 1})", {}),
        "Final": _parse_bool(space, f"pc = {m}", {}),
    }
    ranges = {"pc": range(m + 1), "copy": range(2),
              "c": range(counter_range), "d": range(counter_range)}
    samples = _grid(space, system.domain, ranges)
    return GuardedRegionAlgebra(system, observables, (), samples, budget)


def explicit_sm(machine: TwoCounterMachine, bound: int):
    """Finite ground-truth restriction of the two-copy system.

    Built directly from the step relation, independently of the
    guarded-command encoding, over configurations with counters <= bound.
    Edges into configurations beyond the bound are dropped.
    Returns (FiniteSystem, states) with states as (pc, copy, c, d) tuples.
    """
    from .finite import FiniteSystem

    m = machine.stop
    states: list[tuple[int, int, int, int]] = [(0, 0, 0, 0), (0, 1, 0, 0)]
    for pc in range(1, m):
        for copy in range(2):
            for c in range(bound + 1):
                for d in range(bound + 1):
                    states.append((pc, copy, c, d))
    for c in range(bound + 1):
        for d in range(bound + 1):
            states.append((m, 0, c, d))
    index = {s: i for i, s in enumerate(states)}

    finals = [index[s] for s in states if s[0] == m]
    edges = []
    for s in states:
        pc, copy, c, d = s
        if pc == m:
            continue  # final states have no outgoing edges
        if copy == 0:
            edges.extend((index[s], j) for j in finals)
            edges.append((index[s], index[(pc, 1, c, d)]))
        else:
            succ = machine.step((pc, c, d))
            if succ is not None:
                pc2, c2, d2 = succ
                t = (pc2, 0, c2, d2)
                if t in index:
                    edges.append((index[s], index[t]))
    obs = {
        "Init": frozenset({index[(0, 0, 0, 0)]}),
        "Between": frozenset(i for i, s in enumerate(states)
                             if (s[0] == 0 and s[1] == 1) or 1 <= s[0] <= m - 1),
        "Final": frozenset(finals),
    }
    full = frozenset(range(len(states)))
    named = dict(obs)
    pairs = []
    for name in obs:
        named[f"not_{name}"] = full - obs[name]
        pairs.append((name, f"not_{name}"))
    return FiniteSystem(len(states), edges, named, pairs, validate=False), states


# -- bundled machines --------------------------------------------------------------


def halting_line() -> TwoCounterMachine:
    """Straight-line program: three increments, then stop."""
    return parse_counter("""\
0: inc c -> 1
1: inc c -> 2
2: inc d -> 3
""", name="halting_line")


def halting_branch() -> TwoCounterMachine:
    """One zero-test; both branches go forward to stop."""
    return parse_counter("""\
0: dec c ? 1 : 2
1: inc d -> 2
""", name="halting_branch")


def halting_drain() -> TwoCounterMachine:
    """Pumps c once, then drains it in a loop before stopping.  Reaching
    stop from location 1 takes c+1 steps, so backward distances to the
    final region are unbounded even though the run itself halts."""
    return parse_counter("""\
0: inc c -> 1
1: dec c ? 2 : 1
""", name="halting_drain")


def halting_wide() -> TwoCounterMachine:
    """Six instructions, forward-only control flow, both counters and both
    zero-test branches exercised.  Acyclic, so every configuration is within
    a bounded number of steps of stopping and the halting fixpoint closes."""
    return parse_counter("""\
0: inc c -> 1
1: inc d -> 2
2: dec c ? 4 : 3
3: inc d -> 4
4: dec d ? 6 : 5
5: dec d ? 6 : 6
""", name="halting_wide")


def looping_pair() -> TwoCounterMachine:
    """Bounces between locations 1 and 2 forever (c alternates 1, 0)."""
    return parse_counter("""\
0: inc c -> 1
1: dec c ? 3 : 2
2: inc c -> 1
""", name="looping_pair")


def looping_self() -> TwoCounterMachine:
    """Location 1 loops on itself once c is zero; d holds the pumped token."""
    return parse_counter("""\
0: inc d -> 1
1: dec c ? 1 : 2
""", name="looping_self")


def all_machines() -> list[TwoCounterMachine]:
    return [halting_line(), halting_branch(), halting_drain(), halting_wide(),
            looping_pair(), looping_self()]
