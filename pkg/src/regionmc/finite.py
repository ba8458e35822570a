"""Explicit finite-state systems and brute-force oracles.

FiniteSystem is the testing bedrock: regions are explicit state sets with
exact operations, so every closure terminates and every answer the symbolic
paths produce can be cross-checked against direct enumeration here.

The oracles implement the six state equivalences by their definitions:
bisimilarity (partition refinement), similarity (greatest simulation),
trace equivalence (subset construction, with and without the restriction
to live states), distance equivalence (per-length target sets),
bounded-reach equivalence (cumulative target sets) and reach equivalence
(limit target sets).
"""

from __future__ import annotations

import random
from typing import Callable, Iterable, Mapping, Sequence

from .regions import AlgebraError, RegionAlgebra

__all__ = [
    "FiniteSystem",
    "FiniteRegionAlgebra",
    "parse_finite",
    "render_finite",
    "oracle_equivalence",
    "oracle_eval",
    "oracle_wqo_check",
    "bounded_reach_preorder",
    "refines",
    "branch_order_pair",
    "p_chain_family",
    "countdown_chain",
    "branching_cell",
    "random_system",
]


class FiniteSystem:
    """Explicit transition system over states 0..n-1.

    Observables are explicit extensions, closed under complement: every
    observable appears in exactly one dual pair and the two extensions of a
    pair partition the state space.  Together the observables cover every
    state, which the constructor checks unless validate=False (used when a
    quotient is extracted from partial data).
    """

    def __init__(self, n_states: int, edges: Iterable[tuple[int, int]],
                 obs: Mapping[str, Iterable[int]],
                 dual_pairs: Iterable[tuple[str, str]],
                 validate: bool = True):
        self.n_states = int(n_states)
        succ = [set() for _ in range(self.n_states)]
        pred = [set() for _ in range(self.n_states)]
        edge_list = sorted(set((int(u), int(v)) for u, v in edges))
        for u, v in edge_list:
            if not (0 <= u < self.n_states and 0 <= v < self.n_states):
                raise ValueError(f"edge ({u},{v}) out of range")
            succ[u].add(v)
            pred[v].add(u)
        self.edges = tuple(edge_list)
        self.succ = tuple(frozenset(s) for s in succ)
        self.pred = tuple(frozenset(s) for s in pred)
        self.obs = {str(k): frozenset(int(s) for s in v) for k, v in obs.items()}
        self.dual_pairs = tuple((str(a), str(b)) for a, b in dual_pairs)
        if validate:
            self._validate()

    @classmethod
    def with_complements(cls, n_states: int, edges, obs: Mapping[str, Iterable[int]],
                         dual_pairs: Iterable[tuple[str, str]] = ()) -> "FiniteSystem":
        """Complete unpaired observables with a fresh not_<name> partner."""
        full = {str(k): frozenset(v) for k, v in obs.items()}
        pairs = [(a, b) for a, b in dual_pairs]
        paired = {n for p in pairs for n in p}
        everything = frozenset(range(n_states))
        for name in sorted(full):
            if name in paired:
                continue
            co = f"not_{name}"
            if co in full:
                raise ValueError(f"observable name {co!r} already taken")
            full[co] = everything - full[name]
            pairs.append((name, co))
        return cls(n_states, edges, full, pairs)

    def _validate(self) -> None:
        everything = frozenset(range(self.n_states))
        for name, ext in self.obs.items():
            if not ext <= everything:
                raise ValueError(f"observable {name!r} mentions unknown states")
        paired: set[str] = set()
        for a, b in self.dual_pairs:
            for name in (a, b):
                if name not in self.obs:
                    raise ValueError(f"dual pair names unknown observable {name!r}")
                if name in paired:
                    raise ValueError(f"observable {name!r} paired twice")
                paired.add(name)
            if self.obs[a] | self.obs[b] != everything or self.obs[a] & self.obs[b]:
                raise ValueError(f"observables {a!r} and {b!r} are not complements")
        unpaired = set(self.obs) - paired
        if unpaired:
            raise ValueError(f"observables without a complement partner: {sorted(unpaired)}")
        covered = frozenset().union(*self.obs.values()) if self.obs else frozenset()
        if covered != everything:
            raise ValueError("observables do not cover the state space")

    # -- basic set operations -------------------------------------------------

    def pre_set(self, target: frozenset) -> frozenset:
        return frozenset(u for u in range(self.n_states) if self.succ[u] & target)

    def post_set(self, source: frozenset) -> frozenset:
        out: set[int] = set()
        for u in source:
            out |= self.succ[u]
        return frozenset(out)

    def live_states(self) -> frozenset:
        """Greatest set of states with at least one successor inside the set."""
        live = set(range(self.n_states))
        while True:
            keep = {u for u in live if self.succ[u] & live}
            if keep == live:
                return frozenset(live)
            live = keep

    def obs_signature(self, u: int) -> frozenset:
        return frozenset(name for name, ext in self.obs.items() if u in ext)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteSystem)
                and self.n_states == other.n_states
                and self.edges == other.edges
                and self.obs == other.obs
                and sorted(map(sorted, self.dual_pairs)) == sorted(map(sorted, other.dual_pairs)))

    def __repr__(self):
        return f"<FiniteSystem n={self.n_states} edges={len(self.edges)} obs={sorted(self.obs)}>"


# --- text format ---------------------------------------------------------------


def parse_finite(text: str) -> FiniteSystem:
    """Parse the finite-system text format.

    Lines: `states N`, `edge i j`, `obs name: i,j,k` (states comma or space
    separated, possibly empty), `dual name co_name`.  `#` starts a comment.
    """
    n_states = None
    edges: list[tuple[int, int]] = []
    obs: dict[str, list[int]] = {}
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "states":
                n_states = int(rest)
            elif head == "edge":
                u, v = rest.split()
                edges.append((int(u), int(v)))
            elif head == "obs":
                name, _, states = rest.partition(":")
                items = states.replace(",", " ").split()
                obs[name.strip()] = [int(s) for s in items]
            elif head == "dual":
                a, b = rest.split()
                pairs.append((a, b))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n_states is None:
        raise ValueError("missing `states N` header")
    return FiniteSystem(n_states, edges, obs, pairs)


def render_finite(system: FiniteSystem) -> str:
    """Canonical text rendering; parse(render(s)) == s and render is stable."""
    lines = [f"states {system.n_states}"]
    for u, v in system.edges:
        lines.append(f"edge {u} {v}")
    for name in sorted(system.obs):
        states = ",".join(str(s) for s in sorted(system.obs[name]))
        lines.append(f"obs {name}: {states}")
    for a, b in sorted(tuple(sorted(p)) for p in system.dual_pairs):
        lines.append(f"dual {a} {b}")
    return "\n".join(lines) + "\n"


# --- region algebra over explicit state sets ------------------------------------


class FiniteRegionAlgebra(RegionAlgebra):
    """Region payloads are frozensets of state indices; all operations exact."""

    name = "finite"

    def __init__(self, system: FiniteSystem):
        super().__init__()
        self.system = system
        for a, b in sorted(tuple(sorted(p)) for p in system.dual_pairs):
            self.add_observable_pair(a, system.obs[a], b, system.obs[b])

    def _pre(self, payload):
        return self.system.pre_set(payload)

    def _and(self, a, b):
        return a & b

    def _diff(self, a, b):
        return a - b

    def _empty(self, payload) -> bool:
        return not payload

    def _member(self, state, payload) -> bool:
        return state in payload

    def _render(self, payload) -> str:
        return "{" + ",".join(str(s) for s in sorted(payload)) + "}"

    def _top(self):
        return frozenset(range(self.system.n_states))

    def extension_key(self, payload):
        return payload

    def payload_size(self, payload) -> int:
        return max(1, len(payload))

    def state_samples(self) -> Sequence[int]:
        return range(self.system.n_states)

    def has_successor_in(self, state, region) -> bool:
        return bool(self.system.succ[state] & region.payload)


# --- brute-force state equivalences ---------------------------------------------


Partition = tuple[frozenset, ...]


def _blocks_from_keys(keys: Sequence) -> Partition:
    groups: dict = {}
    for state, key in enumerate(keys):
        groups.setdefault(key, []).append(state)
    return tuple(sorted((frozenset(b) for b in groups.values()), key=min))


def _bisimilarity(system: FiniteSystem) -> Partition:
    block = {u: system.obs_signature(u) for u in range(system.n_states)}
    while True:
        refined = {u: (block[u], frozenset(block[v] for v in system.succ[u]))
                   for u in range(system.n_states)}
        if len(set(refined.values())) == len(set(block.values())):
            return _blocks_from_keys([refined[u] for u in range(system.n_states)])
        block = refined


def _greatest_simulation(system: FiniteSystem) -> set[tuple[int, int]]:
    n = system.n_states
    sim = {(u, v) for u in range(n) for v in range(n)
           if system.obs_signature(u) == system.obs_signature(v)}
    changed = True
    while changed:
        changed = False
        for u, v in list(sim):
            ok = all(any((x, y) in sim for y in system.succ[v]) for x in system.succ[u])
            if not ok:
                sim.discard((u, v))
                changed = True
    return sim


def _similarity(system: FiniteSystem) -> Partition:
    sim = _greatest_simulation(system)
    n = system.n_states
    keys: list = [None] * n
    reps: list[int] = []
    for u in range(n):
        for r in reps:
            if (u, r) in sim and (r, u) in sim:
                keys[u] = keys[r]
                break
        else:
            reps.append(u)
            keys[u] = u
    return _blocks_from_keys(keys)


def _language_equal(system: FiniteSystem, u: int, v: int,
                    restrict: frozenset | None = None) -> bool:
    """Equality of the observation-sequence languages of u and v.

    One step observes the full signature, the set of observables holding at
    the state reached.  Single observables would be too coarse a letter:
    with two or more dual pairs they cannot tell a successor satisfying a
    conjunction from two successors satisfying one conjunct each, which the
    closed region sets do distinguish.  With restrict set to the live
    states this compares the prefixes of infinite sequences; unrestricted
    it compares the finite ones.
    """
    if restrict is None:
        restrict = frozenset(range(system.n_states))

    def split(states: frozenset) -> dict[frozenset, frozenset]:
        buckets: dict[frozenset, set] = {}
        for w in states:
            buckets.setdefault(system.obs_signature(w), set()).add(w)
        return {letter: frozenset(b) for letter, b in buckets.items()}

    a0 = frozenset({u}) & restrict
    b0 = frozenset({v}) & restrict
    if bool(a0) != bool(b0):
        return False
    if not a0:
        return True
    if system.obs_signature(u) != system.obs_signature(v):
        return False
    frontier = [(a0, b0)]
    seen = set(frontier)
    while frontier:
        a, b = frontier.pop()
        buckets_a = split(system.post_set(a) & restrict)
        buckets_b = split(system.post_set(b) & restrict)
        if buckets_a.keys() != buckets_b.keys():
            return False
        for letter, sub_a in buckets_a.items():
            pair = (sub_a, buckets_b[letter])
            if pair not in seen:
                seen.add(pair)
                frontier.append(pair)
    return True


def _partition_by_predicate(n: int, equal: Callable[[int, int], bool]) -> Partition:
    keys: list = [None] * n
    reps: list[int] = []
    for u in range(n):
        for r in reps:
            if equal(u, r):
                keys[u] = keys[r]
                break
        else:
            reps.append(u)
            keys[u] = u
    return _blocks_from_keys(keys)


def _trace_equivalence(system: FiniteSystem, finite_traces: bool) -> Partition:
    live = system.live_states()

    def equal(u: int, v: int) -> bool:
        if not _language_equal(system, u, v):
            return False
        if finite_traces:
            return True
        return _language_equal(system, u, v, restrict=live)

    return _partition_by_predicate(system.n_states, equal)


def _target_vectors(system: FiniteSystem):
    """Yield V_0, V_1, ...: V_n(u) = targets of length-n source-u traces."""
    vec = tuple(system.obs_signature(u) for u in range(system.n_states))
    while True:
        yield vec
        vec = tuple(frozenset().union(*(vec[w] for w in system.succ[u])) if system.succ[u]
                    else frozenset()
                    for u in range(system.n_states))


def _distance_equivalence(system: FiniteSystem) -> Partition:
    # The vector sequence is eventually periodic; equality of the full
    # history up to the first repeat decides equality at every length.
    history: list[tuple] = []
    seen: dict[tuple, int] = {}
    for vec in _target_vectors(system):
        if vec in seen:
            break
        seen[vec] = len(history)
        history.append(vec)
    sigs = [tuple(vec[u] for vec in history) for u in range(system.n_states)]
    return _blocks_from_keys(sigs)


def _cumulative_vectors(system: FiniteSystem) -> list[tuple]:
    """C_0, C_1, ... up to stabilization: targets within at most n steps."""
    vec = tuple(system.obs_signature(u) for u in range(system.n_states))
    history = [vec]
    while True:
        nxt = tuple(history[-1][u].union(*(history[-1][w] for w in system.succ[u]))
                    if system.succ[u] else history[-1][u]
                    for u in range(system.n_states))
        if nxt == history[-1]:
            return history
        history.append(nxt)


def _bounded_reach_equivalence(system: FiniteSystem) -> Partition:
    history = _cumulative_vectors(system)
    sigs = [tuple(vec[u] for vec in history) for u in range(system.n_states)]
    return _blocks_from_keys(sigs)


def _reach_equivalence(system: FiniteSystem) -> Partition:
    final = _cumulative_vectors(system)[-1]
    return _blocks_from_keys(list(final))


def oracle_equivalence(system: FiniteSystem, which: int,
                       finite_traces: bool = False) -> Partition:
    """Partition of the states under equivalence 1..6, by direct definition.

    finite_traces only affects which=3: when set, infinite traces are
    ignored (the two notions differ only on states with dead ends below
    them, and coincide on every finite system; both are exposed so the
    distinction itself can be tested).
    """
    if which == 1:
        return _bisimilarity(system)
    if which == 2:
        return _similarity(system)
    if which == 3:
        return _trace_equivalence(system, finite_traces)
    if which == 4:
        return _distance_equivalence(system)
    if which == 5:
        return _bounded_reach_equivalence(system)
    if which == 6:
        return _reach_equivalence(system)
    raise ValueError(f"unknown equivalence level {which!r}")


def refines(fine: Partition, coarse: Partition) -> bool:
    """Every block of `fine` is contained in some block of `coarse`."""
    return all(any(b <= c for c in coarse) for b in fine)


# --- explicit-state formula evaluation -------------------------------------------


def oracle_eval(system: FiniteSystem, formula,
                env: Mapping[str, frozenset] | None = None) -> frozenset:
    """Direct fixpoint evaluation over explicit state sets.

    Bounded operators are evaluated by stepwise unrolling rather than via
    their fixpoint expansions, so this is an independent check of both the
    symbolic checker and the expansion rules.
    """
    from . import logic

    env = dict(env or {})
    everything = frozenset(range(system.n_states))

    def pre_all(target: frozenset) -> frozenset:
        return frozenset(u for u in range(system.n_states) if system.succ[u] <= target)

    def ev(phi, env: dict) -> frozenset:
        if isinstance(phi, logic.Const):
            try:
                return system.obs[phi.name]
            except KeyError:
                raise AlgebraError(f"unknown observable {phi.name!r}") from None
        if isinstance(phi, logic.DualConst):
            return everything - ev(logic.Const(phi.name), env)
        if isinstance(phi, logic.Var):
            try:
                return env[phi.name]
            except KeyError:
                raise AlgebraError(f"unbound variable {phi.name!r}") from None
        if isinstance(phi, logic.Or):
            return ev(phi.left, env) | ev(phi.right, env)
        if isinstance(phi, logic.And):
            return ev(phi.left, env) & ev(phi.right, env)
        if isinstance(phi, logic.ExistsNext):
            return system.pre_set(ev(phi.sub, env))
        if isinstance(phi, logic.ForallNext):
            return pre_all(ev(phi.sub, env))
        if isinstance(phi, (logic.Mu, logic.Nu)):
            current = frozenset() if isinstance(phi, logic.Mu) else everything
            while True:
                nxt = ev(phi.sub, {**env, phi.var: current})
                if nxt == current:
                    return current
                current = nxt
        if isinstance(phi, logic.ExistsEventually):
            current = ev(phi.sub, env)
            while True:
                nxt = current | system.pre_set(current)
                if nxt == current:
                    return current
                current = nxt
        if isinstance(phi, logic.ForallAlways):
            current = ev(phi.sub, env)
            while True:
                nxt = current & pre_all(current)
                if nxt == current:
                    return current
                current = nxt
        if isinstance(phi, logic.ExistsEventuallyWithin):
            base = ev(phi.sub, env)
            current = base
            for _ in range(phi.bound):
                current = base | system.pre_set(current)
            return current
        if isinstance(phi, logic.ForallAlwaysWithin):
            base = ev(phi.sub, env)
            current = base
            for _ in range(phi.bound):
                current = base & pre_all(current)
            return current
        raise TypeError(f"cannot evaluate {type(phi).__name__}")

    return ev(formula, env)


# --- well-quasi-order check -------------------------------------------------------


def bounded_reach_preorder(system: FiniteSystem) -> frozenset:
    """Pairs (u,v) with: every target reachable from u in n steps is
    reachable from v in at most n steps.  The associated equivalence is
    bounded-reach equivalence."""
    history = _cumulative_vectors(system)
    n = system.n_states
    return frozenset((u, v) for u in range(n) for v in range(n)
                     if all(vec[u] <= vec[v] for vec in history))


def oracle_wqo_check(system: FiniteSystem, order: Iterable[tuple[int, int]]) -> bool:
    """Check that every bounded-reach target set is upward-closed for `order`.

    order must be a quasi-order (reflexive and transitive) on the states;
    on a finite state space any quasi-order is a well-quasi-order, so only
    the upward-closure of the sets {u : p reachable from u within d steps}
    is at issue, for every observable p and every d up to stabilization.
    """
    pairs = frozenset((int(u), int(v)) for u, v in order)
    n = system.n_states
    for u in range(n):
        if (u, u) not in pairs:
            raise ValueError(f"order is not reflexive at {u}")
    for u, v in pairs:
        for w in range(n):
            if (v, w) in pairs and (u, w) not in pairs:
                raise ValueError(f"order is not transitive at ({u},{v},{w})")
    for vec in _cumulative_vectors(system):
        for p in system.obs:
            cell = frozenset(u for u in range(n) if p in vec[u])
            for u in cell:
                for w in range(n):
                    if (u, w) in pairs and w not in cell:
                        return False
    return True


# --- fixtures ---------------------------------------------------------------------


def branch_order_pair() -> FiniteSystem:
    """Two trees whose roots 0 and 4 agree on targets at every distance but
    disagree on traces: 0 offers p then nothing alongside q then q, while 4
    offers q then nothing alongside p then q."""
    return FiniteSystem(
        n_states=8,
        edges=[(0, 1), (0, 2), (2, 3), (4, 5), (4, 6), (6, 7)],
        obs={"p": [0, 1, 4, 6], "q": [2, 3, 5, 7]},
        dual_pairs=[("p", "q")],
    )


def p_chain_family(count: int = 4) -> tuple[FiniteSystem, tuple[int, ...]]:
    """Disjoint p-labelled chains of lengths 0..count-1; returns the system
    and the chain heads.  All states are bounded-reach equivalent; no two
    heads are distance equivalent."""
    edges = []
    heads = []
    n = 0
    for length in range(count):
        heads.append(n)
        for k in range(length):
            edges.append((n + k, n + k + 1))
        n += length + 1
    system = FiniteSystem.with_complements(n, edges, {"p": range(n)})
    return system, tuple(heads)


def countdown_chain(length: int = 4) -> FiniteSystem:
    """p-states length..1 counting down into the q sink 0.  All p-states are
    reach equivalent; no two are bounded-reach equivalent."""
    edges = [(i, i - 1) for i in range(1, length + 1)]
    return FiniteSystem(
        n_states=length + 1,
        edges=edges,
        obs={"q": [0], "p": range(1, length + 1)},
        dual_pairs=[("p", "q")],
    )


def branching_cell() -> FiniteSystem:
    """States 0 and 1 are similarity equivalent but not bisimilar: 0 splits
    its choice over two middle states, 1 keeps both options in one."""
    return FiniteSystem.with_complements(
        n_states=7,
        edges=[(0, 2), (0, 3), (2, 5), (2, 6), (3, 5), (1, 4), (4, 5), (4, 6)],
        obs={"r": [0, 1], "s": [2, 3, 4], "p": [5], "q": [6]},
    )


def random_system(seed: int, n_states: int = 6, n_pairs: int = 2,
                  edge_density: float = 0.3) -> FiniteSystem:
    """Deterministic random system for property tests: arbitrary edges,
    n_pairs complement-closed observable pairs."""
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n_states) for v in range(n_states)
             if rng.random() < edge_density]
    obs = {}
    for k in range(n_pairs):
        ext = frozenset(u for u in range(n_states) if rng.random() < 0.5)
        obs[f"p{k}"] = ext
    return FiniteSystem.with_complements(n_states, edges, obs)
