"""Linear-time properties over observables.

Pipeline: an LTL formula over observable names becomes a Buchi automaton by
the classical closure/atom tableau, the automaton becomes either a closed
deterministic-fixpoint formula (one variable per state, accepting states
bound by nu) or a product algebra on which a fixed two-variable formula
expresses the acceptance condition.  Letters of the automaton alphabet are
subsets of the positive observable names; a letter denotes the states whose
valuation matches it exactly, so the negative side of a letter refers to the
complement partners and everything stays inside the fragment that needs no
difference operations.

Explicit-state cross-checks live here too: direct LTL evaluation on lasso
words, lasso acceptance for automata, and accepting-cycle search on the
explicit product of a finite system with an automaton.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import logic
from .finite import FiniteSystem
from .regions import AlgebraError, Region, RegionAlgebra, RegionSet

__all__ = [
    "LtlError",
    "LTrue", "LFalse", "LAtom", "LNegAtom", "LAnd", "LOr", "LNext", "LUntil", "LWUntil",
    "parse_ltl", "render_ltl", "negate_ltl", "atom_names",
    "eval_lasso",
    "BuchiAutomaton", "ltl_to_buchi", "minimize_buchi", "buchi_to_mu",
    "complement_names",
    "ProductAlgebra", "build_product", "buchi_condition",
    "autom_ltl", "ltl_holds",
    "exists_accepting_trace", "exists_accepted_prefix", "ltl_oracle",
]


class LtlError(ValueError):
    pass


# --- formulas -------------------------------------------------------------------


@dataclass(frozen=True)
class Ltl:
    def render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class LTrue(Ltl):
    def render(self) -> str:
        return "true"


@dataclass(frozen=True)
class LFalse(Ltl):
    def render(self) -> str:
        return "false"


@dataclass(frozen=True)
class LAtom(Ltl):
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class LNegAtom(Ltl):
    """Negation, which the grammar allows on atoms only."""

    name: str

    def render(self) -> str:
        return f"!{self.name}"


def _wrap(phi: Ltl, tight: tuple) -> str:
    if isinstance(phi, tight):
        return f"({phi.render()})"
    return phi.render()


@dataclass(frozen=True)
class LAnd(Ltl):
    left: Ltl
    right: Ltl

    def render(self) -> str:
        return f"{_wrap(self.left, (LOr,))} & {_wrap(self.right, (LOr, LAnd))}"


@dataclass(frozen=True)
class LOr(Ltl):
    left: Ltl
    right: Ltl

    def render(self) -> str:
        return f"{self.left.render()} | {_wrap(self.right, (LOr,))}"


@dataclass(frozen=True)
class LNext(Ltl):
    sub: Ltl

    def render(self) -> str:
        return f"X {_wrap(self.sub, (LOr, LAnd, LUntil, LWUntil))}"


@dataclass(frozen=True)
class LUntil(Ltl):
    left: Ltl
    right: Ltl

    def render(self) -> str:
        return (f"{_wrap(self.left, (LOr, LAnd, LUntil, LWUntil))} U "
                f"{_wrap(self.right, (LOr, LAnd, LWUntil))}")


@dataclass(frozen=True)
class LWUntil(Ltl):
    """Weak until: right eventually, or left forever."""

    left: Ltl
    right: Ltl

    def render(self) -> str:
        return (f"{_wrap(self.left, (LOr, LAnd, LUntil, LWUntil))} W "
                f"{_wrap(self.right, (LOr, LAnd, LUntil))}")


_LTL_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_]\w*)|(?P<op>[|&()!]))")
_LTL_KEYWORDS = {"X", "F", "G", "U", "W", "true", "false"}


def parse_ltl(text: str) -> Ltl:
    """`X f`, `F f`, `G f`, `f U g`, `f W g`, `f & g`, `f | g`, `!p`, `true`,
    `false`, atoms, parentheses.  Unary operators bind tightest, then U/W
    (right associative), then `&`, then `|`.  F and G are parsed straight
    into their until forms, and `!` applies to atoms only, so the result is
    in negation normal form by construction."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _LTL_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip():
                raise LtlError(f"unexpected character {text[pos:].strip()[0]!r}")
            break
        tokens.append(m.group(m.lastgroup))
        pos = m.end()
    i = 0

    def peek() -> str | None:
        return tokens[i] if i < len(tokens) else None

    def take() -> str | None:
        nonlocal i
        tok = peek()
        i += 1
        return tok

    def unary() -> Ltl:
        tok = take()
        if tok == "(":
            node = disjunct()
            if take() != ")":
                raise LtlError("missing ')'")
            return node
        if tok == "!":
            name = take()
            if name is None or not name[0].isalpha() or name in _LTL_KEYWORDS:
                raise LtlError("'!' applies to atoms only")
            return LNegAtom(name)
        if tok == "X":
            return LNext(unary())
        if tok == "F":
            return LUntil(LTrue(), unary())
        if tok == "G":
            return LWUntil(unary(), LFalse())
        if tok == "true":
            return LTrue()
        if tok == "false":
            return LFalse()
        if tok is None or not (tok[0].isalpha() or tok[0] == "_") or tok in _LTL_KEYWORDS:
            raise LtlError(f"expected a formula, got {tok!r}")
        return LAtom(tok)

    def until() -> Ltl:
        node = unary()
        if peek() in ("U", "W"):
            op = take()
            rest = until()
            return LUntil(node, rest) if op == "U" else LWUntil(node, rest)
        return node

    def conjunct() -> Ltl:
        node = until()
        while peek() == "&":
            take()
            node = LAnd(node, until())
        return node

    def disjunct() -> Ltl:
        node = conjunct()
        while peek() == "|":
            take()
            node = LOr(node, conjunct())
        return node

    node = disjunct()
    if peek() is not None:
        raise LtlError(f"trailing input: {peek()!r}")
    return node


def render_ltl(phi: Ltl) -> str:
    return phi.render()


def negate_ltl(phi: Ltl) -> Ltl:
    """Negation pushed to the atoms; stays in negation normal form."""
    if isinstance(phi, LTrue):
        return LFalse()
    if isinstance(phi, LFalse):
        return LTrue()
    if isinstance(phi, LAtom):
        return LNegAtom(phi.name)
    if isinstance(phi, LNegAtom):
        return LAtom(phi.name)
    if isinstance(phi, LAnd):
        return LOr(negate_ltl(phi.left), negate_ltl(phi.right))
    if isinstance(phi, LOr):
        return LAnd(negate_ltl(phi.left), negate_ltl(phi.right))
    if isinstance(phi, LNext):
        return LNext(negate_ltl(phi.sub))
    if isinstance(phi, LUntil):
        nl, nr = negate_ltl(phi.left), negate_ltl(phi.right)
        return LWUntil(nr, LAnd(nl, nr))
    if isinstance(phi, LWUntil):
        nl, nr = negate_ltl(phi.left), negate_ltl(phi.right)
        return LUntil(nr, LAnd(nl, nr))
    raise TypeError(f"cannot negate {type(phi).__name__}")


def _subformulas(phi: Ltl, out: list[Ltl]) -> None:
    if phi not in out:
        if isinstance(phi, (LAnd, LOr, LUntil, LWUntil)):
            _subformulas(phi.left, out)
            _subformulas(phi.right, out)
        elif isinstance(phi, LNext):
            _subformulas(phi.sub, out)
        out.append(phi)


def atom_names(phi: Ltl) -> tuple[str, ...]:
    out: list[Ltl] = []
    _subformulas(phi, out)
    return tuple(sorted({f.name for f in out if isinstance(f, (LAtom, LNegAtom))}))


# --- direct semantics on ultimately periodic words ---------------------------------


def eval_lasso(phi: Ltl, prefix: Sequence[frozenset], cycle: Sequence[frozenset]) -> bool:
    """Truth of phi at position 0 of the word prefix . cycle^omega.

    Letters are the sets of atom names holding at a position.  Temporal
    operators are solved by fixpoint iteration over the lasso graph, which
    is exact on ultimately periodic words.
    """
    if not cycle:
        raise LtlError("lasso needs a nonempty cycle")
    letters = list(prefix) + list(cycle)
    n = len(letters)
    loop = len(prefix)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    subs: list[Ltl] = []
    _subformulas(phi, subs)
    val: dict[Ltl, list[bool]] = {}
    for f in subs:  # postorder, so operands are always ready
        if isinstance(f, LTrue):
            val[f] = [True] * n
        elif isinstance(f, LFalse):
            val[f] = [False] * n
        elif isinstance(f, LAtom):
            val[f] = [f.name in letters[i] for i in range(n)]
        elif isinstance(f, LNegAtom):
            val[f] = [f.name not in letters[i] for i in range(n)]
        elif isinstance(f, LAnd):
            val[f] = [val[f.left][i] and val[f.right][i] for i in range(n)]
        elif isinstance(f, LOr):
            val[f] = [val[f.left][i] or val[f.right][i] for i in range(n)]
        elif isinstance(f, LNext):
            val[f] = [val[f.sub][succ(i)] for i in range(n)]
        elif isinstance(f, (LUntil, LWUntil)):
            row = [isinstance(f, LWUntil)] * n
            for _ in range(n + 1):
                nxt = [val[f.right][i] or (val[f.left][i] and row[succ(i)])
                       for i in range(n)]
                if nxt == row:
                    break
                row = nxt
            val[f] = row
        else:
            raise TypeError(f"cannot evaluate {type(f).__name__}")
    return val[phi][0]


# --- Buchi automata ------------------------------------------------------------------


@dataclass(frozen=True)
class BuchiAutomaton:
    """States 0..n_states-1; letters are frozensets over `names`, read as
    exact valuations; runs read one letter per state visited, starting at
    `start`; acceptance is visiting `accepting` infinitely often."""

    n_states: int
    names: tuple[str, ...]
    transitions: frozenset  # of (src, letter, dst)
    start: int = 0
    accepting: frozenset = frozenset()

    def __post_init__(self):
        states = range(self.n_states)
        if self.start not in states:
            raise ValueError(f"start state {self.start} out of range")
        if not set(self.accepting) <= set(states):
            raise ValueError("accepting set mentions unknown states")
        for src, letter, dst in self.transitions:
            if src not in states or dst not in states:
                raise ValueError(f"transition ({src},{set(letter)},{dst}) out of range")
            if not letter <= set(self.names):
                raise ValueError(f"letter {set(letter)} outside the name basis")

    def edges_from(self, src: int) -> list[tuple[frozenset, int]]:
        return sorted(((letter, dst) for s, letter, dst in self.transitions if s == src),
                      key=lambda e: (sorted(e[0]), e[1]))

    def accepts_lasso(self, prefix: Sequence[frozenset], cycle: Sequence[frozenset]) -> bool:
        """Exact acceptance of prefix . cycle^omega by graph search."""
        if not cycle:
            raise LtlError("lasso needs a nonempty cycle")
        letters = list(prefix) + list(cycle)
        n = len(letters)
        loop = len(prefix)

        def succ_pos(i: int) -> int:
            return i + 1 if i + 1 < n else loop

        step: dict[tuple[int, int], set[tuple[int, int]]] = {}
        seen = {(self.start, 0)}
        frontier = [(self.start, 0)]
        while frontier:
            q, i = frontier.pop()
            targets = {(dst, succ_pos(i)) for src, letter, dst in self.transitions
                       if src == q and letter == letters[i]}
            step[(q, i)] = targets
            for node in targets:
                if node not in seen:
                    seen.add(node)
                    frontier.append(node)
        for node in seen:
            if node[0] not in self.accepting:
                continue
            # cycle through an accepting node: nonempty path node -> node
            stack = list(step.get(node, ()))
            visited = set(stack)
            while stack:
                cur = stack.pop()
                if cur == node:
                    return True
                for nxt in step.get(cur, ()):
                    if nxt not in visited:
                        visited.add(nxt)
                        stack.append(nxt)
        return False


def ltl_to_buchi(phi: Ltl, extra_names: Iterable[str] = ()) -> BuchiAutomaton:
    """Closure/atom tableau with degeneralization.

    Atoms are the consistent truth assignments to the subformula closure;
    an atom steps to the assignments compatible with it under the until and
    next expansion laws, reading its own valuation as the letter.  One
    acceptance set per until (atoms not owing it), degeneralized with a
    round counter; a fresh start state guesses the first atom.  States
    that cannot reach an accepting cycle are dropped.
    """
    names = tuple(sorted(set(atom_names(phi)) | set(extra_names)))
    closure: list[Ltl] = []
    _subformulas(phi, closure)
    temporal = [f for f in closure if isinstance(f, (LNext, LUntil, LWUntil))]
    untils = [f for f in closure if isinstance(f, LUntil)]
    if len(names) + len(temporal) > 16:
        raise LtlError(f"tableau too large: {len(names)} names and "
                       f"{len(temporal)} temporal subformulas")

    # an atom is an exact valuation of the names plus a guess for the
    # temporal subformulas; distinct valuations with the same closure
    # membership are distinct atoms, since they read different letters
    atoms: list[tuple[frozenset, frozenset]] = []
    for bits in itertools.product((False, True), repeat=len(names)):
        valuation = dict(zip(names, bits))
        letter = frozenset(n for n in names if valuation[n])
        for tbits in itertools.product((False, True), repeat=len(temporal)):
            tstate = dict(zip(temporal, tbits))
            member: dict[Ltl, bool] = {}
            for f in closure:  # postorder
                if isinstance(f, LTrue):
                    member[f] = True
                elif isinstance(f, LFalse):
                    member[f] = False
                elif isinstance(f, LAtom):
                    member[f] = valuation.get(f.name, False)
                elif isinstance(f, LNegAtom):
                    member[f] = not valuation.get(f.name, False)
                elif isinstance(f, LAnd):
                    member[f] = member[f.left] and member[f.right]
                elif isinstance(f, LOr):
                    member[f] = member[f.left] or member[f.right]
                else:
                    member[f] = tstate[f]
            atom = (letter, frozenset(f for f in closure if member[f]))
            if atom not in atoms:
                atoms.append(atom)
    atoms.sort(key=lambda a: (sorted(a[0]), sorted(f.render() for f in a[1])))

    def compatible(a: tuple, b: tuple) -> bool:
        for f in temporal:
            if isinstance(f, LNext):
                if (f in a[1]) != (f.sub in b[1]):
                    return False
            else:
                holds = (f.right in a[1]) or (f.left in a[1] and f in b[1])
                if (f in a[1]) != holds:
                    return False
        return True

    initial = [i for i, a in enumerate(atoms) if phi in a[1]]
    succ_atoms = {i: [j for j, b in enumerate(atoms) if compatible(a, b)]
                  for i, a in enumerate(atoms)}

    def letters_of(i: int) -> list[frozenset]:
        return [atoms[i][0]]

    k = max(1, len(untils))
    acc_sets = [frozenset(i for i, a in enumerate(atoms)
                          if u not in a[1] or u.right in a[1])
                for u in untils] or [frozenset(range(len(atoms)))]

    def advance(c: int, i: int) -> int:
        return (c + 1) % k if i in acc_sets[c] else c

    # assemble with a dedicated start node, then trim
    nodes: dict = {"init": 0}
    trans: set[tuple[int, frozenset, int]] = set()

    def node_id(key) -> int:
        if key not in nodes:
            nodes[key] = len(nodes)
        return nodes[key]

    frontier: list[tuple] = []
    for i in initial:
        for j in succ_atoms[i]:
            key = (j, advance(0, i))
            fresh = key not in nodes
            for let in letters_of(i):
                trans.add((0, let, node_id(key)))
            if fresh:
                frontier.append(key)
    seen_keys = set(k2 for k2 in nodes if k2 != "init")
    while frontier:
        (i, c) = frontier.pop()
        src = nodes[(i, c)]
        for j in succ_atoms[i]:
            key = (j, advance(c, i))
            if key not in seen_keys:
                seen_keys.add(key)
                frontier.append(key)
            for let in letters_of(i):
                trans.add((src, let, node_id(key)))
    accepting = {nodes[key] for key in nodes
                 if key != "init" and key[1] == 0 and key[0] in acc_sets[0]}

    # trim to states that can still reach an accepting cycle
    n = len(nodes)
    succ_ids: dict[int, set[int]] = {}
    for src, _let, dst in trans:
        succ_ids.setdefault(src, set()).add(dst)

    def reach_from(roots: Iterable[int]) -> set[int]:
        out = set(roots)
        work = list(out)
        while work:
            cur = work.pop()
            for nxt in succ_ids.get(cur, ()):
                if nxt not in out:
                    out.add(nxt)
                    work.append(nxt)
        return out

    live_accepting = {q for q in accepting if q in reach_from(succ_ids.get(q, ()))}
    keep = {q for q in range(n) if reach_from([q]) & live_accepting} | {0}
    renumber = {old: new for new, old in enumerate(sorted(keep))}
    final_trans = frozenset((renumber[s], let, renumber[d]) for s, let, d in trans
                            if s in keep and d in keep)
    return minimize_buchi(BuchiAutomaton(
        n_states=len(keep),
        names=names,
        transitions=final_trans,
        start=renumber[0],
        accepting=frozenset(renumber[q] for q in accepting & keep),
    ))


def _quotient(b: BuchiAutomaton, cls: list[int]) -> BuchiAutomaton:
    n = max(cls) + 1
    if n == b.n_states:
        return b
    return BuchiAutomaton(
        n_states=n,
        names=b.names,
        transitions=frozenset((cls[s], letter, cls[d])
                              for s, letter, d in b.transitions),
        start=cls[b.start],
        accepting=frozenset(cls[q] for q in b.accepting),
    )


def _relabel(groups, n: int) -> list[int]:
    cls = [0] * n
    for idx, members in enumerate(sorted(groups, key=min)):
        for q in members:
            cls[q] = idx
    return cls


def _forward_quotient(b: BuchiAutomaton) -> BuchiAutomaton:
    """Coarsest acceptance-respecting bisimulation quotient."""
    cls = [1 if q in b.accepting else 0 for q in range(b.n_states)]
    while True:
        sigs: dict = {}
        for q in range(b.n_states):
            sig = (cls[q], frozenset((letter, cls[dst])
                                     for src, letter, dst in b.transitions
                                     if src == q))
            sigs.setdefault(sig, []).append(q)
        new_cls = _relabel(sigs.values(), b.n_states)
        if new_cls == cls:
            break
        cls = new_cls
    return _quotient(b, cls)


def _reverse_quotient(b: BuchiAutomaton) -> BuchiAutomaton:
    """Merge states with identical concrete incoming edges and acceptance.

    Language-preserving: a run of the quotient lifts by following the
    concrete sources of its edges, and incoming-equality inside each merged
    class supplies every edge the lift needs.  The start state is kept
    unmerged so lifted runs begin at it.
    """
    groups: dict = {}
    for q in range(b.n_states):
        if q == b.start:
            key = ("start",)
        else:
            key = (q in b.accepting,
                   frozenset((src, letter) for src, letter, dst in b.transitions
                             if dst == q))
        groups.setdefault(key, []).append(q)
    return _quotient(b, _relabel(groups.values(), b.n_states))


def minimize_buchi(b: BuchiAutomaton) -> BuchiAutomaton:
    """Shrink without changing the language, to a fixpoint of the forward
    and reverse merges.  Exact-valuation tableaux rarely admit forward
    merges (every atom reads its own letter), while the reverse merge
    collapses the letter variants of a committed obligation set, which is
    what keeps the equational unrolling tractable."""
    while True:
        smaller = _reverse_quotient(_forward_quotient(b))
        if smaller.n_states == b.n_states:
            return smaller
        b = smaller


# --- automaton to deterministic fixpoint formula --------------------------------------


def complement_names(algebra: RegionAlgebra) -> dict[str, str]:
    """Mapping from each observable name to its complement partner's name,
    for wiring buchi_to_mu to a specific algebra."""
    return {p.label: algebra.complement_of(p).label for p in algebra.observables}


def _fold_or(items: Sequence[logic.Formula]) -> logic.Formula:
    if not items:
        return logic.Mu("dead", logic.Var("dead"))
    out = items[-1]
    for item in reversed(items[:-1]):
        out = logic.Or(item, out)
    return out


class _FreeVars:
    """Free-variable sets memoized by node identity.

    The unrolled equation trees share subtrees heavily, so the uncached
    recursive walk is exponential while the shared structure is small.
    Entries pin their node to keep ids stable.
    """

    def __init__(self):
        self._cache: dict[int, tuple] = {}

    def __call__(self, phi: logic.Formula) -> frozenset:
        hit = self._cache.get(id(phi))
        if hit is not None and hit[0] is phi:
            return hit[1]
        if isinstance(phi, logic.Var):
            out = frozenset({phi.name})
        elif isinstance(phi, (logic.Const, logic.DualConst)):
            out = frozenset()
        elif isinstance(phi, (logic.Or, logic.And)):
            out = self(phi.left) | self(phi.right)
        elif isinstance(phi, (logic.Mu, logic.Nu)):
            out = self(phi.sub) - {phi.var}
        else:
            out = self(phi.sub)
        self._cache[id(phi)] = (phi, out)
        return out


def _subst(phi: logic.Formula, name: str, repl: logic.Formula,
           fv: _FreeVars) -> logic.Formula:
    """Replace free occurrences of the variable.  Nodes are rewritten at
    most once (memoized by identity), so shared subtrees stay shared."""
    memo: dict[int, tuple] = {}

    def walk(f: logic.Formula) -> logic.Formula:
        if name not in fv(f):
            return f
        hit = memo.get(id(f))
        if hit is not None and hit[0] is f:
            return hit[1]
        if isinstance(f, logic.Var):
            out = repl
        elif isinstance(f, logic.Or):
            out = logic.Or(walk(f.left), walk(f.right))
        elif isinstance(f, logic.And):
            out = logic.And(walk(f.left), walk(f.right))
        elif isinstance(f, logic.ExistsNext):
            out = logic.ExistsNext(walk(f.sub))
        elif isinstance(f, logic.ForallNext):
            out = logic.ForallNext(walk(f.sub))
        elif isinstance(f, (logic.Mu, logic.Nu)):
            out = type(f)(f.var, walk(f.sub))
        else:
            raise TypeError(f"cannot substitute into {type(f).__name__}")
        memo[id(f)] = (f, out)
        return out

    return walk(phi)


def _sccs(n: int, succ: Mapping[int, set[int]]) -> list[list[int]]:
    """Tarjan, iterative; components in reverse topological order."""
    index = {}
    low = {}
    on_stack = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = itertools.count()
    for root in range(n):
        if root in index:
            continue
        work = [(root, iter(sorted(succ.get(root, ()))))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = next(counter)
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succ.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
    return out


def buchi_to_mu(b: BuchiAutomaton, co_names: Mapping[str, str] | None = None,
                finitary: bool = False) -> logic.Formula:
    """One variable per state: X_s is a disjunction, over the outgoing
    transitions, of the letter's valuation conjoined with a next step into
    the target variable.  The negative part of a letter uses the complement
    partner observables (not_<name> unless co_names says otherwise), which
    keeps every conjunction constant-led.  Accepting states are bound by nu,
    the rest by mu; equations are unrolled into nested fixpoints with the
    mu bindings innermost.

    finitary switches to the finite-trace reading: every binder becomes mu
    and accepting states gain a valuation-tautology disjunct standing for
    acceptance of the already-consumed trace.
    """
    co = dict(co_names or {})

    def partner(name: str) -> str:
        return co.get(name, f"not_{name}")

    def letter_formula(letter: frozenset, tail: logic.Formula) -> logic.Formula:
        out = tail
        for name in sorted(b.names, reverse=True):
            out = logic.And(logic.Const(name if name in letter else partner(name)), out)
        return out

    bodies: dict[int, logic.Formula] = {}
    for s in range(b.n_states):
        disjuncts = [letter_formula(letter, logic.ExistsNext(logic.Var(f"x{dst}")))
                     for letter, dst in b.edges_from(s)]
        if finitary and s in b.accepting:
            if not b.names:
                raise LtlError("finitary acceptance needs at least one name")
            n0 = b.names[0]
            disjuncts.insert(0, logic.Or(logic.Const(n0), logic.Const(partner(n0))))
        bodies[s] = _fold_or(disjuncts)

    succ: dict[int, set[int]] = {}
    for src, _letter, dst in b.transitions:
        succ.setdefault(src, set()).add(dst)

    def is_nu(s: int) -> bool:
        return (not finitary) and s in b.accepting

    fv = _FreeVars()
    closed: dict[int, logic.Formula] = {}
    for comp in _sccs(b.n_states, succ):
        # within a sign class the equations form a simultaneous fixpoint, so
        # any elimination order is sound; fewest-references-first keeps the
        # substitution fill-in small
        refs = {s: sum(1 for t in comp if s in succ.get(t, ())) for s in comp}
        order = ([s for s in sorted(comp, key=lambda q: (refs[q], q)) if not is_nu(s)]
                 + [s for s in sorted(comp, key=lambda q: (refs[q], q)) if is_nu(s)])
        inside = set(comp)
        open_defs: dict[int, logic.Formula] = {}
        for idx, s in enumerate(order):
            body = bodies[s]
            for t in sorted(succ.get(s, ()) - inside):
                body = _subst(body, f"x{t}", closed[t], fv)
            for t in order[:idx]:
                body = _subst(body, f"x{t}", open_defs[t], fv)
            if f"x{s}" in fv(body):
                body = (logic.Nu if is_nu(s) else logic.Mu)(f"x{s}", body)
            open_defs[s] = body
        for idx in range(len(order) - 1, -1, -1):
            s = order[idx]
            d = open_defs[s]
            for t in order[idx + 1:]:
                d = _subst(d, f"x{t}", closed[t], fv)
            closed[s] = d

    result = closed[b.start]
    assert not fv(result)
    return result


# --- the product algebra ----------------------------------------------------------


def _obs_label(s: int, obs_label: str) -> str:
    return f"q{s}_{obs_label}"


class ProductAlgebra(RegionAlgebra):
    """Region algebra of the automaton/base product.

    States are (automaton state, base state); the automaton consumes the
    exact valuation of the current base state on each step.  A region maps
    automaton states to nonempty lists of base regions (absent keys are
    empty), so predecessor unions across incoming transitions stay
    representable.  Observables are the pairs (automaton state, base
    observable); their complements span the other automaton states.
    """

    name = "product"

    def __init__(self, base: RegionAlgebra, automaton: BuchiAutomaton):
        super().__init__()
        self.base = base
        self.automaton = automaton
        for name in automaton.names:
            base.observable(name)  # raises AlgebraError if missing
        self._letters: dict[frozenset, Region | None] = {}
        base_obs = base.observables
        all_obs = tuple(base_obs)
        for s in range(automaton.n_states):
            for p in base_obs:
                payload = {s: (p,)}
                co_payload = {t: all_obs for t in range(automaton.n_states) if t != s}
                co_payload[s] = (base.complement_of(p),)
                self.add_observable_pair(
                    _obs_label(s, p.label), payload,
                    f"not_{_obs_label(s, p.label)}", co_payload)

    # letters denote exact valuations; the region is a conjunction over all
    # names, taking the complement partner on the negative side
    def letter_region(self, letter: frozenset) -> Region | None:
        if letter not in self._letters:
            region: Region | None = None
            for name in self.automaton.names:
                obs = self.base.observable(name)
                if name not in letter:
                    obs = self.base.complement_of(obs)
                region = obs if region is None else self.base.and_(region, obs)
            self._letters[letter] = region
        return self._letters[letter]

    def _clean(self, payload: dict) -> dict:
        out = {}
        for s, pieces in payload.items():
            bucket = RegionSet(self.base)
            for piece in pieces:
                if not self.base.empty(piece):
                    bucket.add(piece)
            if len(bucket):
                out[s] = tuple(bucket)
        return out

    def _pre(self, payload):
        out: dict[int, list[Region]] = {}
        for src, letter, dst in self.automaton.transitions:
            pieces = payload.get(dst)
            if not pieces:
                continue
            gate = self.letter_region(letter)
            for piece in pieces:
                r = self.base.pre(piece)
                if gate is not None:
                    r = self.base.and_(gate, r)
                out.setdefault(src, []).append(r)
        return self._clean(out)

    def _and(self, a, b):
        out: dict[int, list[Region]] = {}
        for s in a.keys() & b.keys():
            out[s] = [self.base.and_(x, y) for x in a[s] for y in b[s]]
        return self._clean(out)

    def _diff(self, a, b):
        out: dict[int, list[Region]] = {}
        for s, pieces in a.items():
            if s not in b:
                out[s] = list(pieces)
                continue
            work = list(pieces)
            for y in b[s]:
                work = [self.base.diff(x, y) for x in work]
            out[s] = work
        return self._clean(out)

    def _empty(self, payload) -> bool:
        return not payload

    def _member(self, state, payload) -> bool:
        s, u = state
        return any(self.base.member(u, piece) for piece in payload.get(s, ()))

    def _render(self, payload) -> str:
        parts = []
        for s in sorted(payload):
            inner = "|".join(piece.label for piece in payload[s])
            parts.append(f"q{s}:{inner}")
        text = " ; ".join(parts) or "{}"
        return text if len(text) <= 120 else text[:117] + "..."

    def _top(self):
        obs = tuple(self.base.observables)
        return {s: obs for s in range(self.automaton.n_states)}

    def payload_size(self, payload) -> int:
        return sum(self.base.payload_size(piece.payload)
                   for pieces in payload.values() for piece in pieces)

    def state_samples(self):
        return [(s, u) for s in range(self.automaton.n_states)
                for u in self.base.samples()]

    def has_successor_in(self, state, region: Region) -> bool:
        s, u = state
        for src, letter, dst in self.automaton.transitions:
            if src != s:
                continue
            gate = self.letter_region(letter)
            if gate is not None and not self.base.member(u, gate):
                continue
            for piece in region.payload.get(dst, ()):
                if self.base.has_successor_in(u, piece):
                    return True
        return False

    def pairs_generated(self, regions: Iterable[Region]) -> int:
        """Distinct (automaton state, base extension) pairs across regions."""
        per_state: dict[int, RegionSet] = {}
        for r in regions:
            for s, pieces in r.payload.items():
                bucket = per_state.setdefault(s, RegionSet(self.base))
                for piece in pieces:
                    bucket.add(piece)
        return sum(len(bucket) for bucket in per_state.values())


def build_product(base: RegionAlgebra, automaton: BuchiAutomaton) -> ProductAlgebra:
    return ProductAlgebra(base, automaton)


def buchi_condition(product: ProductAlgebra) -> logic.Formula:
    """The nonemptiness formula nu x1. mu x2. EX x2 | (acc & EX x1), where
    acc is the disjunction of the accepting-state observables."""
    acc = _fold_or([logic.Const(_obs_label(s, p.label))
                    for s in sorted(product.automaton.accepting)
                    for p in product.base.observables])
    body = logic.Or(logic.ExistsNext(logic.Var("x2")),
                    logic.And(acc, logic.ExistsNext(logic.Var("x1"))))
    return logic.Nu("x1", logic.Mu("x2", body))


def autom_ltl(base: RegionAlgebra, phi: Ltl, fuel=None):
    """Product-automaton route: tableau for the negation, product algebra,
    nonemptiness evaluation.  The returned report's regions are base regions
    whose union is the set of states with some trace violating phi (the
    projection of the product result at the automaton start); the product
    run itself is the "product" sub-report."""
    from . import engine

    automaton = ltl_to_buchi(negate_ltl(phi))
    product = build_product(base, automaton)
    inner = engine.model_check(product, buchi_condition(product), fuel=fuel)
    complement = RegionSet(base)
    for r in inner.regions or ():
        for piece in r.payload.get(automaton.start, ()):
            complement.add(piece)
    return engine.RunReport(
        "autom_ltl", inner.verdict, inner.iterations, complement,
        per_iteration=list(inner.per_iteration),
        sub_reports={"product": inner},
        fixpoint_steps=list(inner.fixpoint_steps),
        exhausted=inner.exhausted,
        note="regions live in the base algebra; their union is the "
             "complement of the satisfying set",
    )


def ltl_holds(base: RegionAlgebra, phi: Ltl, state, fuel=None) -> bool:
    """Whether every infinite trace from the state satisfies phi."""
    from .engine import UndecidedError

    report = autom_ltl(base, phi, fuel=fuel)
    if not report.terminated:
        raise UndecidedError(f"autom_ltl ran out of fuel ({report.exhausted})")
    return not any(base.member(state, r) for r in report.regions)


# --- explicit cross-checks -----------------------------------------------------------


def _system_letter(system: FiniteSystem, u: int, names: Sequence[str]) -> frozenset:
    for name in names:
        if name not in system.obs:
            raise AlgebraError(f"system lacks observable {name!r}")
    return frozenset(n for n in names if u in system.obs[n])


def _explicit_product(system: FiniteSystem, b: BuchiAutomaton):
    """Nodes (base state, automaton state); the automaton reads the valuation
    of the current base state."""
    succ: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for u in range(system.n_states):
        letter = _system_letter(system, u, b.names)
        hops = [(src, dst) for src, let, dst in b.transitions if let == letter]
        for s, t in hops:
            for v in system.succ[u]:
                succ.setdefault((u, s), set()).add((v, t))
    return succ


def exists_accepting_trace(system: FiniteSystem, b: BuchiAutomaton, u: int) -> bool:
    """Some infinite trace from u is accepted: reachable accepting node on a
    cycle of the explicit product."""
    succ = _explicit_product(system, b)
    start = (u, b.start)
    seen = {start}
    work = [start]
    while work:
        cur = work.pop()
        for nxt in succ.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    for node in seen:
        if node[1] not in b.accepting:
            continue
        stack = list(succ.get(node, ()))
        visited = set(stack)
        while stack:
            cur = stack.pop()
            if cur == node:
                return True
            for nxt in succ.get(cur, ()):
                if nxt not in visited:
                    visited.add(nxt)
                    stack.append(nxt)
    return False


def exists_accepted_prefix(system: FiniteSystem, b: BuchiAutomaton, u: int) -> bool:
    """Finite-trace reading: some path from u drives the automaton into an
    accepting state (possibly immediately)."""
    if b.start in b.accepting:
        return True
    succ = _explicit_product(system, b)
    start = (u, b.start)
    seen = {start}
    work = [start]
    while work:
        cur = work.pop()
        for nxt in succ.get(cur, ()):
            if nxt[1] in b.accepting:
                return True
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return False


def ltl_oracle(system: FiniteSystem, phi: Ltl, u: int) -> bool:
    """Existential check: some infinite trace from u satisfies phi."""
    return exists_accepting_trace(system, ltl_to_buchi(phi), u)
