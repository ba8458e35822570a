"""Formula syntax trees, parsing, dualization and fragment classification.

The AST is negation-free by construction: complements only enter through
dual constants (~p), and dualize keeps every formula inside the grammar.
Fragments form a chain ordered by how much of the region interface their
checking requires, from plain reachability (predecessor aggregation only)
up to the full calculus (predecessor, intersection and difference).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Formula", "Const", "DualConst", "Var", "Or", "And",
    "ExistsNext", "ForallNext", "Mu", "Nu",
    "ExistsEventually", "ExistsEventuallyWithin",
    "ForallAlways", "ForallAlwaysWithin",
    "Fragment", "FragmentTag", "ParseError",
    "parse_formula", "dualize", "expand_bounded",
    "classify_fragment", "fits", "subsumes",
]


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Formula:
    def free_vars(self) -> frozenset:
        return frozenset()

    @property
    def is_closed(self) -> bool:
        return not self.free_vars()

    def render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


def _wrap(phi: Formula, paren: tuple) -> str:
    """Render phi as an operand, parenthesizing the listed node types."""
    if isinstance(phi, paren):
        return f"({phi.render()})"
    return phi.render()


@dataclass(frozen=True)
class Const(Formula):
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class DualConst(Formula):
    name: str

    def render(self) -> str:
        return f"~{self.name}"


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def free_vars(self) -> frozenset:
        return frozenset({self.name})

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def free_vars(self) -> frozenset:
        return self.left.free_vars() | self.right.free_vars()

    def render(self) -> str:
        return f"{_wrap(self.left, (Mu, Nu))} | {_wrap(self.right, (Mu, Nu, Or))}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def free_vars(self) -> frozenset:
        return self.left.free_vars() | self.right.free_vars()

    def render(self) -> str:
        return f"{_wrap(self.left, (Mu, Nu, Or))} & {_wrap(self.right, (Mu, Nu, Or, And))}"


@dataclass(frozen=True)
class _Unary(Formula):
    sub: Formula

    op = "?"

    def free_vars(self) -> frozenset:
        return self.sub.free_vars()

    def render(self) -> str:
        return f"{self.op} {_wrap(self.sub, (Mu, Nu, Or, And))}"


@dataclass(frozen=True)
class ExistsNext(_Unary):
    op = "EX"


@dataclass(frozen=True)
class ForallNext(_Unary):
    op = "AX"


@dataclass(frozen=True)
class ExistsEventually(_Unary):
    op = "EF"


@dataclass(frozen=True)
class ForallAlways(_Unary):
    op = "AG"


@dataclass(frozen=True)
class _Bounded(Formula):
    bound: int
    sub: Formula

    op = "?"

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError(f"bound must be nonnegative, got {self.bound}")

    def free_vars(self) -> frozenset:
        return self.sub.free_vars()

    def render(self) -> str:
        return f"{self.op}<={self.bound} {_wrap(self.sub, (Mu, Nu, Or, And))}"


@dataclass(frozen=True)
class ExistsEventuallyWithin(_Bounded):
    op = "EF"


@dataclass(frozen=True)
class ForallAlwaysWithin(_Bounded):
    op = "AG"


@dataclass(frozen=True)
class _Binder(Formula):
    var: str
    sub: Formula

    op = "?"

    def free_vars(self) -> frozenset:
        return self.sub.free_vars() - {self.var}

    def render(self) -> str:
        return f"{self.op} {self.var}. {self.sub.render()}"


@dataclass(frozen=True)
class Mu(_Binder):
    op = "mu"


@dataclass(frozen=True)
class Nu(_Binder):
    op = "nu"


# --- parsing ------------------------------------------------------------------

_KEYWORDS = {"mu", "nu", "EX", "AX", "EF", "AG"}

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_]\w*)|(?P<num>\d+)|(?P<op><=|[|&().~]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos:].strip()[0]!r} at offset {pos}")
            break
        if m.lastgroup:
            tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.next()
        if text != value:
            raise ParseError(f"expected {value!r} at offset {pos}, got {text or 'end of input'!r}")

    def formula(self) -> Formula:
        node = self.conjunct()
        while self.peek()[1] == "|":
            self.next()
            node = Or(node, self.conjunct())
        return node

    def conjunct(self) -> Formula:
        node = self.unary()
        while self.peek()[1] == "&":
            self.next()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        kind, text, pos = self.peek()
        if text == "(":
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        if text == "~":
            self.next()
            kind, name, pos = self.next()
            if kind != "id" or name in _KEYWORDS:
                raise ParseError(f"expected constant name after '~' at offset {pos}")
            return DualConst(name)
        if kind != "id":
            raise ParseError(f"expected a formula at offset {pos}, got {text or 'end of input'!r}")
        if text in ("mu", "nu"):
            self.next()
            vkind, var, vpos = self.next()
            if vkind != "id" or var in _KEYWORDS:
                raise ParseError(f"expected variable name at offset {vpos}")
            self.expect(".")
            self.bound.append(var)
            body = self.formula()
            self.bound.pop()
            return (Mu if text == "mu" else Nu)(var, body)
        if text in ("EX", "AX"):
            self.next()
            return (ExistsNext if text == "EX" else ForallNext)(self.unary())
        if text in ("EF", "AG"):
            self.next()
            if self.peek()[1] == "<=":
                self.next()
                nkind, num, npos = self.next()
                if nkind != "num":
                    raise ParseError(f"expected a bound at offset {npos}")
                cls = ExistsEventuallyWithin if text == "EF" else ForallAlwaysWithin
                return cls(int(num), self.unary())
            return (ExistsEventually if text == "EF" else ForallAlways)(self.unary())
        self.next()
        if text in self.bound:
            return Var(text)
        return Const(text)


def _name_clashes(phi: Formula, binders: set, consts: set) -> None:
    if isinstance(phi, (Const, DualConst)):
        consts.add(phi.name)
    elif isinstance(phi, (Mu, Nu)):
        binders.add(phi.var)
        _name_clashes(phi.sub, binders, consts)
    elif isinstance(phi, (Or, And)):
        _name_clashes(phi.left, binders, consts)
        _name_clashes(phi.right, binders, consts)
    elif isinstance(phi, (_Unary, _Bounded)):
        _name_clashes(phi.sub, binders, consts)


def parse_formula(text: str) -> Formula:
    """Parse the concrete syntax.

    `p`, `~p`, `x`, `f | g`, `f & g`, `EX f`, `AX f`, `mu x. f`, `nu x. f`,
    `EF f`, `EF<=d f`, `AG f`, `AG<=d f`.  `&` binds tighter than `|`;
    binder bodies extend as far right as possible.  An identifier is a
    variable iff an enclosing binder introduces it, so parsed formulas are
    closed; a name used both ways is rejected.
    """
    parser = _Parser(text)
    node = parser.formula()
    kind, tok, pos = parser.peek()
    if kind != "eof":
        raise ParseError(f"trailing input at offset {pos}: {tok!r}")
    binders: set = set()
    consts: set = set()
    _name_clashes(node, binders, consts)
    overlap = binders & consts
    if overlap:
        raise ParseError(f"names used both as binder and as constant: {sorted(overlap)}")
    return node


# --- dualization ----------------------------------------------------------------


def dualize(phi: Formula) -> Formula:
    """Swap p with ~p, or with and, EX with AX, mu with nu, EF with AG.

    An involution; on finite systems the result denotes the complement set.
    """
    if isinstance(phi, Const):
        return DualConst(phi.name)
    if isinstance(phi, DualConst):
        return Const(phi.name)
    if isinstance(phi, Var):
        return phi
    if isinstance(phi, Or):
        return And(dualize(phi.left), dualize(phi.right))
    if isinstance(phi, And):
        return Or(dualize(phi.left), dualize(phi.right))
    if isinstance(phi, ExistsNext):
        return ForallNext(dualize(phi.sub))
    if isinstance(phi, ForallNext):
        return ExistsNext(dualize(phi.sub))
    if isinstance(phi, Mu):
        return Nu(phi.var, dualize(phi.sub))
    if isinstance(phi, Nu):
        return Mu(phi.var, dualize(phi.sub))
    if isinstance(phi, ExistsEventually):
        return ForallAlways(dualize(phi.sub))
    if isinstance(phi, ForallAlways):
        return ExistsEventually(dualize(phi.sub))
    if isinstance(phi, ExistsEventuallyWithin):
        return ForallAlwaysWithin(phi.bound, dualize(phi.sub))
    if isinstance(phi, ForallAlwaysWithin):
        return ExistsEventuallyWithin(phi.bound, dualize(phi.sub))
    raise TypeError(f"cannot dualize {type(phi).__name__}")


# --- removing sugared operators ---------------------------------------------------


def expand_bounded(phi: Formula) -> Formula:
    """Rewrite EF / AG / EF<=d / AG<=d into the plain fixpoint calculus.

    EF<=d unfolds into d nested next steps; EF f becomes mu x. f | EX x
    with a variable fresh for the whole formula (AG dually).
    """
    taken = set()

    def names(psi: Formula) -> None:
        if isinstance(psi, (Const, DualConst, Var)):
            taken.add(psi.name)
        elif isinstance(psi, (Or, And)):
            names(psi.left)
            names(psi.right)
        elif isinstance(psi, (_Unary, _Bounded)):
            names(psi.sub)
        elif isinstance(psi, (Mu, Nu)):
            taken.add(psi.var)
            names(psi.sub)

    names(phi)
    counter = [0]

    def fresh() -> str:
        while True:
            name = f"x{counter[0]}"
            counter[0] += 1
            if name not in taken:
                taken.add(name)
                return name

    def walk(psi: Formula) -> Formula:
        if isinstance(psi, (Const, DualConst, Var)):
            return psi
        if isinstance(psi, Or):
            return Or(walk(psi.left), walk(psi.right))
        if isinstance(psi, And):
            return And(walk(psi.left), walk(psi.right))
        if isinstance(psi, ExistsNext):
            return ExistsNext(walk(psi.sub))
        if isinstance(psi, ForallNext):
            return ForallNext(walk(psi.sub))
        if isinstance(psi, Mu):
            return Mu(psi.var, walk(psi.sub))
        if isinstance(psi, Nu):
            return Nu(psi.var, walk(psi.sub))
        if isinstance(psi, ExistsEventuallyWithin):
            body = walk(psi.sub)
            out = body
            for _ in range(psi.bound):
                out = Or(body, ExistsNext(out))
            return out
        if isinstance(psi, ForallAlwaysWithin):
            body = walk(psi.sub)
            out = body
            for _ in range(psi.bound):
                out = And(body, ForallNext(out))
            return out
        if isinstance(psi, ExistsEventually):
            body = walk(psi.sub)
            x = fresh()
            return Mu(x, Or(body, ExistsNext(Var(x))))
        if isinstance(psi, ForallAlways):
            body = walk(psi.sub)
            x = fresh()
            return Nu(x, And(body, ForallNext(Var(x))))
        raise TypeError(f"cannot expand {type(psi).__name__}")

    return walk(phi)


# --- fragments ---------------------------------------------------------------------


class Fragment(Enum):
    """Nested grammars, ordered by the region operations their checking uses.

    reachability:        p, or, EF                      (aggregation only)
    bounded-reachability: + EF<=d
    reachability-next:    + EX
    conjunction-free:    p, x, or, EX, mu               (Pre only)
    deterministic:       + const-and-formula, nu        (Pre and observable-And)
    deterministic-finitary: deterministic without nu
    positive:            unrestricted and               (Pre and And)
    full:                + ~p, AX                       (Pre, And and Diff)
    """

    REACHABILITY = "reachability"
    BOUNDED_REACHABILITY = "bounded-reachability"
    REACHABILITY_NEXT = "reachability-next"
    CONJUNCTION_FREE = "conjunction-free"
    DETERMINISTIC = "deterministic"
    DETERMINISTIC_FINITARY = "deterministic-finitary"
    POSITIVE = "positive"
    FULL = "full"


# Linear by inclusion: conjunction-free drops both conjunction and nu, so it
# sits inside the finitary fragment, which in turn sits inside deterministic.
_CHAIN = (
    Fragment.REACHABILITY,
    Fragment.BOUNDED_REACHABILITY,
    Fragment.REACHABILITY_NEXT,
    Fragment.CONJUNCTION_FREE,
    Fragment.DETERMINISTIC_FINITARY,
    Fragment.DETERMINISTIC,
    Fragment.POSITIVE,
    Fragment.FULL,
)


@dataclass(frozen=True)
class FragmentTag:
    fragment: Fragment
    dual: bool = False

    def __str__(self) -> str:
        prefix = "dual-of-" if self.dual else ""
        return prefix + self.fragment.value


def subsumes(wider: Fragment, narrower: Fragment) -> bool:
    """True if every formula of `narrower` lies in `wider`."""
    return _CHAIN.index(wider) >= _CHAIN.index(narrower)


def _is_atom(phi: Formula, relaxed: bool) -> bool:
    return isinstance(phi, Const) or (relaxed and isinstance(phi, DualConst))


def _fits_diamond(phi: Formula, fragment: Fragment, relaxed: bool) -> bool:
    if _is_atom(phi, relaxed):
        return True
    if isinstance(phi, Or):
        return (_fits_diamond(phi.left, fragment, relaxed)
                and _fits_diamond(phi.right, fragment, relaxed))
    if isinstance(phi, ExistsEventually):
        return _fits_diamond(phi.sub, fragment, relaxed)
    if isinstance(phi, ExistsEventuallyWithin):
        return (fragment is not Fragment.REACHABILITY
                and _fits_diamond(phi.sub, fragment, relaxed))
    if isinstance(phi, ExistsNext):
        return (fragment is Fragment.REACHABILITY_NEXT
                and _fits_diamond(phi.sub, fragment, relaxed))
    return False


def _fits_mu(phi: Formula, fragment: Fragment, relaxed: bool) -> bool:
    if _is_atom(phi, relaxed) or isinstance(phi, Var):
        return True
    if isinstance(phi, DualConst):
        return fragment is Fragment.FULL
    if isinstance(phi, Or):
        return _fits_mu(phi.left, fragment, relaxed) and _fits_mu(phi.right, fragment, relaxed)
    if isinstance(phi, And):
        if fragment is Fragment.CONJUNCTION_FREE:
            return False
        if fragment in (Fragment.DETERMINISTIC, Fragment.DETERMINISTIC_FINITARY):
            return _is_atom(phi.left, relaxed) and _fits_mu(phi.right, fragment, relaxed)
        return _fits_mu(phi.left, fragment, relaxed) and _fits_mu(phi.right, fragment, relaxed)
    if isinstance(phi, ExistsNext):
        return _fits_mu(phi.sub, fragment, relaxed)
    if isinstance(phi, ForallNext):
        return fragment is Fragment.FULL and _fits_mu(phi.sub, fragment, relaxed)
    if isinstance(phi, Mu):
        return _fits_mu(phi.sub, fragment, relaxed)
    if isinstance(phi, Nu):
        if fragment in (Fragment.DETERMINISTIC_FINITARY, Fragment.CONJUNCTION_FREE):
            return False
        return _fits_mu(phi.sub, fragment, relaxed)
    return False


_DIAMOND = (Fragment.REACHABILITY, Fragment.BOUNDED_REACHABILITY, Fragment.REACHABILITY_NEXT)


def fits(phi: Formula, fragment: Fragment, relaxed: bool = False) -> bool:
    """Membership in a fragment's grammar.

    Diamond fragments are judged on the sugared tree; calculus fragments on
    the desugared tree.  relaxed additionally admits dual constants as
    atoms, which is how membership in a dual fragment is decided.
    """
    if fragment in _DIAMOND:
        return _fits_diamond(phi, fragment, relaxed)
    return _fits_mu(expand_bounded(phi), fragment, relaxed)


def classify_fragment(phi: Formula) -> FragmentTag:
    """Tightest fragment along the chain, trying duals before giving up.

    The finitary fragment never wins (it sits beside the chain, not on it);
    use fits(phi, Fragment.DETERMINISTIC_FINITARY) to test it directly.
    """
    if not phi.is_closed:
        raise ValueError(f"formula has free variables: {sorted(phi.free_vars())}")
    order = (
        Fragment.REACHABILITY,
        Fragment.BOUNDED_REACHABILITY,
        Fragment.REACHABILITY_NEXT,
        Fragment.CONJUNCTION_FREE,
        Fragment.DETERMINISTIC,
        Fragment.POSITIVE,
    )
    for fragment in order:
        if fits(phi, fragment):
            return FragmentTag(fragment)
    mirrored = dualize(phi)
    for fragment in order:
        if fits(mirrored, fragment, relaxed=True):
            return FragmentTag(fragment, dual=True)
    return FragmentTag(Fragment.FULL)
