"""Region algebras: the abstraction every checker in this package runs on.

A region algebra presents a (possibly infinite) transition system through a
finite interface: a list of observable regions closed under complement, a
predecessor operation, intersection, difference, an emptiness test and a
state membership test.  Regions are opaque handles around algebra-owned
payloads; they carry a deterministic rendering and a provenance record
saying which operation produced them.

Everything downstream (closures, reach, the mu-calculus checker) only ever
manipulates regions through this interface, so region identity is semantic:
two regions are the same iff their symmetric difference is empty.  RegionSet
enforces that invariant on insertion.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

__all__ = [
    "Region",
    "RegionSet",
    "RegionAlgebra",
    "AlgebraError",
    "semantic_equal",
    "setwise_contained",
    "union_contained",
    "pairwise_difference",
    "membership_signature",
    "extract_quotient",
    "check_algebra_laws",
]

StateRef = Any

_uid_counter = itertools.count(1)


class AlgebraError(RuntimeError):
    """Raised for contract violations detected by an algebra."""


@dataclass(frozen=True, eq=False)
class Region:
    """Opaque region handle, compared by identity.

    payload is owned by the producing algebra; label is a deterministic
    rendering of the payload; provenance records the producing operation as
    (opname, parent regions).  uid is unique, so identity comparison loses
    nothing; payloads need not be hashable.
    """

    payload: Any
    label: str
    provenance: tuple = ("obs",)
    uid: int = field(default_factory=lambda: next(_uid_counter))

    def __repr__(self):
        return f"<region #{self.uid} {self.label}>"


class RegionAlgebra:
    """Base class for region algebras.

    Subclasses implement the payload-level operations; this class wraps the
    results into Region values with provenance.  The observable list must
    cover the state space and be closed under complement (complement_of
    returns the partner observable).
    """

    name = "algebra"

    def __init__(self):
        self._observables: list[Region] = []
        self._complement: dict[int, Region] = {}
        self._obs_by_name: dict[str, Region] = {}
        self._samples: list[StateRef] | None = None

    # -- registration ------------------------------------------------------

    def add_observable_pair(self, name: str, payload, co_name: str, co_payload) -> tuple[Region, Region]:
        p = Region(payload, name, ("obs", name))
        q = Region(co_payload, co_name, ("obs", co_name))
        for r in (p, q):
            if r.label in self._obs_by_name:
                raise AlgebraError(f"duplicate observable name {r.label!r}")
            self._observables.append(r)
            self._obs_by_name[r.label] = r
        self._complement[p.uid] = q
        self._complement[q.uid] = p
        return p, q

    @property
    def observables(self) -> list[Region]:
        return list(self._observables)

    def observable(self, name: str) -> Region:
        try:
            return self._obs_by_name[name]
        except KeyError:
            known = ", ".join(sorted(self._obs_by_name))
            raise AlgebraError(f"unknown observable {name!r} (known: {known})") from None

    def complement_of(self, obs: Region) -> Region:
        try:
            return self._complement[obs.uid]
        except KeyError:
            raise AlgebraError(f"{obs!r} is not a registered observable") from None

    # -- payload-level operations (subclass responsibilities) ---------------

    def _pre(self, payload):
        raise NotImplementedError

    def _and(self, a, b):
        raise NotImplementedError

    def _diff(self, a, b):
        raise NotImplementedError

    def _empty(self, payload) -> bool:
        raise NotImplementedError

    def _member(self, state: StateRef, payload) -> bool:
        raise NotImplementedError

    def _render(self, payload) -> str:
        raise NotImplementedError

    def _top(self):
        raise NotImplementedError

    def extension_key(self, payload) -> Hashable | None:
        """Exact canonical key: equal keys iff equal extensions, or None."""
        return None

    def payload_size(self, payload) -> int:
        """Rough size measure used by budget warnings."""
        return 1

    def state_samples(self) -> Sequence[StateRef]:
        """Concrete states used for signatures and law checks."""
        raise NotImplementedError

    def has_successor_in(self, state: StateRef, region: Region) -> bool:
        """Exact one-step check, used to validate pre against the semantics."""
        raise NotImplementedError

    # -- public operations ---------------------------------------------------

    def pre(self, r: Region) -> Region:
        payload = self._pre(r.payload)
        return Region(payload, self._render(payload), ("pre", r))

    def and_(self, a: Region, b: Region) -> Region:
        payload = self._and(a.payload, b.payload)
        return Region(payload, self._render(payload), ("and", a, b))

    def diff(self, a: Region, b: Region) -> Region:
        payload = self._diff(a.payload, b.payload)
        return Region(payload, self._render(payload), ("diff", a, b))

    def empty(self, r: Region) -> bool:
        return self._empty(r.payload)

    def member(self, state: StateRef, r: Region) -> bool:
        return self._member(state, r.payload)

    def top(self) -> Region:
        payload = self._top()
        return Region(payload, self._render(payload), ("top",))

    def samples(self) -> list[StateRef]:
        if self._samples is None:
            self._samples = list(self.state_samples())
        return self._samples


# --- semantic comparisons ---------------------------------------------------


def semantic_equal(algebra: RegionAlgebra, a: Region, b: Region) -> bool:
    """Extension equality, decided by two difference-emptiness checks."""
    return algebra.empty(algebra.diff(a, b)) and algebra.empty(algebra.diff(b, a))


def setwise_contained(algebra: RegionAlgebra, inner: "RegionSet | Iterable[Region]",
                      outer: "RegionSet") -> bool:
    """Every region of `inner` is extension-equal to some region of `outer`."""
    for r in inner:
        if not outer.contains_equal(r):
            return False
    return True


def pairwise_difference(algebra: RegionAlgebra, minuend: Iterable[Region],
                        subtrahend: Iterable[Region],
                        size_budget: int | None = None) -> list[Region]:
    """T minus T': fold Diff over the subtrahend, region by region.

    T minus the empty set is T; T minus ({tau} union T') is
    {Diff(sigma, tau) | sigma in T} minus T'.
    """
    work = list(minuend)
    for tau in subtrahend:
        work = [algebra.diff(sigma, tau) for sigma in work]
        if size_budget is not None:
            worst = max((algebra.payload_size(r.payload) for r in work), default=0)
            if worst > size_budget:
                log.warning("pairwise difference payload grew to %d (budget %d)", worst, size_budget)
                raise AlgebraError(f"pairwise difference exceeded size budget: {worst} > {size_budget}")
    return work


def union_contained(algebra: RegionAlgebra, inner: Iterable[Region],
                    outer: Iterable[Region], size_budget: int | None = None) -> bool:
    """Union of `inner` contained in union of `outer` via pairwise difference."""
    remainder = pairwise_difference(algebra, inner, outer, size_budget)
    return all(algebra.empty(r) for r in remainder)


def membership_signature(algebra: RegionAlgebra, state: StateRef,
                         regions: Iterable[Region]) -> tuple[bool, ...]:
    return tuple(algebra.member(state, r) for r in regions)


# --- deduplicating region containers ----------------------------------------


class RegionSet:
    """Ordered list of regions, deduplicated by extension equality.

    Insertion uses the algebra's exact extension key when available, and
    otherwise buckets candidates by their membership signature on the
    algebra's sample states before falling back to the two-difference
    semantic equality check.  Both routes decide exactly the relation
    `semantic_equal`; the fast paths only avoid redundant diff calls.
    """

    def __init__(self, algebra: RegionAlgebra, regions: Iterable[Region] = (),
                 on_add: Callable[[Region], None] | None = None):
        self.algebra = algebra
        self.regions: list[Region] = []
        self._by_key: dict[Hashable, Region] = {}
        self._by_sig: dict[tuple, list[Region]] = {}
        self._sig_states: list[StateRef] | None = None
        self.on_add = on_add
        for r in regions:
            self.add(r)

    def __iter__(self) -> Iterator[Region]:
        return iter(self.regions)

    def __len__(self) -> int:
        return len(self.regions)

    def _signature(self, r: Region) -> tuple:
        if self._sig_states is None:
            self._sig_states = list(self.algebra.samples())
        return tuple(self.algebra.member(u, r) for u in self._sig_states)

    def _find_equal(self, r: Region) -> Region | None:
        key = self.algebra.extension_key(r.payload)
        if key is not None:
            return self._by_key.get(key)
        sig = self._signature(r)
        for cand in self._by_sig.get(sig, ()):
            # payloads compare structurally, so equality is a sound fast path
            if cand is r or cand.payload == r.payload or semantic_equal(self.algebra, cand, r):
                return cand
        return None

    def contains_equal(self, r: Region) -> bool:
        return self._find_equal(r) is not None

    def find_equal(self, r: Region) -> Region | None:
        return self._find_equal(r)

    def add(self, r: Region) -> bool:
        """Insert unless an extension-equal region is present.  True if added."""
        if self._find_equal(r) is not None:
            return False
        key = self.algebra.extension_key(r.payload)
        if key is not None:
            self._by_key[key] = r
        else:
            self._by_sig.setdefault(self._signature(r), []).append(r)
        self.regions.append(r)
        if self.on_add is not None:
            self.on_add(r)
        return True

    def copy(self) -> "RegionSet":
        out = RegionSet(self.algebra)
        out.regions = list(self.regions)
        out._by_key = dict(self._by_key)
        out._by_sig = {k: list(v) for k, v in self._by_sig.items()}
        out._sig_states = self._sig_states
        out.on_add = None
        return out


# --- quotient extraction -----------------------------------------------------


def extract_quotient(algebra: RegionAlgebra, regions: Iterable[Region],
                     max_atoms: int = 4096):
    """Atoms of the partition induced by a region family, plus the quotient.

    Returns (system, atoms) where atoms is a list of pairwise disjoint
    regions covering the union of the family and system is a FiniteSystem
    whose states are the atoms, with a transition between atoms a -> b iff
    And(a, Pre(b)) is nonempty and labels inherited by intersection.
    """
    from .finite import FiniteSystem  # local import, finite builds on regions

    regions = list(regions)
    atoms: list[Region] = []
    for r in regions:
        if algebra.empty(r):
            continue
        nxt: list[Region] = []
        for atom in atoms:
            inside = algebra.and_(atom, r)
            outside = algebra.diff(atom, r)
            for piece in (inside, outside):
                if not algebra.empty(piece):
                    nxt.append(piece)
        rest = r
        for atom in atoms:
            rest = algebra.diff(rest, atom)
        if not algebra.empty(rest):
            nxt.append(rest)
        atoms = nxt
        if len(atoms) > max_atoms:
            raise AlgebraError(f"atom count exceeded budget {max_atoms}")

    pre_atoms = [algebra.pre(a) for a in atoms]
    edges = []
    for i, a in enumerate(atoms):
        for j, _b in enumerate(atoms):
            if not algebra.empty(algebra.and_(a, pre_atoms[j])):
                edges.append((i, j))
    labels: dict[str, set[int]] = {}
    for obs in algebra.observables:
        hit = set()
        for i, a in enumerate(atoms):
            if not algebra.empty(algebra.and_(a, obs)):
                hit.add(i)
        labels[obs.label] = hit
    pairs = []
    seen = set()
    for obs in algebra.observables:
        co = algebra.complement_of(obs)
        if obs.label in seen or co.label in seen:
            continue
        seen.update((obs.label, co.label))
        pairs.append((obs.label, co.label))
    system = FiniteSystem(
        n_states=len(atoms),
        edges=edges,
        obs={name: frozenset(hit) for name, hit in labels.items()},
        dual_pairs=pairs,
        validate=False,
    )
    return system, atoms


# --- sampled law checking -----------------------------------------------------


def check_algebra_laws(algebra: RegionAlgebra, extra_regions: Iterable[Region] = (),
                       max_pairs: int = 200) -> None:
    """Assert the region-algebra laws on sampled states.

    Checks observable covering and complementation exactly (via pairwise
    difference against top), then And/Diff/Pre/Member agreement on samples.
    Raises AlgebraError on the first violation.
    """
    obs = algebra.observables
    if not obs:
        raise AlgebraError("algebra has no observables")
    top = algebra.top()
    if not union_contained(algebra, [top], obs):
        raise AlgebraError("observables do not cover the state space")
    samples = algebra.samples()
    for p in obs:
        q = algebra.complement_of(p)
        if algebra.complement_of(q) is not p:
            raise AlgebraError(f"complement pairing of {p.label} is not involutive")
        if not algebra.empty(algebra.and_(p, q)):
            raise AlgebraError(f"observables {p.label} and {q.label} overlap")
        for u in samples:
            if algebra.member(u, p) == algebra.member(u, q):
                raise AlgebraError(f"complement law fails at {u!r} for {p.label}")
    pool = list(obs) + list(extra_regions)
    pairs = list(itertools.product(pool, repeat=2))[:max_pairs]
    for a, b in pairs:
        meet = algebra.and_(a, b)
        delta = algebra.diff(a, b)
        for u in samples:
            ma, mb = algebra.member(u, a), algebra.member(u, b)
            if algebra.member(u, meet) != (ma and mb):
                raise AlgebraError(f"And law fails at {u!r}")
            if algebra.member(u, delta) != (ma and not mb):
                raise AlgebraError(f"Diff law fails at {u!r}")
    for a in pool:
        pre_a = algebra.pre(a)
        if algebra.empty(a) and not algebra.empty(pre_a):
            raise AlgebraError("Pre of an empty region is nonempty")
        for u in samples:
            expect = algebra.has_successor_in(u, a)
            if algebra.member(u, pre_a) != expect:
                raise AlgebraError(f"Pre law fails at {u!r} for {a.label}")
