"""Closure and model-checking semi-algorithms over region algebras.

Every procedure here may fail to terminate on an infinite-state algebra, so
each run carries a three-dimensional fuel (outer iterations, regions kept
after deduplication, raw algebra operations).  Running out of fuel is a
verdict, never an exception: callers receive a RunReport either way.

Termination tests are the setwise and union containments of the region
core.  Candidate generation is incremental (new regions are only paired
with the working set once), which produces the same deduplicated T_i
sequence as pairing everything with everything at every round.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from . import logic
from .linear import BudgetError
from .regions import (
    AlgebraError,
    Region,
    RegionAlgebra,
    RegionSet,
    membership_signature,
    pairwise_difference,
    union_contained,
)

__all__ = [
    "Fuel",
    "Verdict",
    "RunReport",
    "ProbeReport",
    "UndecidedError",
    "closure",
    "closure1",
    "closure2",
    "closure3",
    "closure4",
    "reach",
    "model_check",
    "decide_equivalent",
    "probe_class",
    "induced_partition",
]


@dataclass(frozen=True)
class Fuel:
    """Bounds making the semi-algorithms total: per-loop iterations, regions
    retained in a closure or reach working set, and raw region-operation
    count.  Model checking is bounded by iterations and ticks alone; every
    region it keeps was produced by a ticked operation."""

    max_iterations: int = 64
    max_regions: int = 4096
    max_ticks: int = 2_000_000

    def __post_init__(self):
        if min(self.max_iterations, self.max_regions, self.max_ticks) <= 0:
            raise ValueError("all fuel dimensions must be positive")

    @staticmethod
    def from_env() -> "Fuel":
        def pick(name: str, default: int) -> int:
            raw = os.environ.get(name)
            return int(raw) if raw else default

        base = Fuel()
        return Fuel(
            max_iterations=pick("REGIONMC_FUEL_ITERS", base.max_iterations),
            max_regions=pick("REGIONMC_FUEL_REGIONS", base.max_regions),
            max_ticks=pick("REGIONMC_FUEL_TICKS", base.max_ticks),
        )


class Verdict(Enum):
    TERMINATED = "terminated"
    FUEL_EXHAUSTED = "fuel-exhausted"


class UndecidedError(RuntimeError):
    """An equivalence query whose supporting closure ran out of fuel."""


@dataclass
class RunReport:
    procedure: str
    verdict: Verdict
    iterations: int
    regions: RegionSet | None
    per_iteration: list[int] = field(default_factory=list)
    ops: dict[str, int] = field(default_factory=dict)
    sub_reports: dict[str, "RunReport"] = field(default_factory=dict)
    fixpoint_steps: list[int] = field(default_factory=list)
    exhausted: str | None = None
    note: str = ""

    @property
    def terminated(self) -> bool:
        return self.verdict is Verdict.TERMINATED

    def region_count(self) -> int:
        if self.sub_reports:
            return sum(r.region_count() for r in self.sub_reports.values())
        return len(self.regions) if self.regions is not None else 0

    def summary(self) -> str:
        extra = f" ({self.exhausted} exhausted)" if self.exhausted else ""
        return (f"{self.procedure}: {self.verdict.value}{extra}, "
                f"iterations={self.iterations}, regions={self.region_count()}")


class _FuelStop(Exception):
    def __init__(self, dimension: str, partial: RegionSet | None = None):
        super().__init__(dimension)
        self.dimension = dimension
        self.partial = partial


class _Meter:
    def __init__(self, fuel: Fuel):
        self.fuel = fuel
        self.ticks = 0
        self.regions = 0
        self.counts: dict[str, int] = {}

    def tick(self, name: str) -> None:
        self.counts[name] = self.counts.get(name, 0) + 1
        self.ticks += 1
        if self.ticks > self.fuel.max_ticks:
            raise _FuelStop("ticks")

    def region_added(self, _region: Region) -> None:
        self.regions += 1
        if self.regions > self.fuel.max_regions:
            raise _FuelStop("regions")

    def check_iteration(self, i: int) -> None:
        if i >= self.fuel.max_iterations:
            raise _FuelStop("iterations")


class _MeteredAlgebra:
    """Pass-through proxy charging one tick per region operation."""

    def __init__(self, base: RegionAlgebra, meter: _Meter):
        self.base = base
        self.meter = meter
        self.name = base.name

    @property
    def observables(self):
        return self.base.observables

    def observable(self, name: str):
        return self.base.observable(name)

    def complement_of(self, r: Region):
        return self.base.complement_of(r)

    def pre(self, r: Region):
        self.meter.tick("pre")
        return self.base.pre(r)

    def and_(self, a: Region, b: Region):
        self.meter.tick("and")
        return self.base.and_(a, b)

    def diff(self, a: Region, b: Region):
        self.meter.tick("diff")
        return self.base.diff(a, b)

    def empty(self, r: Region) -> bool:
        self.meter.tick("empty")
        return self.base.empty(r)

    def member(self, state, r: Region) -> bool:
        self.meter.tick("member")
        return self.base.member(state, r)

    def top(self):
        return self.base.top()

    def extension_key(self, payload):
        return self.base.extension_key(payload)

    def payload_size(self, payload) -> int:
        return self.base.payload_size(payload)

    def samples(self):
        return self.base.samples()

    def has_successor_in(self, state, region) -> bool:
        return self.base.has_successor_in(state, region)


# --- closures -------------------------------------------------------------------


_CLOSURE_LEVELS = {1, 2, 3, 4}


def closure(algebra: RegionAlgebra, level: int, fuel: Fuel | None = None) -> RunReport:
    """Close the observables under the level's operations until no region
    with a new extension appears.

    level 1: Pre, pairwise And, pairwise Diff   (bisimilarity)
    level 2: Pre, pairwise And                  (similarity)
    level 3: Pre, And with observables          (trace equivalence)
    level 4: Pre                                (distance equivalence)

    The containment test of the underlying procedure compares T_{i+1} with
    T_i region by region; with deduplicated insertion that is exactly
    "this round added nothing".
    """
    if level not in _CLOSURE_LEVELS:
        raise ValueError(f"closure level must be 1..4, got {level}")
    fuel = fuel or Fuel()
    meter = _Meter(fuel)
    alg = _MeteredAlgebra(algebra, meter)
    name = f"closure{level}"
    working = RegionSet(alg, on_add=meter.region_added)
    report = RunReport(name, Verdict.TERMINATED, 0, working)
    try:
        for obs in algebra.observables:
            working.add(obs)
        report.per_iteration.append(len(working))
        new = list(working)
        for i in itertools.count():
            meter.check_iteration(i)
            snapshot = list(working)
            added: list[Region] = []

            def offer(candidate: Region) -> None:
                if working.add(candidate):
                    added.append(candidate)

            for sigma in new:
                offer(alg.pre(sigma))
            if level == 3:
                for sigma in new:
                    for p in algebra.observables:
                        offer(alg.and_(sigma, p))
            elif level in (1, 2):
                for sigma in new:
                    for tau in snapshot:
                        offer(alg.and_(sigma, tau))
                        if level == 1:
                            offer(alg.diff(sigma, tau))
                            offer(alg.diff(tau, sigma))
            if not added:
                report.iterations = i
                return report
            report.per_iteration.append(len(working))
            new = added
    except _FuelStop as stop:
        report.verdict = Verdict.FUEL_EXHAUSTED
        report.exhausted = stop.dimension
        report.iterations = max(0, len(report.per_iteration) - 1)
    except BudgetError as err:
        report.verdict = Verdict.FUEL_EXHAUSTED
        report.exhausted = "payload"
        report.note = str(err)
        report.iterations = max(0, len(report.per_iteration) - 1)
    finally:
        report.ops = dict(meter.counts)
    return report


def closure1(algebra: RegionAlgebra, fuel: Fuel | None = None) -> RunReport:
    return closure(algebra, 1, fuel)


def closure2(algebra: RegionAlgebra, fuel: Fuel | None = None) -> RunReport:
    return closure(algebra, 2, fuel)


def closure3(algebra: RegionAlgebra, fuel: Fuel | None = None) -> RunReport:
    return closure(algebra, 3, fuel)


def closure4(algebra: RegionAlgebra, fuel: Fuel | None = None) -> RunReport:
    return closure(algebra, 4, fuel)


# --- predecessor aggregation -------------------------------------------------------


def reach(algebra: RegionAlgebra, fuel: Fuel | None = None) -> RunReport:
    """Per observable: aggregate Pre images until the union stops growing.

    Unlike the closures, the test is union containment, so the loop can stop
    even while setwise-new regions keep appearing.  One sub-report per
    observable; the whole run terminates iff every sub-run does.
    """
    fuel = fuel or Fuel()
    meter = _Meter(fuel)
    alg = _MeteredAlgebra(algebra, meter)
    report = RunReport("reach", Verdict.TERMINATED, 0, None)
    hard_stop: str | None = None
    for obs in algebra.observables:
        if hard_stop is not None:
            report.sub_reports[obs.label] = RunReport(
                f"reach[{obs.label}]", Verdict.FUEL_EXHAUSTED, 0, None,
                exhausted=hard_stop, note="not attempted")
            continue
        working = RegionSet(alg, on_add=meter.region_added)
        sub = RunReport(f"reach[{obs.label}]", Verdict.TERMINATED, 0, working)
        try:
            working.add(obs)
            sub.per_iteration.append(len(working))
            new = list(working)
            for i in itertools.count():
                meter.check_iteration(i)
                snapshot = list(working)
                fresh = []
                for sigma in new:
                    candidate = alg.pre(sigma)
                    if not working.contains_equal(candidate):
                        fresh.append(candidate)
                if union_contained(alg, fresh, snapshot):
                    sub.iterations = i
                    break
                for candidate in fresh:
                    working.add(candidate)
                sub.per_iteration.append(len(working))
                new = fresh
        except _FuelStop as stop:
            sub.verdict = Verdict.FUEL_EXHAUSTED
            sub.exhausted = stop.dimension
            sub.iterations = max(0, len(sub.per_iteration) - 1)
            if stop.dimension != "iterations":
                hard_stop = stop.dimension
        except BudgetError as err:
            sub.verdict = Verdict.FUEL_EXHAUSTED
            sub.exhausted = "payload"
            sub.note = str(err)
            hard_stop = "payload"
        report.sub_reports[obs.label] = sub
    report.ops = dict(meter.counts)
    subs = report.sub_reports.values()
    report.iterations = max((s.iterations for s in subs), default=0)
    if any(not s.terminated for s in subs):
        report.verdict = Verdict.FUEL_EXHAUSTED
        report.exhausted = next(s.exhausted for s in subs if s.exhausted)
    return report


# --- model checking ----------------------------------------------------------------


def model_check(algebra: RegionAlgebra, phi: logic.Formula,
                env: Mapping[str, Iterable[Region]] | None = None,
                fuel: Fuel | None = None) -> RunReport:
    """Evaluate a formula to a set of regions whose union is its extension.

    Implements the recursive table: constants return their observable, dual
    constants difference every observable against theirs, disjunction is
    set union, conjunction pairwise And, one case per next operator, and
    fixpoints iterate from the empty set (mu) or the observables (nu) with
    union-containment stopping tests, returning the iterate before the test
    passed.  Bounded and unbounded diamond sugar is expanded first.

    On fuel exhaustion the report carries the last completed iterate of the
    innermost mu loop, a sound under-approximation of that subformula.
    """
    fuel = fuel or Fuel()
    meter = _Meter(fuel)
    alg = _MeteredAlgebra(algebra, meter)
    report = RunReport("model_check", Verdict.TERMINATED, 0, None)
    phi = logic.expand_bounded(phi)
    base_env: dict[str, RegionSet] = {}
    for name, regions in (env or {}).items():
        bucket = RegionSet(alg)
        for r in regions:
            bucket.add(r)
        base_env[name] = bucket
    missing = phi.free_vars() - set(base_env)
    if missing:
        raise ValueError(f"environment does not cover variables: {sorted(missing)}")

    def fresh(seed: Iterable[Region] = ()) -> RegionSet:
        out = RegionSet(alg)
        for r in seed:
            out.add(r)
        return out

    def ev(psi: logic.Formula, env: dict[str, RegionSet]) -> RegionSet:
        if isinstance(psi, logic.Const):
            return fresh([algebra.observable(psi.name)])
        if isinstance(psi, logic.DualConst):
            p = algebra.observable(psi.name)
            return fresh(alg.diff(q, p) for q in algebra.observables)
        if isinstance(psi, logic.Var):
            return env[psi.name]
        if isinstance(psi, logic.Or):
            out = fresh(ev(psi.left, env))
            for r in ev(psi.right, env):
                out.add(r)
            return out
        if isinstance(psi, logic.And):
            left = ev(psi.left, env)
            right = ev(psi.right, env)
            return fresh(alg.and_(a, b) for a in left for b in right)
        if isinstance(psi, logic.ExistsNext):
            return fresh(alg.pre(r) for r in ev(psi.sub, env))
        if isinstance(psi, logic.ForallNext):
            inner = pairwise_difference(alg, algebra.observables, ev(psi.sub, env))
            pres = [alg.pre(r) for r in inner]
            return fresh(pairwise_difference(alg, algebra.observables, pres))
        if isinstance(psi, (logic.Mu, logic.Nu)):
            is_mu = isinstance(psi, logic.Mu)
            prev = fresh() if is_mu else fresh(algebra.observables)
            for i in itertools.count():
                try:
                    meter.check_iteration(i)
                    curr = ev(psi.sub, {**env, psi.var: prev})
                    if is_mu:
                        done = union_contained(alg, curr, prev)
                    else:
                        done = union_contained(alg, prev, curr)
                except _FuelStop as stop:
                    if is_mu and stop.partial is None:
                        stop.partial = prev
                    raise
                if done:
                    report.fixpoint_steps.append(i)
                    return prev
                prev = curr
        raise TypeError(f"cannot model-check {type(psi).__name__}")

    try:
        result = ev(phi, base_env)
        report.regions = result
        report.iterations = max(report.fixpoint_steps, default=0)
    except _FuelStop as stop:
        report.verdict = Verdict.FUEL_EXHAUSTED
        report.exhausted = stop.dimension
        report.regions = stop.partial
        if stop.partial is not None:
            report.note = ("last completed iterate of the innermost least "
                           "fixpoint (sound under-approximation of it)")
        report.iterations = max(report.fixpoint_steps, default=0)
    except BudgetError as err:
        report.verdict = Verdict.FUEL_EXHAUSTED
        report.exhausted = "payload"
        report.note = str(err)
    finally:
        report.ops = dict(meter.counts)
    return report


# --- induced equivalences ------------------------------------------------------------


def _reach_profile(algebra: RegionAlgebra, report: RunReport, state) -> tuple:
    """Membership in each observable's aggregated union at every round."""
    profile = []
    for sub in report.sub_reports.values():
        regions = list(sub.regions or [])
        hit = False
        for count in sub.per_iteration:
            if not hit:
                hit = any(algebra.member(state, r) for r in regions[:count])
            profile.append(hit)
    return tuple(profile)


def decide_equivalent(algebra: RegionAlgebra, u, v, which: int,
                      fuel: Fuel | None = None) -> bool:
    """Decide state equivalence 1..5 from a terminated closure or reach run.

    Levels 1..4 compare membership signatures over the final closure set.
    Level 5 compares, per observable, membership in the aggregated union at
    every round: two states can differ on some exact-distance region while
    still reaching the same targets within every bound, so the final-set
    signature would be too fine.
    """
    if which in _CLOSURE_LEVELS:
        run = closure(algebra, which, fuel)
        if not run.terminated:
            raise UndecidedError(f"closure{which} ran out of fuel ({run.exhausted})")
        regions = list(run.regions)
        return (membership_signature(algebra, u, regions)
                == membership_signature(algebra, v, regions))
    if which == 5:
        run = reach(algebra, fuel)
        if not run.terminated:
            raise UndecidedError(f"reach ran out of fuel ({run.exhausted})")
        return _reach_profile(algebra, run, u) == _reach_profile(algebra, run, v)
    raise ValueError(f"equivalence level must be 1..5, got {which}")


def _state_key(state):
    """Canonical sort/grouping key; states may be ints or name->value maps."""
    if isinstance(state, dict):
        return tuple(sorted(state.items()))
    return state


def induced_partition(algebra: RegionAlgebra, run: RunReport, states) -> tuple:
    """Group explicit states into blocks by the signatures a terminated run
    induces.  Blocks are tuples in a deterministic order."""
    if not run.terminated:
        raise UndecidedError(f"{run.procedure} did not terminate")
    groups: dict = {}
    for state in states:
        if run.procedure == "reach":
            key = _reach_profile(algebra, run, state)
        else:
            key = membership_signature(algebra, state, list(run.regions))
        groups.setdefault(key, []).append(state)
    blocks = [tuple(sorted(g, key=_state_key)) for g in groups.values()]
    return tuple(sorted(blocks, key=lambda b: _state_key(b[0])))


# --- class probing ---------------------------------------------------------------------


@dataclass
class ProbeReport:
    level: int | None
    procedure: str | None
    runs: dict[str, RunReport]

    def summary(self) -> str:
        if self.level is None:
            return "class undetermined: every procedure ran out of fuel"
        skipped = [name for name, run in self.runs.items() if not run.terminated]
        note = f" (earlier, finer procedures exhausted: {', '.join(skipped)})" if skipped else ""
        return f"class {self.level}: {self.procedure} terminated{note}"


def probe_class(algebra: RegionAlgebra, fuel: Fuel | None = None) -> ProbeReport:
    """Lowest level 1..5 whose procedure terminates within fuel.

    Termination of an earlier procedure implies termination of all later
    ones, so probing stops at the first success; exhausting fuel on a finer
    level leaves that level unknown rather than excluded.
    """
    probes = [
        (1, "closure1", lambda: closure(algebra, 1, fuel)),
        (2, "closure2", lambda: closure(algebra, 2, fuel)),
        (3, "closure3", lambda: closure(algebra, 3, fuel)),
        (4, "closure4", lambda: closure(algebra, 4, fuel)),
        (5, "reach", lambda: reach(algebra, fuel)),
    ]
    runs: dict[str, RunReport] = {}
    for level, name, go in probes:
        run = go()
        runs[name] = run
        if run.terminated:
            return ProbeReport(level, name, runs)
    return ProbeReport(None, None, runs)
