"""Command-line front end: load a system, run one procedure, emit a report.

Systems load by file extension: ``.fin`` finite transition system, ``.gcs``
guarded commands, ``.cm`` two-counter machine, ``.hyb`` hybrid automaton.

Output formats: ``human`` (summary plus per-iteration region counts, which
is usually enough to see why something failed to terminate) and
``json-lines`` (one JSON record per line, schema ``regionmc.report/1``;
records are emitted with sorted keys and compact separators so that parsing
a line and re-serialising it the same way is byte-identical).

Exit status is a function of the verdict alone: 0 when the procedure
terminated or the question was decided, 2 when fuel ran out, 1 when the
input could not be parsed or loaded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import counter, engine, finite, guarded, hybrid, logic, omega
from .engine import Fuel, RunReport, UndecidedError, Verdict
from .regions import AlgebraError, extract_quotient

__all__ = ["main", "load_algebra", "parse_state", "emit_quotient_dot"]

SCHEMA = "regionmc.report/1"

# extract_quotient is quadratic in the atom count; above this many closure
# regions `classify` reports the class but skips the quotient.
QUOTIENT_REGION_CAP = 512

_LOADERS = {
    ".fin": lambda text, name: finite.FiniteRegionAlgebra(finite.parse_finite(text)),
    ".gcs": lambda text, name: guarded.parse_guarded(text, name=name),
    ".cm": lambda text, name: counter.sm_algebra(counter.parse_counter(text, name=name)),
    ".hyb": lambda text, name: hybrid.parse_hybrid(text, name=name),
}


def load_algebra(path: str):
    p = Path(path)
    loader = _LOADERS.get(p.suffix)
    if loader is None:
        known = ", ".join(sorted(_LOADERS))
        raise ValueError(f"unknown system extension {p.suffix!r} (known: {known})")
    return loader(p.read_text(), p.stem)


def parse_state(algebra, text: str):
    """One state: an index for finite systems, ``k=v`` pairs joined with
    ``:`` for guarded systems, ``LOC:k=v:...`` for hybrid ones."""
    text = text.strip()
    if isinstance(algebra, finite.FiniteRegionAlgebra):
        return int(text)
    if isinstance(algebra, hybrid.HybridRegionAlgebra):
        loc, _, rest = text.partition(":")
        values = dict(_assignments(rest))
        point = []
        for name in algebra.automaton.space.names:
            if name not in values:
                raise ValueError(f"state {text!r}: missing value for {name}")
            point.append(Fraction(values[name]))
        return (loc, tuple(point))
    if isinstance(algebra, guarded.GuardedRegionAlgebra):
        system = algebra.system
        state = {}
        for key, value in _assignments(text):
            state[key] = system.symbols.get(value, None)
            if state[key] is None:
                state[key] = int(value)
        missing = [n for n in system.space.names if n not in state]
        if missing:
            raise ValueError(f"state {text!r}: missing values for {missing}")
        return state
    raise ValueError(f"no state syntax for algebra {algebra.name!r}")


def _assignments(text: str):
    for part in text.split(":"):
        part = part.strip()
        if not part:
            continue
        key, eq, value = part.partition("=")
        if not eq:
            raise ValueError(f"expected k=v, got {part!r}")
        yield key.strip(), value.strip()


# -- output -------------------------------------------------------------------


class _Emitter:
    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout

    def record(self, rec: dict) -> None:
        if self.fmt == "json-lines":
            print(json.dumps(rec, sort_keys=True, separators=(",", ":")),
                  file=self.out)

    def text(self, line: str) -> None:
        if self.fmt == "human":
            print(line, file=self.out)


def _report_record(report: RunReport, key: str = "") -> dict:
    return {
        "record": "report",
        "key": key,
        "procedure": report.procedure,
        "verdict": report.verdict.value,
        "iterations": report.iterations,
        "per_iteration": list(report.per_iteration),
        "region_count": report.region_count(),
        "regions": sorted(r.label for r in (report.regions or ())),
        "fixpoint_steps": list(report.fixpoint_steps),
        "exhausted": report.exhausted,
        "ops": dict(sorted(report.ops.items())),
        "note": report.note,
    }


def _emit_report(emitter: _Emitter, report: RunReport, key: str = "") -> None:
    emitter.record(_report_record(report, key))
    prefix = f"[{key}] " if key else ""
    emitter.text(prefix + report.summary())
    if report.per_iteration:
        emitter.text(f"{prefix}per-iteration regions: {report.per_iteration}")
    if report.fixpoint_steps:
        emitter.text(f"{prefix}fixpoint steps: {report.fixpoint_steps}")
    if report.note:
        emitter.text(f"{prefix}note: {report.note}")
    for sub_key, sub in report.sub_reports.items():
        _emit_report(emitter, sub, f"{key}/{sub_key}" if key else sub_key)


def _exit_code(report: RunReport) -> int:
    return 0 if report.verdict is Verdict.TERMINATED else 2


def emit_quotient_dot(quotient_system, atoms) -> str:
    """Deterministic DOT rendering of an extracted quotient graph."""
    lines = ["digraph quotient {"]
    for i, atom in enumerate(atoms):
        label = atom.label if len(atom.label) <= 60 else atom.label[:57] + "..."
        label = label.replace('"', "'")
        lines.append(f'  n{i} [label="{label}"];')
    for src, dst in sorted(quotient_system.edges):
        lines.append(f"  n{src} -> n{dst};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- command handlers -----------------------------------------------------------


def _cmd_closure(args, algebra, fuel, emitter) -> int:
    report = engine.closure(algebra, args.level, fuel)
    _emit_report(emitter, report)
    return _exit_code(report)


def _cmd_reach(args, algebra, fuel, emitter) -> int:
    report = engine.reach(algebra, fuel)
    _emit_report(emitter, report)
    return _exit_code(report)


def _cmd_check(args, algebra, fuel, emitter) -> int:
    phi = logic.parse_formula(args.formula)
    report = engine.model_check(algebra, phi, fuel=fuel)
    _emit_report(emitter, report)
    return _exit_code(report)


def _cmd_ltl(args, algebra, fuel, emitter) -> int:
    phi = omega.parse_ltl(args.ltl)
    report = omega.autom_ltl(algebra, phi, fuel=fuel)
    _emit_report(emitter, report)
    return _exit_code(report)


def _cmd_classify(args, algebra, fuel, emitter) -> int:
    probe = engine.probe_class(algebra, fuel)
    for name, run in probe.runs.items():
        _emit_report(emitter, run, key=name)
    quotient_states = None
    note = ""
    winner = probe.runs.get(probe.procedure) if probe.procedure else None
    if winner is None or winner.regions is None:
        note = "no terminated closure to extract a quotient from"
    elif len(winner.regions) > QUOTIENT_REGION_CAP:
        note = (f"quotient skipped: {len(winner.regions)} regions exceed "
                f"the {QUOTIENT_REGION_CAP}-region extraction cap")
    else:
        _system, atoms = extract_quotient(algebra, list(winner.regions))
        quotient_states = len(atoms)
    emitter.record({
        "record": "classify",
        "level": probe.level,
        "procedure": probe.procedure,
        "quotient_states": quotient_states,
        "note": note,
    })
    emitter.text(probe.summary())
    if quotient_states is not None:
        emitter.text(f"quotient states: {quotient_states}")
    elif note:
        emitter.text(note)
    return 0 if probe.level is not None else 2


def _cmd_equiv(args, algebra, fuel, emitter) -> int:
    parts = args.states.split(",")
    if len(parts) != 2:
        raise ValueError("--states needs exactly two states, comma separated")
    u, v = (parse_state(algebra, p) for p in parts)
    try:
        same = engine.decide_equivalent(algebra, u, v, args.level, fuel)
    except UndecidedError as exc:
        emitter.record({"record": "equiv", "level": args.level,
                        "equivalent": None, "note": str(exc)})
        emitter.text(f"undecided: {exc}")
        return 2
    emitter.record({"record": "equiv", "level": args.level, "equivalent": same,
                    "note": ""})
    emitter.text(f"equivalent at level {args.level}: {'yes' if same else 'no'}")
    return 0


def _cmd_quotient(args, algebra, fuel, emitter) -> int:
    report = engine.closure(algebra, args.level, fuel)
    if not report.terminated:
        _emit_report(emitter, report)
        return 2
    system, atoms = extract_quotient(algebra, list(report.regions))
    dot = emit_quotient_dot(system, atoms)
    emitter.record({
        "record": "quotient",
        "level": args.level,
        "nodes": [a.label for a in atoms],
        "edges": sorted(list(e) for e in system.edges),
        "dot": dot,
    })
    if emitter.fmt == "human":
        print(dot, end="")
    return 0


# -- argument wiring --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regionmc",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("system", help="system file (.fin, .gcs, .cm, .hyb)")
    shared.add_argument("--fuel-iters", type=int, default=None,
                        help="iteration bound (default: REGIONMC_FUEL_ITERS or 64)")
    shared.add_argument("--fuel-regions", type=int, default=None,
                        help="region bound (default: REGIONMC_FUEL_REGIONS or 4096)")
    shared.add_argument("--fuel-ticks", type=int, default=None,
                        help="operation bound (default: REGIONMC_FUEL_TICKS or 2000000)")
    shared.add_argument("--format", choices=("human", "json-lines"),
                        default="human", help="output format")
    sub = parser.add_subparsers(dest="command", required=True)

    for level in (1, 2, 3, 4):
        p = sub.add_parser(f"closure{level}", parents=[shared],
                           help=f"run the level-{level} closure")
        p.set_defaults(handler=_cmd_closure, level=level)
    sub.add_parser("reach", parents=[shared],
                   help="per-observable reachability chains").set_defaults(
        handler=_cmd_reach)
    p = sub.add_parser("check", parents=[shared], help="model check a formula")
    p.add_argument("--formula", required=True, help="fixpoint formula text")
    p.set_defaults(handler=_cmd_check)
    p = sub.add_parser("ltl", parents=[shared],
                       help="check an LTL formula on every state")
    p.add_argument("--ltl", required=True, help="LTL formula text")
    p.set_defaults(handler=_cmd_ltl)
    sub.add_parser("classify", parents=[shared],
                   help="lowest terminating procedure level").set_defaults(
        handler=_cmd_classify)
    p = sub.add_parser("equiv", parents=[shared],
                       help="decide equivalence of two states")
    p.add_argument("--states", required=True,
                   help="two states, comma separated (see parse_state)")
    p.add_argument("--level", type=int, choices=(1, 2, 3, 4, 5), default=1)
    p.set_defaults(handler=_cmd_equiv)
    p = sub.add_parser("quotient", parents=[shared],
                       help="DOT graph of a terminated closure's quotient")
    p.add_argument("--level", type=int, choices=(1, 2, 3, 4), default=1)
    p.set_defaults(handler=_cmd_quotient)
    return parser


def _fuel_from_args(args) -> Fuel:
    base = Fuel.from_env()
    return Fuel(
        max_iterations=args.fuel_iters or base.max_iterations,
        max_regions=args.fuel_regions or base.max_regions,
        max_ticks=args.fuel_ticks or base.max_ticks,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    emitter = _Emitter(args.format)
    try:
        algebra = load_algebra(args.system)
        fuel = _fuel_from_args(args)
        emitter.record({"record": "meta", "schema": SCHEMA,
                        "command": args.command, "system": args.system})
        return args.handler(args, algebra, fuel, emitter)
    except (ValueError, OSError, AlgebraError, logic.ParseError,
            omega.LtlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
