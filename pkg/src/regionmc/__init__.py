"""Symbolic model checking over region algebras.

A region algebra wraps a transition system behind five operations
(observables, predecessor, intersection, difference, emptiness) plus state
membership.  On top of that interface the engine runs the closure
semi-algorithms whose termination characterises how much of the branching
structure is decidable, a model checker for fixpoint formulas, and an
automaton pipeline for linear-time properties.  Concrete algebras cover
explicit finite systems, guarded integer commands, two-counter machines,
and rectangular hybrid automata.
"""

from .regions import (
    AlgebraError,
    Region,
    RegionAlgebra,
    RegionSet,
    check_algebra_laws,
    extract_quotient,
    membership_signature,
    semantic_equal,
)
from .engine import (
    Fuel,
    ProbeReport,
    RunReport,
    UndecidedError,
    Verdict,
    closure,
    closure1,
    closure2,
    closure3,
    closure4,
    decide_equivalent,
    induced_partition,
    model_check,
    probe_class,
    reach,
)
from .logic import (
    Fragment,
    FragmentTag,
    ParseError,
    classify_fragment,
    dualize,
    fits,
    parse_formula,
)
from .finite import FiniteRegionAlgebra, FiniteSystem, parse_finite
from .guarded import GuardedRegionAlgebra, bakery_algebra, parse_guarded, transitive_algebra
from .counter import TwoCounterMachine, parse_counter, sm_algebra
from .hybrid import HybridAutomaton, HybridRegionAlgebra, parse_hybrid
from .omega import autom_ltl, buchi_to_mu, ltl_holds, ltl_to_buchi, parse_ltl

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "Region",
    "RegionAlgebra",
    "RegionSet",
    "check_algebra_laws",
    "extract_quotient",
    "membership_signature",
    "semantic_equal",
    "Fuel",
    "ProbeReport",
    "RunReport",
    "UndecidedError",
    "Verdict",
    "closure",
    "closure1",
    "closure2",
    "closure3",
    "closure4",
    "decide_equivalent",
    "induced_partition",
    "model_check",
    "probe_class",
    "reach",
    "Fragment",
    "FragmentTag",
    "ParseError",
    "classify_fragment",
    "dualize",
    "fits",
    "parse_formula",
    "FiniteRegionAlgebra",
    "FiniteSystem",
    "parse_finite",
    "GuardedRegionAlgebra",
    "bakery_algebra",
    "parse_guarded",
    "transitive_algebra",
    "TwoCounterMachine",
    "parse_counter",
    "sm_algebra",
    "HybridAutomaton",
    "HybridRegionAlgebra",
    "parse_hybrid",
    "autom_ltl",
    "buchi_to_mu",
    "ltl_holds",
    "ltl_to_buchi",
    "parse_ltl",
    "__version__",
]
