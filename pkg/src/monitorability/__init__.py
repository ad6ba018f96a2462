"""Monitorability analysis for recHML: parsing, classification, monitor
synthesis and execution, and brute-force oracles."""

from .automaton import (
    DFA,
    NFA,
    MonitorClass,
    classify_monitor,
    determinize,
    is_deterministic,
    is_explicit,
    monitor_dfa,
    rejection_equivalent,
    to_automaton,
    to_dot,
    to_regular_monitor,
    verdict_difference,
    verdict_equivalent,
)
from .errors import (
    ConflictingVerdicts,
    MonitorabilityError,
    NotAFixpoint,
    NotInformativeFragment,
    NotInFragment,
    NotRegular,
    OpenFormula,
    ParseError,
    StateExplosion,
    UnboundVariable,
    UnguardedFormula,
    UnknownAction,
)
from .formula import (
    FF,
    TT,
    Alphabet,
    And,
    Box,
    Diamond,
    Falsehood,
    Formula,
    GreatestFix,
    LeastFix,
    Or,
    Truth,
    VarRef,
    encode_ltl,
    parse_formula,
    parse_ltl,
    print_formula,
    print_ltl,
    unfold,
    validate,
)
from .fragments import (
    annotate_refutability,
    classify,
    extend_to_violation,
    fragment_membership,
    ihml_membership,
    in_chml,
    in_ehml,
    in_shml,
    make_explicit,
    pihml_membership,
    witness_informative_trace,
)
from .monitor import (
    NO,
    YES,
    Monitor,
    RunOutcome,
    Simulator,
    Verdict,
    check_soundness_upto,
    decide_lasso,
    parse_monitor,
    print_monitor,
    run_finite,
    run_trace,
    step,
)
from .pz import (
    TruthDomain,
    epz_monitorable,
    ffm_evaluate,
    ffm_monitorable,
    s_monitorable,
    upz_monitorable,
)
from .report import ClassificationReport, build_report
from .semantics import DeterminationResult, Polarity, Status, d_sets_upto, determines, evaluate
from .synthesis import bounded_maximal_monitor, monitor_to_formula, synthesize
from .traces import Trace, parse_trace, print_trace

__version__ = "0.1.0"
