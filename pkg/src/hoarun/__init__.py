"""Execute omega-automata in the HOA format and monitor their acceptance
conditions at runtime via trap-set analysis."""

from .automata import (
    AccAnd,
    AccOr,
    AcceptanceCond,
    Automaton,
    Bot,
    Fin,
    Inf,
    StateGraph,
    Top,
    Transition,
    complete_by_stuttering,
    is_complete,
    is_deterministic,
    run_accepts,
    state_graph,
    successors,
)
from .hoa import HoaDocument, HoaParseError, ParseDiagnostic, parse, serialize
from .labels import (
    FALSE,
    TRUE,
    And,
    Ap,
    CapacityError,
    LabelExpr,
    Not,
    Or,
    Valuation,
    are_disjoint,
    covers_all,
    evaluate,
)
from .monitoring import (
    Monitor,
    MonitorAttachError,
    Verdict,
    attach_monitor,
    combine_and,
    combine_or,
    oracle_verdict,
    verdict_fin,
    verdict_inf,
)
from .traps import TrapIndex, TrapSet, bsccs, build_index, is_transient, min_trap_set_of

__all__ = [
    "AccAnd",
    "AccOr",
    "AcceptanceCond",
    "And",
    "Ap",
    "Automaton",
    "Bot",
    "CapacityError",
    "FALSE",
    "Fin",
    "HoaDocument",
    "HoaParseError",
    "Inf",
    "LabelExpr",
    "Monitor",
    "MonitorAttachError",
    "Not",
    "Or",
    "ParseDiagnostic",
    "StateGraph",
    "Top",
    "Transition",
    "TrapIndex",
    "TrapSet",
    "TRUE",
    "Valuation",
    "Verdict",
    "are_disjoint",
    "attach_monitor",
    "bsccs",
    "build_index",
    "combine_and",
    "combine_or",
    "complete_by_stuttering",
    "covers_all",
    "evaluate",
    "is_complete",
    "is_deterministic",
    "is_transient",
    "min_trap_set_of",
    "oracle_verdict",
    "parse",
    "run_accepts",
    "serialize",
    "state_graph",
    "successors",
    "verdict_fin",
    "verdict_inf",
]
