"""SAT-guided abductive reasoning: solve under-determined logic problems by
iteratively abducing commonsense implications from a language-model backend,
with an annealed self-consistency vote as the fallback."""

__version__ = "0.1.0"

from .backends import (
    Backend,
    CotSample,
    GenerationBudget,
    HornRule,
    OracleBackend,
    OracleKB,
    SolveVote,
    WireBackend,
    llm_solve,
)
from .cnf import ClauseSet, to_clause_set
from .corpus import Problem, load_corpus, load_problem_file, save_problem
from .engine import (
    CommonsenseClause,
    Engine,
    EngineConfig,
    LiteralScore,
    SolveResult,
    find_new_commonsense,
    pair_order,
    score_literal,
    solve,
)
from .errors import ArgosError
from .harness import (
    RunMetrics,
    corruption_check,
    flip_analysis,
    run_suite,
)
from .kinship import generate_kinship
from .logic import (
    Atom,
    Entity,
    Formula,
    Literal,
    Predicate,
    ground,
    related,
)
from .parser import parse_formula, parse_literal
from .sat import (
    Backbone,
    SatConclusion,
    SatOutcome,
    SatSession,
    check_sat,
    compute_backbone,
    consistent,
    sat_solve,
)

__all__ = [
    "ArgosError",
    "Atom",
    "Backbone",
    "Backend",
    "ClauseSet",
    "CommonsenseClause",
    "CotSample",
    "Engine",
    "EngineConfig",
    "Entity",
    "Formula",
    "GenerationBudget",
    "HornRule",
    "Literal",
    "LiteralScore",
    "OracleBackend",
    "OracleKB",
    "Predicate",
    "Problem",
    "RunMetrics",
    "SatConclusion",
    "SatOutcome",
    "SatSession",
    "SolveResult",
    "SolveVote",
    "WireBackend",
    "check_sat",
    "compute_backbone",
    "consistent",
    "corruption_check",
    "find_new_commonsense",
    "flip_analysis",
    "generate_kinship",
    "ground",
    "llm_solve",
    "load_corpus",
    "load_problem_file",
    "pair_order",
    "parse_formula",
    "parse_literal",
    "related",
    "run_suite",
    "sat_solve",
    "save_problem",
    "score_literal",
    "solve",
    "to_clause_set",
]
