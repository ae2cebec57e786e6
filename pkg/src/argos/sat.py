"""Entailment decisions and backbone computation on top of the CDCL kernel.

``sat_solve`` is the solver feedback channel of the engine: it decides the
query and its negation against the premises plus accepted commonsense, and
returns the backbone (literals true in every model) over the problem's own
atoms whenever the set is satisfiable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import _satcore
from .cnf import ClauseSet, CnfBuilder
from .errors import SolverBudgetExceeded
from .logic import Atom, Formula, Literal

#: True when the compiled extension kernel is in use.
KERNEL_COMPILED = bool(getattr(_satcore, "COMPILED", False))

DEFAULT_CONFLICT_BUDGET = 10**6

ENTAILS_QUERY = "entails-query"
ENTAILS_NOT_QUERY = "entails-not-query"
UNKNOWN = "unknown"
INCONSISTENT = "inconsistent-premises"


@dataclass
class SatOutcome:
    """Result of one satisfiability check over a clause set."""

    status: str  # "satisfiable" | "unsatisfiable"
    model: Optional[dict[Atom, bool]] = None


@dataclass(frozen=True)
class Backbone:
    """Literals entailed by a satisfiable clause set, non-auxiliary only."""

    literals: frozenset[Literal]
    origin: str

    def __contains__(self, l: Literal) -> bool:
        return l in self.literals

    def __len__(self) -> int:
        return len(self.literals)


@dataclass
class SatConclusion:
    verdict: str
    budget_exceeded: bool = False


def _load_solver(cs: ClauseSet) -> _satcore.Solver:
    s = _satcore.Solver(cs.num_vars)
    for cl in cs.clauses:
        s.add_clause(cl)
    return s


def _snapshot_id(cs: ClauseSet) -> str:
    h = hashlib.sha256()
    for cl in cs.clauses:
        h.update(" ".join(str(l) for l in cl).encode())
        h.update(b";")
    return h.hexdigest()[:16]


def check_sat(
    cs: ClauseSet,
    assumptions: Sequence[Literal] = (),
    conflict_budget: int = DEFAULT_CONFLICT_BUDGET,
) -> SatOutcome:
    """Decide satisfiability under assumptions; sound, complete, deterministic."""
    solver = _load_solver(cs)
    ints = [cs.lit_to_int(l) for l in assumptions]
    return _outcome(solver, cs, ints, conflict_budget)


def _outcome(solver, cs: ClauseSet, int_assumptions, budget) -> SatOutcome:
    res = solver.solve(int_assumptions, budget)
    if res == _satcore.UNKNOWN:
        raise SolverBudgetExceeded(
            f"conflict budget of {budget} exceeded"
        )
    if res == _satcore.UNSAT:
        return SatOutcome("unsatisfiable")
    model = {
        atom: solver.model_value(v)
        for atom, v in cs.var_map.items()
    }
    return SatOutcome("satisfiable", model)


def compute_backbone(
    cs: ClauseSet,
    conflict_budget: int = DEFAULT_CONFLICT_BUDGET,
    restrict_vars: Optional[set[int]] = None,
    _solver: Optional[_satcore.Solver] = None,
) -> Backbone:
    """Exactly the literals L with ``cs AND not L`` unsatisfiable.

    Starts from one model; a literal stays a candidate only while it has been
    true in every model seen, and each survivor is settled by one
    assumption-based solve whose countermodel prunes the rest. Restricted to
    non-auxiliary variables (optionally further via ``restrict_vars``).
    """
    solver = _solver if _solver is not None else _load_solver(cs)
    res = solver.solve((), conflict_budget)
    if res == _satcore.UNKNOWN:
        raise SolverBudgetExceeded(f"conflict budget of {conflict_budget} exceeded")
    if res == _satcore.UNSAT:
        raise ValueError("backbone of an unsatisfiable clause set is undefined")

    domain = sorted(
        v for v in cs.var_map.values()
        if restrict_vars is None or v in restrict_vars
    )
    candidate = {v: solver.model_value(v) for v in domain}
    backbone_ints: list[int] = []
    for v in domain:
        if v not in candidate:
            continue
        want = candidate[v]
        probe = -v if want else v
        res = solver.solve((probe,), conflict_budget)
        if res == _satcore.UNKNOWN:
            raise SolverBudgetExceeded(f"conflict budget of {conflict_budget} exceeded")
        if res == _satcore.UNSAT:
            backbone_ints.append(v if want else -v)
        else:
            for u in list(candidate):
                if solver.model_value(u) != candidate[u]:
                    del candidate[u]
    lits = frozenset(
        Literal(cs.atom_of(abs(i)), i > 0) for i in backbone_ints
    )
    return Backbone(lits, _snapshot_id(cs))


class SatSession:
    """Incremental entailment and backbone checks over a growing formula set.

    Formulas only accumulate, so learned clauses stay sound across calls and
    the premise encoding is paid once per problem rather than per iteration.
    Query atoms that never occur in the asserted formulas are kept out of
    the backbone domain.
    """

    def __init__(self, conflict_budget: int = DEFAULT_CONFLICT_BUDGET):
        self.builder = CnfBuilder()
        self.solver = _satcore.Solver()
        self.conflict_budget = conflict_budget
        self._loaded = 0
        self._query_lit: Optional[int] = None
        self._query_only: set[int] = set()

    def add_formulas(self, formulas: Iterable[Formula]) -> None:
        from .logic import iter_atoms

        for f in formulas:
            self.builder.assert_formula(f)
            if self._query_only:
                for atom in iter_atoms(f):
                    self._query_only.discard(self.builder.cs.var_map.get(atom, 0))

    def add_commonsense(self, clauses: Iterable) -> None:
        self.add_formulas(
            c.to_formula() if hasattr(c, "to_formula") else c for c in clauses
        )

    def set_query(self, query: Optional[Formula]) -> None:
        if query is None:
            self._query_lit = None
            return
        before = set(self.builder.cs.var_map.values())
        self._query_lit = self.builder.encode(query)
        self._query_only = set(self.builder.cs.var_map.values()) - before

    def _sync(self) -> None:
        clauses = self.builder.cs.clauses
        self.solver.ensure_vars(self.builder.cs.num_vars)
        while self._loaded < len(clauses):
            self.solver.add_clause(clauses[self._loaded])
            self._loaded += 1

    def _problem_vars(self) -> set[int]:
        return set(self.builder.cs.var_map.values()) - self._query_only

    def decide(self, with_backbone: bool = True) -> tuple[SatConclusion, Optional[Backbone]]:
        """Check the verdict and (when satisfiable) compute the backbone."""
        self._sync()
        budget = self.conflict_budget
        base = self.solver.solve((), budget)
        if base == _satcore.UNKNOWN:
            return SatConclusion(UNKNOWN, budget_exceeded=True), None
        if base == _satcore.UNSAT:
            return SatConclusion(INCONSISTENT), None
        verdict = UNKNOWN
        qlit = self._query_lit
        if qlit is not None:
            not_q = self.solver.solve((-qlit,), budget)
            if not_q == _satcore.UNKNOWN:
                return SatConclusion(UNKNOWN, budget_exceeded=True), None
            if not_q == _satcore.UNSAT:
                verdict = ENTAILS_QUERY
            else:
                with_q = self.solver.solve((qlit,), budget)
                if with_q == _satcore.UNKNOWN:
                    return SatConclusion(UNKNOWN, budget_exceeded=True), None
                if with_q == _satcore.UNSAT:
                    verdict = ENTAILS_NOT_QUERY
        if not with_backbone:
            return SatConclusion(verdict), None
        try:
            backbone = compute_backbone(
                self.builder.cs,
                budget,
                restrict_vars=self._problem_vars(),
                _solver=self.solver,
            )
        except SolverBudgetExceeded:
            return SatConclusion(UNKNOWN, budget_exceeded=True), None
        return SatConclusion(verdict), backbone


def consistent(premises: Iterable[Formula], commonsense: Iterable = ()) -> bool:
    """True iff the premises plus commonsense are jointly satisfiable."""
    session = SatSession()
    session.add_formulas(premises)
    session.add_commonsense(commonsense)
    conclusion, _ = session.decide(with_backbone=False)
    return conclusion.verdict != INCONSISTENT


def sat_solve(
    premises: Sequence[Formula],
    commonsense: Sequence = (),
    query: Optional[Formula] = None,
    conflict_budget: int = DEFAULT_CONFLICT_BUDGET,
    with_backbone: bool = True,
) -> tuple[SatConclusion, Optional[Backbone]]:
    """Decide the query against premises plus commonsense, with backbone.

    Verdicts: entails-query iff adding the negated query is unsatisfiable,
    entails-not-query iff adding the query is, inconsistent-premises iff the
    set itself is unsatisfiable, else unknown. The backbone is computed over
    the atoms of the premises and commonsense (query-only atoms excluded)
    whenever the set is satisfiable. A blown conflict budget degrades to an
    unknown verdict with no backbone rather than raising.
    """
    session = SatSession(conflict_budget)
    session.add_formulas(premises)
    session.add_commonsense(commonsense)
    session.set_query(query)
    return session.decide(with_backbone=with_backbone)
