"""The iterative solve/abduce loop and the backbone-guided clause search.

Each pass: try the SAT solver; if it decides the query, done. Otherwise take
a k-sample vote from the backend and stop if the vote fraction clears the
annealed threshold gamma. Otherwise search the backbone for one new
commonsense implication, add it (gamma shrinks by alpha), and repeat. The
search walks ordered antecedent pairs from the most entity-connected
backbone literals down, asks the backend for consequents, and accepts the
first candidate whose commonsense and relevance scores both clear tau.

gamma and vote fractions are handled as exact rationals so threshold
comparisons never drift; traces are line-oriented JSON with deterministic
content (see README for the schema).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from .backends import (
    CONTRADICTION_STYLE,
    Backend,
    SolveVote,
    llm_solve,
)
from .errors import BackendError, BackendExhausted
from .logic import (
    Atom,
    AtomNode,
    Entity,
    Formula,
    Implies,
    Literal,
    Predicate,
    conj,
    formula_entities,
    ground,
    lit_to_formula,
    related,
)
from .sat import (
    DEFAULT_CONFLICT_BUDGET,
    ENTAILS_NOT_QUERY,
    ENTAILS_QUERY,
    INCONSISTENT,
    Backbone,
    SatSession,
)

GENERATION_ENTITY = "entity"
GENERATION_ENTITY_PAIR = "entity_pair"

DECIDED_BY_SAT = "sat"
DECIDED_BY_SC = "self-consistency"
DECIDED_BY_FALLBACK = "fallback"


@dataclass
class EngineConfig:
    """Hyperparameters of the loop; defaults match the reference settings."""

    k: int = 5
    gamma0: float = 1.0
    alpha: float = 0.1
    tau: float = 0.3
    max_cot: Optional[int] = None
    max_candidates_per_pair: int = 3
    seed: int = 0
    use_sc_solver: bool = True
    generation_style: str = GENERATION_ENTITY
    score_style: str = CONTRADICTION_STYLE
    grounding_depth_limit: int = 8
    conflict_budget: int = DEFAULT_CONFLICT_BUDGET

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for name in ("gamma0", "alpha", "tau"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")
        if self.max_candidates_per_pair < 1:
            raise ValueError("max_candidates_per_pair must be positive")
        if self.generation_style not in (GENERATION_ENTITY, GENERATION_ENTITY_PAIR):
            raise ValueError(f"unknown generation style {self.generation_style!r}")


@dataclass(frozen=True)
class CommonsenseClause:
    """An accepted implication: 0-2 backbone literals imply one new literal."""

    antecedent: tuple[Literal, ...]
    consequent: Literal
    commonsense_score: float
    relevance_score: float
    iteration: int

    def to_formula(self) -> Formula:
        if not self.antecedent:
            return lit_to_formula(self.consequent)
        return Implies(
            conj([lit_to_formula(l) for l in self.antecedent]),
            lit_to_formula(self.consequent),
        )

    def key(self) -> tuple:
        return (frozenset(self.antecedent), self.consequent)

    def __str__(self) -> str:
        if not self.antecedent:
            return str(self.consequent)
        return " & ".join(str(l) for l in self.antecedent) + f" -> {self.consequent}"


@dataclass
class SolveResult:
    verdict: bool
    decided_by: str
    confidence: float
    commonsense: list[CommonsenseClause]
    iterations: int
    cot_calls: int
    trace: list[dict]
    inconsistent: bool = False
    degenerate: bool = False

    def trace_jsonl(self) -> str:
        return "".join(
            json.dumps(e, sort_keys=True, separators=(", ", ": ")) + "\n"
            for e in self.trace
        )


@dataclass(frozen=True)
class LiteralScore:
    literal: Literal
    score: int


def score_literal(l: Literal, backbone: Sequence[Literal]) -> LiteralScore:
    """Count of backbone literals sharing an entity with l (self included).

    0-ary literals have no entities, so they score 0.
    """
    if not l.entities():
        return LiteralScore(l, 0)
    return LiteralScore(l, sum(1 for other in backbone if related(l, other)))


def pair_order(backbone: Sequence[Literal]) -> list[tuple[Literal, ...]]:
    """Deterministic antecedent scan order for the clause search.

    Literals sort by descending entity-overlap score, ties broken by text;
    the scan runs the ordered outer-by-inner pair product (the diagonal
    supplies single-literal antecedents) and ends with the empty antecedent.
    """
    lits = sorted(
        set(backbone),
        key=lambda l: (-score_literal(l, backbone).score, str(l)),
    )
    pairs: list[tuple[Literal, ...]] = [
        (l1, l2) for l1 in lits for l2 in lits
    ]
    pairs.append(())
    return pairs


def generation_targets(
    antecedent: tuple[Literal, ...], style: str, cap: int
) -> list:
    """Targets for the per-candidate generation calls, most promising first.

    Entity style: one call per distinct antecedent entity. Pair style: one
    call per ordered entity pair, with pairs joining the two literals' outer
    endpoints ahead of the rest (a two-literal antecedent sharing a middle
    entity most plausibly concludes about its endpoints).
    """
    if not antecedent:
        return [None]
    entities = sorted(
        {e for l in antecedent for e in l.entities()}, key=lambda e: e.name
    )
    if not entities:
        return [None]  # propositional antecedent: one untargeted call
    if style == GENERATION_ENTITY:
        return entities[:cap]
    unique = tuple(dict.fromkeys(antecedent))
    primary: list[tuple[Entity, Entity]] = []
    if len(unique) == 2:
        s1, s2 = unique[0].entities(), unique[1].entities()
        shared = s1 & s2
        for a in sorted(s1 - shared, key=lambda e: e.name):
            for b in sorted(s2 - shared, key=lambda e: e.name):
                primary.extend([(a, b), (b, a)])
    seen = set(primary)
    rest = [
        (a, b)
        for a in entities
        for b in entities
        if a != b and (a, b) not in seen
    ]
    rest.sort(key=lambda p: (p[0].name, p[1].name))
    return (primary + rest)[:cap]


class Engine:
    """One engine instance solves one problem; no state is shared."""

    def __init__(self, problem, config: EngineConfig, backend: Backend):
        self.problem = problem
        self.config = config
        self.backend = backend
        self.trace: list[dict] = []
        self.accepted: list[CommonsenseClause] = []
        self.decided: dict[tuple, str] = {}
        self.last_vote: Optional[SolveVote] = None
        self.cot = 0
        self.iteration = 0
        self.universe: set[Entity] = set(problem.entities)
        for f in list(problem.premises) + [problem.query]:
            self.universe |= formula_entities(f)
        self._reground()

    # -- plumbing ------------------------------------------------------------

    def _reground(self) -> None:
        limit = self.config.grounding_depth_limit
        members = sorted(self.universe, key=lambda e: e.name)
        self.ground_premises = [
            ground(f, members, limit) for f in self.problem.premises
        ]
        self.ground_query = ground(self.problem.query, members, limit)
        self._session = SatSession(self.config.conflict_budget)
        self._session.add_formulas(self.ground_premises)
        self._session.set_query(self.ground_query)
        self._session.add_commonsense(self.accepted)

    def _emit(self, event: str, **fields) -> None:
        record = {"event": event, "iteration": self.iteration, "cot": self.cot}
        record.update(fields)
        self.trace.append(record)

    def _gamma(self) -> Fraction:
        gamma0 = Fraction(str(self.config.gamma0))
        alpha = Fraction(str(self.config.alpha))
        return gamma0 - alpha * len(self.accepted)

    def _vote_fraction(self, vote: SolveVote) -> Fraction:
        count = sum(1 for s in vote.samples if s.answer == vote.answer)
        return Fraction(count, self.config.k)

    def _can_vote(self) -> bool:
        if not self.config.use_sc_solver:
            return False
        if self.config.max_cot is not None and self.cot + self.config.k > self.config.max_cot:
            return False
        return True

    def _vote(self) -> SolveVote:
        vote = llm_solve(
            self.backend,
            self.ground_premises,
            self.accepted,
            self.ground_query,
            self.config.k,
        )
        self.cot += self.config.k
        self.last_vote = vote
        self._emit(
            "vote",
            answer=vote.answer,
            vote_fraction=float(self._vote_fraction(vote)),
            weighted_confidence=round(vote.weighted_confidence, 9),
            k=self.config.k,
            degenerate=vote.degenerate,
        )
        return vote

    def _result(
        self,
        verdict: bool,
        decided_by: str,
        confidence: float,
        reason: str,
        inconsistent: bool = False,
        degenerate: bool = False,
    ) -> SolveResult:
        self._emit(
            "result",
            verdict=verdict,
            decided_by=decided_by,
            confidence=round(confidence, 9),
            clauses=len(self.accepted),
            reason=reason,
            inconsistent=inconsistent,
            degenerate=degenerate,
        )
        return SolveResult(
            verdict=verdict,
            decided_by=decided_by,
            confidence=confidence,
            commonsense=list(self.accepted),
            iterations=len(self.accepted),
            cot_calls=self.cot,
            trace=self.trace,
            inconsistent=inconsistent,
            degenerate=degenerate,
        )

    def _fallback(self, reason: str, inconsistent: bool = False) -> SolveResult:
        vote = self.last_vote
        if vote is None and self._can_vote():
            try:
                vote = self._vote()
            except BackendExhausted:
                self._emit("backend_error", error="transport exhausted during fallback vote")
                vote = None
        if vote is None:
            return self._result(
                False, DECIDED_BY_FALLBACK, 0.0, reason,
                inconsistent=inconsistent, degenerate=True,
            )
        return self._result(
            vote.answer,
            DECIDED_BY_FALLBACK,
            float(self._vote_fraction(vote)),
            reason,
            inconsistent=inconsistent,
            degenerate=vote.degenerate,
        )

    # -- the main loop ---------------------------------------------------------

    def solve(self) -> SolveResult:
        try:
            return self._solve_loop()
        except BackendExhausted as exc:
            self._emit("backend_error", error=str(exc))
            if self.last_vote is None:
                raise BackendError(
                    "backend transport exhausted before any vote completed"
                ) from exc
            vote = self.last_vote
            return self._result(
                vote.answer,
                DECIDED_BY_FALLBACK,
                float(self._vote_fraction(vote)),
                "backend_exhausted",
            )

    def _solve_loop(self) -> SolveResult:
        half = Fraction(1, 2)
        while True:
            gamma = self._gamma()
            if gamma <= 0:
                return self._fallback("gamma_exhausted")
            conclusion, backbone = self._session.decide()
            self._emit(
                "sat_solve",
                verdict=conclusion.verdict,
                budget_exceeded=conclusion.budget_exceeded,
                backbone_size=len(backbone) if backbone is not None else None,
                backbone=(
                    sorted(str(l) for l in backbone.literals)
                    if backbone is not None
                    else None
                ),
            )
            if conclusion.verdict == ENTAILS_QUERY:
                return self._result(True, DECIDED_BY_SAT, 1.0, "sat_entails_query")
            if conclusion.verdict == ENTAILS_NOT_QUERY:
                return self._result(False, DECIDED_BY_SAT, 1.0, "sat_entails_negation")
            if conclusion.verdict == INCONSISTENT:
                self.last_vote = None  # the standing vote predates the contradiction
                return self._fallback("inconsistent_premises", inconsistent=True)

            if self.config.use_sc_solver:
                if gamma <= half:
                    # A fresh vote at gamma <= 1/2 is guaranteed to pass (a
                    # binary majority is at least (k//2+1)/k), so the standing
                    # vote already is the self-consistency answer; skipping the
                    # redundant round keeps the stated cost bound exact.
                    if self.last_vote is None and self._can_vote():
                        self._vote()
                    if self.last_vote is not None:
                        vote = self.last_vote
                        return self._result(
                            vote.answer,
                            DECIDED_BY_SC,
                            float(self._vote_fraction(vote)),
                            "gamma_floor",
                            degenerate=vote.degenerate,
                        )
                    return self._fallback("gamma_floor_no_vote")
                if self._can_vote():
                    vote = self._vote()
                    if self._vote_fraction(vote) > gamma:
                        return self._result(
                            vote.answer,
                            DECIDED_BY_SC,
                            float(self._vote_fraction(vote)),
                            "vote_above_gamma",
                        )
                else:
                    self._emit("vote_skipped", reason="max_cot")

            if backbone is None:
                backbone = Backbone(frozenset(), origin="unavailable")
            clause = self._find_new_commonsense(backbone)
            if clause is None:
                return self._fallback("search_exhausted")
            self.accepted.append(clause)
            self.decided[clause.key()] = "accepted"
            self._emit(
                "clause_accepted",
                clause=str(clause),
                commonsense_score=round(clause.commonsense_score, 9),
                relevance_score=round(clause.relevance_score, 9),
                index=len(self.accepted),
            )
            self._emit("gamma_update", gamma=float(self._gamma()))
            new_entities = {
                e
                for l in clause.antecedent + (clause.consequent,)
                for e in l.entities()
            } - self.universe
            if new_entities:
                self.universe |= new_entities
                self._reground()
                self._emit(
                    "reground",
                    new_entities=sorted(e.name for e in new_entities),
                    universe_size=len(self.universe),
                )
            else:
                self._session.add_commonsense([clause])
            self.iteration += 1

    # -- the clause search -------------------------------------------------------

    def _find_new_commonsense(self, backbone: Backbone) -> Optional[CommonsenseClause]:
        config = self.config
        backbone_lits = backbone.literals
        ordered = pair_order(sorted(backbone_lits, key=str))
        generated_cache: dict[tuple, list[Literal]] = {}
        for pair in ordered:
            antecedent = tuple(dict.fromkeys(pair))
            l1 = pair[0] if pair else None
            l2 = pair[1] if len(pair) > 1 else None
            targets = generation_targets(
                antecedent, config.generation_style, config.max_candidates_per_pair
            )
            for target in targets:
                cache_key = (l1, l2, target)
                if cache_key in generated_cache:
                    candidates = generated_cache[cache_key]
                else:
                    candidates = self.backend.generate(
                        self.ground_premises, self.accepted, l1, l2, target
                    )
                    generated_cache[cache_key] = candidates
                for cand in candidates:
                    clause = CommonsenseClause(
                        antecedent, cand, 0.0, 0.0, self.iteration
                    )
                    key = clause.key()
                    if key in self.decided:
                        continue
                    reject = self._admissibility(cand, antecedent, backbone_lits)
                    if reject is not None:
                        self.decided[key] = reject
                        self._emit(
                            "candidate",
                            antecedent=[str(l) for l in antecedent],
                            consequent=str(cand),
                            status="rejected",
                            reason=reject,
                        )
                        continue
                    cs_score = self.backend.commonsense_score(
                        clause, config.score_style
                    )
                    rel_score = self.backend.relevance_score(
                        self.ground_premises, self.accepted, clause
                    )
                    accepted = cs_score > config.tau and rel_score > config.tau
                    self._emit(
                        "candidate",
                        antecedent=[str(l) for l in antecedent],
                        consequent=str(cand),
                        status="accepted" if accepted else "rejected",
                        reason=None if accepted else "below_tau",
                        commonsense_score=round(cs_score, 9),
                        relevance_score=round(rel_score, 9),
                    )
                    if accepted:
                        return replace(
                            clause,
                            commonsense_score=cs_score,
                            relevance_score=rel_score,
                        )
                    self.decided[key] = "below_tau"
        return None

    @staticmethod
    def _admissibility(
        cand: Literal, antecedent: tuple[Literal, ...], backbone: frozenset[Literal]
    ) -> Optional[str]:
        if not cand.is_ground:
            return "not_ground"
        if cand in backbone:
            return "in_backbone"
        if cand in antecedent:
            return "vacuous"
        if cand.negate() in antecedent:
            return "contradicts_antecedent"
        return None


def solve(problem, config: Optional[EngineConfig] = None, backend: Backend = None) -> SolveResult:
    """Run the full loop on one problem and return the result with its trace."""
    if backend is None:
        raise ValueError("a backend is required")
    return Engine(problem, config or EngineConfig(), backend).solve()


def find_new_commonsense(
    premises: Sequence[Formula],
    commonsense: Sequence[CommonsenseClause],
    backbone: Backbone,
    tau: float,
    backend: Backend,
    config: Optional[EngineConfig] = None,
) -> Optional[CommonsenseClause]:
    """One-shot clause search against an externally computed backbone."""
    from .corpus import Problem

    config = replace(config or EngineConfig(), tau=tau)
    placeholder = AtomNode(Atom(Predicate("_query_placeholder", 0), ()))
    shell = Problem(
        id="_search", entities=set(), premises=list(premises), query=placeholder
    )
    engine = Engine(shell, config, backend)
    engine.accepted = list(commonsense)
    for c in commonsense:
        engine.decided[c.key()] = "accepted"
    return engine._find_new_commonsense(backbone)
