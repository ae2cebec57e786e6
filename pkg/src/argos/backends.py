"""Backends for the four language-model subroutines.

Two interchangeable implementations of the same interface:

* :class:`WireBackend` talks to a completion endpoint that exposes per-token
  log-probabilities (needed to recover the Yes/No logits for scoring).
* :class:`OracleBackend` is a deterministic, seeded knowledge-base stand-in
  used for reproducible testing: it forward-chains a Horn rule base with a
  bounded number of rule applications, so problems needing longer derivations
  look "hard" to it exactly the way deep proofs are hard for a real model.

The chain-of-thought call counter counts samples: one solve round with k
samples adds k; generation and scoring calls never touch it.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import ArgosError, BackendError, BackendExhausted
from .logic import And, Entity, Formula, Implies, Literal, Var, formula_to_literal

Target = Union[Entity, tuple, None]

CONTRADICTION_STYLE = "contradiction"
TRUTH_STYLE = "truth"


@dataclass(frozen=True)
class GenerationBudget:
    """Per-request token ceilings enforced on the wire backend."""

    max_generate_tokens: int = 25
    max_score_tokens: int = 1
    max_cot_tokens: int = 300


@dataclass(frozen=True)
class CotSample:
    """One chain-of-thought sample; answer None means the sample abstained."""

    answer: Optional[bool]
    token_confidence: float
    raw_text: str


@dataclass(frozen=True)
class SolveVote:
    answer: bool
    vote_fraction: float
    weighted_confidence: float
    samples: tuple[CotSample, ...]
    degenerate: bool = False


_ANSWER_RE = re.compile(r"\b(true|false)\b", re.IGNORECASE)


def extract_answer(text: str) -> Optional[bool]:
    """Last occurrence of a true/false token decides the sample's answer."""
    matches = _ANSWER_RE.findall(text)
    if not matches:
        return None
    return matches[-1].lower() == "true"


def assemble_vote(samples: Sequence[CotSample], k: int) -> SolveVote:
    """Modal answer over non-abstaining samples with the standard arithmetic.

    vote_fraction is (modal count)/k and the weighted confidence averages the
    modal samples' token confidences over k. If every sample abstains the
    vote is False by fixed convention and flagged degenerate.
    """
    answered = [s for s in samples if s.answer is not None]
    if not answered:
        return SolveVote(False, 0.0, 0.0, tuple(samples), degenerate=True)
    count = {True: 0, False: 0}
    conf = {True: 0.0, False: 0.0}
    for s in answered:
        count[s.answer] += 1
        conf[s.answer] += s.token_confidence
    if count[True] != count[False]:
        answer = count[True] > count[False]
    elif conf[True] != conf[False]:
        answer = conf[True] > conf[False]
    else:
        answer = True
    return SolveVote(
        answer=answer,
        vote_fraction=count[answer] / k,
        weighted_confidence=conf[answer] / k,
        samples=tuple(samples),
    )


class Backend(ABC):
    """Uniform interface for solve, generate, and the two scorers."""

    def __init__(self, budget: Optional[GenerationBudget] = None):
        self.budget = budget or GenerationBudget()
        self._cot_lock = threading.Lock()
        self._cot_calls = 0

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_cot_lock"]  # locks cannot cross process boundaries
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._cot_lock = threading.Lock()

    @property
    def cot_calls(self) -> int:
        with self._cot_lock:
            return self._cot_calls

    def _count_cot(self, k: int) -> None:
        with self._cot_lock:
            self._cot_calls += k

    def solve(
        self,
        premises: Sequence[Formula],
        commonsense: Sequence,
        query: Formula,
        k: int,
    ) -> SolveVote:
        if k < 1:
            raise ValueError("k must be at least 1")
        samples = self._cot_samples(premises, commonsense, query, k)
        self._count_cot(k)
        return assemble_vote(samples, k)

    @abstractmethod
    def _cot_samples(self, premises, commonsense, query, k) -> list[CotSample]:
        ...

    @abstractmethod
    def generate(
        self,
        premises: Sequence[Formula],
        commonsense: Sequence,
        l1: Optional[Literal],
        l2: Optional[Literal],
        target: Target,
    ) -> list[Literal]:
        ...

    @abstractmethod
    def commonsense_score(self, clause, style: str = CONTRADICTION_STYLE) -> float:
        ...

    @abstractmethod
    def relevance_score(self, premises, commonsense, clause) -> float:
        ...


def llm_solve(backend: Backend, premises, commonsense, query, k: int) -> SolveVote:
    return backend.solve(premises, commonsense, query, k)


# --- prompt templates --------------------------------------------------------


def _render_formulas(formulas: Iterable) -> str:
    return ". ".join(str(f) for f in formulas)


def _render_clause(clause) -> str:
    return str(clause)


def cot_prompt(premises, commonsense, query, exemplars=()) -> str:
    parts = []
    for ex in exemplars:
        parts.append(
            "Here are some facts and rules: "
            + _render_formulas(ex.get("premises", ()))
            + "\nHere is some additional info we found: "
            + _render_formulas(ex.get("commonsense", ()))
            + f"\nTrue or false: {ex.get('query', '')}?"
            + f"\nAnswer: {ex.get('cot', '')}\n"
        )
    parts.append(
        "Here are some facts and rules: "
        + _render_formulas(premises)
        + "\nHere is some additional info we found: "
        + _render_formulas(commonsense)
        + f"\nTrue or false: {query}?"
        + "\nAnswer:"
    )
    return "\n".join(parts)


def generate_prompt_entity(premises, commonsense, antecedent_text, entity, known_predicates) -> str:
    return (
        f"Fill in the blank with a known predicate: {antecedent_text} implies __({entity}).\n"
        f"Known predicates are: {', '.join(known_predicates)}\n"
        "Answer:"
    )


def generate_prompt_pair(antecedent_text, e1, e2) -> str:
    return f"If {antecedent_text} then __({e1},{e2}). Fill in the blank.\nAnswer:"


def commonsense_prompt(clause_text: str, style: str) -> str:
    question = (
        "Does the following rule seem contradictory?"
        if style == CONTRADICTION_STYLE
        else "Does the following rule seem true?"
    )
    return f"{question}\nRule: {clause_text}\nAnswer:"


def relevance_prompt(premises, commonsense, clause_text: str) -> str:
    context = _render_formulas(list(premises) + [str(c) for c in commonsense])
    return (
        f"Here are some facts and rules: {context}\n"
        f"Does the following new rule seem contextually relevant to the facts and rules? {clause_text}\n"
        "Answer:"
    )


# --- the deterministic knowledge-base oracle ---------------------------------


@dataclass(frozen=True)
class HornRule:
    """Pattern rule: up to two antecedent literals, one consequent literal."""

    antecedent: tuple[Literal, ...]
    consequent: Literal

    def __str__(self) -> str:
        if not self.antecedent:
            return str(self.consequent)
        return " & ".join(str(l) for l in self.antecedent) + f" -> {self.consequent}"


def _strip_quantifiers(f: Formula) -> Formula:
    from .logic import Exists, ForAll

    while isinstance(f, ForAll):
        f = f.body
    if isinstance(f, Exists):
        raise ArgosError("existential rules are not Horn rules")
    return f


def _conjunct_literals(f: Formula) -> Optional[list[Literal]]:
    if isinstance(f, And):
        left = _conjunct_literals(f.left)
        right = _conjunct_literals(f.right)
        if left is None or right is None:
            return None
        return left + right
    l = formula_to_literal(f)
    return None if l is None else [l]


def horn_rule_from_formula(f: Formula) -> Optional[HornRule]:
    """Horn reading of a formula, or None when it does not fit the shape."""
    body = _strip_quantifiers(f)
    if isinstance(body, Implies):
        ante = _conjunct_literals(body.left)
        cons = formula_to_literal(body.right)
        if ante is None or cons is None or len(ante) > 2:
            return None
        return HornRule(tuple(ante), cons)
    l = formula_to_literal(body)
    if l is None:
        return None
    return HornRule((), l)


def _unify(pattern: Literal, fact: Literal, theta: dict) -> Optional[dict]:
    if pattern.positive != fact.positive:
        return None
    if pattern.atom.predicate != fact.atom.predicate:
        return None
    th = dict(theta)
    for p_arg, f_arg in zip(pattern.atom.args, fact.atom.args):
        if isinstance(p_arg, Var):
            bound = th.get(p_arg.name)
            if bound is None:
                th[p_arg.name] = f_arg
            elif bound != f_arg:
                return None
        elif p_arg != f_arg:
            return None
    return th


def _instantiate(pattern: Literal, theta: dict) -> Optional[Literal]:
    args = []
    for a in pattern.atom.args:
        if isinstance(a, Var):
            value = theta.get(a.name)
            if value is None:
                return None
            args.append(value)
        else:
            args.append(a)
    from .logic import Atom

    return Literal(Atom(pattern.atom.predicate, tuple(args)), pattern.positive)


@dataclass
class OracleKB:
    """Rule base plus the knobs that shape the stand-in model's behaviour.

    ``reasoning_depth`` bounds how many rule applications a derivation may
    use before the solve subroutine gives up and guesses (None: unbounded).
    ``noise`` flips each scoring decision, and corrupts each generated
    candidate, independently with that probability (seeded).
    """

    rules: tuple[HornRule, ...]
    reasoning_depth: Optional[int] = None
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise ValueError("noise must be in [0, 1)")
        for r in self.rules:
            if len(r.antecedent) > 2:
                raise ArgosError(f"rule antecedent too long: {r}")

    @classmethod
    def from_formulas(
        cls,
        formulas: Iterable[Formula],
        reasoning_depth: Optional[int] = None,
        noise: float = 0.0,
        seed: int = 0,
        check: bool = True,
    ) -> "OracleKB":
        rules = []
        for f in formulas:
            r = horn_rule_from_formula(f)
            if r is None:
                raise ArgosError(f"not a Horn rule: {f}")
            rules.append(r)
        rules.sort(key=str)
        kb = cls(tuple(rules), reasoning_depth, noise, seed)
        if check and not kb.is_consistent():
            raise ArgosError("knowledge base rules are mutually inconsistent")
        return kb

    @classmethod
    def from_file(cls, path, **overrides) -> "OracleKB":
        """Load rules from JSON; None-valued overrides leave the file values."""
        from .parser import parse_formula

        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict) or "rules" not in data:
            raise ArgosError(f"{path}: expected an object with a 'rules' array")
        signature: dict[str, int] = {}
        formulas = [parse_formula(t, signature=signature) for t in data["rules"]]
        params = {
            "reasoning_depth": data.get("reasoning_depth"),
            "noise": data.get("noise", 0.0),
            "seed": data.get("seed", 0),
        }
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_formulas(formulas, **params)

    def to_file(self, path) -> None:
        payload = {"rules": [self.rule_text(r) for r in self.rules]}
        if self.reasoning_depth is not None:
            payload["reasoning_depth"] = self.reasoning_depth
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")

    @staticmethod
    def rule_text(rule: HornRule) -> str:
        vars_ = sorted(
            {a.name for l in rule.antecedent + (rule.consequent,)
             for a in l.atom.args if isinstance(a, Var)}
        )
        body = str(rule)
        prefix = "".join(f"forall {v} " for v in vars_)
        return f"{prefix}({body})" if vars_ else body

    def formulas(self) -> list[Formula]:
        from .parser import parse_formula

        signature: dict[str, int] = {}
        return [parse_formula(self.rule_text(r), signature=signature) for r in self.rules]

    def is_consistent(self) -> bool:
        from .logic import ground
        from .sat import consistent

        formulas = self.formulas()
        constants = {e for f in formulas for e in _formula_entity_pool(f)}
        universe = sorted(constants, key=lambda e: e.name) or [Entity("_e1")]
        extra = [Entity(f"_e{i}") for i in range(1, 4)]
        pool = sorted(set(universe) | set(extra), key=lambda e: e.name)
        grounded = [ground(f, pool) for f in formulas]
        return consistent(grounded)


def _formula_entity_pool(f: Formula) -> frozenset[Entity]:
    from .logic import formula_entities

    return formula_entities(f)


class OracleBackend(Backend):
    """Deterministic stand-in for the language model.

    Outputs depend only on the request content and the KB seed, never on
    call order, so concurrent suites reproduce serial runs exactly.
    """

    def __init__(self, kb: OracleKB, budget: Optional[GenerationBudget] = None):
        super().__init__(budget)
        self.kb = kb
        # rules keyed by the signature of their antecedent predicates, so
        # generation lookups touch only plausibly matching rules
        self._rules_by_sig: dict[frozenset, list[HornRule]] = {}
        for rule in kb.rules:
            sig = frozenset(
                (l.atom.predicate, l.positive) for l in rule.antecedent
            )
            self._rules_by_sig.setdefault(sig, []).append(rule)

    # -- seeded randomness per request ------------------------------------

    def _rng(self, *key_parts) -> random.Random:
        h = hashlib.sha256()
        h.update(str(self.kb.seed).encode())
        for part in key_parts:
            h.update(b"\x1f")
            h.update(str(part).encode())
        return random.Random(int.from_bytes(h.digest()[:8], "big"))

    # -- solve: depth-bounded forward chaining ------------------------------

    def _chain(self, premises, commonsense) -> dict[Literal, int]:
        """Least rule-application counts for every derivable ground literal."""
        facts: dict[Literal, int] = {}
        rules: list[HornRule] = list(self.kb.rules)
        for f in premises:
            l = formula_to_literal(f) if isinstance(f, Formula) else None
            if l is not None and l.is_ground:
                facts[l] = 0
                continue
            if isinstance(f, Formula):
                r = horn_rule_from_formula(f)
                if r is not None and r.antecedent:
                    rules.append(r)
        for c in commonsense:
            rules.append(HornRule(tuple(c.antecedent), c.consequent))
        limit = self.kb.reasoning_depth
        if limit is not None and limit <= 0:
            return facts
        by_pred: dict[tuple, list[Literal]] = {}

        def index(l: Literal):
            by_pred.setdefault((l.atom.predicate, l.positive), []).append(l)

        for l in facts:
            index(l)
        changed = True
        rounds = 0
        while changed and rounds < 100:
            changed = False
            rounds += 1
            for rule in rules:
                if not rule.antecedent:
                    derived = rule.consequent
                    if derived.is_ground and facts.get(derived, 10**9) > 0:
                        facts[derived] = 0
                        index(derived)
                        changed = True
                    continue
                first = rule.antecedent[0]
                for f1 in list(by_pred.get((first.atom.predicate, first.positive), ())):
                    th1 = _unify(first, f1, {})
                    if th1 is None:
                        continue
                    if len(rule.antecedent) == 1:
                        matches = [((f1,), th1)]
                    else:
                        second = rule.antecedent[1]
                        matches = []
                        for f2 in list(
                            by_pred.get((second.atom.predicate, second.positive), ())
                        ):
                            th2 = _unify(second, f2, th1)
                            if th2 is not None:
                                matches.append(((f1, f2), th2))
                    for used, theta in matches:
                        derived = _instantiate(rule.consequent, theta)
                        if derived is None or not derived.is_ground:
                            continue
                        cost = sum(facts[u] for u in used) + 1
                        if limit is not None and cost > limit:
                            continue
                        if cost < facts.get(derived, 10**9):
                            if derived not in facts:
                                index(derived)
                            facts[derived] = cost
                            changed = True
        return facts

    def _cot_samples(self, premises, commonsense, query, k) -> list[CotSample]:
        facts = self._chain(premises, commonsense)
        qlit = formula_to_literal(query) if isinstance(query, Formula) else None
        derived: Optional[bool] = None
        steps = 0
        if qlit is not None:
            if qlit in facts:
                derived, steps = True, facts[qlit]
            elif qlit.negate() in facts:
                derived, steps = False, facts[qlit.negate()]
        samples = []
        if derived is not None:
            text = f"Derived after {steps} rule application(s). Answer: {derived}"
            for _ in range(k):
                samples.append(CotSample(extract_answer(text), 1.0, text))
            return samples
        # Underived: the stand-in guesses. The sample set sits at the k-vote
        # majority floor (never unanimous), with the majority side a fair coin,
        # so an unsure oracle can never clear a vote threshold above 1/2.
        rng = self._rng(
            "solve",
            _render_formulas(premises),
            _render_formulas(commonsense),
            str(query),
            k,
        )
        majority = rng.random() < 0.5
        n_major = k // 2 + 1
        answers = [majority] * n_major + [not majority] * (k - n_major)
        rng.shuffle(answers)
        for a in answers:
            text = f"No derivation found within the step limit. Guessing. Answer: {a}"
            samples.append(CotSample(extract_answer(text), 0.5, text))
        return samples

    # -- generation: KB rule lookup -----------------------------------------

    def _matching_consequents(self, l1: Optional[Literal], l2: Optional[Literal]) -> list[Literal]:
        out: list[Literal] = []
        seen = set()
        if l1 is None:
            for rule in self._rules_by_sig.get(frozenset(), ()):
                if rule.consequent.is_ground and rule.consequent not in seen:
                    seen.add(rule.consequent)
                    out.append(rule.consequent)
            return out
        pair = (l1,) if l2 is None or l2 == l1 else (l1, l2)
        pair_sig = {(l.atom.predicate, l.positive) for l in pair}
        rules: list[HornRule] = []
        for sig, group in self._rules_by_sig.items():
            if sig and sig <= pair_sig:
                rules.extend(group)
        rules.sort(key=str)
        for rule in rules:
            n = len(rule.antecedent)
            if n == 0:
                continue
            orders: list[tuple[Literal, ...]]
            if n == 1:
                orders = [(p,) for p in pair]
            elif n == 2 and len(pair) == 2:
                orders = [(pair[0], pair[1]), (pair[1], pair[0])]
            elif n == 2 and len(pair) == 1:
                orders = [(pair[0], pair[0])]
            else:
                orders = []
            for order in orders:
                theta: Optional[dict] = {}
                for pat, fact in zip(rule.antecedent, order):
                    theta = _unify(pat, fact, theta)
                    if theta is None:
                        break
                if theta is None:
                    continue
                derived = _instantiate(rule.consequent, theta)
                if derived is not None and derived.is_ground and derived not in seen:
                    seen.add(derived)
                    out.append(derived)
        return out

    def generate(self, premises, commonsense, l1, l2, target) -> list[Literal]:
        candidates = self._matching_consequents(l1, l2)
        if isinstance(target, Entity):
            candidates = [c for c in candidates if target in c.entities()]
        elif isinstance(target, tuple):
            candidates = [c for c in candidates if tuple(c.atom.args) == tuple(target)]
        if self.kb.noise > 0.0 and candidates:
            rng = self._rng("generate", str(l1), str(l2), str(target),
                            _render_formulas(premises), len(commonsense))
            predicates = sorted(
                {r.consequent.atom.predicate for r in self.kb.rules},
                key=lambda p: (p.name, p.arity),
            )
            corrupted = []
            for c in candidates:
                if rng.random() < self.kb.noise:
                    swaps = [
                        p for p in predicates
                        if p.arity == c.atom.predicate.arity and p != c.atom.predicate
                    ]
                    if swaps and rng.random() < 0.5:
                        from .logic import Atom

                        c = Literal(Atom(rng.choice(swaps), c.atom.args), c.positive)
                    else:
                        c = c.negate()
                corrupted.append(c)
            candidates = corrupted
        return candidates

    # -- scoring -------------------------------------------------------------

    def _kb_decision(self, clause) -> Optional[bool]:
        """True: instantiates a rule; False: contradicts one; None: undecided."""
        import itertools

        ante = tuple(clause.antecedent)
        cons = clause.consequent
        for flip, expected in ((False, True), (True, False)):
            want = cons.negate() if flip else cons
            for rule in self.kb.rules:
                theta0 = _unify(rule.consequent, want, {})
                if theta0 is None:
                    continue
                n = len(rule.antecedent)
                if n == 0:
                    if _instantiate(rule.consequent, theta0) == want:
                        return expected
                    continue
                pool = list(ante)
                if n > len(pool) and len(pool) == 1:
                    pool = pool * 2
                if n > len(pool):
                    continue
                for order in itertools.permutations(pool, n):
                    theta = dict(theta0)
                    ok = True
                    for pat, fact in zip(rule.antecedent, order):
                        theta = _unify(pat, fact, theta)
                        if theta is None:
                            ok = False
                            break
                    if ok and _instantiate(rule.consequent, theta) == want:
                        return expected
        return None

    def commonsense_score(self, clause, style: str = CONTRADICTION_STYLE) -> float:
        decision = self._kb_decision(clause)
        score = 1.0 if decision else 0.0
        if self.kb.noise > 0.0:
            rng = self._rng("commonsense", style, str(clause))
            if rng.random() < self.kb.noise:
                score = 1.0 - score
        return score

    def relevance_score(self, premises, commonsense, clause) -> float:
        from .logic import formula_entities

        known: set[Entity] = set()
        for f in premises:
            known |= formula_entities(f)
        for c in commonsense:
            for l in tuple(c.antecedent) + (c.consequent,):
                known |= l.entities()
        clause_entities = set()
        for l in tuple(clause.antecedent) + (clause.consequent,):
            clause_entities |= l.entities()
        score = 1.0 if clause_entities <= known else 0.0
        if self.kb.noise > 0.0:
            rng = self._rng(
                "relevance", _render_formulas(premises), len(commonsense), str(clause)
            )
            if rng.random() < self.kb.noise:
                score = 1.0 - score
        return score


# --- the wire backend ---------------------------------------------------------


_YES_TOKENS = ("yes",)
_NO_TOKENS = ("no",)


class WireBackend(Backend):
    """Client for a completion server exposing per-token log-probabilities.

    The request body follows the common completions shape: ``model``,
    ``prompt``, ``max_tokens``, ``temperature`` and ``logprobs`` (top-k count);
    the response must carry ``choices[0].text`` and
    ``choices[0].logprobs.tokens`` / ``token_logprobs`` / ``top_logprobs``.
    Transport failures retry with exponential backoff before giving up.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_token: Optional[str] = None,
        budget: Optional[GenerationBudget] = None,
        timeout: float = 60.0,
        retries: int = 3,
        backoff: float = 1.0,
        cot_temperature: float = 0.7,
        exemplars: Sequence[dict] = (),
        post=None,
        sleep=time.sleep,
    ):
        super().__init__(budget)
        self.endpoint = endpoint
        self.model = model
        self.api_token = api_token
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.cot_temperature = cot_temperature
        self.exemplars = list(exemplars)
        if post is None:
            import requests

            post = requests.post
        self._post = post
        self._sleep = sleep

    def _request(self, prompt: str, max_tokens: int, temperature: float, logprobs: int) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_token:
            headers["Authorization"] = f"Bearer {self.api_token}"
        body = {
            "model": self.model,
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": temperature,
            "logprobs": logprobs,
        }
        last_error: Optional[Exception] = None
        for attempt in range(self.retries):
            try:
                resp = self._post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
                status = getattr(resp, "status_code", 200)
                if status >= 500:
                    raise BackendError(f"server error {status}")
                if status >= 400:
                    raise BackendExhausted(f"request rejected with status {status}")
                return resp.json()
            except BackendExhausted:
                raise
            except Exception as exc:  # transport or server failure: retry
                last_error = exc
                if attempt + 1 < self.retries:
                    self._sleep(self.backoff * (2**attempt))
        raise BackendExhausted(f"all {self.retries} attempts failed: {last_error}")

    @staticmethod
    def _choice(data: dict) -> dict:
        try:
            return data["choices"][0]
        except (KeyError, IndexError, TypeError):
            raise BackendError(f"malformed completion response: {data!r}")

    def _cot_samples(self, premises, commonsense, query, k) -> list[CotSample]:
        prompt = cot_prompt(premises, commonsense, query, self.exemplars)
        samples = []
        for _ in range(k):
            data = self._request(
                prompt, self.budget.max_cot_tokens, self.cot_temperature, 5
            )
            choice = self._choice(data)
            text = choice.get("text", "")
            answer = extract_answer(text)
            confidence = 0.0
            if answer is not None:
                confidence = self._answer_confidence(choice, answer)
            samples.append(CotSample(answer, confidence, text))
        return samples

    @staticmethod
    def _answer_confidence(choice: dict, answer: bool) -> float:
        """Generation probability of the sample's final answer token."""
        lp = choice.get("logprobs") or {}
        tokens = lp.get("tokens") or []
        token_lps = lp.get("token_logprobs") or []
        want = "true" if answer else "false"
        for tok, tok_lp in zip(reversed(tokens), reversed(token_lps)):
            if tok is None or tok_lp is None:
                continue
            if tok.strip().lower() == want:
                return math.exp(tok_lp)
        return 0.5

    def _yes_no_probability(self, prompt: str, positive: str) -> float:
        data = self._request(prompt, self.budget.max_score_tokens, 0.0, 20)
        choice = self._choice(data)
        lp = choice.get("logprobs") or {}
        top = lp.get("top_logprobs") or []
        table = top[0] if top else {}
        best = {"yes": None, "no": None}
        for token, value in table.items():
            name = token.strip().lower()
            if name in best and (best[name] is None or value > best[name]):
                best[name] = value
        if best["yes"] is None or best["no"] is None:
            return 0.0
        e_yes = math.exp(best["yes"])
        e_no = math.exp(best["no"])
        chosen = e_yes if positive == "yes" else e_no
        return chosen / (e_yes + e_no)

    def commonsense_score(self, clause, style: str = CONTRADICTION_STYLE) -> float:
        prompt = commonsense_prompt(str(clause), style)
        positive = "no" if style == CONTRADICTION_STYLE else "yes"
        return self._yes_no_probability(prompt, positive)

    def relevance_score(self, premises, commonsense, clause) -> float:
        prompt = relevance_prompt(premises, commonsense, str(clause))
        return self._yes_no_probability(prompt, "yes")

    def generate(self, premises, commonsense, l1, l2, target) -> list[Literal]:
        if l1 is None:
            antecedent_text = "the context"
        elif l2 is None or l2 == l1:
            antecedent_text = str(l1)
        else:
            antecedent_text = f"{l1} & {l2}"
        if isinstance(target, tuple):
            prompt = generate_prompt_pair(antecedent_text, target[0], target[1])
        else:
            known = sorted(
                {a.predicate.name for f in premises for a in _formula_atoms(f)}
                | {
                    l.atom.predicate.name
                    for c in commonsense
                    for l in tuple(c.antecedent) + (c.consequent,)
                }
            )
            prompt = generate_prompt_entity(
                premises, commonsense, antecedent_text, target, known
            )
        data = self._request(prompt, self.budget.max_generate_tokens, 0.0, 0)
        text = self._choice(data).get("text", "")
        lit = self._parse_generated(text, target, premises, commonsense)
        return [lit] if lit is not None else []

    @staticmethod
    def _parse_generated(text, target, premises, commonsense) -> Optional[Literal]:
        from .parser import parse_literal

        line = text.strip().splitlines()[0].strip().rstrip(".") if text.strip() else ""
        if not line:
            return None
        signature: dict[str, int] = {}
        for f in premises:
            for a in _formula_atoms(f):
                signature.setdefault(a.predicate.name, a.predicate.arity)
        for c in commonsense:
            for l in tuple(c.antecedent) + (c.consequent,):
                signature.setdefault(l.atom.predicate.name, l.atom.predicate.arity)
        bare = re.fullmatch(r"~?\s*[A-Za-z_][A-Za-z0-9_]*", line)
        if bare:
            name = line.lstrip("~ ").strip()
            positive = not line.startswith("~")
            if isinstance(target, tuple):
                line = f"{name}({target[0]}, {target[1]})"
            elif isinstance(target, Entity):
                line = f"{name}({target})"
            else:
                line = name
            if not positive:
                line = "~" + line
        try:
            lit = parse_literal(line)
        except ArgosError:
            return None
        name = lit.atom.predicate.name
        if name in signature and signature[name] != lit.atom.predicate.arity:
            return None
        if not lit.is_ground:
            return None
        return lit


def _formula_atoms(f: Formula):
    from .logic import iter_atoms

    return iter_atoms(f)
