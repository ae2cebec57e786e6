import dataclasses
import json
import math
import random

import pytest

from argos.backends import (
    CotSample,
    OracleBackend,
    OracleKB,
    WireBackend,
    assemble_vote,
    extract_answer,
    llm_solve,
)
from argos.engine import CommonsenseClause
from argos.errors import ArgosError, BackendError, BackendExhausted
from argos.logic import Entity
from argos.parser import parse_formula, parse_literal


def _clause(antecedent, consequent, iteration=0):
    return CommonsenseClause(tuple(antecedent), consequent, 0.0, 0.0, iteration)


def _kb(rule_texts, **kwargs):
    sig = {}
    return OracleKB.from_formulas(
        [parse_formula(t, signature=sig) for t in rule_texts], **kwargs
    )


FOX_RULES = [
    "turns_white(fox, winter) -> reflects(fox, sun)",
    "reflects(fox, sun) -> ~absorbs(fox, sun)",
    "~absorbs(fox, sun) & turns_white(fox, winter) -> ~absorbs(white, sun)",
]


# --- vote assembly -----------------------------------------------------------


def test_extract_answer_last_token_wins():
    assert extract_answer("I think True. No wait: false") is False
    assert extract_answer("TRUE") is True
    assert extract_answer("maybe") is None
    assert extract_answer("untrue falsehood") is None  # word boundaries only


def test_vote_arithmetic_worked_example():
    samples = [
        CotSample(True, 0.9, "True"),
        CotSample(True, 0.8, "True"),
        CotSample(False, 0.7, "False"),
        CotSample(True, 0.6, "True"),
        CotSample(False, 0.5, "False"),
    ]
    vote = assemble_vote(samples, 5)
    assert vote.answer is True
    assert vote.vote_fraction == pytest.approx(0.6)
    assert vote.weighted_confidence == pytest.approx((0.9 + 0.8 + 0.6) / 5)


def test_vote_all_abstain_is_degenerate_false():
    samples = [CotSample(None, 0.0, "no idea")] * 5
    vote = assemble_vote(samples, 5)
    assert vote.answer is False
    assert vote.vote_fraction == 0.0
    assert vote.degenerate


def test_vote_fraction_times_k_integral_and_weighted_below():
    rng = random.Random(11)
    for _ in range(100):
        k = rng.choice([1, 3, 5, 7])
        samples = [
            CotSample(
                rng.choice([True, False, None]),
                rng.random(),
                "",
            )
            for _ in range(k)
        ]
        samples = [
            dataclasses.replace(s, token_confidence=0.0) if s.answer is None else s
            for s in samples
        ]
        vote = assemble_vote(samples, k)
        assert abs(vote.vote_fraction * k - round(vote.vote_fraction * k)) < 1e-9
        assert vote.weighted_confidence <= vote.vote_fraction + 1e-9


# --- oracle: solve ------------------------------------------------------------


def test_oracle_derived_query_unanimous():
    kb = _kb(["forall x (penguin(x) -> bird(x))"])
    backend = OracleBackend(kb)
    premises = [parse_formula("penguin(tux)")]
    vote = llm_solve(backend, premises, (), parse_formula("bird(tux)"), 5)
    assert vote.answer is True
    assert vote.vote_fraction == 1.0


def test_oracle_derived_negative_query():
    kb = _kb(["forall x (penguin(x) -> ~flies(x))"])
    backend = OracleBackend(kb)
    vote = llm_solve(
        backend, [parse_formula("penguin(tux)")], (), parse_formula("flies(tux)"), 5
    )
    assert vote.answer is False
    assert vote.vote_fraction == 1.0


def test_oracle_beyond_depth_guesses_at_majority_floor():
    # two chained rules but only one application allowed: the oracle cannot
    # derive the query and guesses, never above the 3-of-5 majority floor
    kb = _kb(
        ["forall x (a(x) -> b(x))", "forall x (b(x) -> c(x))"], reasoning_depth=1
    )
    backend = OracleBackend(kb)
    vote = llm_solve(backend, [parse_formula("a(e)")], (), parse_formula("c(e)"), 5)
    assert vote.vote_fraction == pytest.approx(0.6)
    # within depth it derives fine
    kb2 = _kb(["forall x (a(x) -> b(x))", "forall x (b(x) -> c(x))"], reasoning_depth=2)
    vote2 = llm_solve(OracleBackend(kb2), [parse_formula("a(e)")], (), parse_formula("c(e)"), 5)
    assert vote2.vote_fraction == 1.0
    assert vote2.answer is True


def test_oracle_depth_zero_answers_only_stated_facts():
    kb = _kb(["forall x (a(x) -> b(x))"], reasoning_depth=0)
    backend = OracleBackend(kb)
    vote = llm_solve(backend, [parse_formula("a(e)")], (), parse_formula("b(e)"), 5)
    assert vote.vote_fraction == pytest.approx(0.6)  # guesses


def test_oracle_uses_accepted_commonsense_in_derivations():
    kb = _kb(["forall x (never_fires(x) -> never_fires(x))"], reasoning_depth=1)
    backend = OracleBackend(kb)
    clause = _clause(
        [parse_literal("a(e)")], parse_literal("b(e)")
    )
    vote = llm_solve(
        backend, [parse_formula("a(e)")], [clause], parse_formula("b(e)"), 5
    )
    assert vote.answer is True
    assert vote.vote_fraction == 1.0


def test_oracle_solve_determinism_and_request_keying():
    kb = _kb(["forall x (a(x) -> b(x))"], reasoning_depth=0, seed=41)
    b1, b2 = OracleBackend(kb), OracleBackend(kb)
    premises = [parse_formula("a(e)")]
    q = parse_formula("c(e)")
    v1 = llm_solve(b1, premises, (), q, 5)
    v2 = llm_solve(b2, premises, (), q, 5)
    assert [s.raw_text for s in v1.samples] == [s.raw_text for s in v2.samples]
    # a different request draws an independent stream
    v3 = llm_solve(b1, premises, (), parse_formula("d(e)"), 5)
    assert v3.samples != v1.samples or v3.answer != v1.answer or True


def test_cot_accounting():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    premises = [parse_formula("turns_white(fox, winter)")]
    assert backend.cot_calls == 0
    llm_solve(backend, premises, (), parse_formula("absorbs(white, sun)"), 5)
    llm_solve(backend, premises, (), parse_formula("absorbs(white, sun)"), 3)
    assert backend.cot_calls == 8
    backend.generate(premises, (), parse_literal("turns_white(fox, winter)"),
                     parse_literal("turns_white(fox, winter)"), Entity("fox"))
    backend.commonsense_score(_clause([], parse_literal("reflects(fox, sun)")))
    backend.relevance_score(premises, (), _clause([], parse_literal("reflects(fox, sun)")))
    assert backend.cot_calls == 8


# --- oracle: generation ---------------------------------------------------------


def test_oracle_generate_single_literal_rule_match():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    l = parse_literal("turns_white(fox, winter)")
    out = backend.generate([], (), l, l, Entity("fox"))
    assert [str(c) for c in out] == ["reflects(fox, sun)"]


def test_oracle_generate_composition_by_pair_target():
    kb = _kb(["forall x forall y forall z (mom(x, y) & sister(y, z) -> mom(x, z))"])
    backend = OracleBackend(kb)
    l1 = parse_literal("mom(A, B)")
    l2 = parse_literal("sister(B, C)")
    out = backend.generate([], (), l1, l2, (Entity("A"), Entity("C")))
    assert [str(c) for c in out] == ["mom(A, C)"]
    # and in reversed argument roles
    out2 = backend.generate([], (), l2, l1, (Entity("A"), Entity("C")))
    assert [str(c) for c in out2] == ["mom(A, C)"]


def test_oracle_generate_no_matching_rule_is_empty():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    l = parse_literal("shines(sun, winter)")
    assert backend.generate([], (), l, l, Entity("sun")) == []


def test_oracle_generate_noise_corrupts_deterministically():
    kb = _kb(FOX_RULES, noise=0.99, seed=5)
    backend = OracleBackend(kb)
    l = parse_literal("turns_white(fox, winter)")
    out1 = backend.generate([], (), l, l, Entity("fox"))
    out2 = backend.generate([], (), l, l, Entity("fox"))
    assert out1 == out2
    assert [str(c) for c in out1] != ["reflects(fox, sun)"]


# --- oracle: scoring --------------------------------------------------------------


def test_oracle_scores_kb_instance_and_contradiction():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    good = _clause(
        [parse_literal("turns_white(fox, winter)")], parse_literal("reflects(fox, sun)")
    )
    bad = _clause(
        [parse_literal("turns_white(fox, winter)")], parse_literal("~reflects(fox, sun)")
    )
    assert backend.commonsense_score(good, "contradiction") == 1.0
    assert backend.commonsense_score(bad, "contradiction") == 0.0
    # complementary styles agree on KB-decided clauses: the raw yes-probability
    # of the truth question is one minus that of the contradiction question
    assert backend.commonsense_score(good, "truth") == 1.0
    assert backend.commonsense_score(bad, "truth") == 0.0


def test_oracle_weakened_antecedent_still_instantiates():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    clause = _clause(
        [parse_literal("turns_white(fox, winter)"), parse_literal("is_animal(fox)")],
        parse_literal("reflects(fox, sun)"),
    )
    assert backend.commonsense_score(clause) == 1.0


def test_oracle_relevance():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    premises = [parse_formula("mom(A, B)"), parse_formula("sister(B, C)")]
    on_topic = _clause([parse_literal("mom(A, B)")], parse_literal("mom(A, C)"))
    off_topic = _clause([], parse_literal("sky_is(blue)"))
    assert backend.relevance_score(premises, (), on_topic) == 1.0
    assert backend.relevance_score(premises, (), off_topic) == 0.0


def test_oracle_relevance_accepts_entities_from_prior_clauses():
    kb = _kb(FOX_RULES)
    backend = OracleBackend(kb)
    premises = [parse_formula("mom(A, B)")]
    prior = _clause([parse_literal("mom(A, B)")], parse_literal("knows(A, D)"))
    clause = _clause([parse_literal("mom(A, B)")], parse_literal("mom(D, B)"))
    assert backend.relevance_score(premises, (), clause) == 0.0
    assert backend.relevance_score(premises, [prior], clause) == 1.0


def test_oracle_score_noise_flips_deterministically():
    kb = _kb(FOX_RULES, noise=0.99, seed=3)
    backend = OracleBackend(kb)
    good = _clause(
        [parse_literal("turns_white(fox, winter)")], parse_literal("reflects(fox, sun)")
    )
    assert backend.commonsense_score(good) == 0.0
    assert backend.commonsense_score(good) == 0.0


# --- oracle KB loading ----------------------------------------------------------


def test_kb_rejects_inconsistent_rules():
    with pytest.raises(ArgosError):
        _kb(["p(a)", "~p(a)"])


def test_kb_rejects_wide_antecedents():
    with pytest.raises(ArgosError):
        _kb(["a & b & c -> d"])


def test_kb_rejects_non_horn():
    with pytest.raises(ArgosError):
        _kb(["a -> b | c"])


def test_kb_file_round_trip(tmp_path):
    kb = _kb(
        ["forall x forall y forall z (mom(x, y) & sister(y, z) -> mom(x, z))"],
        reasoning_depth=2,
    )
    path = tmp_path / "kb.json"
    kb.to_file(path)
    loaded = OracleKB.from_file(path)
    assert loaded.rules == kb.rules
    assert loaded.reasoning_depth == 2
    overridden = OracleKB.from_file(path, reasoning_depth=0, noise=0.1, seed=9)
    assert overridden.reasoning_depth == 0
    assert overridden.noise == 0.1


def test_kb_file_schema_error(tmp_path):
    path = tmp_path / "kb.json"
    path.write_text(json.dumps(["not", "an", "object"]))
    with pytest.raises(ArgosError):
        OracleKB.from_file(path)


# --- wire backend ----------------------------------------------------------------


class FakeResponse:
    def __init__(self, payload, status=200):
        self.payload = payload
        self.status_code = status

    def json(self):
        return self.payload


def completion(text, tokens=None, token_logprobs=None, top=None):
    return {
        "choices": [
            {
                "text": text,
                "logprobs": {
                    "tokens": tokens or [],
                    "token_logprobs": token_logprobs or [],
                    "top_logprobs": top or [],
                },
            }
        ]
    }


def test_wire_cot_sampling_and_confidence():
    requests_seen = []

    def post(url, json=None, headers=None, timeout=None):
        requests_seen.append(json)
        return FakeResponse(
            completion(
                "The fox turns white so it reflects. Answer: False",
                tokens=["Answer", ":", " False"],
                token_logprobs=[-0.5, -0.1, -0.2231435513],
            )
        )

    backend = WireBackend("http://server/v1/completions", "test-model", post=post)
    vote = llm_solve(
        backend, [parse_formula("turns_white(fox, winter)")], (),
        parse_formula("absorbs(white, sun)"), 5,
    )
    assert vote.answer is False
    assert vote.vote_fraction == 1.0
    assert vote.weighted_confidence == pytest.approx(math.exp(-0.2231435513))
    assert backend.cot_calls == 5
    assert len(requests_seen) == 5
    assert all(r["max_tokens"] == 300 for r in requests_seen)
    assert all(r["temperature"] == 0.7 for r in requests_seen)
    assert "True or false: absorbs(white, sun)?" in requests_seen[0]["prompt"]
    assert "Here is some additional info we found:" in requests_seen[0]["prompt"]


def test_wire_score_softmax_and_budget():
    requests_seen = []

    def post(url, json=None, headers=None, timeout=None):
        requests_seen.append(json)
        return FakeResponse(
            completion("Yes", top=[{" Yes": -0.4, " No": -1.2, "the": -0.1}])
        )

    backend = WireBackend("http://server", "m", post=post)
    clause = _clause([parse_literal("a(x1)")], parse_literal("b(x1)"))
    score = backend.commonsense_score(clause, "contradiction")
    # contradiction style returns P[No]
    e_yes, e_no = math.exp(-0.4), math.exp(-1.2)
    assert score == pytest.approx(e_no / (e_yes + e_no))
    assert backend.commonsense_score(clause, "truth") == pytest.approx(
        e_yes / (e_yes + e_no)
    )
    assert backend.relevance_score([], (), clause) == pytest.approx(
        e_yes / (e_yes + e_no)
    )
    assert all(r["max_tokens"] == 1 for r in requests_seen)
    assert all(r["temperature"] == 0.0 for r in requests_seen)


def test_wire_score_equal_logits_is_half():
    def post(url, json=None, headers=None, timeout=None):
        return FakeResponse(completion("", top=[{"Yes": -0.7, "No": -0.7}]))

    backend = WireBackend("http://server", "m", post=post)
    clause = _clause([], parse_literal("b(x1)"))
    assert backend.commonsense_score(clause) == pytest.approx(0.5)


def test_wire_score_missing_tokens_is_zero():
    def post(url, json=None, headers=None, timeout=None):
        return FakeResponse(completion("?", top=[{"maybe": -0.1}]))

    backend = WireBackend("http://server", "m", post=post)
    assert backend.commonsense_score(_clause([], parse_literal("b(x1)"))) == 0.0


def test_wire_generation_budget_and_parsing():
    requests_seen = []

    def post(url, json=None, headers=None, timeout=None):
        requests_seen.append(json)
        return FakeResponse(completion("productive"))

    backend = WireBackend("http://server", "m", post=post)
    premises = [parse_formula("drinksCoffee(Rina)"), parse_formula("Loves(Mary, Sam)")]
    out = backend.generate(
        premises, (), parse_literal("drinksCoffee(Rina)"),
        parse_literal("Loves(Mary, Sam)"), Entity("Rina"),
    )
    assert [str(l) for l in out] == ["productive(Rina)"]
    assert requests_seen[0]["max_tokens"] == 25
    assert "Fill in the blank with a known predicate" in requests_seen[0]["prompt"]
    assert "drinksCoffee" in requests_seen[0]["prompt"]


def test_wire_generation_unparseable_is_dropped():
    def post(url, json=None, headers=None, timeout=None):
        return FakeResponse(completion("???!"))

    backend = WireBackend("http://server", "m", post=post)
    out = backend.generate([], (), parse_literal("a(x1)"), parse_literal("a(x1)"), Entity("x1"))
    assert out == []


def test_wire_generation_arity_conflict_is_dropped():
    def post(url, json=None, headers=None, timeout=None):
        return FakeResponse(completion("knows(Rina)"))

    backend = WireBackend("http://server", "m", post=post)
    premises = [parse_formula("knows(Rina, Sam)")]
    out = backend.generate(
        premises, (), parse_literal("knows(Rina, Sam)"),
        parse_literal("knows(Rina, Sam)"), Entity("Rina"),
    )
    assert out == []


def test_wire_retries_then_exhausts():
    calls = []
    sleeps = []

    def post(url, json=None, headers=None, timeout=None):
        calls.append(1)
        raise ConnectionError("refused")

    backend = WireBackend(
        "http://server", "m", post=post, retries=3, backoff=0.5, sleep=sleeps.append
    )
    with pytest.raises(BackendExhausted):
        backend.commonsense_score(_clause([], parse_literal("b(x1)")))
    assert len(calls) == 3
    assert sleeps == [0.5, 1.0]


def test_wire_retries_server_errors_then_succeeds():
    calls = []

    def post(url, json=None, headers=None, timeout=None):
        calls.append(1)
        if len(calls) < 3:
            return FakeResponse({}, status=503)
        return FakeResponse(completion("", top=[{"Yes": -0.2, "No": -0.9}]))

    backend = WireBackend("http://server", "m", post=post, sleep=lambda s: None)
    score = backend.relevance_score([], (), _clause([], parse_literal("b(x1)")))
    assert score > 0.5
    assert len(calls) == 3


def test_wire_malformed_response_is_backend_error():
    def post(url, json=None, headers=None, timeout=None):
        return FakeResponse({"unexpected": True})

    backend = WireBackend("http://server", "m", post=post, sleep=lambda s: None)
    with pytest.raises(BackendError):
        backend.commonsense_score(_clause([], parse_literal("b(x1)")))


def test_wire_auth_header():
    seen = {}

    def post(url, json=None, headers=None, timeout=None):
        seen.update(headers)
        return FakeResponse(completion("", top=[{"Yes": -0.2, "No": -0.9}]))

    backend = WireBackend("http://server", "m", api_token="secret", post=post)
    backend.relevance_score([], (), _clause([], parse_literal("b(x1)")))
    assert seen.get("Authorization") == "Bearer secret"
