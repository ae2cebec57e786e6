"""Problem representation and the on-disk corpus format.

A corpus is a directory of one-JSON-document-per-problem files, with three
reserved filenames: ``kb.json`` (oracle rule base), ``config.json``
(per-corpus engine keys such as the generation prompt style) and
``exemplars.json`` (few-shot annotations for the wire backend).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ArgosError, CorpusError
from .logic import Entity, Formula, formula_entities
from .parser import parse_formula

RESERVED_FILES = {"kb.json", "config.json", "exemplars.json"}


@dataclass
class Problem:
    id: str
    entities: set[Entity]
    premises: list[Formula]
    query: Formula
    text: Optional[str] = None
    gold_label: Optional[bool] = None
    withheld_rules: list[Formula] = field(default_factory=list)

    def universe(self) -> set[Entity]:
        out = set(self.entities)
        for f in list(self.premises) + [self.query] + list(self.withheld_rules):
            out |= formula_entities(f)
        return out


def _require(data: dict, key: str, kind, path) -> object:
    if key not in data:
        raise CorpusError(f"{path}: missing required field {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise CorpusError(f"{path}: field {key!r} has the wrong type")
    return value


def load_problem_file(path, validate: bool = True) -> Problem:
    """Parse and validate one problem file.

    When ``withheld_rules`` are present the restored problem (premises plus
    withheld rules) must decide the query, and must agree with the label if
    one is given.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"{path}: unreadable problem file: {exc}") from exc
    if not isinstance(data, dict):
        raise CorpusError(f"{path}: expected a JSON object")

    pid = _require(data, "id", str, path)
    entity_names = _require(data, "entities", list, path)
    premise_texts = _require(data, "premises", list, path)
    query_text = _require(data, "query", str, path)

    signature: dict[str, int] = {}
    entities = set()
    for name in entity_names:
        if not isinstance(name, str) or not name:
            raise CorpusError(f"{path}: field 'entities' holds a bad entry {name!r}")
        entities.add(Entity(name))

    def parse(text, field_name):
        try:
            return parse_formula(
                text, signature=signature, entities=entity_names, strict=True
            )
        except ArgosError as exc:
            raise CorpusError(f"{path}: field {field_name!r}: {exc}") from exc

    premises = [parse(t, "premises") for t in premise_texts]
    query = parse(query_text, "query")

    label = data.get("label")
    gold: Optional[bool] = None
    if label is not None:
        if label not in ("true", "false"):
            raise CorpusError(f"{path}: field 'label' must be \"true\" or \"false\"")
        gold = label == "true"

    withheld = [parse(t, "withheld_rules") for t in data.get("withheld_rules", [])]

    problem = Problem(
        id=pid,
        entities=entities,
        premises=premises,
        query=query,
        text=data.get("text"),
        gold_label=gold,
        withheld_rules=withheld,
    )
    if validate and withheld:
        _check_restored(problem, path)
    return problem


def _check_restored(problem: Problem, path) -> None:
    from .logic import ground
    from .sat import ENTAILS_NOT_QUERY, ENTAILS_QUERY, sat_solve

    universe = sorted(problem.universe(), key=lambda e: e.name)
    formulas = [ground(f, universe) for f in problem.premises + problem.withheld_rules]
    query = ground(problem.query, universe)
    conclusion, _ = sat_solve(formulas, (), query, with_backbone=False)
    if conclusion.verdict not in (ENTAILS_QUERY, ENTAILS_NOT_QUERY):
        raise CorpusError(
            f"{path}: field 'withheld_rules': restoring them does not decide the query"
        )
    if problem.gold_label is not None:
        decided = conclusion.verdict == ENTAILS_QUERY
        if decided != problem.gold_label:
            raise CorpusError(
                f"{path}: field 'label': restored problem decides "
                f"{str(decided).lower()}, label says {str(problem.gold_label).lower()}"
            )


def save_problem(problem: Problem, path) -> None:
    payload = {
        "id": problem.id,
        "entities": sorted(e.name for e in problem.entities),
        "premises": [str(f) for f in problem.premises],
        "query": str(problem.query),
    }
    if problem.text is not None:
        payload["text"] = problem.text
    if problem.gold_label is not None:
        payload["label"] = "true" if problem.gold_label else "false"
    if problem.withheld_rules:
        payload["withheld_rules"] = [str(f) for f in problem.withheld_rules]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_corpus(path, validate: bool = True) -> list[Problem]:
    """Load every problem file in a directory, sorted by filename."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"{root}: not a corpus directory")
    problems = []
    for f in sorted(root.glob("*.json")):
        if f.name in RESERVED_FILES:
            continue
        problems.append(load_problem_file(f, validate=validate))
    return problems


def load_corpus_config(path) -> dict:
    """Per-corpus engine keys (generation_style, score_style), if present."""
    cfg = Path(path) / "config.json"
    if not cfg.exists():
        return {}
    try:
        data = json.loads(cfg.read_text())
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{cfg}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CorpusError(f"{cfg}: expected a JSON object")
    return data


def load_exemplars(path) -> list[dict]:
    f = Path(path) / "exemplars.json"
    if not f.exists():
        return []
    data = json.loads(f.read_text())
    if not isinstance(data, list):
        raise CorpusError(f"{f}: expected a JSON array")
    return data
