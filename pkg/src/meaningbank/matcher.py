"""Best-F matching of two DRSs in clause form.

Searches one-to-one, sort-respecting variable mappings (boxes to boxes,
referents to referents of the same sort) maximizing the number of shared
clauses, by hill-climbing from a concept-based initialization plus seeded
random restarts. Deterministic for a fixed seed.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

_CLAUSE_TOKEN_RE = re.compile(r'"[^"]*"|\S+')
_VAR_RE = re.compile(r"^[bxets][0-9]+$")


class MatchError(ValueError):
    pass


@dataclass
class MatchResult:
    precision: float
    recall: float
    f_score: float
    matched: int
    mapping: dict[str, str] = field(default_factory=dict)


def parse_clauses(lines: list[str]) -> list[tuple[str, ...]]:
    clauses = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        parts = tuple(_CLAUSE_TOKEN_RE.findall(line))
        if len(parts) < 3:
            raise MatchError(f"malformed clause {line!r}")
        clauses.append(parts)
    # Clause sets: duplicates carry no extra weight.
    seen = set()
    unique = []
    for c in clauses:
        if c not in seen:
            seen.add(c)
            unique.append(c)
    return unique


def _variables(clauses: list[tuple[str, ...]]) -> dict[str, list[str]]:
    by_sort: dict[str, list[str]] = {}
    seen = set()
    for clause in clauses:
        for tok in clause:
            if tok not in seen and _VAR_RE.match(tok):
                seen.add(tok)
                by_sort.setdefault(tok[0], []).append(tok)
    return by_sort


def _evaluate(clauses_a, b_set, mapping) -> int:
    matched = 0
    for clause in clauses_a:
        image = []
        ok = True
        for tok in clause:
            if _VAR_RE.match(tok):
                target = mapping.get(tok)
                if target is None:
                    ok = False
                    break
                image.append(target)
            else:
                image.append(tok)
        if ok and tuple(image) in b_set:
            matched += 1
    return matched


def _smart_init(clauses_a, clauses_b, vars_a, vars_b) -> dict[str, str | None]:
    """Pair variables that share a concept symbol, a name, or a position."""

    def anchors(clauses):
        keyed: dict[tuple, list[str]] = {}
        for clause in clauses:
            if len(clause) == 4 and clause[2].startswith('"'):
                keyed.setdefault(("concept", clause[1], clause[2]), []).append(clause[3])
            elif len(clause) == 4 and clause[1] == "Named":
                keyed.setdefault(("named", clause[3]), []).append(clause[2])
        return keyed

    mapping: dict[str, str | None] = {v: None for vs in vars_a.values() for v in vs}
    used: set[str] = set()
    a_anchors, b_anchors = anchors(clauses_a), anchors(clauses_b)
    for key in sorted(a_anchors, key=repr):
        for a_var, b_var in zip(a_anchors[key], b_anchors.get(key, [])):
            if mapping.get(a_var) is None and b_var not in used and a_var[0] == b_var[0]:
                mapping[a_var] = b_var
                used.add(b_var)
    for sort, a_vars in sorted(vars_a.items()):
        pool = [v for v in vars_b.get(sort, []) if v not in used]
        for a_var in a_vars:
            if mapping[a_var] is None and pool:
                mapping[a_var] = pool.pop(0)
                used.add(mapping[a_var])
    return mapping


def _random_init(vars_a, vars_b, rng) -> dict[str, str | None]:
    mapping: dict[str, str | None] = {}
    for sort, a_vars in sorted(vars_a.items()):
        pool = list(vars_b.get(sort, []))
        rng.shuffle(pool)
        for a_var in a_vars:
            mapping[a_var] = pool.pop(0) if pool else None
    return mapping


def _climb(clauses_a, b_set, vars_a, vars_b, mapping) -> tuple[int, dict]:
    """Best-improvement hill climbing over remaps and swaps."""
    score = _evaluate(clauses_a, b_set, mapping)
    inverse = {b: a for a, b in mapping.items() if b is not None}
    while True:
        best_gain = 0
        best_move = None
        for a_var in sorted(mapping):
            sort = a_var[0]
            current = mapping[a_var]
            for b_var in [*vars_b.get(sort, []), None]:
                if b_var == current:
                    continue
                holder = inverse.get(b_var) if b_var is not None else None
                trial = dict(mapping)
                trial[a_var] = b_var
                if holder is not None:
                    trial[holder] = current
                gain = _evaluate(clauses_a, b_set, trial) - score
                if gain > best_gain:
                    best_gain = gain
                    best_move = (a_var, b_var, holder, current)
        if best_move is None:
            return score, mapping
        a_var, b_var, holder, current = best_move
        mapping = dict(mapping)
        mapping[a_var] = b_var
        if holder is not None:
            mapping[holder] = current
        inverse = {b: a for a, b in mapping.items() if b is not None}
        score += best_gain


def match(
    clauses_a: list[str] | list[tuple[str, ...]],
    clauses_b: list[str] | list[tuple[str, ...]],
    restarts: int = 20,
    seed: int = 0,
) -> MatchResult:
    """Best variable mapping between two clause sets, scored by F over clauses."""
    if restarts < 1:
        raise MatchError("restarts must be >= 1")
    a = parse_clauses(clauses_a) if clauses_a and isinstance(clauses_a[0], str) else list(clauses_a)
    b = parse_clauses(clauses_b) if clauses_b and isinstance(clauses_b[0], str) else list(clauses_b)
    if not a or not b:
        return MatchResult(0.0, 0.0, 0.0, 0, {})
    vars_a, vars_b = _variables(a), _variables(b)
    b_set = set(b)
    best_score = -1
    best_mapping: dict[str, str] = {}
    for restart in range(restarts):
        if restart == 0:
            init = _smart_init(a, b, vars_a, vars_b)
        else:
            init = _random_init(vars_a, vars_b, random.Random((seed, restart)))
        score, mapping = _climb(a, b_set, vars_a, vars_b, init)
        if score > best_score:
            best_score = score
            best_mapping = mapping
    matched = best_score
    precision = matched / len(a)
    recall = matched / len(b)
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    clean = {k: v for k, v in sorted(best_mapping.items()) if v is not None}
    return MatchResult(precision, recall, f, matched, clean)
