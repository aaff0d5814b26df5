"""Discourse representation structures and their flat clause form.

A DRS is a box of discourse referents and conditions; boxes nest through
negation, implication, disjunction, and propositional arguments. The clause
form is one line per referent introduction or condition and is the currency
for matching and release files.

Referent sorts are carried by the name prefix: x (entity), e (event),
t (time), s (state); box labels use b.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .layers import Sense

REFERENT_RE = re.compile(r"^[xets][0-9]+$")
BOX_RE = re.compile(r"^b[0-9]+$")
COMPARISON_OPS = ("EQU", "TPR", "LES")

_CLAUSE_TOKEN_RE = re.compile(r'"[^"]*"|\S+')


class DrsError(ValueError):
    pass


def is_referent(token: str) -> bool:
    return bool(REFERENT_RE.match(token))


def is_constant(token: str) -> bool:
    return token.startswith('"') and token.endswith('"')


def quote(text: str) -> str:
    return f'"{text}"'


@dataclass(frozen=True)
class Concept:
    symbol: str
    sense: Sense
    ref: str


@dataclass(frozen=True)
class Role:
    label: str
    ref: str
    arg: str  # referent or quoted constant


@dataclass(frozen=True)
class Named:
    ref: str
    name: str


@dataclass(frozen=True)
class Comparison:
    op: str
    left: str
    right: str

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise DrsError(f"bad comparison operator {self.op!r}")


@dataclass(frozen=True)
class Not:
    drs: "Drs"


@dataclass(frozen=True)
class Imp:
    antecedent: "Drs"
    consequent: "Drs"


@dataclass(frozen=True)
class Dis:
    left: "Drs"
    right: "Drs"


@dataclass(frozen=True)
class Prop:
    ref: str
    drs: "Drs"


Condition = Concept | Role | Named | Comparison | Not | Imp | Dis | Prop


@dataclass(frozen=True)
class Drs:
    referents: tuple[str, ...] = ()
    conditions: tuple[Condition, ...] = ()
    label: str | None = None

    def subboxes(self) -> list["Drs"]:
        out = []
        for cond in self.conditions:
            if isinstance(cond, Not):
                out.append(cond.drs)
            elif isinstance(cond, Imp):
                out.extend([cond.antecedent, cond.consequent])
            elif isinstance(cond, Dis):
                out.extend([cond.left, cond.right])
            elif isinstance(cond, Prop):
                out.append(cond.drs)
        return out


def make_drs(referents=(), conditions=(), label=None) -> Drs:
    return Drs(tuple(referents), tuple(conditions), label)


def rename_referents(drs: Drs, mapping: dict[str, str]) -> Drs:
    """Apply a referent substitution throughout a box tree."""

    def ref(r: str) -> str:
        return mapping.get(r, r)

    def walk(box: Drs) -> Drs:
        conditions = []
        for cond in box.conditions:
            if isinstance(cond, Concept):
                conditions.append(replace(cond, ref=ref(cond.ref)))
            elif isinstance(cond, Role):
                conditions.append(replace(cond, ref=ref(cond.ref), arg=ref(cond.arg)))
            elif isinstance(cond, Named):
                conditions.append(replace(cond, ref=ref(cond.ref)))
            elif isinstance(cond, Comparison):
                conditions.append(replace(cond, left=ref(cond.left), right=ref(cond.right)))
            elif isinstance(cond, Not):
                conditions.append(Not(walk(cond.drs)))
            elif isinstance(cond, Imp):
                conditions.append(Imp(walk(cond.antecedent), walk(cond.consequent)))
            elif isinstance(cond, Dis):
                conditions.append(Dis(walk(cond.left), walk(cond.right)))
            elif isinstance(cond, Prop):
                conditions.append(Prop(ref(cond.ref), walk(cond.drs)))
        return Drs(tuple(ref(r) for r in box.referents), tuple(conditions), box.label)

    return walk(drs)


def all_referents(drs: Drs) -> list[str]:
    """Referents in order of introduction across the whole box tree."""
    out = list(drs.referents)
    for sub in drs.subboxes():
        out.extend(all_referents(sub))
    return out


def canonical_rename(drs: Drs) -> Drs:
    """Renumber boxes and referents (b1, x1, e1, t1 ...) in introduction order."""
    counters: dict[str, int] = {}
    mapping: dict[str, str] = {}
    for r in all_referents(drs):
        if r in mapping:
            raise DrsError(f"referent {r} introduced twice")
        sort = r[0]
        counters[sort] = counters.get(sort, 0) + 1
        mapping[r] = f"{sort}{counters[sort]}"
    renamed = rename_referents(drs, mapping)
    box_counter = 0

    def relabel(box: Drs) -> Drs:
        nonlocal box_counter
        box_counter += 1
        label = f"b{box_counter}"
        conditions = []
        for cond in box.conditions:
            if isinstance(cond, Not):
                conditions.append(Not(relabel(cond.drs)))
            elif isinstance(cond, Imp):
                conditions.append(Imp(relabel(cond.antecedent), relabel(cond.consequent)))
            elif isinstance(cond, Dis):
                conditions.append(Dis(relabel(cond.left), relabel(cond.right)))
            elif isinstance(cond, Prop):
                conditions.append(Prop(cond.ref, relabel(cond.drs)))
            else:
                conditions.append(cond)
        return Drs(box.referents, tuple(conditions), label)

    return relabel(renamed)


def check_wellformed(drs: Drs) -> None:
    """Verify every referent used in a condition is accessible where it is used."""

    def used(cond: Condition) -> list[str]:
        if isinstance(cond, Concept):
            return [cond.ref]
        if isinstance(cond, Role):
            return [cond.ref] + ([cond.arg] if is_referent(cond.arg) else [])
        if isinstance(cond, Named):
            return [cond.ref]
        if isinstance(cond, Comparison):
            return [r for r in (cond.left, cond.right) if is_referent(r)]
        if isinstance(cond, Prop):
            return [cond.ref]
        return []

    def walk(box: Drs, env: frozenset[str]) -> None:
        env = env | frozenset(box.referents)
        for cond in box.conditions:
            for r in used(cond):
                if r not in env:
                    raise DrsError(f"referent {r} used but not accessible")
            if isinstance(cond, Not):
                walk(cond.drs, env)
            elif isinstance(cond, Imp):
                walk(cond.antecedent, env)
                walk(cond.consequent, env | frozenset(all_referents(cond.antecedent)))
            elif isinstance(cond, Dis):
                walk(cond.left, env)
                walk(cond.right, env)
            elif isinstance(cond, Prop):
                walk(cond.drs, env)

    walk(drs, frozenset())


def to_clauses(drs: Drs) -> list[str]:
    """Flat clause lines for a canonically renamed copy of the DRS."""
    canon = canonical_rename(drs)
    lines: list[str] = []

    def emit(box: Drs) -> str:
        label = box.label
        for r in box.referents:
            lines.append(f"{label} REF {r}")
        for cond in box.conditions:
            if isinstance(cond, Concept):
                lines.append(f'{label} {cond.symbol} "{cond.sense}" {cond.ref}')
            elif isinstance(cond, Role):
                lines.append(f"{label} {cond.label} {cond.ref} {cond.arg}")
            elif isinstance(cond, Named):
                lines.append(f'{label} Named {cond.ref} "{cond.name}"')
            elif isinstance(cond, Comparison):
                lines.append(f"{label} {cond.op} {cond.left} {cond.right}")
            elif isinstance(cond, Not):
                lines.append(f"{label} NOT {emit_sub(cond.drs)}")
            elif isinstance(cond, Imp):
                lines.append(f"{label} IMP {emit_sub(cond.antecedent)} {emit_sub(cond.consequent)}")
            elif isinstance(cond, Dis):
                lines.append(f"{label} DIS {emit_sub(cond.left)} {emit_sub(cond.right)}")
            elif isinstance(cond, Prop):
                lines.append(f"{label} PRP {cond.ref} {emit_sub(cond.drs)}")
        return label

    def emit_sub(box: Drs) -> str:
        # Record the operator clause first, then the subordinate box contents.
        return box.label

    def emit_tree(box: Drs) -> None:
        emit(box)
        for sub in box.subboxes():
            emit_tree(sub)

    emit_tree(canon)
    return lines


def clauses_to_drs(lines: list[str]) -> Drs:
    """Rebuild a box tree from clause lines (inverse of :func:`to_clauses`)."""
    boxes: dict[str, dict] = {}
    referenced: set[str] = set()

    def box_entry(label: str) -> dict:
        return boxes.setdefault(label, {"referents": [], "conditions": []})

    for line in lines:
        parts = _CLAUSE_TOKEN_RE.findall(line.strip())
        if not parts:
            continue
        if len(parts) < 3:
            raise DrsError(f"malformed clause {line!r}")
        label, op = parts[0], parts[1]
        if not BOX_RE.match(label):
            raise DrsError(f"bad box label in clause {line!r}")
        entry = box_entry(label)
        args = parts[2:]
        if op == "REF":
            entry["referents"].append(args[0])
        elif op == "NOT":
            referenced.add(args[0])
            entry["conditions"].append(("NOT", args[0]))
        elif op == "IMP":
            referenced.update(args)
            entry["conditions"].append(("IMP", args[0], args[1]))
        elif op == "DIS":
            referenced.update(args)
            entry["conditions"].append(("DIS", args[0], args[1]))
        elif op == "PRP":
            referenced.add(args[1])
            entry["conditions"].append(("PRP", args[0], args[1]))
        elif op == "Named":
            entry["conditions"].append(Named(args[0], args[1].strip('"')))
        elif op in COMPARISON_OPS:
            entry["conditions"].append(Comparison(op, args[0], args[1]))
        elif len(args) == 2 and is_constant(args[0]):
            entry["conditions"].append(Concept(op, Sense.parse(args[0].strip('"')), args[1]))
        elif len(args) == 2:
            entry["conditions"].append(Role(op, args[0], args[1]))
        else:
            raise DrsError(f"malformed clause {line!r}")

    def build(label: str) -> Drs:
        entry = boxes.get(label)
        if entry is None:
            raise DrsError(f"clause references unknown box {label}")
        conditions = []
        for cond in entry["conditions"]:
            if isinstance(cond, tuple):
                kind = cond[0]
                if kind == "NOT":
                    conditions.append(Not(build(cond[1])))
                elif kind == "IMP":
                    conditions.append(Imp(build(cond[1]), build(cond[2])))
                elif kind == "DIS":
                    conditions.append(Dis(build(cond[1]), build(cond[2])))
                elif kind == "PRP":
                    conditions.append(Prop(cond[1], build(cond[2])))
            else:
                conditions.append(cond)
        return Drs(tuple(entry["referents"]), tuple(conditions), label)

    roots = [label for label in boxes if label not in referenced]
    if len(roots) != 1:
        raise DrsError(f"clause set has {len(roots)} root boxes, expected 1")
    return build(roots[0])
