"""Lambda-calculus composition from CCG derivations to DRSs.

Lexical templates are selected by (semtag, category) from a config file;
combinators map to application and function composition; beta reduction and
merge flattening yield one box per sentence, and sentence boxes merge into a
single document meaning.

The category-to-type map is: S -> box, N -> entity -> box,
NP -> (entity -> box) -> box, PP -> entity -> box, and functors map
argument type to result type.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from importlib import resources

from .categories import Category, parse_category
from .ccg import Derivation
from .drs import (
    Comparison,
    Concept,
    Dis,
    Drs,
    DrsError,
    Imp,
    Named,
    Not,
    Prop,
    Role,
    canonical_rename,
    check_wellformed,
    is_referent,
    quote,
    rename_referents,
)
from .layers import CorefLink, Sense

EVENT_ANCHOR = "@e"
COMPARISON_ROLES = ("EQU", "TPR", "LES")
REDUCTION_FUEL = 10_000


class CompositionError(ValueError):
    pass


# -- lambda terms --------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class TermNot:
    """Placeholder condition wrapping a not-yet-reduced subordinate box."""

    term: "Term"


@dataclass(frozen=True)
class BoxT:
    """A DRS literal inside a term; refs may still be lambda variables."""

    referents: tuple[str, ...] = ()
    conditions: tuple = ()


@dataclass(frozen=True)
class MergeT:
    left: "Term"
    right: "Term"


Term = Var | Lam | App | BoxT | MergeT


def _subst_slot(slot: str, var: str, name: str) -> str:
    return name if slot == var else slot


def _subst_cond(cond, var: str, value: "Term"):
    name = value.name if isinstance(value, Var) else None

    def slot(s: str) -> str:
        if s != var:
            return s
        if name is None:
            raise CompositionError("non-individual term in referent position")
        return name

    if isinstance(cond, Concept):
        return replace(cond, ref=slot(cond.ref))
    if isinstance(cond, Role):
        return replace(cond, ref=slot(cond.ref), arg=slot(cond.arg))
    if isinstance(cond, Named):
        return replace(cond, ref=slot(cond.ref))
    if isinstance(cond, Comparison):
        return replace(cond, left=slot(cond.left), right=slot(cond.right))
    if isinstance(cond, TermNot):
        return TermNot(subst(cond.term, var, value))
    raise CompositionError(f"cannot substitute into condition {cond!r}")


def subst(term: Term, var: str, value: Term) -> Term:
    if isinstance(term, Var):
        return value if term.name == var else term
    if isinstance(term, Lam):
        if term.var == var:  # shadowed; fresh naming makes this a no-op case
            return term
        return Lam(term.var, subst(term.body, var, value))
    if isinstance(term, App):
        return App(subst(term.fun, var, value), subst(term.arg, var, value))
    if isinstance(term, MergeT):
        return MergeT(subst(term.left, var, value), subst(term.right, var, value))
    if isinstance(term, BoxT):
        return BoxT(
            term.referents,
            tuple(_subst_cond(c, var, value) for c in term.conditions),
        )
    raise CompositionError(f"bad term {term!r}")


def beta_reduce(term: Term, fuel: int = REDUCTION_FUEL) -> Term:
    """Normal-order reduction; terms are typed by construction so this terminates."""

    def step(t: Term) -> tuple[Term, bool]:
        if isinstance(t, App):
            if isinstance(t.fun, Lam):
                return subst(t.fun.body, t.fun.var, t.arg), True
            fun, changed = step(t.fun)
            if changed:
                return App(fun, t.arg), True
            arg, changed = step(t.arg)
            return App(fun, arg), changed
        if isinstance(t, Lam):
            body, changed = step(t.body)
            return Lam(t.var, body), changed
        if isinstance(t, MergeT):
            left, changed = step(t.left)
            if changed:
                return MergeT(left, t.right), True
            right, changed = step(t.right)
            return MergeT(left, right), changed
        if isinstance(t, BoxT):
            conditions = []
            changed_any = False
            for cond in t.conditions:
                if isinstance(cond, TermNot):
                    inner, changed = step(cond.term)
                    conditions.append(TermNot(inner))
                    changed_any = changed_any or changed
                else:
                    conditions.append(cond)
            return BoxT(t.referents, tuple(conditions)), changed_any
        return t, False

    for _ in range(fuel):
        term, changed = step(term)
        if not changed:
            return term
    raise CompositionError("beta reduction fuel exhausted")


def finalize(term: Term) -> Drs:
    """Flatten merges and convert a fully reduced box term to a DRS."""
    if isinstance(term, MergeT):
        left = finalize(term.left)
        right = finalize(term.right)
        return Drs(left.referents + right.referents, left.conditions + right.conditions)
    if isinstance(term, BoxT):
        conditions = []
        for cond in term.conditions:
            if isinstance(cond, TermNot):
                conditions.append(Not(finalize(cond.term)))
            else:
                for slot in _condition_slots(cond):
                    if not is_referent(slot) and not slot.startswith('"') and slot != EVENT_ANCHOR:
                        raise CompositionError(f"unbound variable {slot!r} in condition")
                conditions.append(cond)
        return Drs(term.referents, tuple(conditions))
    raise CompositionError(f"type clash: residual term {type(term).__name__}")


def _condition_slots(cond) -> list[str]:
    if isinstance(cond, Concept):
        return [cond.ref]
    if isinstance(cond, Role):
        return [cond.ref, cond.arg]
    if isinstance(cond, Named):
        return [cond.ref]
    if isinstance(cond, Comparison):
        return [cond.left, cond.right]
    return []


def resolve_event_anchors(drs: Drs) -> Drs:
    """Bind the ``@e`` placeholder to the most recent accessible event referent."""

    def walk(box: Drs, events: list[str]) -> Drs:
        events = events + [r for r in box.referents if r.startswith("e")]
        if not events:
            anchored = any(
                EVENT_ANCHOR in _condition_slots(c)
                for c in box.conditions
                if not isinstance(c, (Not, Imp, Dis, Prop))
            )
            if anchored:
                raise CompositionError("no event referent to anchor a modifier to")
        conditions = []
        for cond in box.conditions:
            if isinstance(cond, Not):
                conditions.append(Not(walk(cond.drs, events)))
            elif isinstance(cond, Imp):
                conditions.append(Imp(walk(cond.antecedent, events), walk(cond.consequent, events)))
            elif isinstance(cond, Dis):
                conditions.append(Dis(walk(cond.left, events), walk(cond.right, events)))
            elif isinstance(cond, Prop):
                conditions.append(Prop(cond.ref, walk(cond.drs, events)))
            else:
                slots = {s: (events[-1] if s == EVENT_ANCHOR else s) for s in _condition_slots(cond)}
                if isinstance(cond, Concept):
                    conditions.append(replace(cond, ref=slots[cond.ref]))
                elif isinstance(cond, Role):
                    conditions.append(replace(cond, ref=slots[cond.ref], arg=slots[cond.arg]))
                elif isinstance(cond, Named):
                    conditions.append(replace(cond, ref=slots[cond.ref]))
                elif isinstance(cond, Comparison):
                    conditions.append(replace(cond, left=slots[cond.left], right=slots[cond.right]))
                else:
                    conditions.append(cond)
        return Drs(box.referents, tuple(conditions), box.label)

    return walk(drs, [])


# -- lexical templates ----------------------------------------------------------


@dataclass
class TokenAnnotation:
    """Everything a lexical entry needs about one token."""

    text: str
    category: Category
    semtag: str
    symbol: str
    sense: Sense | None = None
    role: str = "NONE"


class NameGen:
    """Fresh referent and variable names; records which token introduced a referent."""

    def __init__(self):
        self._counters: dict[str, int] = {}
        self._vars = itertools.count(1)
        self.origin: dict[str, int] = {}

    def referent(self, sort: str, token_index: int | None = None) -> str:
        self._counters[sort] = self._counters.get(sort, 0) + 1
        name = f"{sort}{self._counters[sort]}"
        if token_index is not None:
            self.origin[name] = token_index
        return name

    def var(self) -> str:
        return f"_v{next(self._vars)}"


def _noun_sense(ann: TokenAnnotation) -> Sense:
    return ann.sense if ann.sense is not None else Sense("n", "01")


def _verb_sense(ann: TokenAnnotation) -> Sense:
    return ann.sense if ann.sense is not None else Sense("v", "01")


def _t_concept(ann, names, idx):
    v = names.var()
    return Lam(v, BoxT((), (Concept(ann.symbol, _noun_sense(ann), v),)))


def _t_concept_np(ann, names, idx):
    p = names.var()
    x = names.referent("x", idx)
    return Lam(p, MergeT(BoxT((x,), (Concept(ann.symbol, _noun_sense(ann), x),)), App(Var(p), Var(x))))


def _t_named(concept: str):
    def build(ann, names, idx):
        p = names.var()
        x = names.referent("x", idx)
        box = BoxT((x,), (Named(x, ann.symbol), Concept(concept, Sense("n", "01"), x)))
        return Lam(p, MergeT(box, App(Var(p), Var(x))))

    return build


def _t_year(ann, names, idx):
    p = names.var()
    t = names.referent("t", idx)
    return Lam(p, MergeT(BoxT((t,), (Comparison("EQU", t, quote(ann.symbol)),)), App(Var(p), Var(t))))


def _t_quantity(ann, names, idx):
    n, p = names.var(), names.var()
    x = names.referent("x", idx)
    inner = MergeT(BoxT((x,), (Role("Quantity", x, quote(ann.symbol)),)), App(Var(n), Var(x)))
    return Lam(n, Lam(p, MergeT(inner, App(Var(p), Var(x)))))


def _t_determiner(ann, names, idx):
    n, p = names.var(), names.var()
    x = names.referent("x", idx)
    return Lam(n, Lam(p, MergeT(MergeT(BoxT((x,), ()), App(Var(n), Var(x))), App(Var(p), Var(x)))))


def _t_pronoun(ann, names, idx):
    p = names.var()
    x = names.referent("x", idx)
    return Lam(p, MergeT(BoxT((x,), ()), App(Var(p), Var(x))))


def _t_identity(ann, names, idx):
    v = names.var()
    return Lam(v, Var(v))


def _t_adjective(ann, names, idx):
    n, x = names.var(), names.var()
    sense = ann.sense if ann.sense is not None else Sense("a", "01")
    return Lam(
        n, Lam(x, MergeT(BoxT((), (Concept(ann.symbol, sense, x),)), App(Var(n), Var(x))))
    )


def _t_verb(ann, names, idx, arg_roles):
    """Event-introducing verb; arity follows the category, roles come from the
    role layer of the argument tokens (defaults Agent/Theme)."""
    arity = 0
    cat = ann.category
    while not cat.is_atomic:
        arity += 1
        cat = cat.result
    subj_role = arg_roles[0] if len(arg_roles) > 0 else "Agent"
    e = names.referent("e", idx)
    if arity == 1:  # S\NP
        p, x = names.var(), names.var()
        box = BoxT((e,), (Concept(ann.symbol, _verb_sense(ann), e), Role(subj_role, e, x)))
        return Lam(p, App(Var(p), Lam(x, box)))
    if arity == 2:  # (S\NP)/NP
        obj_role = arg_roles[1] if len(arg_roles) > 1 else "Theme"
        q, p, x, y = names.var(), names.var(), names.var(), names.var()
        box = BoxT(
            (e,),
            (
                Concept(ann.symbol, _verb_sense(ann), e),
                Role(subj_role, e, x),
                Role(obj_role, e, y),
            ),
        )
        return Lam(q, Lam(p, App(Var(p), Lam(x, App(Var(q), Lam(y, box))))))
    raise CompositionError(f"no verb template for category {ann.category}")


def _t_vp_adjunct(ann, names, idx):
    role = ann.role if ann.role not in ("NONE", *COMPARISON_ROLES) else "Time"
    q, v, p, z = names.var(), names.var(), names.var(), names.var()
    attach = App(Var(q), Lam(z, BoxT((), (Role(role, EVENT_ANCHOR, z),))))
    return Lam(q, Lam(v, Lam(p, MergeT(App(Var(v), Var(p)), attach))))


def _t_pp_prep(ann, names, idx):
    role = ann.role if ann.role not in ("NONE", *COMPARISON_ROLES) else "Location"
    q, x, z = names.var(), names.var(), names.var()
    return Lam(q, Lam(x, App(Var(q), Lam(z, BoxT((), (Role(role, x, z),))))))


def _t_negation(ann, names, idx):
    v, p = names.var(), names.var()
    return Lam(v, Lam(p, BoxT((), (TermNot(App(Var(v), Var(p))),))))


def _t_interjection(ann, names, idx):
    x = names.referent("x", idx)
    return BoxT((x,), (Concept(ann.symbol, _noun_sense(ann), x),))


_BUILDERS = {
    "concept": _t_concept,
    "concept_np": _t_concept_np,
    "year": _t_year,
    "quantity": _t_quantity,
    "determiner": _t_determiner,
    "pronoun": _t_pronoun,
    "identity": _t_identity,
    "adjective": _t_adjective,
    "vp_adjunct": _t_vp_adjunct,
    "pp_prep": _t_pp_prep,
    "negation": _t_negation,
    "interjection": _t_interjection,
}

_VERB_TEMPLATE = "verb"


class TemplateRegistry:
    """(semtag, category) -> template spec, loaded from ``templates.tsv``."""

    def __init__(self, entries: dict[tuple[str, str], str] | None = None):
        if entries is None:
            entries = {}
            text = resources.files("meaningbank.data").joinpath("templates.tsv").read_text("utf-8")
            for line in text.splitlines():
                if not line or line.startswith("#"):
                    continue
                semtag, category, spec = line.split("\t")
                entries[(semtag, str(parse_category(category)))] = spec
        self.entries = entries

    def spec_for(self, semtag: str, category: Category) -> str:
        spec = self.entries.get((semtag, str(category)))
        if spec is None:
            raise CompositionError(
                f"no lexical template for semtag {semtag!r} with category {category}"
            )
        return spec


_DEFAULT_REGISTRY: TemplateRegistry | None = None


def default_registry() -> TemplateRegistry:
    global _DEFAULT_REGISTRY
    if _DEFAULT_REGISTRY is None:
        _DEFAULT_REGISTRY = TemplateRegistry()
    return _DEFAULT_REGISTRY


def lexical_entry(
    ann: TokenAnnotation,
    names: NameGen | None = None,
    registry: TemplateRegistry | None = None,
    token_index: int | None = None,
    arg_roles: list[str] | None = None,
) -> Term:
    """Closed lambda term for one token, typed by its category."""
    names = names or NameGen()
    registry = registry or default_registry()
    spec = registry.spec_for(ann.semtag, ann.category)
    name, _, arg = spec.partition(":")
    if name == _VERB_TEMPLATE:
        return _t_verb(ann, names, token_index, arg_roles or [])
    if name == "named":
        return _t_named(arg or "person")(ann, names, token_index)
    builder = _BUILDERS.get(name)
    if builder is None:
        raise CompositionError(f"unknown template {name!r}")
    return builder(ann, names, token_index)


# -- sentence and document composition -------------------------------------------


@dataclass
class SentenceSemantics:
    drs: Drs
    referent_origin: dict[int, str] = field(default_factory=dict)


def _argument_roles(annotations: list[TokenAnnotation], registry: TemplateRegistry) -> list[str]:
    """Roles annotated on argument tokens, in sentence order.

    Tokens whose template consumes its own role tag (prepositional adjuncts)
    do not count as verb arguments.
    """
    roles = []
    for ann in annotations:
        if ann.role in ("NONE", *COMPARISON_ROLES):
            continue
        if ann.category == Category.atomic("PUNCT"):
            continue
        try:
            spec = registry.spec_for(ann.semtag, ann.category)
        except CompositionError:
            spec = ""
        if spec.partition(":")[0] in ("vp_adjunct", "pp_prep"):
            continue
        roles.append(ann.role)
    return roles


def compose_sentence(
    derivation: Derivation,
    annotations: list[TokenAnnotation],
    *,
    token_offset: int = 0,
    names: NameGen | None = None,
    registry: TemplateRegistry | None = None,
) -> SentenceSemantics:
    """Build lexical entries for the derivation leaves and compose them."""
    names = names or NameGen()
    registry = registry or default_registry()
    arg_roles = _argument_roles(annotations, registry)
    entries: dict[int, Term] = {}
    for lf in derivation.leaves():
        ann = annotations[lf.token_index]
        if ann.category == Category.atomic("PUNCT"):
            continue
        entries[lf.token_index] = lexical_entry(
            ann,
            names,
            registry,
            token_index=token_offset + lf.token_index,
            arg_roles=arg_roles,
        )
    drs = compose(derivation, entries, names=names)
    origin: dict[int, str] = {}
    for ref, tok in names.origin.items():
        origin.setdefault(tok, ref)
    _associate_concept_tokens(drs, annotations, token_offset, origin)
    return SentenceSemantics(drs=drs, referent_origin=origin)


def _associate_concept_tokens(drs, annotations, offset, origin):
    # Tokens that contributed a concept to someone else's referent (nouns under
    # determiners) still need a referent for co-reference lookups.
    def concepts(box: Drs):
        for cond in box.conditions:
            if isinstance(cond, Concept):
                yield cond
        for sub in box.subboxes():
            yield from concepts(sub)

    claimed = set(origin.values())
    for i, ann in enumerate(annotations):
        doc_index = offset + i
        if doc_index in origin:
            continue
        for cond in concepts(drs):
            if cond.symbol == ann.symbol and cond.ref not in claimed:
                origin[doc_index] = cond.ref
                claimed.add(cond.ref)
                break


def compose(derivation: Derivation, entries: dict[int, Term], *, names: NameGen | None = None) -> Drs:
    """Map combinators to semantic operations, reduce, and normalize.

    FA/BA apply the functor to its argument, FC/BC/BCX build function
    composition, and punctuation absorption keeps the semantic child.
    """
    names = names or NameGen()

    def walk(d: Derivation) -> Term:
        if d.is_leaf:
            try:
                return entries[d.token_index]
            except KeyError:
                raise CompositionError(f"no lexical entry for leaf {d.token_index}") from None
        if d.combinator == "LP":
            return walk(d.right)
        if d.combinator == "RP":
            return walk(d.left)
        left = walk(d.left)
        right = walk(d.right)
        if d.combinator == "FA":
            return App(left, right)
        if d.combinator == "BA":
            return App(right, left)
        if d.combinator == "FC":
            z = names.var()
            return Lam(z, App(left, App(right, Var(z))))
        if d.combinator in ("BC", "BCX"):
            z = names.var()
            return Lam(z, App(right, App(left, Var(z))))
        raise CompositionError(f"unknown combinator {d.combinator!r} at {d.category}")

    term = beta_reduce(walk(derivation))
    drs = resolve_event_anchors(finalize(term))
    try:
        check_wellformed(drs)
    except DrsError as exc:
        raise CompositionError(f"ill-formed composition result: {exc}") from exc
    return drs


def resolve_coreference(
    sentences: list[SentenceSemantics], coref: list[CorefLink]
) -> list[Drs]:
    """Replace each anaphor's referent with its antecedent's referent."""
    origin: dict[int, str] = {}
    for sem in sentences:
        origin.update(sem.referent_origin)
    # Union-find style chase so chains (he -> Nobel) share one final referent.
    target: dict[str, str] = {}
    for i, link in enumerate(coref):
        if link.antecedent is None:
            continue
        if link.antecedent >= i:
            raise DrsError(f"coreference link at token {i} must point backward")
        if i not in origin:
            raise DrsError(f"anaphor token {i} introduces no referent")
        if link.antecedent not in origin:
            raise DrsError(f"antecedent token {link.antecedent} introduces no referent")
        target[origin[i]] = origin[link.antecedent]

    def resolve(ref: str) -> str:
        seen = set()
        while ref in target and ref not in seen:
            seen.add(ref)
            ref = target[ref]
        return ref

    out = []
    replaced = {r: resolve(r) for r in target}
    for sem in sentences:
        drs = sem.drs
        if replaced:
            # Drop the anaphor's own introduction first, then rename its uses.
            drs = _drop_introductions(drs, set(replaced))
            drs = rename_referents(drs, replaced)
        out.append(drs)
    return out


def _drop_introductions(drs: Drs, refs: set[str]) -> Drs:
    def walk(box: Drs) -> Drs:
        conditions = []
        for cond in box.conditions:
            if isinstance(cond, Not):
                conditions.append(Not(walk(cond.drs)))
            elif isinstance(cond, Imp):
                conditions.append(Imp(walk(cond.antecedent), walk(cond.consequent)))
            elif isinstance(cond, Dis):
                conditions.append(Dis(walk(cond.left), walk(cond.right)))
            elif isinstance(cond, Prop):
                conditions.append(Prop(cond.ref, walk(cond.drs)))
            else:
                conditions.append(cond)
        kept = tuple(r for r in box.referents if r not in refs)
        return Drs(kept, tuple(conditions), box.label)

    return walk(drs)


def merge_document(sentence_drss: list[Drs]) -> Drs:
    """Union sentence boxes left-to-right into one top box, then renumber."""
    if not sentence_drss:
        raise DrsError("cannot merge zero sentences")
    referents: tuple[str, ...] = ()
    conditions: tuple = ()
    for drs in sentence_drss:
        referents = referents + drs.referents
        conditions = conditions + drs.conditions
    merged = canonical_rename(Drs(referents, conditions))
    check_wellformed(merged)
    return merged
