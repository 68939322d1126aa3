"""Forward chaining for SWRL-style Horn rules over the ABox.

Matching is purely syntactic: a body atom ``(?y Elderly)`` matches an
asserted (or previously inferred) ``y : Elderly`` fact and never a fact that
only follows from the TBox.  Rule variables may bind to the same individual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .errors import ResourceLimitError, UnsafeRuleError
from .model import Atom, ConceptAssertion, Derivation, KnowledgeBase, RoleAssertion

DEFAULT_MAX_INFERRED = 10_000


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[Var, str]


@dataclass(frozen=True)
class ConceptAtom:
    term: Term
    concept: str


@dataclass(frozen=True)
class RoleAtom:
    role: str
    subject: Term
    object: Term


RuleAtom = Union[ConceptAtom, RoleAtom]


def QualityAtom(term: Term, quality: str, role: str = "hasQuality") -> RoleAtom:
    """``(?x Only hasQuality)``: the term has the named quality individual."""
    return RoleAtom(role, term, quality)


def _terms(atom: RuleAtom) -> tuple[Term, ...]:
    if isinstance(atom, ConceptAtom):
        return (atom.term,)
    return (atom.subject, atom.object)


@dataclass(frozen=True)
class Rule:
    name: str
    body: tuple[RuleAtom, ...]
    head: ConceptAtom

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))
        if not isinstance(self.head, ConceptAtom):
            raise TypeError("rule heads must be concept atoms")

    def body_variables(self) -> list[Var]:
        seen: dict[Var, None] = {}
        for atom in self.body:
            for t in _terms(atom):
                if isinstance(t, Var):
                    seen.setdefault(t)
        return list(seen)

    def check_safe(self) -> None:
        bound = set(self.body_variables())
        for t in _terms(self.head):
            if isinstance(t, Var) and t not in bound:
                raise UnsafeRuleError(f"rule {self.name}: head variable {t} is not bound in the body")

    def role_names(self) -> list[str]:
        return [a.role for a in self.body if isinstance(a, RoleAtom)]


class _FactIndex:
    def __init__(self, kb: KnowledgeBase):
        self.concepts: dict[str, dict[str, ConceptAssertion]] = {}
        self.roles: dict[str, list[RoleAssertion]] = {}
        for a in kb.abox:
            if isinstance(a, ConceptAssertion) and isinstance(a.concept, Atom):
                self.concepts.setdefault(a.concept.name, {}).setdefault(a.individual, a)
            elif isinstance(a, RoleAssertion):
                self.roles.setdefault(a.role, []).append(a)

    def has(self, ind: str, concept: str) -> bool:
        return ind in self.concepts.get(concept, {})

    def add(self, fact: ConceptAssertion) -> None:
        self.concepts.setdefault(fact.concept.name, {})[fact.individual] = fact


def _unify(term: Term, value: str, env: dict[Var, str]) -> dict[Var, str] | None:
    if isinstance(term, Var):
        bound = env.get(term)
        if bound is None:
            return {**env, term: value}
        return env if bound == value else None
    return env if term == value else None


def _matches(body: Sequence[RuleAtom], index: _FactIndex, env: dict[Var, str],
             premises: tuple) -> Iterator[tuple[dict[Var, str], tuple]]:
    if not body:
        yield env, premises
        return
    atom, rest = body[0], body[1:]
    if isinstance(atom, ConceptAtom):
        facts = index.concepts.get(atom.concept, {})
        if not isinstance(atom.term, Var) or atom.term in env:
            ind = env[atom.term] if isinstance(atom.term, Var) else atom.term
            if ind in facts:
                yield from _matches(rest, index, env, premises + (facts[ind],))
            return
        for ind, fact in list(facts.items()):
            yield from _matches(rest, index, {**env, atom.term: ind}, premises + (fact,))
    else:
        for fact in list(index.roles.get(atom.role, ())):
            e = _unify(atom.subject, fact.subject, env)
            if e is not None:
                e = _unify(atom.object, fact.object, e)
            if e is not None:
                yield from _matches(rest, index, e, premises + (fact,))


def apply_rules(kb: KnowledgeBase, rules: Sequence[Rule] | None = None, *,
                max_inferred: int = DEFAULT_MAX_INFERRED) -> KnowledgeBase:
    """Saturate the ABox under the rules and return the extended knowledge base.

    New assertions are appended in derivation order with source ``inferred``
    and a :class:`Derivation` recording the rule and its bindings.
    """
    rules = kb.rules if rules is None else tuple(rules)
    for rule in rules:
        rule.check_safe()
    if not rules:
        return kb

    index = _FactIndex(kb)
    inferred: list[ConceptAssertion] = []
    changed = True
    while changed:
        changed = False
        for rule in rules:
            variables = rule.body_variables()
            for env, premises in list(_matches(rule.body, index, {}, ())):
                term = rule.head.term
                ind = env[term] if isinstance(term, Var) else term
                if index.has(ind, rule.head.concept):
                    continue
                if len(inferred) >= max_inferred:
                    raise ResourceLimitError(
                        f"rule application exceeded {max_inferred} inferred assertions", max_inferred)
                bindings = tuple((str(v), env[v]) for v in variables)
                fact = ConceptAssertion(
                    ind, Atom(rule.head.concept), source="inferred",
                    derivation=Derivation(rule.name, bindings, premises))
                index.add(fact)
                inferred.append(fact)
                changed = True
    if not inferred:
        return kb
    return kb.replace(abox=kb.abox + tuple(inferred))
