"""Knowledge-representation data types.

Concept descriptions form a small immutable AST; a :class:`KnowledgeBase`
bundles terminological axioms, assertions, role declarations, non-logical
annotations and Horn rules.  Everything here is a frozen value object.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, NamedTuple, Union

from .errors import KnowledgeBaseError

if TYPE_CHECKING:
    from .rules import Rule

SOURCES = ("myth", "fact", "background", "inferred")
COMPARATORS = (">", ">=", "<", "<=")


def _check_name(kind: str, name: str) -> None:
    if not isinstance(name, str) or not name or any(ch.isspace() for ch in name):
        raise ValueError(f"invalid {kind} name: {name!r}")


# ---------------------------------------------------------------------------
# Concept expressions


class Concept:
    """Marker base class for concept expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Concept):
    name: str

    def __post_init__(self) -> None:
        _check_name("concept", self.name)


@dataclass(frozen=True)
class Top(Concept):
    pass


@dataclass(frozen=True)
class Bottom(Concept):
    pass


TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True)
class Not(Concept):
    operand: Concept


def _operand_tuple(obj, min_len: int) -> None:
    ops = tuple(obj.operands)
    if len(ops) < min_len:
        raise ValueError(f"{type(obj).__name__} needs at least {min_len} operands")
    object.__setattr__(obj, "operands", ops)


@dataclass(frozen=True)
class And(Concept):
    operands: tuple[Concept, ...]

    def __post_init__(self) -> None:
        _operand_tuple(self, 2)


@dataclass(frozen=True)
class Or(Concept):
    operands: tuple[Concept, ...]

    def __post_init__(self) -> None:
        _operand_tuple(self, 2)


@dataclass(frozen=True)
class Exists(Concept):
    role: str
    filler: Concept

    def __post_init__(self) -> None:
        _check_name("role", self.role)


@dataclass(frozen=True)
class ForAll(Concept):
    role: str
    filler: Concept

    def __post_init__(self) -> None:
        _check_name("role", self.role)


@dataclass(frozen=True)
class OneOf(Concept):
    individuals: tuple[str, ...]

    def __post_init__(self) -> None:
        inds = tuple(self.individuals)
        if not inds:
            raise ValueError("OneOf needs at least one individual")
        for ind in inds:
            _check_name("individual", ind)
        object.__setattr__(self, "individuals", inds)


@dataclass(frozen=True)
class Facet(Concept):
    """Integer comparison on an attribute value, e.g. ``(> hasAge 65)``."""

    attribute: str
    op: str
    value: int

    def __post_init__(self) -> None:
        _check_name("attribute", self.attribute)
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError("facet constants must be integers")

    def holds(self, v: int) -> bool:
        if self.op == ">":
            return v > self.value
        if self.op == ">=":
            return v >= self.value
        if self.op == "<":
            return v < self.value
        return v <= self.value


def conj(*cs: Concept) -> Concept:
    return cs[0] if len(cs) == 1 else And(cs)


def disj(*cs: Concept) -> Concept:
    return cs[0] if len(cs) == 1 else Or(cs)


_FACET_COMPLEMENT = {">": "<=", "<=": ">", ">=": "<", "<": ">="}


def negate_facet(f: Facet) -> Facet:
    """Integer complement of a facet: not (> n) is (<= n), and so on."""
    return Facet(f.attribute, _FACET_COMPLEMENT[f.op], f.value)


def nnf(c: Concept) -> Concept:
    """Negation normal form.

    Negation ends up only directly above atoms and nominals; negated facets
    are replaced by their integer complement.
    """
    if isinstance(c, (Atom, Top, Bottom, OneOf, Facet)):
        return c
    if isinstance(c, And):
        return And(tuple(nnf(x) for x in c.operands))
    if isinstance(c, Or):
        return Or(tuple(nnf(x) for x in c.operands))
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, ForAll):
        return ForAll(c.role, nnf(c.filler))
    if isinstance(c, Not):
        return _nnf_not(c.operand)
    raise TypeError(f"not a concept: {c!r}")


def _nnf_not(c: Concept) -> Concept:
    if isinstance(c, (Atom, OneOf)):
        return Not(c)
    if isinstance(c, Top):
        return BOTTOM
    if isinstance(c, Bottom):
        return TOP
    if isinstance(c, Facet):
        return negate_facet(c)
    if isinstance(c, Not):
        return nnf(c.operand)
    if isinstance(c, And):
        return Or(tuple(_nnf_not(x) for x in c.operands))
    if isinstance(c, Or):
        return And(tuple(_nnf_not(x) for x in c.operands))
    if isinstance(c, Exists):
        return ForAll(c.role, _nnf_not(c.filler))
    if isinstance(c, ForAll):
        return Exists(c.role, _nnf_not(c.filler))
    raise TypeError(f"not a concept: {c!r}")


def subconcepts(c: Concept) -> Iterator[Concept]:
    """Pre-order walk over c and all nested concept expressions."""
    yield c
    if isinstance(c, Not):
        yield from subconcepts(c.operand)
    elif isinstance(c, (And, Or)):
        for x in c.operands:
            yield from subconcepts(x)
    elif isinstance(c, (Exists, ForAll)):
        yield from subconcepts(c.filler)


# ---------------------------------------------------------------------------
# Axioms and assertions

_prov = dict(default="background", compare=False)


@dataclass(frozen=True)
class GCI:
    sub: Concept
    sup: Concept
    source: str = field(**_prov)


@dataclass(frozen=True)
class Equiv:
    left: Concept
    right: Concept
    source: str = field(**_prov)


@dataclass(frozen=True)
class Disjoint:
    left: Concept
    right: Concept
    source: str = field(**_prov)


Axiom = Union[GCI, Equiv, Disjoint]


def expand_axiom(ax: Axiom) -> tuple[GCI, ...]:
    """Rewrite an axiom as the equivalent list of inclusions."""
    if isinstance(ax, GCI):
        return (ax,)
    if isinstance(ax, Equiv):
        return (GCI(ax.left, ax.right, ax.source), GCI(ax.right, ax.left, ax.source))
    if isinstance(ax, Disjoint):
        return (GCI(ax.left, Not(ax.right), ax.source),)
    raise TypeError(f"not an axiom: {ax!r}")


@dataclass(frozen=True)
class Derivation:
    """How a rule produced an inferred assertion."""

    rule: str
    bindings: tuple[tuple[str, str], ...]
    premises: tuple["Assertion", ...] = ()

    def describe(self) -> str:
        bound = ", ".join(f"{var} = {ind}" for var, ind in self.bindings)
        return f"rule {self.rule} with {bound}" if bound else f"rule {self.rule}"


@dataclass(frozen=True)
class ConceptAssertion:
    individual: str
    concept: Concept
    source: str = field(**_prov)
    derivation: Derivation | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _check_name("individual", self.individual)


@dataclass(frozen=True)
class RoleAssertion:
    role: str
    subject: str
    object: str
    source: str = field(**_prov)

    def __post_init__(self) -> None:
        _check_name("role", self.role)
        _check_name("individual", self.subject)
        _check_name("individual", self.object)


@dataclass(frozen=True)
class DataAssertion:
    attribute: str
    individual: str
    value: int
    source: str = field(**_prov)

    def __post_init__(self) -> None:
        _check_name("attribute", self.attribute)
        _check_name("individual", self.individual)
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError("data values must be integers")


Assertion = Union[ConceptAssertion, RoleAssertion, DataAssertion]
Statement = Union[GCI, Equiv, Disjoint, ConceptAssertion, RoleAssertion, DataAssertion]


def with_source(stmt, source: str):
    """Copy of a statement carrying a different provenance tag."""
    return dataclasses.replace(stmt, source=source)


@dataclass(frozen=True)
class RoleDecl:
    name: str
    parents: frozenset[str] = frozenset()
    inverse_of: str | None = None

    def __post_init__(self) -> None:
        _check_name("role", self.name)
        object.__setattr__(self, "parents", frozenset(self.parents))


class Annotation(NamedTuple):
    individual: str
    key: str
    value: str


ANNOTATION_KEYS = ("modality", "truth-value", "quantifier")


# ---------------------------------------------------------------------------
# Knowledge base


def _statement_roles(stmt) -> Iterator[str]:
    if isinstance(stmt, RoleAssertion):
        yield stmt.role
        return
    if isinstance(stmt, ConceptAssertion):
        concepts: Iterable[Concept] = (stmt.concept,)
    elif isinstance(stmt, (GCI,)):
        concepts = (stmt.sub, stmt.sup)
    elif isinstance(stmt, (Equiv, Disjoint)):
        concepts = (stmt.left, stmt.right)
    else:
        return
    for c in concepts:
        for sc in subconcepts(c):
            if isinstance(sc, (Exists, ForAll)):
                yield sc.role


def _merge_role_decls(decls: Iterable[RoleDecl], mentioned: Iterable[str]) -> tuple[RoleDecl, ...]:
    parents: dict[str, set[str]] = {}
    inverse: dict[str, str | None] = {}

    def touch(name: str) -> None:
        if name not in parents:
            parents[name] = set()
            inverse[name] = None

    def set_inverse(r: str, s: str) -> None:
        if inverse[r] is not None and inverse[r] != s:
            raise KnowledgeBaseError(
                f"role {r} declared inverse of both {inverse[r]} and {s}")
        inverse[r] = s

    for d in decls:
        touch(d.name)
        parents[d.name] |= d.parents
        for p in sorted(d.parents):
            touch(p)
        if d.inverse_of is not None:
            touch(d.inverse_of)
            set_inverse(d.name, d.inverse_of)
    for name in mentioned:
        touch(name)
    for r in list(parents):
        s = inverse[r]
        if s is not None:
            set_inverse(s, r)

    # parent relation must be acyclic
    state: dict[str, int] = {}

    def visit(r: str, path: list[str]) -> None:
        state[r] = 1
        for p in sorted(parents[r]):
            if state.get(p) == 1:
                cycle = " -> ".join(path[path.index(p):] + [p]) if p in path else f"{r} -> {p}"
                raise KnowledgeBaseError(f"cyclic role hierarchy: {cycle}")
            if p not in state:
                visit(p, path + [p])
        state[r] = 2

    for r in parents:
        if r not in state:
            visit(r, [r])

    return tuple(RoleDecl(r, frozenset(parents[r]), inverse[r]) for r in parents)


@dataclass(frozen=True)
class KnowledgeBase:
    """TBox, ABox, RBox plus annotations and rules.

    Role names mentioned anywhere are auto-declared, inverse declarations are
    closed symmetrically, and duplicate declarations for one role are merged.
    """

    tbox: tuple[Axiom, ...] = ()
    abox: tuple[Assertion, ...] = ()
    rbox: tuple[RoleDecl, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    rules: tuple["Rule", ...] = ()

    def __post_init__(self) -> None:
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("tbox", tuple(self.tbox))
        set_("abox", tuple(self.abox))
        set_("annotations", tuple(Annotation(*a) for a in self.annotations))
        set_("rules", tuple(self.rules))
        mentioned: list[str] = []
        for stmt in self.tbox + self.abox:
            mentioned.extend(_statement_roles(stmt))
        for rule in self.rules:
            mentioned.extend(rule.role_names())
        set_("rbox", _merge_role_decls(self.rbox, mentioned))

    # -- signature -------------------------------------------------------
    @property
    def statements(self) -> tuple[Statement, ...]:
        return self.tbox + self.abox

    def concept_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for stmt in self.statements:
            for c in _statement_concepts(stmt):
                for sc in subconcepts(c):
                    if isinstance(sc, Atom):
                        seen.setdefault(sc.name)
        return list(seen)

    def individuals(self) -> list[str]:
        seen: dict[str, None] = {}
        for a in self.abox:
            if isinstance(a, RoleAssertion):
                seen.setdefault(a.subject)
                seen.setdefault(a.object)
            else:
                seen.setdefault(a.individual)
        for stmt in self.statements:
            for c in _statement_concepts(stmt):
                for sc in subconcepts(c):
                    if isinstance(sc, OneOf):
                        for i in sc.individuals:
                            seen.setdefault(i)
        return list(seen)

    def attributes(self) -> list[str]:
        seen: dict[str, None] = {}
        for stmt in self.statements:
            if isinstance(stmt, DataAssertion):
                seen.setdefault(stmt.attribute)
            for c in _statement_concepts(stmt):
                for sc in subconcepts(c):
                    if isinstance(sc, Facet):
                        seen.setdefault(sc.attribute)
        return list(seen)

    def role_names(self) -> list[str]:
        return [d.name for d in self.rbox]

    def role(self, name: str) -> RoleDecl:
        for d in self.rbox:
            if d.name == name:
                return d
        raise KeyError(name)

    def annotations_for(self, individual: str) -> dict[str, str]:
        return {a.key: a.value for a in self.annotations if a.individual == individual}

    # -- construction helpers ----------------------------------------------
    def replace(self, **changes) -> "KnowledgeBase":
        return dataclasses.replace(self, **changes)

    def with_statements(self, statements: Iterable[Statement]) -> "KnowledgeBase":
        """Same RBox, with TBox/ABox replaced by the given statements."""
        tbox, abox = [], []
        for s in statements:
            (tbox if isinstance(s, (GCI, Equiv, Disjoint)) else abox).append(s)
        return KnowledgeBase(tbox=tbox, abox=abox, rbox=self.rbox)

    def add(self, *statements: Statement) -> "KnowledgeBase":
        return self.with_all(statements)

    def with_all(self, statements: Iterable[Statement]) -> "KnowledgeBase":
        tbox, abox = list(self.tbox), list(self.abox)
        for s in statements:
            (tbox if isinstance(s, (GCI, Equiv, Disjoint)) else abox).append(s)
        return self.replace(tbox=tuple(tbox), abox=tuple(abox))


def _statement_concepts(stmt) -> tuple[Concept, ...]:
    if isinstance(stmt, GCI):
        return (stmt.sub, stmt.sup)
    if isinstance(stmt, (Equiv, Disjoint)):
        return (stmt.left, stmt.right)
    if isinstance(stmt, ConceptAssertion):
        return (stmt.concept,)
    return ()


def is_axiom(stmt) -> bool:
    return isinstance(stmt, (GCI, Equiv, Disjoint))
