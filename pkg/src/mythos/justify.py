"""Minimal justifications for unsatisfiable concepts and inconsistent KBs,
and their rendering as plain English."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import PreconditionError
from .krss import format_statement
from .model import (
    GCI, And, Atom, Bottom, Concept, ConceptAssertion, DataAssertion, Disjoint, Equiv, Exists,
    Facet, ForAll, KnowledgeBase, Not, OneOf, Or, RoleAssertion, Top, is_axiom,
)
from .tableau import DEFAULT_NODE_CAP, Reasoner

UNSAT = "unsat-concept"
INCONSISTENT = "abox-inconsistency"


@dataclass(frozen=True)
class Justification:
    kind: str
    axioms: tuple = ()
    assertions: tuple = ()
    concept: str | None = None

    @property
    def statements(self) -> tuple:
        return self.axioms + self.assertions

    def to_krss(self) -> list[str]:
        return [format_statement(s) for s in self.statements]

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.concept is not None:
            out["concept"] = self.concept
        out["statements"] = self.to_krss()
        inferred = [
            {"statement": format_statement(a), "rule": a.derivation.rule,
             "bindings": dict(a.derivation.bindings)}
            for a in self.assertions if getattr(a, "derivation", None) is not None
        ]
        if inferred:
            out["derivations"] = inferred
        return out

    def as_kb(self, rbox=()) -> KnowledgeBase:
        return KnowledgeBase(tbox=self.axioms, abox=self.assertions, rbox=rbox)


def shrink(statements: Sequence, defective: Callable[[list], bool]) -> list:
    """Deletion-based reduction to a minimal defective subset.

    Windows of halving size are removed while the defect persists; the final
    single-statement pass makes the result minimal because defects are
    monotone in the statement set.
    """
    keep = list(statements)
    window = max(1, len(keep) // 2)
    while True:
        i = 0
        while i < len(keep):
            candidate = keep[:i] + keep[i + window:]
            if defective(candidate):
                keep = candidate
            else:
                i += window
        if window == 1:
            return keep
        window //= 2


def _unsat_oracle(kb: KnowledgeBase, concept: str, node_cap: int):
    def defective(stmts):
        sub = KnowledgeBase(tbox=stmts, rbox=kb.rbox)
        return not Reasoner(sub, node_cap).is_satisfiable(Atom(concept))
    return defective


def _inconsistency_oracle(kb: KnowledgeBase, node_cap: int):
    def defective(stmts):
        sub = KnowledgeBase(tbox=[s for s in stmts if is_axiom(s)],
                            abox=[s for s in stmts if not is_axiom(s)], rbox=kb.rbox)
        return not Reasoner(sub, node_cap).is_consistent()
    return defective


def justify_unsat(kb: KnowledgeBase, concept: str, *, node_cap: int = DEFAULT_NODE_CAP) -> Justification:
    """One minimal set of TBox axioms making ``concept`` unsatisfiable."""
    defective = _unsat_oracle(kb, concept, node_cap)
    if not defective(list(kb.tbox)):
        raise PreconditionError(f"concept {concept} is satisfiable")
    return Justification(UNSAT, axioms=tuple(shrink(kb.tbox, defective)), concept=concept)


def justify_inconsistency(kb: KnowledgeBase, *, node_cap: int = DEFAULT_NODE_CAP) -> Justification:
    """One minimal set of axioms and assertions with no model."""
    defective = _inconsistency_oracle(kb, node_cap)
    stmts = list(kb.tbox) + list(kb.abox)
    if not defective(stmts):
        raise PreconditionError("knowledge base is consistent")
    found = shrink(stmts, defective)
    return Justification(INCONSISTENT,
                         axioms=tuple(s for s in found if is_axiom(s)),
                         assertions=tuple(s for s in found if not is_axiom(s)))


# ---------------------------------------------------------------------------
# Verbalization

CLOSING = "These statements cannot all be true."

_COMPARATORS = {">": "greater than", ">=": "at least", "<": "less than", "<=": "at most"}


def article(name: str) -> str:
    return f"an {name}" if name[:1].lower() in "aeiou" else f"a {name}"


def verb(role: str) -> str:
    """Role name used as a verb: spread -> spreads, hasQuality and kills stay."""
    if role[:1].isupper():
        return f"has {role}"
    if role.startswith(("has", "is")) or role.endswith(("s", "By", "Of")):
        return role
    return role + "s"


def _simple(c: Concept) -> bool:
    return isinstance(c, (Atom, Top, Bottom)) or (isinstance(c, Not) and isinstance(c.operand, Atom))


def _nested(c: Concept) -> str:
    text = predicate(c)
    return text if _simple(c) else f"({text})"


def noun(c: Concept) -> str:
    """Bare noun for c, used after 'Every' / 'No'."""
    if isinstance(c, Atom):
        return c.name
    if isinstance(c, Top):
        return "thing"
    return f"thing that is {_nested(c)}"


def predicate(c: Concept) -> str:
    """Phrase completing 'x is ...'."""
    if isinstance(c, Atom):
        return article(c.name)
    if isinstance(c, Top):
        return "a thing"
    if isinstance(c, Bottom):
        return "nothing"
    if isinstance(c, Not):
        return f"not {_nested(c.operand)}"
    if isinstance(c, And):
        parts = [_nested(op) for op in c.operands]
        if len(parts) == 2:
            return f"both {parts[0]} and {parts[1]}"
        return f"all of {', '.join(parts[:-1])} and {parts[-1]}"
    if isinstance(c, Or):
        parts = [_nested(op) for op in c.operands]
        if len(parts) == 2:
            return f"either {parts[0]} or {parts[1]}"
        return f"one of {', '.join(parts[:-1])} or {parts[-1]}"
    if isinstance(c, Exists):
        return f"something that {verb(c.role)} {_nested(c.filler)}"
    if isinstance(c, ForAll):
        return f"something that {verb(c.role)} only {_nested(c.filler)}"
    if isinstance(c, OneOf):
        if len(c.individuals) == 1:
            return f"exactly {c.individuals[0]}"
        return f"one of the individuals {', '.join(c.individuals)}"
    if isinstance(c, Facet):
        return f"something whose {c.attribute} is {_COMPARATORS[c.op]} {c.value}"
    raise TypeError(f"not a concept: {c!r}")


def _derivation_note(stmt) -> str:
    d = getattr(stmt, "derivation", None)
    if d is None:
        return ""
    binds = ", ".join(f"{var} = {val}" for var, val in d.bindings)
    return f" (derived by rule {d.rule} with {binds})" if binds else f" (derived by rule {d.rule})"


def sentence(stmt) -> str:
    """One English sentence for a statement."""
    if isinstance(stmt, GCI):
        return f"Every {noun(stmt.sub)} is {predicate(stmt.sup)}."
    if isinstance(stmt, Disjoint):
        return f"No {noun(stmt.left)} is {predicate(stmt.right)}."
    if isinstance(stmt, Equiv):
        return f"Being {predicate(stmt.left)} is the same as being {predicate(stmt.right)}."
    if isinstance(stmt, ConceptAssertion):
        return f"{stmt.individual} is {predicate(stmt.concept)}{_derivation_note(stmt)}."
    if isinstance(stmt, RoleAssertion):
        return f"{stmt.subject} {verb(stmt.role)} {stmt.object}."
    if isinstance(stmt, DataAssertion):
        return f"{stmt.individual} has {stmt.attribute} {stmt.value}."
    raise TypeError(f"cannot verbalize {stmt!r}")


def verbalize(j: Justification) -> str:
    lines = [sentence(s) for s in j.statements]
    lines.append(CLOSING)
    return "\n".join(lines)
