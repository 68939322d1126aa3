"""Syntactic detection of three ontology anti-patterns.

* OIL (onlyness is loneliness): ``A ⊑ ∀r.B``, ``A ⊑ ∀r.C`` with B, C disjoint.
  Without an existential on A this only forces A's r-successors to vanish,
  so it is a modelling smell rather than a logical defect.
* UE (universal existence): ``A ⊑ ∀r.C``, ``A ⊑ ∃r.B`` with B, C disjoint.
  This makes A unsatisfiable.
* DISJOINT_SUBSUMPTION: ``A ⊑ B`` and ``A ⊑ ¬B``.

Matching works on asserted axioms only.  Equivalences and disjointness
axioms are first rewritten to inclusions and top-level conjunctions on the
right-hand side are split, but no subsumption closure is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .model import GCI, And, Atom, Disjoint, Equiv, Exists, ForAll, KnowledgeBase, Not

OIL = "OIL"
UE = "UE"
DISJOINT_SUBSUMPTION = "DISJOINT_SUBSUMPTION"

LABELS = {OIL: "modeling smell", UE: "incoherence", DISJOINT_SUBSUMPTION: "incoherence"}


@dataclass(frozen=True)
class PatternMatch:
    pattern_id: str
    participants: dict = field(hash=False)
    axioms: tuple = ()

    @property
    def label(self) -> str:
        return LABELS[self.pattern_id]

    def sort_key(self) -> tuple:
        p = self.participants
        return (self.pattern_id, p.get("A", ""), p.get("r", ""), p.get("B", ""), p.get("C", ""))

    def to_dict(self) -> dict:
        from .krss import format_statement

        return {
            "pattern_id": self.pattern_id,
            "label": self.label,
            "participants": dict(self.participants),
            "axioms": [format_statement(a) for a in self.axioms],
        }


def _inclusions(kb: KnowledgeBase) -> Iterator[tuple[str, object, object]]:
    """(sub-name, rhs conjunct, original axiom) for every atomic-LHS inclusion."""

    def split(c):
        if isinstance(c, And):
            for op in c.operands:
                yield from split(op)
        else:
            yield c

    for ax in kb.tbox:
        if isinstance(ax, GCI):
            pairs = [(ax.sub, ax.sup)]
        elif isinstance(ax, Equiv):
            pairs = [(ax.left, ax.right), (ax.right, ax.left)]
        elif isinstance(ax, Disjoint):
            pairs = [(ax.left, Not(ax.right)), (ax.right, Not(ax.left))]
        else:
            continue
        for sub, sup in pairs:
            if isinstance(sub, Atom):
                for part in split(sup):
                    yield sub.name, part, ax


def _disjointness(incs) -> dict[frozenset, object]:
    """Unordered pair of atom names → first axiom stating their disjointness."""
    out: dict[frozenset, object] = {}
    for a, part, ax in incs:
        if isinstance(part, Not) and isinstance(part.operand, Atom):
            key = frozenset((a, part.operand.name))
            if len(key) == 2:
                out.setdefault(key, ax)
    return out


def _unique(axioms) -> tuple:
    seen: list = []
    for ax in axioms:
        if not any(ax is s for s in seen):
            seen.append(ax)
    return tuple(seen)


def detect_antipatterns(kb: KnowledgeBase) -> list[PatternMatch]:
    """Every instantiation of OIL, UE and DISJOINT_SUBSUMPTION, sorted by (pattern, A, r)."""
    incs = list(_inclusions(kb))
    disjoint = _disjointness(incs)
    alls: dict[tuple[str, str], list[tuple[str, object]]] = {}
    somes: dict[tuple[str, str], list[tuple[str, object]]] = {}
    supers: dict[str, list[tuple[str, object]]] = {}
    negs: dict[str, list[tuple[str, object]]] = {}
    for a, part, ax in incs:
        if isinstance(part, ForAll) and isinstance(part.filler, Atom):
            alls.setdefault((a, part.role), []).append((part.filler.name, ax))
        elif isinstance(part, Exists) and isinstance(part.filler, Atom):
            somes.setdefault((a, part.role), []).append((part.filler.name, ax))
        elif isinstance(part, Atom):
            supers.setdefault(a, []).append((part.name, ax))
        elif isinstance(part, Not) and isinstance(part.operand, Atom):
            negs.setdefault(a, []).append((part.operand.name, ax))

    matches: dict[tuple, PatternMatch] = {}

    def record(pid, slots, axioms):
        m = PatternMatch(pid, slots, _unique(axioms))
        matches.setdefault(m.sort_key(), m)

    for (a, r), fillers in alls.items():
        for i, (b, ax_b) in enumerate(fillers):
            for c, ax_c in fillers[i + 1:]:
                d = disjoint.get(frozenset((b, c)))
                if d is not None:
                    record(OIL, {"A": a, "r": r, "B": b, "C": c}, [ax_b, ax_c, d])
        for b, ax_b in somes.get((a, r), ()):
            for c, ax_c in fillers:
                d = disjoint.get(frozenset((b, c)))
                if d is not None:
                    record(UE, {"A": a, "r": r, "B": b, "C": c}, [ax_c, ax_b, d])
    for a, sups in supers.items():
        for b, ax_pos in sups:
            for nb, ax_neg in negs.get(a, ()):
                if nb == b:
                    record(DISJOINT_SUBSUMPTION, {"A": a, "B": b}, [ax_pos, ax_neg])
    return sorted(matches.values(), key=PatternMatch.sort_key)
