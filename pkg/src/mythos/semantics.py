"""Finite interpretations and direct model checking.

This module evaluates concept descriptions set-theoretically over a finite
interpretation and searches small domains for models.  It shares nothing
with the tableau beyond the data model, so it can serve as an oracle for it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .errors import PreconditionError
from .model import (
    And, Atom, Bottom, Concept, ConceptAssertion, DataAssertion, Exists, Facet, ForAll,
    KnowledgeBase, Not, OneOf, Or, RoleAssertion, Top, expand_axiom, nnf, subconcepts,
)


@dataclass
class Interpretation:
    domain: tuple[int, ...]
    concept_ext: dict[str, frozenset[int]] = field(default_factory=dict)
    role_ext: dict[str, frozenset[tuple[int, int]]] = field(default_factory=dict)
    ind_map: dict[str, int] = field(default_factory=dict)
    attr_val: dict[tuple[int, str], int] = field(default_factory=dict)

    def extension(self, c: Concept) -> frozenset[int]:
        return frozenset(x for x in self.domain if self.satisfies(x, c))

    def satisfies(self, x: int, c: Concept) -> bool:
        if isinstance(c, Atom):
            return x in self.concept_ext.get(c.name, ())
        if isinstance(c, Top):
            return True
        if isinstance(c, Bottom):
            return False
        if isinstance(c, Not):
            return not self.satisfies(x, c.operand)
        if isinstance(c, And):
            return all(self.satisfies(x, d) for d in c.operands)
        if isinstance(c, Or):
            return any(self.satisfies(x, d) for d in c.operands)
        if isinstance(c, Exists):
            return any(self.satisfies(y, c.filler) for (a, y) in self.role_ext.get(c.role, ()) if a == x)
        if isinstance(c, ForAll):
            return all(self.satisfies(y, c.filler) for (a, y) in self.role_ext.get(c.role, ()) if a == x)
        if isinstance(c, OneOf):
            return any(self.ind_map.get(i) == x for i in c.individuals)
        if isinstance(c, Facet):
            v = self.attr_val.get((x, c.attribute))
            return v is not None and c.holds(v)
        raise TypeError(f"not a concept: {c!r}")

    def violations(self, kb: KnowledgeBase) -> list[str]:
        """Human-readable list of statements the interpretation falsifies."""
        out = []
        if not self.domain:
            out.append("empty domain")
        for ind in kb.individuals():
            if self.ind_map.get(ind) not in self.domain:
                out.append(f"individual {ind} not interpreted")
        if out:
            return out
        for ax in kb.tbox:
            for gci in expand_axiom(ax):
                if not self.extension(gci.sub) <= self.extension(gci.sup):
                    out.append(f"axiom {ax}")
        for a in kb.abox:
            if isinstance(a, ConceptAssertion) and not self.satisfies(self.ind_map[a.individual], a.concept):
                out.append(f"assertion {a}")
            elif isinstance(a, RoleAssertion):
                pair = (self.ind_map[a.subject], self.ind_map[a.object])
                if pair not in self.role_ext.get(a.role, ()):
                    out.append(f"assertion {a}")
            elif isinstance(a, DataAssertion):
                if self.attr_val.get((self.ind_map[a.individual], a.attribute)) != a.value:
                    out.append(f"assertion {a}")
        for decl in kb.rbox:
            ext = self.role_ext.get(decl.name, frozenset())
            for p in decl.parents:
                if not ext <= self.role_ext.get(p, frozenset()):
                    out.append(f"role {decl.name} not within parent {p}")
            if decl.inverse_of is not None:
                inv = {(y, x) for (x, y) in self.role_ext.get(decl.inverse_of, ())}
                if set(ext) != inv:
                    out.append(f"role {decl.name} not inverse of {decl.inverse_of}")
        return out

    def is_model_of(self, kb: KnowledgeBase) -> bool:
        return not self.violations(kb)


# ---------------------------------------------------------------------------
# Bounded model search
#
# For a fixed domain size, individual mapping and attribute values the KB is
# grounded into propositional formulas over "concept A holds at x" and
# "(x, y) in role r" variables; a backtracking search then assigns those
# variables, checking every ground formula in three-valued logic after each
# step.

_T, _F = True, False


def _g_and(parts):
    out = []
    for p in parts:
        if p is _F:
            return _F
        if p is not _T:
            out.append(p)
    if not out:
        return _T
    return out[0] if len(out) == 1 else ("and", tuple(out))


def _g_or(parts):
    out = []
    for p in parts:
        if p is _T:
            return _T
        if p is not _F:
            out.append(p)
    if not out:
        return _F
    return out[0] if len(out) == 1 else ("or", tuple(out))


def _g_not(p):
    if p is _T:
        return _F
    if p is _F:
        return _T
    if p[0] == "not":
        return p[1]
    return ("not", p)


class _Grounder:
    def __init__(self, n: int, concepts: list[str], roles: list[str],
                 ind_map: dict[str, int], attr_val: dict[tuple[int, str], int]):
        self.n = n
        self.ind_map = ind_map
        self.attr_val = attr_val
        self.var_index: dict[tuple, int] = {}
        for a in concepts:
            for x in range(n):
                self.var(("c", a, x))
        for r in roles:
            for x in range(n):
                for y in range(n):
                    self.var(("r", r, x, y))

    def var(self, key) -> tuple:
        idx = self.var_index.setdefault(key, len(self.var_index))
        return ("v", idx)

    def ground(self, c: Concept, x: int):
        if isinstance(c, Atom):
            return self.var(("c", c.name, x))
        if isinstance(c, Top):
            return _T
        if isinstance(c, Bottom):
            return _F
        if isinstance(c, Not):
            return _g_not(self.ground(c.operand, x))
        if isinstance(c, And):
            return _g_and(self.ground(d, x) for d in c.operands)
        if isinstance(c, Or):
            return _g_or(self.ground(d, x) for d in c.operands)
        if isinstance(c, Exists):
            return _g_or(_g_and((self.var(("r", c.role, x, y)), self.ground(c.filler, y)))
                         for y in range(self.n))
        if isinstance(c, ForAll):
            return _g_and(_g_or((_g_not(self.var(("r", c.role, x, y))), self.ground(c.filler, y)))
                          for y in range(self.n))
        if isinstance(c, OneOf):
            return _T if any(self.ind_map[i] == x for i in c.individuals) else _F
        if isinstance(c, Facet):
            return _T if c.holds(self.attr_val[(x, c.attribute)]) else _F
        raise TypeError(f"not a concept: {c!r}")


def _eval3(f, assign: list):
    if f is _T or f is _F:
        return f
    tag = f[0]
    if tag == "v":
        return assign[f[1]]
    if tag == "not":
        v = _eval3(f[1], assign)
        return None if v is None else not v
    if tag == "and":
        unknown = False
        for g in f[1]:
            v = _eval3(g, assign)
            if v is False:
                return False
            if v is None:
                unknown = True
        return None if unknown else True
    unknown = False
    for g in f[1]:
        v = _eval3(g, assign)
        if v is True:
            return True
        if v is None:
            unknown = True
    return None if unknown else False


def _vars_of(f, acc: set) -> set:
    if f is _T or f is _F:
        return acc
    if f[0] == "v":
        acc.add(f[1])
    elif f[0] == "not":
        _vars_of(f[1], acc)
    else:
        for g in f[1]:
            _vars_of(g, acc)
    return acc


def _search(formulas: list, nvars: int, order: list[int]) -> list | None:
    if any(f is _F for f in formulas):
        return None
    formulas = [f for f in formulas if f is not _T]
    watch: dict[int, list[int]] = {}
    for k, f in enumerate(formulas):
        for v in _vars_of(f, set()):
            watch.setdefault(v, []).append(k)
    order = [v for v in order if v in watch]
    assign: list = [None] * nvars

    def rec(pos: int) -> bool:
        if pos == len(order):
            return all(_eval3(f, assign) is True for f in formulas)
        v = order[pos]
        for value in (False, True):
            assign[v] = value
            if all(_eval3(formulas[k], assign) is not False for k in watch[v]):
                if rec(pos + 1):
                    return True
        assign[v] = None
        return False

    if not rec(0):
        return None
    return [bool(a) for a in assign]


def _restricted_growth(k: int, n: int) -> Iterator[tuple[int, ...]]:
    """Maps of k individuals into range(n), up to renaming of elements."""
    def rec(prefix: list[int], used: int):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for e in range(min(used + 1, n)):
            prefix.append(e)
            yield from rec(prefix, max(used, e + 1))
            prefix.pop()
    yield from rec([], 0)


def _facet_candidates(kb: KnowledgeBase) -> dict[str, list[int]]:
    cands: dict[str, set[int]] = {a: {0} for a in kb.attributes()}
    for stmt in kb.statements:
        if isinstance(stmt, DataAssertion):
            cands[stmt.attribute].add(stmt.value)
    concepts = [c for ax in kb.tbox for g in expand_axiom(ax) for c in (g.sub, g.sup)]
    concepts += [a.concept for a in kb.abox if isinstance(a, ConceptAssertion)]
    for c in concepts:
        for sc in subconcepts(c):
            if isinstance(sc, Facet):
                cands[sc.attribute] |= {sc.value - 1, sc.value, sc.value + 1}
    return {a: sorted(v) for a, v in cands.items()}


def _interpretations_for(kb: KnowledgeBase, n: int) -> Iterator[Interpretation]:
    """Yield every model of kb with exactly n elements (up to symmetry of ind_map)."""
    individuals = kb.individuals()
    concepts = kb.concept_names()
    roles = kb.role_names()
    attrs = kb.attributes()
    candidates = _facet_candidates(kb)
    asserted: dict[tuple[str, str], set[int]] = {}
    for a in kb.abox:
        if isinstance(a, DataAssertion):
            asserted.setdefault((a.individual, a.attribute), set()).add(a.value)
    if any(len(v) > 1 for v in asserted.values()):
        return
    gcis = [g for ax in kb.tbox for g in expand_axiom(ax)]

    for mapping in _restricted_growth(len(individuals), n):
        ind_map = dict(zip(individuals, mapping))
        fixed: dict[tuple[int, str], int] = {}
        clash = False
        for (ind, attr), vals in asserted.items():
            key = (ind_map[ind], attr)
            v = next(iter(vals))
            if fixed.setdefault(key, v) != v:
                clash = True
        if clash:
            continue
        free = [(x, a) for x in range(n) for a in attrs if (x, a) not in fixed]
        for values in itertools.product(*(candidates[a] for _, a in free)):
            attr_val = dict(fixed)
            attr_val.update(zip(free, values))
            g = _Grounder(n, concepts, roles, ind_map, attr_val)
            formulas = []
            for gci in gcis:
                for x in range(n):
                    formulas.append(_g_or((_g_not(g.ground(gci.sub, x)), g.ground(gci.sup, x))))
            for a in kb.abox:
                if isinstance(a, ConceptAssertion):
                    formulas.append(g.ground(a.concept, ind_map[a.individual]))
                elif isinstance(a, RoleAssertion):
                    formulas.append(g.var(("r", a.role, ind_map[a.subject], ind_map[a.object])))
            for decl in kb.rbox:
                for x in range(n):
                    for y in range(n):
                        r = g.var(("r", decl.name, x, y))
                        for p in sorted(decl.parents):
                            formulas.append(_g_or((_g_not(r), g.var(("r", p, x, y)))))
                        if decl.inverse_of is not None:
                            s = g.var(("r", decl.inverse_of, y, x))
                            formulas.append(_g_or((_g_not(r), s)))
                            formulas.append(_g_or((_g_not(s), r)))
            keys = list(g.var_index)
            solution = _search(formulas, len(keys), list(range(len(keys))))
            if solution is None:
                continue
            cext: dict[str, set[int]] = {c: set() for c in concepts}
            rext: dict[str, set[tuple[int, int]]] = {r: set() for r in roles}
            for key, val in zip(keys, solution):
                if not val:
                    continue
                if key[0] == "c":
                    cext[key[1]].add(key[2])
                else:
                    rext[key[1]].add((key[2], key[3]))
            yield Interpretation(
                domain=tuple(range(n)),
                concept_ext={c: frozenset(s) for c, s in cext.items()},
                role_ext={r: frozenset(s) for r, s in rext.items()},
                ind_map=ind_map,
                attr_val=attr_val,
            )


def find_small_model(kb: KnowledgeBase, max_domain: int) -> Interpretation | None:
    """Smallest model with at most max_domain elements, or None if none exists."""
    if max_domain < 1:
        raise PreconditionError("max_domain must be at least 1")
    for n in range(1, max_domain + 1):
        for interp in _interpretations_for(kb, n):
            return interp
    return None


def exhaustive_bound(kb: KnowledgeBase) -> int | None:
    """Domain size that suffices to decide consistency, when one is known.

    Without existential quantification (after negation normal form), any model
    restricts to the interpretations of the named individuals, so
    max(1, #individuals) elements are enough.  Otherwise no bound is claimed.
    """
    concepts = [nnf(Or((Not(g.sub), g.sup))) for ax in kb.tbox for g in expand_axiom(ax)]
    concepts += [nnf(a.concept) for a in kb.abox if isinstance(a, ConceptAssertion)]
    for c in concepts:
        if any(isinstance(sc, Exists) for sc in subconcepts(c)):
            return None
    return max(1, len(kb.individuals()))


def brute_force_consistent(kb: KnowledgeBase, max_domain: int = 3) -> bool | None:
    """True if a model with at most max_domain elements exists; False only when
    that search is provably exhaustive; None when the answer is unknown."""
    n_inds = len(kb.individuals())
    if max_domain < max(1, n_inds):
        raise PreconditionError(f"max_domain {max_domain} is smaller than the {n_inds} individuals")
    if find_small_model(kb, max_domain) is not None:
        return True
    bound = exhaustive_bound(kb)
    if bound is not None and bound <= max_domain:
        return False
    return None
