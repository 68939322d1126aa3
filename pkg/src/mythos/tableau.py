"""Tableau reasoning for ALC with role hierarchies, inverse roles, nominals
and integer facets.

The calculus works on a completion graph.  Axioms whose left-hand side is a
concept name are applied lazily (only at nodes carrying that name), axioms
with a nominal left-hand side become facts about the named individual, and
every remaining inclusion C ⊑ D is internalised as ¬C ⊔ D on each node.
Anonymous nodes are blocked by an anonymous ancestor with an identical label
(equality blocking, required because roles may be inverted).  A node that
receives a nominal ``{a}`` is merged into the node of ``a``; there is no
unique-name assumption.

Exploration order is fixed (node creation order, label insertion order,
disjuncts left to right), so every answer is reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import ResourceLimitError, UnknownIndividualError
from .model import (
    BOTTOM, And, Atom, Bottom, Concept, ConceptAssertion, DataAssertion, Exists, Facet, ForAll,
    KnowledgeBase, Not, OneOf, Or, RoleAssertion, Top, expand_axiom, nnf, subconcepts,
)
from .semantics import Interpretation, brute_force_consistent  # noqa: F401  (re-exported)

DEFAULT_NODE_CAP = 10_000

_DIRECT, _INDIRECT = "direct", "indirect"


class _Closure(dict):
    """Roles the KB never mentions (e.g. in a query concept) are their own only super-role."""

    def __missing__(self, key):
        return frozenset({key})


def role_closure(kb: KnowledgeBase) -> dict[tuple[str, bool], frozenset[tuple[str, bool]]]:
    """Reflexive-transitive super-role closure over roles and their inverses.

    Keys and values are ``(role, inverted)`` pairs.
    """
    edges: dict[tuple[str, bool], set[tuple[str, bool]]] = {}
    for d in kb.rbox:
        for inv in (False, True):
            edges.setdefault((d.name, inv), set())
    for d in kb.rbox:
        r = d.name
        for p in d.parents:
            edges[(r, False)].add((p, False))
            edges[(r, True)].add((p, True))
        if d.inverse_of is not None:
            s = d.inverse_of
            edges[(r, False)].add((s, True))
            edges[(s, True)].add((r, False))
            edges[(r, True)].add((s, False))
            edges[(s, False)].add((r, True))
    closure = _Closure()
    for start in edges:
        seen = {start}
        todo = [start]
        while todo:
            for nxt in edges.get(todo.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        closure[start] = frozenset(seen)
    return closure


class _State:
    """One branch of the completion graph."""

    __slots__ = ("label", "names", "parent", "out", "inc", "values", "ind_node")

    def __init__(self):
        self.label: dict[int, dict[Concept, None]] = {}
        self.names: dict[int, frozenset[str]] = {}
        self.parent: dict[int, int | None] = {}
        self.out: dict[int, dict[int, set[str]]] = {}
        self.inc: dict[int, dict[int, set[str]]] = {}
        self.values: dict[int, dict[str, int]] = {}
        self.ind_node: dict[str, int] = {}

    def copy(self) -> "_State":
        s = _State()
        s.label = {x: dict(lab) for x, lab in self.label.items()}
        s.names = dict(self.names)
        s.parent = dict(self.parent)
        s.out = {x: {y: set(rs) for y, rs in m.items()} for x, m in self.out.items()}
        s.inc = {x: {y: set(rs) for y, rs in m.items()} for x, m in self.inc.items()}
        s.values = {x: dict(v) for x, v in self.values.items()}
        s.ind_node = dict(self.ind_node)
        return s


class _Clash(Exception):
    pass


@dataclass
class _Outcome:
    kind: str  # "clash", "branch", "open"
    alternatives: list | None = None


class Reasoner:
    """Reasoning services over one knowledge base.

    The KB is compiled once; every query builds its own completion graphs,
    so one Reasoner may serve concurrent queries.
    """

    def __init__(self, kb: KnowledgeBase, node_cap: int = DEFAULT_NODE_CAP):
        if node_cap < 1:
            raise ValueError("node_cap must be positive")
        self.kb = kb
        self.node_cap = node_cap
        self.sup = role_closure(kb)
        self.internal: list[Concept] = []
        self.absorbed: dict[str, list[Concept]] = {}
        self.nominal_facts: dict[str, list[Concept]] = {}
        for ax in kb.tbox:
            for gci in expand_axiom(ax):
                self._compile(gci.sub, gci.sup)
        self.attributes = kb.attributes()

    def _compile(self, sub: Concept, sup: Concept) -> None:
        rhs = nnf(sup)
        if isinstance(sub, Atom):
            bucket = self.absorbed.setdefault(sub.name, [])
        elif isinstance(sub, OneOf):
            for ind in sub.individuals:
                facts = self.nominal_facts.setdefault(ind, [])
                if rhs not in facts:
                    facts.append(rhs)
            return
        elif isinstance(sub, Top):
            bucket = self.internal
        else:
            bucket = self.internal
            rhs = nnf(Or((Not(sub), sup)))
        if rhs not in bucket:
            bucket.append(rhs)

    # ------------------------------------------------------------------
    # public services

    def is_satisfiable(self, c: Concept) -> bool:
        run = _Run(self)
        st = _State()
        try:
            x = run.new_node(st, None, frozenset())
            run.add(st, x, nnf(c))
            for ind in _nominals_in([c, *self.internal, *self._absorbed_concepts()]):
                run.named_node(st, ind)
            for ind in self.nominal_facts:
                run.named_node(st, ind)
        except _Clash:
            return False
        return run.search(st) is not None

    def is_consistent(self) -> bool:
        return self.find_model() is not None

    def find_model(self, extra: Iterable = ()) -> Interpretation | None:
        """A finite model of the KB (plus extra assertions), or None."""
        run = _Run(self)
        st = _State()
        abox = list(self.kb.abox) + list(extra)
        try:
            self._load_abox(run, st, abox)
        except _Clash:
            return None
        final = run.search(st)
        if final is None:
            return None
        return run.extract_model(final)

    def is_coherent(self) -> tuple[bool, list[str]]:
        unsat = sorted(a for a in self.kb.concept_names() if not self.is_satisfiable(Atom(a)))
        return (not unsat, unsat)

    def subsumes(self, sup: Concept, sub: Concept) -> bool:
        return not self.is_satisfiable(And((sub, Not(sup))))

    def instance_of(self, ind: str, c: Concept) -> bool:
        if ind not in _abox_individuals(self.kb):
            raise UnknownIndividualError(ind)
        return self.find_model([ConceptAssertion(ind, Not(c))]) is None

    # ------------------------------------------------------------------

    def _absorbed_concepts(self) -> list[Concept]:
        return [d for ds in self.absorbed.values() for d in ds] + \
            [d for ds in self.nominal_facts.values() for d in ds]

    def _load_abox(self, run: "_Run", st: _State, abox: list) -> None:
        inds: dict[str, None] = {}
        for a in abox:
            if isinstance(a, RoleAssertion):
                inds.setdefault(a.subject)
                inds.setdefault(a.object)
            else:
                inds.setdefault(a.individual)
        concepts = [a.concept for a in abox if isinstance(a, ConceptAssertion)]
        for ind in self.kb.individuals():
            inds.setdefault(ind)
        for ind in _nominals_in(concepts):
            inds.setdefault(ind)
        for ind in self.nominal_facts:
            inds.setdefault(ind)
        for a in abox:
            if isinstance(a, DataAssertion):
                node = run.named_node(st, a.individual)
                prev = st.values[node].get(a.attribute)
                if prev is not None and prev != a.value:
                    raise _Clash()
                st.values[node][a.attribute] = a.value
        for ind in inds:
            run.named_node(st, ind)
        if not inds:
            run.new_node(st, None, frozenset())
        for a in abox:
            if isinstance(a, ConceptAssertion):
                run.add(st, st.ind_node[a.individual], nnf(a.concept))
            elif isinstance(a, RoleAssertion):
                run.add_edge(st, st.ind_node[a.subject], st.ind_node[a.object], a.role)
        for x in list(st.label):
            run.check_node(st, x)


def _abox_individuals(kb: KnowledgeBase) -> set[str]:
    out = set()
    for a in kb.abox:
        if isinstance(a, RoleAssertion):
            out.update((a.subject, a.object))
        else:
            out.add(a.individual)
    return out


def _nominals_in(concepts: Iterable[Concept]) -> list[str]:
    seen: dict[str, None] = {}
    for c in concepts:
        for sc in subconcepts(c):
            if isinstance(sc, OneOf):
                for i in sc.individuals:
                    seen.setdefault(i)
    return list(seen)


class _Run:
    """Mutable bookkeeping for one query: node counter and rule application."""

    def __init__(self, reasoner: Reasoner):
        self.r = reasoner
        self.next_id = 0

    # -- graph construction ----------------------------------------------

    def new_node(self, st: _State, parent: int | None, names: frozenset[str]) -> int:
        if self.next_id >= self.r.node_cap:
            raise ResourceLimitError(
                f"tableau exceeded the node cap of {self.r.node_cap}", self.r.node_cap)
        x = self.next_id
        self.next_id += 1
        st.label[x] = {}
        st.names[x] = names
        st.parent[x] = parent
        st.out[x] = {}
        st.inc[x] = {}
        st.values[x] = {}
        for name in names:
            st.ind_node[name] = x
        for c in self.r.internal:
            self.add(st, x, c)
        return x

    def named_node(self, st: _State, ind: str) -> int:
        node = st.ind_node.get(ind)
        if node is None:
            node = self.new_node(st, None, frozenset([ind]))
        return node

    def add_edge(self, st: _State, x: int, y: int, role: str) -> None:
        st.out[x].setdefault(y, set()).add(role)
        st.inc[y].setdefault(x, set()).add(role)

    def add(self, st: _State, x: int, c: Concept) -> bool:
        """Add c (and its eager consequences) to x's label; True if anything changed."""
        lab = st.label[x]
        work = deque([c])
        changed = False
        while work:
            d = work.popleft()
            if d in lab:
                continue
            if self._conflicts(st, x, d):
                raise _Clash()
            lab[d] = None
            changed = True
            if isinstance(d, And):
                work.extend(d.operands)
            elif isinstance(d, Atom):
                work.extend(self.r.absorbed.get(d.name, ()))
        return changed

    def _conflicts(self, st: _State, x: int, d: Concept) -> bool:
        lab = st.label[x]
        if isinstance(d, Bottom):
            return True
        if isinstance(d, Atom):
            return Not(d) in lab
        if isinstance(d, Not):
            op = d.operand
            if isinstance(op, OneOf):
                return bool(st.names[x].intersection(op.individuals))
            return op in lab
        if isinstance(d, Facet):
            return not _facets_compatible(
                [f for f in lab if isinstance(f, Facet) and f.attribute == d.attribute] + [d],
                st.values[x].get(d.attribute))
        return False

    def check_node(self, st: _State, x: int) -> None:
        lab = st.label[x]
        for d in lab:
            if isinstance(d, Bottom):
                raise _Clash()
            if isinstance(d, Atom) and Not(d) in lab:
                raise _Clash()
            if isinstance(d, Not) and isinstance(d.operand, OneOf) and \
                    st.names[x].intersection(d.operand.individuals):
                raise _Clash()
        facets: dict[str, list[Facet]] = {}
        for d in lab:
            if isinstance(d, Facet):
                facets.setdefault(d.attribute, []).append(d)
        for attr, fs in facets.items():
            if not _facets_compatible(fs, st.values[x].get(attr)):
                raise _Clash()

    def merge(self, st: _State, x: int, t: int) -> None:
        """Merge node x into node t (t survives)."""
        if x == t:
            return
        for c in list(st.label[x]):
            self.add(st, t, c)
        st.names[t] = st.names[t] | st.names[x]
        for n in st.names[x]:
            st.ind_node[n] = t
        for attr, v in st.values[x].items():
            if st.values[t].setdefault(attr, v) != v:
                raise _Clash()
        for y, roles in list(st.out[x].items()):
            for role in roles:
                self.add_edge(st, t, t if y == x else y, role)
        for y, roles in list(st.inc[x].items()):
            for role in roles:
                self.add_edge(st, t if y == x else y, t, role)
        for y in list(st.out[x]):
            st.inc[y].pop(x, None)
        for y in list(st.inc[x]):
            st.out[y].pop(x, None)
        for z, p in st.parent.items():
            if p == x:
                st.parent[z] = t
        for table in (st.label, st.names, st.parent, st.out, st.inc, st.values):
            del table[x]
        self.check_node(st, t)

    # -- queries on the graph --------------------------------------------

    def neighbours(self, st: _State, x: int, role: str) -> list[int]:
        target = (role, False)
        sup = self.r.sup
        seen: dict[int, None] = {}
        for y, roles in st.out[x].items():
            if any(target in sup[(s, False)] for s in roles):
                seen.setdefault(y)
        for y, roles in st.inc[x].items():
            if any(target in sup[(s, True)] for s in roles):
                seen.setdefault(y)
        return list(seen)

    def blocking(self, st: _State) -> dict[int, tuple[str, int | None]]:
        status: dict[int, tuple[str, int | None]] = {}
        keys: dict[int, frozenset] = {}
        for x in st.label:
            if st.names[x]:
                continue
            chain = []
            a = st.parent[x]
            while a is not None and not st.names[a]:
                chain.append(a)
                a = st.parent[a]
            if any(a in status for a in chain):
                status[x] = (_INDIRECT, None)
                continue
            key = keys.setdefault(x, frozenset(st.label[x]))
            for a in reversed(chain):
                if keys.setdefault(a, frozenset(st.label[a])) == key:
                    status[x] = (_DIRECT, a)
                    break
        return status

    # -- expansion ----------------------------------------------------------

    def _deterministic(self, st: _State) -> None:
        changed = True
        while changed:
            changed = False
            blocked = self.blocking(st)
            for x in list(st.label):
                if x not in st.label or blocked.get(x, ("",))[0] == _INDIRECT:
                    continue
                for name in sorted(st.names[x]):
                    for d in self.r.nominal_facts.get(name, ()):
                        changed |= self.add(st, x, d)
                merged = False
                for c in list(st.label[x]):
                    if isinstance(c, ForAll):
                        for y in self.neighbours(st, x, c.role):
                            changed |= self.add(st, y, c.filler)
                    elif isinstance(c, OneOf) and len(c.individuals) == 1:
                        if not st.names[x].intersection(c.individuals):
                            target = self.named_node(st, c.individuals[0])
                            self.merge(st, x, target)
                            changed = merged = True
                            break
                if merged:
                    break

    def expand(self, st: _State) -> _Outcome:
        while True:
            try:
                self._deterministic(st)
            except _Clash:
                return _Outcome("clash")
            blocked = self.blocking(st)
            for x in st.label:
                if blocked.get(x, ("",))[0] == _INDIRECT:
                    continue
                lab = st.label[x]
                for c in lab:
                    if isinstance(c, Or) and not any(d in lab for d in c.operands):
                        return _Outcome("branch", self._branches(st, x, c.operands))
                    if isinstance(c, OneOf) and not st.names[x].intersection(c.individuals):
                        return _Outcome("branch", self._nominal_branches(st, x, c.individuals))
            created = False
            for x in list(st.label):
                if x in blocked:
                    continue
                for c in list(st.label[x]):
                    if not isinstance(c, Exists):
                        continue
                    if any(c.filler in st.label[y] and blocked.get(y, ("",))[0] != _INDIRECT
                           for y in self.neighbours(st, x, c.role)):
                        continue
                    try:
                        y = self.new_node(st, x, frozenset())
                        self.add_edge(st, x, y, c.role)
                        self.add(st, y, c.filler)
                    except _Clash:
                        return _Outcome("clash")
                    created = True
                    break
                if created:
                    break
            if not created:
                return _Outcome("open")

    def _branches(self, st: _State, x: int, options: Iterable[Concept]) -> list[_State]:
        out = []
        for d in options:
            s2 = st.copy()
            try:
                self.add(s2, x, d)
            except _Clash:
                continue
            out.append(s2)
        return out

    def _nominal_branches(self, st: _State, x: int, inds: Iterable[str]) -> list[_State]:
        out = []
        for ind in inds:
            s2 = st.copy()
            try:
                self.merge(s2, x, self.named_node(s2, ind))
            except _Clash:
                continue
            out.append(s2)
        return out

    def search(self, st: _State) -> _State | None:
        stack = [st]
        while stack:
            s = stack.pop()
            outcome = self.expand(s)
            if outcome.kind == "open":
                return s
            if outcome.kind == "branch":
                stack.extend(reversed(outcome.alternatives))
        return None

    # -- model extraction ----------------------------------------------------

    def extract_model(self, st: _State) -> Interpretation:
        blocked = self.blocking(st)
        rep = {x: x for x in st.label if x not in blocked}
        for x, (kind, by) in blocked.items():
            if kind == _DIRECT:
                rep[x] = by
        domain = tuple(x for x in st.label if x not in blocked)
        roles = {d.name: set() for d in self.r.kb.rbox}
        for x, targets in st.out.items():
            if x not in rep:
                continue
            for y, rs in targets.items():
                if y not in rep:
                    continue
                for s in rs:
                    for name, inv in self.r.sup[(s, False)]:
                        roles.setdefault(name, set()).add((rep[y], rep[x]) if inv else (rep[x], rep[y]))
        concepts: dict[str, set[int]] = {}
        for x in domain:
            for c in st.label[x]:
                if isinstance(c, Atom):
                    concepts.setdefault(c.name, set()).add(x)
        attr_val = {}
        for x in domain:
            for attr in self.r.attributes:
                v = st.values[x].get(attr)
                if v is None:
                    v = _facet_witness([f for f in st.label[x] if isinstance(f, Facet) and f.attribute == attr])
                attr_val[(x, attr)] = v
        return Interpretation(
            domain=domain,
            concept_ext={c: frozenset(s) for c, s in concepts.items()},
            role_ext={r: frozenset(s) for r, s in roles.items()},
            ind_map=dict(st.ind_node),
            attr_val=attr_val,
        )


def _facet_bounds(facets: Iterable[Facet]) -> tuple[float, float]:
    lo, hi = float("-inf"), float("inf")
    for f in facets:
        if f.op == ">":
            lo = max(lo, f.value + 1)
        elif f.op == ">=":
            lo = max(lo, f.value)
        elif f.op == "<":
            hi = min(hi, f.value - 1)
        else:
            hi = min(hi, f.value)
    return lo, hi


def _facets_compatible(facets: list[Facet], value: int | None) -> bool:
    if value is not None:
        return all(f.holds(value) for f in facets)
    lo, hi = _facet_bounds(facets)
    return lo <= hi


def _facet_witness(facets: list[Facet]) -> int:
    lo, hi = _facet_bounds(facets)
    if lo != float("-inf"):
        return int(lo)
    if hi != float("inf"):
        return int(hi)
    return 0


# ---------------------------------------------------------------------------
# Module-level API


def is_satisfiable(kb: KnowledgeBase, c: Concept, *, node_cap: int = DEFAULT_NODE_CAP) -> bool:
    """Can c have a non-empty extension in some model of kb's TBox and RBox?"""
    return Reasoner(kb, node_cap).is_satisfiable(c)


def is_coherent(kb: KnowledgeBase, *, node_cap: int = DEFAULT_NODE_CAP) -> tuple[bool, list[str]]:
    """(True, []) when every named concept is satisfiable, else (False, sorted unsat names)."""
    return Reasoner(kb, node_cap).is_coherent()


def is_consistent(kb: KnowledgeBase, *, node_cap: int = DEFAULT_NODE_CAP) -> bool:
    return Reasoner(kb, node_cap).is_consistent()


def find_model(kb: KnowledgeBase, *, node_cap: int = DEFAULT_NODE_CAP) -> Interpretation | None:
    return Reasoner(kb, node_cap).find_model()


def subsumes(kb: KnowledgeBase, sup: Concept, sub: Concept, *, node_cap: int = DEFAULT_NODE_CAP) -> bool:
    """Does every model of kb place sub inside sup?"""
    return Reasoner(kb, node_cap).subsumes(sup, sub)


def instance_of(kb: KnowledgeBase, ind: str, c: Concept, *, node_cap: int = DEFAULT_NODE_CAP) -> bool:
    """Is ind an instance of c in every model of kb?"""
    return Reasoner(kb, node_cap).instance_of(ind, c)


__all__ = [
    "DEFAULT_NODE_CAP", "Reasoner", "Interpretation", "brute_force_consistent", "find_model",
    "instance_of", "is_coherent", "is_consistent", "is_satisfiable", "role_closure", "subsumes",
    "BOTTOM",
]
