"""KRSS-style s-expression syntax for knowledge bases.

Statements::

    (DEFINE-PRIMITIVE-ROLE r [:PARENT p]* [:INVERSE s])
    (IMPLIES C D)  (EQUIVALENT C D)  (DEFINE-CONCEPT name C)  (DISJOINT C D)
    (INSTANCE i C)  (RELATED i j r)  (DATA-VALUE i attr int)
    (DEFINE-RULE [name] head atom*)  (ANNOTATION i key value)

Concepts::

    name | *TOP* | *BOTTOM* | (AND C C+) | (OR C C+) | (NOT C)
    (SOME r C) | (ALL r C) | (ONE-OF i+) | (> attr int) | (>= attr int) ...

Keywords are case-insensitive, names are case-sensitive, ``;`` starts a
comment.  Names that are not plain symbols may be written as "quoted strings".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterator, Union

from .errors import KnowledgeBaseError, KRSSSyntaxError, SourceSpan, UnsafeRuleError
from .model import (
    BOTTOM, COMPARATORS, TOP, And, Annotation, Atom, Bottom, Concept, ConceptAssertion,
    DataAssertion, Disjoint, Equiv, Exists, Facet, ForAll, GCI, KnowledgeBase, Not, OneOf,
    Or, RoleAssertion, RoleDecl, Top,
)
from .rules import ConceptAtom, RoleAtom, Rule, Var

# ---------------------------------------------------------------------------
# Reader


@dataclass(frozen=True)
class _Sym:
    text: str
    span: SourceSpan
    quoted: bool = False


@dataclass(frozen=True)
class _List:
    items: tuple
    span: SourceSpan


_Node = Union[_Sym, _List]
_DELIMS = set("();\"")


def _read(text: str) -> list[_Node]:
    """Read all top-level s-expressions, tracking line/column."""
    stack: list[tuple[SourceSpan, list]] = []
    top: list[_Node] = []
    line, col, i, n = 1, 1, 0, len(text)

    def emit(node: _Node) -> None:
        (stack[-1][1] if stack else top).append(node)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col, 1)
        if ch == "(":
            stack.append((span, []))
            col, i = col + 1, i + 1
        elif ch == ")":
            if not stack:
                raise KRSSSyntaxError("unbalanced parenthesis: unexpected ')'", span)
            open_span, items = stack.pop()
            emit(_List(tuple(items), open_span))
            col, i = col + 1, i + 1
        elif ch == '"':
            j, buf = i + 1, []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                if text[j] == "\n":
                    raise KRSSSyntaxError("unterminated string", span)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise KRSSSyntaxError("unterminated string", span)
            emit(_Sym("".join(buf), SourceSpan(line, col, j + 1 - i), quoted=True))
            col += j + 1 - i
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS:
                j += 1
            emit(_Sym(text[i:j], SourceSpan(line, col, j - i)))
            col += j - i
            i = j
    if stack:
        open_span = stack[-1][0]
        raise KRSSSyntaxError(
            f"unbalanced parenthesis: '(' at {open_span} is never closed (expected ')')", open_span)
    return top


# ---------------------------------------------------------------------------
# Parser

_INT = re.compile(r"[+-]?\d+\Z")
_CONCEPT_KEYWORDS = {"AND", "OR", "NOT", "SOME", "ALL", "ONE-OF"}


def _kw(node: _Node) -> str | None:
    if isinstance(node, _Sym) and not node.quoted:
        return node.text.upper()
    return None


def _expect_name(node: _Node, what: str) -> str:
    if not isinstance(node, _Sym):
        raise KRSSSyntaxError(f"expected {what} name, found a list", node.span)
    if not node.quoted and (node.text.startswith(("?", ":")) or node.text.upper() in ("*TOP*", "*BOTTOM*")):
        raise KRSSSyntaxError(f"expected {what} name, found {node.text!r}", node.span)
    if not node.text or any(c.isspace() for c in node.text):
        raise KRSSSyntaxError(f"invalid {what} name {node.text!r}", node.span)
    return node.text


def _expect_int(node: _Node, what: str) -> int:
    if isinstance(node, _Sym) and not node.quoted and _INT.match(node.text):
        return int(node.text)
    shown = node.text if isinstance(node, _Sym) else "a list"
    raise KRSSSyntaxError(f"expected integer {what}, found {shown!r}", node.span)


def _arity(node: _List, n: int | tuple[int, int | None], form: str) -> None:
    lo, hi = (n, n) if isinstance(n, int) else n
    got = len(node.items) - 1
    if got < lo or (hi is not None and got > hi):
        want = str(lo) if lo == hi else (f"at least {lo}" if hi is None else f"{lo}-{hi}")
        raise KRSSSyntaxError(f"{form} expects {want} argument(s), got {got}", node.span)


def _concept(node: _Node) -> Concept:
    if isinstance(node, _Sym):
        kw = _kw(node)
        if kw == "*TOP*":
            return TOP
        if kw == "*BOTTOM*":
            return BOTTOM
        return Atom(_expect_name(node, "concept"))
    if not node.items:
        raise KRSSSyntaxError("expected concept, found '()'", node.span)
    kw = _kw(node.items[0])
    args = node.items[1:]
    if kw in ("AND", "OR"):
        _arity(node, (2, None), kw)
        ops = tuple(_concept(a) for a in args)
        return And(ops) if kw == "AND" else Or(ops)
    if kw == "NOT":
        _arity(node, 1, kw)
        return Not(_concept(args[0]))
    if kw in ("SOME", "ALL"):
        _arity(node, 2, kw)
        role = _expect_name(args[0], "role")
        filler = _concept(args[1])
        return Exists(role, filler) if kw == "SOME" else ForAll(role, filler)
    if kw == "ONE-OF":
        _arity(node, (1, None), kw)
        return OneOf(tuple(_expect_name(a, "individual") for a in args))
    if kw in COMPARATORS:
        _arity(node, 2, kw)
        return Facet(_expect_name(args[0], "attribute"), kw, _expect_int(args[1], "facet constant"))
    head = node.items[0]
    shown = head.text if isinstance(head, _Sym) else "a list"
    raise KRSSSyntaxError(
        f"expected concept constructor (AND, OR, NOT, SOME, ALL, ONE-OF, >, >=, <, <=), found {shown!r}",
        head.span)


def _term(node: _Node):
    if isinstance(node, _Sym) and not node.quoted and node.text.startswith("?"):
        if len(node.text) < 2:
            raise KRSSSyntaxError("empty variable name", node.span)
        return Var(node.text[1:])
    return _expect_name(node, "individual")


def _rule_atom(node: _Node):
    if not isinstance(node, _List) or len(node.items) not in (2, 3):
        raise KRSSSyntaxError("expected rule atom (?x C) or (?x ?y r)", node.span)
    if len(node.items) == 2:
        return ConceptAtom(_term(node.items[0]), _expect_name(node.items[1], "concept"))
    return RoleAtom(_expect_name(node.items[2], "role"), _term(node.items[0]), _term(node.items[1]))


def _rule(node: _List, position: int) -> Rule:
    args = list(node.items[1:])
    name = f"rule-{position}"
    if args and isinstance(args[0], _Sym):
        name = _expect_name(args.pop(0), "rule")
    if not args:
        raise KRSSSyntaxError("DEFINE-RULE expects a head atom", node.span)
    head = _rule_atom(args[0])
    if not isinstance(head, ConceptAtom):
        raise KRSSSyntaxError("rule head must be a concept atom (?x C)", args[0].span)
    body_nodes = args[1:]
    if len(body_nodes) == 1 and isinstance(body_nodes[0], _List) and body_nodes[0].items \
            and _kw(body_nodes[0].items[0]) == "AND":
        body_nodes = list(body_nodes[0].items[1:])
    rule = Rule(name, tuple(_rule_atom(a) for a in body_nodes), head)
    try:
        rule.check_safe()
    except UnsafeRuleError as exc:
        raise KRSSSyntaxError(str(exc), node.span) from None
    return rule


def _role_decl(node: _List) -> RoleDecl:
    _arity(node, (1, None), "DEFINE-PRIMITIVE-ROLE")
    args = node.items[1:]
    name = _expect_name(args[0], "role")
    parents: list[str] = []
    inverse = None
    i = 1
    while i < len(args):
        key = _kw(args[i])
        if i + 1 >= len(args):
            raise KRSSSyntaxError(f"missing value after {args[i].text if isinstance(args[i], _Sym) else 'option'}",
                                  args[i].span)
        val = args[i + 1]
        if key == ":PARENT":
            parents.append(_expect_name(val, "role"))
        elif key == ":PARENTS":
            if not isinstance(val, _List):
                raise KRSSSyntaxError("expected list of role names after :PARENTS", val.span)
            parents.extend(_expect_name(v, "role") for v in val.items)
        elif key == ":INVERSE":
            if inverse is not None:
                raise KnowledgeBaseError(f"{val.span}: role {name} has two :INVERSE options")
            inverse = _expect_name(val, "role")
        else:
            raise KRSSSyntaxError("expected :PARENT, :PARENTS or :INVERSE", args[i].span)
        i += 2
    return RoleDecl(name, frozenset(parents), inverse)


Parsed = Union[GCI, Equiv, Disjoint, ConceptAssertion, RoleAssertion, DataAssertion,
               RoleDecl, Annotation, Rule]


def parse_statements(text: str | IO[str], source: str = "background") -> Iterator[tuple[Parsed, SourceSpan]]:
    """Yield each statement with the span of its opening parenthesis."""
    if not isinstance(text, str):
        text = text.read()
    rule_count = 0
    for node in _read(text):
        if isinstance(node, _Sym):
            raise KRSSSyntaxError(f"expected '(' to start a statement, found {node.text!r}", node.span)
        if not node.items:
            raise KRSSSyntaxError("empty statement '()'", node.span)
        kw = _kw(node.items[0])
        args = node.items[1:]
        if kw == "DEFINE-PRIMITIVE-ROLE":
            yield _role_decl(node), node.span
        elif kw in ("IMPLIES", "EQUIVALENT"):
            _arity(node, 2, kw)
            cls = GCI if kw == "IMPLIES" else Equiv
            yield cls(_concept(args[0]), _concept(args[1]), source), node.span
        elif kw == "DEFINE-CONCEPT":
            _arity(node, 2, kw)
            yield Equiv(Atom(_expect_name(args[0], "concept")), _concept(args[1]), source), node.span
        elif kw == "DISJOINT":
            _arity(node, (2, None), kw)
            cs = [_concept(a) for a in args]
            for i, left in enumerate(cs):
                for right in cs[i + 1:]:
                    yield Disjoint(left, right, source), node.span
        elif kw == "INSTANCE":
            _arity(node, 2, kw)
            yield ConceptAssertion(_expect_name(args[0], "individual"), _concept(args[1]), source), node.span
        elif kw == "RELATED":
            _arity(node, 3, kw)
            yield RoleAssertion(_expect_name(args[2], "role"), _expect_name(args[0], "individual"),
                                _expect_name(args[1], "individual"), source), node.span
        elif kw == "DATA-VALUE":
            _arity(node, 3, kw)
            yield DataAssertion(_expect_name(args[1], "attribute"), _expect_name(args[0], "individual"),
                                _expect_int(args[2], "data value"), source), node.span
        elif kw == "DEFINE-RULE":
            rule_count += 1
            yield _rule(node, rule_count), node.span
        elif kw == "ANNOTATION":
            _arity(node, 3, kw)
            vals = []
            for a in args:
                if not isinstance(a, _Sym):
                    raise KRSSSyntaxError("annotation fields must be symbols or strings", a.span)
                vals.append(a.text)
            yield Annotation(*vals), node.span
        else:
            head = node.items[0]
            shown = head.text if isinstance(head, _Sym) else "a list"
            raise KRSSSyntaxError(f"unknown statement {shown!r}", head.span)


def parse_kb(text: str | IO[str], source: str = "background") -> KnowledgeBase:
    """Parse KRSS text; every statement gets the given provenance tag."""
    tbox, abox, rbox, annotations, rules = [], [], [], [], []
    for stmt, _span in parse_statements(text, source):
        if isinstance(stmt, (GCI, Equiv, Disjoint)):
            tbox.append(stmt)
        elif isinstance(stmt, (ConceptAssertion, RoleAssertion, DataAssertion)):
            abox.append(stmt)
        elif isinstance(stmt, RoleDecl):
            rbox.append(stmt)
        elif isinstance(stmt, Annotation):
            annotations.append(stmt)
        else:
            rules.append(stmt)
    return KnowledgeBase(tbox=tbox, abox=abox, rbox=rbox, annotations=annotations, rules=rules)


def parse_concept(text: str) -> Concept:
    nodes = _read(text)
    if len(nodes) != 1:
        span = nodes[1].span if len(nodes) > 1 else SourceSpan(1, 1)
        raise KRSSSyntaxError("expected exactly one concept expression", span)
    return _concept(nodes[0])


def load_kb(path, source: str = "background") -> KnowledgeBase:
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read(), source)


# ---------------------------------------------------------------------------
# Writer

_PLAIN = re.compile(r"[^\s();\"?:][^\s();\"]*\Z")


def _name(name: str) -> str:
    if _PLAIN.match(name) and name.upper() not in ("*TOP*", "*BOTTOM*"):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_concept(c: Concept) -> str:
    if isinstance(c, Atom):
        return _name(c.name)
    if isinstance(c, Top):
        return "*TOP*"
    if isinstance(c, Bottom):
        return "*BOTTOM*"
    if isinstance(c, Not):
        return f"(NOT {format_concept(c.operand)})"
    if isinstance(c, (And, Or)):
        kw = "AND" if isinstance(c, And) else "OR"
        return f"({kw} {' '.join(format_concept(x) for x in c.operands)})"
    if isinstance(c, Exists):
        return f"(SOME {_name(c.role)} {format_concept(c.filler)})"
    if isinstance(c, ForAll):
        return f"(ALL {_name(c.role)} {format_concept(c.filler)})"
    if isinstance(c, OneOf):
        return f"(ONE-OF {' '.join(_name(i) for i in c.individuals)})"
    if isinstance(c, Facet):
        return f"({c.op} {_name(c.attribute)} {c.value})"
    raise TypeError(f"not a concept: {c!r}")


def _term_str(t) -> str:
    return str(t) if isinstance(t, Var) else _name(t)


def _atom_str(a) -> str:
    if isinstance(a, ConceptAtom):
        return f"({_term_str(a.term)} {_name(a.concept)})"
    return f"({_term_str(a.subject)} {_term_str(a.object)} {_name(a.role)})"


def format_statement(stmt: Parsed) -> str:
    if isinstance(stmt, GCI):
        return f"(IMPLIES {format_concept(stmt.sub)} {format_concept(stmt.sup)})"
    if isinstance(stmt, Equiv):
        return f"(EQUIVALENT {format_concept(stmt.left)} {format_concept(stmt.right)})"
    if isinstance(stmt, Disjoint):
        return f"(DISJOINT {format_concept(stmt.left)} {format_concept(stmt.right)})"
    if isinstance(stmt, ConceptAssertion):
        return f"(INSTANCE {_name(stmt.individual)} {format_concept(stmt.concept)})"
    if isinstance(stmt, RoleAssertion):
        return f"(RELATED {_name(stmt.subject)} {_name(stmt.object)} {_name(stmt.role)})"
    if isinstance(stmt, DataAssertion):
        return f"(DATA-VALUE {_name(stmt.individual)} {_name(stmt.attribute)} {stmt.value})"
    if isinstance(stmt, RoleDecl):
        parts = [f"(DEFINE-PRIMITIVE-ROLE {_name(stmt.name)}"]
        parts += [f":PARENT {_name(p)}" for p in sorted(stmt.parents)]
        if stmt.inverse_of is not None:
            parts.append(f":INVERSE {_name(stmt.inverse_of)}")
        return " ".join(parts) + ")"
    if isinstance(stmt, Annotation):
        return f"(ANNOTATION {_name(stmt.individual)} {_name(stmt.key)} {_name(stmt.value)})"
    if isinstance(stmt, Rule):
        atoms = " ".join(_atom_str(a) for a in stmt.body)
        tail = f" {atoms}" if atoms else ""
        return f"(DEFINE-RULE {_name(stmt.name)} {_atom_str(stmt.head)}{tail})"
    raise TypeError(f"not a statement: {stmt!r}")


def serialize_kb(kb: KnowledgeBase) -> str:
    """One statement per line: roles, TBox, ABox, annotations, rules."""
    items = (*kb.rbox, *kb.tbox, *kb.abox, *kb.annotations, *kb.rules)
    return "\n".join(format_statement(s) for s in items)
