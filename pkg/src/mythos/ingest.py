"""Turning machine-reading RDF output into knowledge bases.

A text-to-RDF service (FRED-style) emits N-Triples over VerbNet, FrameNet,
DOLCE, Boxing and DBpedia vocabularies.  This module parses that output,
applies the clean-up steps needed before reasoning (dropping ``owl:sameAs``,
turning modality/truth-value/quantifier links into annotations) and maps the
rest onto concept, role and data assertions.  Translations come either from
recorded fixture files or from a live HTTP endpoint.
"""

from __future__ import annotations

import os
import re
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Union

from .errors import FixtureMissingError, NTriplesSyntaxError, SourceSpan, TranslationError
from .model import (
    GCI, Annotation, Atom, ConceptAssertion, DataAssertion, Equiv, KnowledgeBase, Not, RoleAssertion,
)

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
DEFAULT_NS = "http://www.ontologydesignpatterns.org/ont/Covid-19/covid-19-myths.owl#"

PREFIXES: dict[str, str] = {
    "covid19.m": DEFAULT_NS,
    "vn.role": "http://www.ontologydesignpatterns.org/ont/vn/abox/role/",
    "vn.data": "http://www.ontologydesignpatterns.org/ont/vn/data/",
    "ff": "http://www.ontologydesignpatterns.org/ont/framenet/abox/frame/",
    "fe": "http://www.ontologydesignpatterns.org/ont/framenet/abox/fe/",
    "dul": "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#",
    "wn30": "http://www.w3.org/2006/03/wn/wn30/instances/",
    "boxer": "http://ontologydesignpatterns.org/ont/boxer/boxer.owl#",
    "boxing": "http://ontologydesignpatterns.org/ont/boxer/boxing.owl#",
    "dbpedia": "http://dbpedia.org/resource/",
    "schemaorg": "http://schema.org/",
    "q": "http://www.ontologydesignpatterns.org/ont/fred/quantifiers.owl#",
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
}

ENDPOINT_ENV = "MYTHOS_FRED_ENDPOINT"
FALSE_EVENT = "FalseEvent"
TRUE_EVENT = "TrueEvent"

BOXING = PREFIXES["boxing"]
ROLE_NAMESPACES = (PREFIXES["vn.role"], PREFIXES["dul"], PREFIXES["fe"], DEFAULT_NS)


@dataclass(frozen=True)
class IRI:
    value: str

    def __str__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __str__(self) -> str:
        esc = (self.lexical.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t"))
        out = f'"{esc}"'
        if self.language:
            out += f"@{self.language}"
        elif self.datatype:
            out += f"^^<{self.datatype}>"
        return out


Term = Union[IRI, BlankNode, Literal]


@dataclass(frozen=True)
class Triple:
    subject: Union[IRI, BlankNode]
    predicate: IRI
    object: Term

    def __str__(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} ."


@dataclass(frozen=True)
class Graph:
    triples: tuple[Triple, ...] = ()
    prefixes: dict = field(default_factory=lambda: dict(PREFIXES), compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "triples", tuple(self.triples))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def to_ntriples(self) -> str:
        return "".join(f"{t}\n" for t in self.triples)

    def compact(self, iri: str) -> str:
        """``prefix:local`` form when a known namespace matches."""
        best = max((ns for ns in self.prefixes.values() if iri.startswith(ns)), key=len, default=None)
        if best is None:
            return iri
        prefix = next(p for p, ns in self.prefixes.items() if ns == best)
        return f"{prefix}:{iri[len(best):]}"


@dataclass(frozen=True)
class TranslationFixture:
    input_text: str
    graph: Graph
    recorded_at: str | None = None


# ---------------------------------------------------------------------------
# N-Triples


_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_LANG = re.compile(r"[A-Za-z]+(-[A-Za-z0-9]+)*")
_BNODE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")


class _LineReader:
    def __init__(self, line: str, lineno: int):
        self.s = line
        self.i = 0
        self.lineno = lineno

    def error(self, msg: str, at: int | None = None) -> NTriplesSyntaxError:
        return NTriplesSyntaxError(msg, SourceSpan(self.lineno, (self.i if at is None else at) + 1))

    def skip_ws(self) -> None:
        while self.i < len(self.s) and self.s[self.i] in " \t":
            self.i += 1

    def iri(self) -> IRI:
        start = self.i
        end = self.s.find(">", self.i + 1)
        if end < 0:
            raise self.error("unterminated IRI (missing '>')", start)
        value = self.s[self.i + 1:end]
        if not value or any(ch in value for ch in ' <"{}|^`\\'):
            raise self.error(f"invalid IRI <{value}>", start)
        if ":" not in value:
            raise self.error(f"IRI <{value}> is not absolute", start)
        self.i = end + 1
        return IRI(value)

    def bnode(self) -> BlankNode:
        start = self.i
        m = _BNODE.match(self.s, self.i + 2)
        if not self.s.startswith("_:", self.i) or not m:
            raise self.error("invalid blank node label", start)
        self.i = m.end()
        return BlankNode(m.group())

    def literal(self) -> Literal:
        start = self.i
        self.i += 1
        buf = []
        while True:
            if self.i >= len(self.s):
                raise self.error("unterminated string literal", start)
            ch = self.s[self.i]
            if ch == '"':
                self.i += 1
                break
            if ch == "\\":
                nxt = self.s[self.i + 1:self.i + 2]
                if nxt in _ESCAPES:
                    buf.append(_ESCAPES[nxt])
                    self.i += 2
                elif nxt in ("u", "U"):
                    width = 4 if nxt == "u" else 8
                    hexdigits = self.s[self.i + 2:self.i + 2 + width]
                    if len(hexdigits) != width or not all(c in "0123456789abcdefABCDEF" for c in hexdigits):
                        raise self.error("invalid unicode escape")
                    buf.append(chr(int(hexdigits, 16)))
                    self.i += 2 + width
                else:
                    raise self.error(f"invalid escape sequence \\{nxt}")
                continue
            buf.append(ch)
            self.i += 1
        lexical = "".join(buf)
        if self.s.startswith("@", self.i):
            m = _LANG.match(self.s, self.i + 1)
            if not m:
                raise self.error("invalid language tag")
            self.i = m.end()
            return Literal(lexical, language=m.group())
        if self.s.startswith("^^", self.i):
            self.i += 2
            if not self.s.startswith("<", self.i):
                raise self.error("expected datatype IRI after '^^'")
            return Literal(lexical, datatype=self.iri().value)
        return Literal(lexical)

    def term(self, position: str) -> Term:
        self.skip_ws()
        if self.i >= len(self.s):
            raise self.error(f"missing {position}")
        ch = self.s[self.i]
        if ch == "<":
            return self.iri()
        if ch == "_" and position != "predicate":
            return self.bnode()
        if ch == '"' and position == "object":
            return self.literal()
        raise self.error(f"unexpected character {ch!r} in {position}")


def parse_ntriples(text: Union[str, IO[str]]) -> Graph:
    """Parse the N-Triples subset; errors carry line and column."""
    if not isinstance(text, str):
        text = text.read()
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.lstrip()
        if not stripped or stripped.startswith("#"):
            continue
        r = _LineReader(line, lineno)
        s = r.term("subject")
        p = r.term("predicate")
        o = r.term("object")
        r.skip_ws()
        if not r.s.startswith(".", r.i):
            raise r.error("expected '.' at end of triple")
        r.i += 1
        r.skip_ws()
        if r.i < len(r.s) and not r.s.startswith("#", r.i):
            raise r.error("unexpected content after '.'")
        triples.append(Triple(s, p, o))
    return Graph(tuple(triples))


# ---------------------------------------------------------------------------
# Normalization


@dataclass
class NormalizationLog:
    """Where every input triple went."""

    mapped: list = field(default_factory=list)
    annotated: list = field(default_factory=list)
    dropped: list = field(default_factory=list)      # (triple, reason)
    warnings: list = field(default_factory=list)     # (triple, message)

    def total(self) -> int:
        return len(self.mapped) + len(self.annotated) + len(self.dropped) + len(self.warnings)


_UNSAFE = re.compile(r'[\s()";]')


def _split_iri(iri: str, prefixes: dict) -> tuple[str | None, str]:
    best = None
    for prefix, ns in prefixes.items():
        if iri.startswith(ns) and len(iri) > len(ns) and (best is None or len(ns) > len(prefixes[best])):
            best = prefix
    if best is not None:
        return best, iri[len(prefixes[best]):]
    cut = max(iri.rfind("#"), iri.rfind("/"))
    return None, iri[cut + 1:] if cut >= 0 and cut + 1 < len(iri) else iri


class _Namer:
    """Local names for IRIs; cross-namespace collisions get ``prefix_local``."""

    def __init__(self, graph: Graph):
        self.prefixes = graph.prefixes
        iris: dict[str, None] = {}
        for t in graph.triples:
            for term in (t.subject, t.predicate, t.object):
                if isinstance(term, IRI):
                    iris.setdefault(term.value)
        by_local: dict[str, list[str]] = {}
        for iri in iris:
            by_local.setdefault(self._local(iri), []).append(iri)
        self.names: dict[str, str] = {}
        for local, group in by_local.items():
            for iri in group:
                prefix, _ = _split_iri(iri, self.prefixes)
                if len(group) > 1 and not iri.startswith(DEFAULT_NS):
                    tag = (prefix or "ns").replace(".", "_")
                    self.names[iri] = f"{tag}_{local}"
                else:
                    self.names[iri] = local

    def _local(self, iri: str) -> str:
        _, local = _split_iri(iri, self.prefixes)
        return _UNSAFE.sub("_", local) or "_"

    def __call__(self, iri: IRI) -> str:
        return self.names[iri.value]


def _integer(lit: Literal) -> int | None:
    if lit.datatype not in (None, XSD + "integer", XSD + "int", XSD + "long", XSD + "nonNegativeInteger"):
        return None
    try:
        return int(lit.lexical)
    except ValueError:
        return None


def normalize_with_log(g: Graph) -> tuple[KnowledgeBase, NormalizationLog]:
    """Normalize a graph and report how each triple was accounted for."""
    name = _Namer(g)
    log = NormalizationLog()
    tbox: list = []
    abox: list = []
    annotations: list = []
    truth_markers: set[str] = set()

    def keep(stmt, bucket, triple):
        if stmt not in bucket:
            bucket.append(stmt)
        log.mapped.append(triple)

    def annotate(ann: Annotation, triple) -> None:
        if ann not in annotations:
            annotations.append(ann)
        log.annotated.append(triple)

    for t in g.triples:
        p = t.predicate.value
        if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode):
            log.warnings.append((t, "blank nodes are not supported; triple skipped"))
            continue
        s = name(t.subject)
        o = t.object
        if p == OWL + "sameAs":
            log.dropped.append((t, "owl:sameAs removed"))
            continue
        if p == RDF + "type":
            if not isinstance(o, IRI):
                log.warnings.append((t, "rdf:type with a literal object skipped"))
            elif o.value.startswith((OWL, RDFS, RDF)):
                log.dropped.append((t, "vocabulary declaration"))
            else:
                keep(ConceptAssertion(s, Atom(name(o)), source="myth"), abox, t)
            continue
        if p in (RDFS + "label", RDFS + "comment"):
            log.dropped.append((t, "label or comment"))
            continue
        if p in (RDFS + "subClassOf", OWL + "equivalentClass"):
            if not isinstance(o, IRI):
                log.warnings.append((t, "class axiom with a literal object skipped"))
            elif p == RDFS + "subClassOf":
                keep(GCI(Atom(s), Atom(name(o)), source="myth"), tbox, t)
            else:
                keep(Equiv(Atom(s), Atom(name(o)), source="myth"), tbox, t)
            continue
        if p == BOXING + "hasTruthValue":
            value = _local_value(o, g)
            annotate(Annotation(s, "truth-value", value), t)
            if value in ("false", "true"):
                marker = FALSE_EVENT if value == "false" else TRUE_EVENT
                truth_markers.add(marker)
                ca = ConceptAssertion(s, Atom(marker), source="myth")
                if ca not in abox:
                    abox.append(ca)
            continue
        if p == BOXING + "hasModality":
            annotate(Annotation(s, "modality", _local_value(o, g)), t)
            continue
        if p == PREFIXES["q"] + "hasQuantifier":
            annotate(Annotation(s, "quantifier", _local_value(o, g)), t)
            continue
        role = name(t.predicate)
        known = p.startswith(ROLE_NAMESPACES) or p == BOXING + "involves"
        if isinstance(o, Literal):
            value = _integer(o)
            if value is None:
                log.warnings.append((t, f"non-integer literal for {g.compact(p)} skipped"))
            elif not known:
                log.warnings.append((t, f"unknown vocabulary {g.compact(p)}; kept as data value"))
                abox.append(DataAssertion(role, s, value, source="myth"))
            else:
                keep(DataAssertion(role, s, value, source="myth"), abox, t)
            continue
        stmt = RoleAssertion(role, s, name(o), source="myth")
        if known:
            keep(stmt, abox, t)
        else:
            log.warnings.append((t, f"unknown vocabulary {g.compact(p)}; kept as role assertion"))
            if stmt not in abox:
                abox.append(stmt)
    if truth_markers:
        tbox.append(GCI(Atom(FALSE_EVENT), Not(Atom(TRUE_EVENT)), source="myth"))
    kb = KnowledgeBase(tbox=tbox, abox=abox, annotations=annotations)
    return kb, log


def _local_value(o: Term, g: Graph) -> str:
    if isinstance(o, Literal):
        return o.lexical.lower()
    _, local = _split_iri(o.value, g.prefixes) if isinstance(o, IRI) else (None, str(o))
    return local.lower()


def normalize_fred(g: Graph) -> KnowledgeBase:
    """Knowledge base for a machine-reading graph (see :func:`normalize_with_log`)."""
    return normalize_with_log(g)[0]


# ---------------------------------------------------------------------------
# Fixtures and live translation


def normalize_text(text: str) -> str:
    return " ".join(text.split())


def slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", normalize_text(text).lower()).strip("-")
    return slug or "sentence"


_RECORDED = re.compile(r"#\s*recorded_at:\s*(\S+)")


def load_fixtures(directory) -> dict[str, TranslationFixture]:
    """Normalized input text → fixture, for every ``*.txt``/``*.nt`` pair."""
    out: dict[str, TranslationFixture] = {}
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"fixture directory not found: {d}")
    for txt in sorted(d.glob("*.txt")):
        nt = txt.with_suffix(".nt")
        if not nt.exists():
            continue
        text = nt.read_text(encoding="utf-8")
        m = _RECORDED.search(text.split("\n", 1)[0])
        key = normalize_text(txt.read_text(encoding="utf-8"))
        out[key] = TranslationFixture(key, parse_ntriples(text), m.group(1) if m else None)
    return out


def _fetch_live(text: str, endpoint: str, timeout: float, attempts: int = 2) -> str:
    sep = "&" if urllib.parse.urlparse(endpoint).query else "?"
    url = endpoint + sep + urllib.parse.urlencode({"text": text})
    req = urllib.request.Request(url, headers={"Accept": "text/plain"})
    last: Exception | None = None
    for attempt in range(attempts):
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return resp.read().decode("utf-8")
        except urllib.error.HTTPError as exc:
            last = exc
            if exc.code < 500:
                break
        except (urllib.error.URLError, OSError) as exc:
            last = exc
        if attempt + 1 < attempts:
            time.sleep(0.2)
    raise TranslationError(f"translation request to {endpoint} failed: {last}")


def fetch_translation(text: str, *, fixtures=None, endpoint: str | None = None,
                      timeout: float = 30.0) -> Graph:
    """Graph for a sentence from recorded fixtures (preferred) or a live endpoint.

    With neither argument the endpoint falls back to ``$MYTHOS_FRED_ENDPOINT``.
    """
    if fixtures is not None:
        table = load_fixtures(fixtures)
        key = normalize_text(text)
        if key not in table:
            raise FixtureMissingError(text, sorted(table))
        return table[key].graph
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    if not endpoint:
        raise TranslationError(f"no fixtures directory or endpoint given (set {ENDPOINT_ENV})")
    return parse_ntriples(_fetch_live(text, endpoint, timeout))


def record_fixture(text: str, graph: Graph, directory, *, recorded_at: str | None = None) -> Path:
    """Write a ``slug.txt``/``slug.nt`` pair; returns the .nt path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stamp = recorded_at or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    slug = slugify(text)
    (d / f"{slug}.txt").write_text(normalize_text(text) + "\n", encoding="utf-8")
    nt = d / f"{slug}.nt"
    nt.write_text(f"# recorded_at: {stamp}\n" + graph.to_ntriples(), encoding="utf-8")
    return nt
