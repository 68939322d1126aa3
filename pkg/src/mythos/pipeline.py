"""Claim checking: merge a myth with facts and background knowledge, apply
rules, look for defects and explain them.  Also batch evaluation of a corpus
manifest."""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .antipatterns import PatternMatch, detect_antipatterns
from .errors import MythosError, ResourceLimitError
from .justify import Justification, justify_inconsistency, justify_unsat, sentence, verbalize
from .krss import format_statement, load_kb
from .model import (
    And, ConceptAssertion, KnowledgeBase, Not, OneOf, Or, Exists, ForAll,
    RoleAssertion, with_source,
)
from .rules import apply_rules
from .tableau import DEFAULT_NODE_CAP, Reasoner

CONSISTENT = "consistent"
INCOHERENT = "incoherent"
INCONSISTENT = "inconsistent"
ANTIPATTERN_ONLY = "antipattern-only"
ERROR = "error"
VERDICTS = (CONSISTENT, INCOHERENT, INCONSISTENT, ANTIPATTERN_ONLY)
CONFLICTS = (INCOHERENT, INCONSISTENT, ANTIPATTERN_ONLY)


@dataclass
class ConflictReport:
    myth_id: str
    verdict: str
    unsat_concepts: list = field(default_factory=list)
    pattern_matches: list = field(default_factory=list)
    justifications: list = field(default_factory=list)
    explanation: str = ""
    inferred: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    error: dict | None = None
    expected_verdict: str | None = None

    @property
    def is_conflict(self) -> bool:
        return self.verdict in CONFLICTS

    @property
    def unexpected(self) -> bool:
        if self.verdict == ERROR:
            return True
        return self.expected_verdict is not None and self.verdict != self.expected_verdict

    def to_dict(self, *, timings: bool = False) -> dict:
        out = {
            "myth_id": self.myth_id,
            "verdict": self.verdict,
            "unsat_concepts": list(self.unsat_concepts),
            "pattern_matches": [m.to_dict() for m in self.pattern_matches],
            "justifications": [j.to_dict() for j in self.justifications],
            "explanation": self.explanation,
            "inferred": [format_statement(a) for a in self.inferred],
        }
        if self.error is not None:
            out["error"] = dict(self.error)
        if self.expected_verdict is not None:
            out["expected_verdict"] = self.expected_verdict
            out["matches_expectation"] = not self.unexpected
        if timings:
            out["timings"] = dict(self.timings)
        return out


def merge(kbs: Sequence[KnowledgeBase]) -> KnowledgeBase:
    """Union of knowledge bases; the first occurrence of a statement wins."""
    kbs = list(kbs)
    if len(kbs) == 1:
        return kbs[0]

    def union(parts: Iterable[Iterable]) -> list:
        seen: dict = {}
        for part in parts:
            for item in part:
                seen.setdefault(item, item)
        return list(seen.values())

    return KnowledgeBase(
        tbox=union(kb.tbox for kb in kbs),
        abox=union(kb.abox for kb in kbs),
        rbox=[d for kb in kbs for d in kb.rbox],
        annotations=union(kb.annotations for kb in kbs),
        rules=union(kb.rules for kb in kbs),
    )


def tag(kb: KnowledgeBase, source: str) -> KnowledgeBase:
    """Copy of kb with every axiom and assertion tagged with ``source``."""
    return kb.replace(tbox=tuple(with_source(s, source) for s in kb.tbox),
                      abox=tuple(with_source(s, source) for s in kb.abox))


def _rename_concept(c, f):
    if isinstance(c, OneOf):
        return OneOf(tuple(f(i) for i in c.individuals))
    if isinstance(c, Not):
        return Not(_rename_concept(c.operand, f))
    if isinstance(c, (And, Or)):
        return type(c)(tuple(_rename_concept(op, f) for op in c.operands))
    if isinstance(c, (Exists, ForAll)):
        return type(c)(c.role, _rename_concept(c.filler, f))
    return c


def isolate(kb: KnowledgeBase, prefix: str) -> KnowledgeBase:
    """Prefix every individual name so that inputs share only vocabulary."""
    f = lambda i: f"{prefix}:{i}"  # noqa: E731
    abox = []
    for a in kb.abox:
        if isinstance(a, ConceptAssertion):
            abox.append(dataclasses.replace(a, individual=f(a.individual), concept=_rename_concept(a.concept, f)))
        elif isinstance(a, RoleAssertion):
            abox.append(dataclasses.replace(a, subject=f(a.subject), object=f(a.object)))
        else:
            abox.append(dataclasses.replace(a, individual=f(a.individual)))
    tbox = []
    for ax in kb.tbox:
        fields = {"sub", "sup"} if hasattr(ax, "sub") else {"left", "right"}
        tbox.append(dataclasses.replace(ax, **{k: _rename_concept(getattr(ax, k), f) for k in fields}))
    annotations = [(f(a.individual), a.key, a.value) for a in kb.annotations]
    return kb.replace(tbox=tuple(tbox), abox=tuple(abox), annotations=annotations)


class _Steps:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self.current = ""

    def run(self, name: str, fn, *args, **kwargs):
        self.current = name
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[name] = round((time.perf_counter() - start) * 1000, 3)


def _pattern_text(m: PatternMatch) -> str:
    slots = ", ".join(f"{k}={v}" for k, v in m.participants.items())
    lines = [f"Pattern {m.pattern_id} ({m.label}) with {slots}:"]
    lines.extend(sentence(a) for a in m.axioms)
    return "\n".join(lines)


def check_claim(myth: KnowledgeBase, fact: KnowledgeBase, background: KnowledgeBase | None = None,
                rules: Sequence = (), *, myth_id: str = "claim", node_cap: int = DEFAULT_NODE_CAP,
                isolate_inputs: bool = False) -> ConflictReport:
    """Run the full check and always return a report.

    Steps: merge, apply rules, anti-pattern scan, coherence, consistency,
    explanation.  Verdict precedence: inconsistent, incoherent,
    antipattern-only, consistent.  A resource limit yields verdict ``error``
    naming the step that hit it.
    """
    steps = _Steps()
    report = ConflictReport(myth_id, CONSISTENT, timings=steps.timings)
    try:
        myth, fact = tag(myth, "myth"), tag(fact, "fact")
        if isolate_inputs:
            myth, fact = isolate(myth, "myth"), isolate(fact, "fact")
        parts = [myth, fact] + ([tag(background, "background")] if background is not None else [])
        merged = steps.run("merge", merge, parts)
        all_rules = list(rules) + [r for r in merged.rules if r not in rules]
        saturated = steps.run("rules", apply_rules, merged, all_rules)
        report.inferred = list(saturated.abox[len(merged.abox):])
        report.pattern_matches = steps.run("antipatterns", detect_antipatterns, saturated)
        reasoner = Reasoner(saturated, node_cap)
        _, unsat = steps.run("coherence", reasoner.is_coherent)
        report.unsat_concepts = unsat
        consistent = steps.run("consistency", reasoner.is_consistent)

        justifications: list[Justification] = []
        if not consistent:
            report.verdict = INCONSISTENT
            justifications.append(steps.run("justify", justify_inconsistency, saturated, node_cap=node_cap))
        elif unsat:
            report.verdict = INCOHERENT
            justifications = steps.run(
                "justify", lambda: [justify_unsat(saturated, c, node_cap=node_cap) for c in unsat])
        elif report.pattern_matches:
            report.verdict = ANTIPATTERN_ONLY
        report.justifications = justifications
        texts = [verbalize(j) for j in justifications]
        if report.verdict == ANTIPATTERN_ONLY:
            texts = [_pattern_text(m) for m in report.pattern_matches]
        report.explanation = "\n\n".join(texts)
    except ResourceLimitError as exc:
        report.verdict = ERROR
        report.error = {"step": steps.current, "message": str(exc)}
    return report


# ---------------------------------------------------------------------------
# Corpus


@dataclass(frozen=True)
class CorpusEntry:
    myth_id: str
    myth_text: str = ""
    fact_text: str = ""
    myth_kb_path: str | None = None
    fact_kb_path: str | None = None
    expected_verdict: str | None = None
    background_paths: tuple[str, ...] = ()
    rules_path: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusEntry":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown manifest fields: {', '.join(sorted(unknown))}")
        if "myth_id" not in d:
            raise ValueError("manifest entry without myth_id")
        d = dict(d)
        d["background_paths"] = tuple(d.get("background_paths", ()))
        return cls(**d)


def load_manifest(path) -> list[CorpusEntry]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("manifest must be a JSON array")
    entries = [CorpusEntry.from_dict(d) for d in data]
    ids = [e.myth_id for e in entries]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValueError(f"duplicate myth ids in manifest: {', '.join(dupes)}")
    return entries


def _run_entry(entry: CorpusEntry, base: Path, node_cap: int) -> ConflictReport:
    def resolve(p: str) -> Path:
        return base / p

    try:
        if not entry.myth_kb_path or not entry.fact_kb_path:
            raise MythosError("entry has no formalization (myth_kb_path and fact_kb_path are required)")
        myth = load_kb(resolve(entry.myth_kb_path), "myth")
        fact = load_kb(resolve(entry.fact_kb_path), "fact")
        background = merge([load_kb(resolve(p)) for p in entry.background_paths]) \
            if entry.background_paths else None
        rules = list(load_kb(resolve(entry.rules_path)).rules) if entry.rules_path else []
    except (OSError, MythosError, ValueError) as exc:
        return ConflictReport(entry.myth_id, ERROR, error={"step": "load", "message": str(exc)},
                              expected_verdict=entry.expected_verdict)
    report = check_claim(myth, fact, background, rules, myth_id=entry.myth_id, node_cap=node_cap)
    report.expected_verdict = entry.expected_verdict
    return report


def run_corpus(manifest, *, jobs: int | None = None, node_cap: int = DEFAULT_NODE_CAP) -> list[ConflictReport]:
    """One report per manifest entry, in manifest order.

    Paths inside the manifest are relative to the manifest's directory.  A
    missing or unreadable file turns that entry into an ``error`` report
    without stopping the batch.
    """
    path = Path(manifest)
    entries = load_manifest(path)
    base = path.parent
    if jobs == 1 or len(entries) <= 1:
        return [_run_entry(e, base, node_cap) for e in entries]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda e: _run_entry(e, base, node_cap), entries))


def summarize(reports: Sequence[ConflictReport]) -> dict:
    """Verdict counts plus the ids whose verdict was unexpected."""
    counts = {v: 0 for v in VERDICTS + (ERROR,)}
    for r in reports:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    return {
        "total": len(reports),
        "counts": counts,
        "unexpected": [r.myth_id for r in reports if r.unexpected],
    }
