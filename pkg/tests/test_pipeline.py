import json
import shutil

import pytest

from mythos import data_path, load_kb
from mythos.justify import INCONSISTENT as INCONSISTENT_KIND
from mythos.krss import parse_kb
from mythos.model import Atom, ConceptAssertion, KnowledgeBase, Not, RoleAssertion
from mythos.pipeline import (
    ANTIPATTERN_ONLY, CONSISTENT, ERROR, INCOHERENT, INCONSISTENT, CorpusEntry, check_claim,
    isolate, load_manifest, merge, run_corpus, summarize, tag,
)
from mythos.tableau import Reasoner

MANIFEST = data_path("manifest.json")


def kb(name, source="myth"):
    return load_kb(data_path(name), source)


def m33_inputs():
    return kb("m33.krss"), kb("f33.krss", "fact"), kb("background.krss", "background"), \
        list(kb("elderly.rules").rules)


class TestMerge:
    def test_step3_edges(self):
        merged = merge([kb("m33.krss"), kb("f33.krss", "fact")])
        edges = [a for a in merged.abox if isinstance(a, RoleAssertion) and a.role == "Experiencer"]
        assert edges == [RoleAssertion("Experiencer", "affect_1", "elderly_1"),
                         RoleAssertion("Experiencer", "affect_1", "person_1")]
        # shared statements are kept once, with the first source
        shared = [a for a in merged.abox if a == ConceptAssertion("affect_1", Atom("Affect"))]
        assert len(shared) == 1 and shared[0].source == "myth"

    def test_singleton_and_empty(self):
        single = kb("m1.krss")
        assert merge([single]) is single
        assert merge([]).statements == ()

    def test_tag(self):
        tagged = tag(kb("m1.krss"), "fact")
        assert all(s.source == "fact" for s in tagged.statements)

    def test_isolate(self):
        out = isolate(parse_kb("(INSTANCE a (ONE-OF b))\n(RELATED a c r)\n(IMPLIES X (ONE-OF d))"), "myth")
        assert set(out.individuals()) == {"myth:a", "myth:b", "myth:c", "myth:d"}


class TestCheckClaim:
    def test_m33(self):
        myth, fact, bg, rules = m33_inputs()
        report = check_claim(myth, fact, bg, rules, myth_id="m33")
        assert report.verdict == INCONSISTENT
        assert report.inferred == [ConceptAssertion("person_1", Atom("Elderly"))]
        [j] = report.justifications
        assert ConceptAssertion("person_1", Not(Atom("Elderly"))) in j.assertions
        assert "elderly-only" in report.explanation

    def test_m33_without_rules_is_consistent(self):
        myth, fact, bg, _ = m33_inputs()
        assert check_claim(myth, fact, bg).verdict == CONSISTENT

    def test_m1(self):
        report = check_claim(kb("m1.krss"), kb("f1.krss", "fact"), kb("background.krss", "background"))
        assert report.verdict == INCONSISTENT
        assert {s.source for s in report.justifications[0].statements} >= {"myth", "fact"}

    def test_m16_incoherent(self):
        report = check_claim(kb("m16.krss"), kb("f16.krss", "fact"), kb("background.krss", "background"))
        assert report.verdict == INCOHERENT
        assert report.unsat_concepts == ["Antibiotics"]
        assert [m.pattern_id for m in report.pattern_matches] == ["UE"]

    def test_disjoint_vocabulary(self):
        report = check_claim(parse_kb("(INSTANCE a A)"), parse_kb("(IMPLIES B C)\n(INSTANCE b B)"))
        assert report.verdict == CONSISTENT
        assert report.explanation == "" and report.justifications == []

    def test_antipattern_only(self):
        report = check_claim(parse_kb("(IMPLIES Antibiotics (ALL kills Virus))"),
                             parse_kb("(IMPLIES Antibiotics (ALL kills Bacteria))\n(DISJOINT Virus Bacteria)"))
        assert report.verdict == ANTIPATTERN_ONLY
        assert report.is_conflict
        assert report.explanation.startswith("Pattern OIL (modeling smell)")

    def test_resource_limit(self):
        myth, fact, bg, rules = m33_inputs()
        report = check_claim(myth, fact, bg, rules, node_cap=1)
        assert report.verdict == ERROR
        assert report.error["step"] in {"coherence", "consistency", "justify"}
        assert "1" in report.error["message"]
        assert report.unexpected

    def test_timings_recorded(self):
        myth, fact, bg, rules = m33_inputs()
        report = check_claim(myth, fact, bg, rules)
        assert set(report.timings) >= {"merge", "rules", "antipatterns", "coherence", "consistency", "justify"}
        assert "timings" not in report.to_dict()
        assert "timings" in report.to_dict(timings=True)

    def test_isolated_inputs_lose_shared_individuals(self):
        myth, fact, bg, rules = m33_inputs()
        assert check_claim(myth, fact, bg, rules, isolate_inputs=True).verdict == CONSISTENT

    @pytest.mark.parametrize("myth,fact", [("m1.krss", "f1.krss"), ("m16.krss", "f16.krss"),
                                           ("c1-myth.krss", "c1-fact.krss")])
    def test_swap_invariance(self, myth, fact):
        bg = kb("background.krss", "background")
        a = check_claim(kb(myth), kb(fact, "fact"), bg)
        b = check_claim(kb(fact), kb(myth, "fact"), bg)
        assert a.verdict == b.verdict
        assert a.unsat_concepts == b.unsat_concepts

    @pytest.mark.parametrize("myth,fact", [("m1.krss", "f1.krss"), ("m16.krss", "f16.krss"),
                                           ("c2-myth.krss", "c2-fact.krss")])
    def test_unrelated_background_keeps_verdict(self, myth, fact):
        bg = kb("background.krss", "background")
        extra = parse_kb("(IMPLIES Zebra Animal)\n(INSTANCE zed Zebra)\n(RELATED zed zoo livesIn)")
        before = check_claim(kb(myth), kb(fact, "fact"), bg)
        after = check_claim(kb(myth), kb(fact, "fact"), merge([bg, extra]))
        assert before.verdict == after.verdict

    def test_justifications_replay(self):
        for report in run_corpus(MANIFEST, jobs=1):
            for j in report.justifications:
                sub = j.as_kb(kb("m1.krss").rbox + kb("background.krss").rbox)
                if j.kind == INCONSISTENT_KIND:
                    assert not Reasoner(sub).is_consistent()
                else:
                    assert not Reasoner(sub).is_satisfiable(Atom(j.concept))


class TestCorpus:
    def test_shipped_manifest(self):
        reports = run_corpus(MANIFEST)
        assert [(r.myth_id, r.verdict) for r in reports] == [
            ("m1", INCONSISTENT), ("m16", INCOHERENT), ("m33", INCONSISTENT),
            ("c1", CONSISTENT), ("c2", CONSISTENT), ("c3", CONSISTENT)]
        assert summarize(reports)["unexpected"] == []

    def test_parallel_equals_sequential(self):
        seq = [r.to_dict() for r in run_corpus(MANIFEST, jobs=1)]
        par = [r.to_dict() for r in run_corpus(MANIFEST, jobs=4)]
        assert seq == par

    def test_json_byte_identical(self):
        dump = lambda: json.dumps([r.to_dict() for r in run_corpus(MANIFEST)], sort_keys=True)  # noqa: E731
        assert dump() == dump()

    def test_empty_manifest(self, tmp_path):
        (tmp_path / "m.json").write_text("[]")
        assert run_corpus(tmp_path / "m.json") == []
        assert summarize([]) == {"total": 0, "counts": {v: 0 for v in (CONSISTENT, INCOHERENT, INCONSISTENT,
                                                                         ANTIPATTERN_ONLY, ERROR)},
                                 "unexpected": []}

    def test_missing_file_is_error_entry(self, tmp_path):
        for name in ("m1.krss", "f1.krss", "background.krss"):
            shutil.copy(data_path(name), tmp_path)
        entries = [
            {"myth_id": "ok", "myth_kb_path": "m1.krss", "fact_kb_path": "f1.krss",
             "background_paths": ["background.krss"], "expected_verdict": "inconsistent"},
            {"myth_id": "gone", "myth_kb_path": "nope.krss", "fact_kb_path": "f1.krss"},
            {"myth_id": "bare", "myth_text": "no formalization"},
        ]
        (tmp_path / "m.json").write_text(json.dumps(entries))
        reports = run_corpus(tmp_path / "m.json")
        assert [r.verdict for r in reports] == [INCONSISTENT, ERROR, ERROR]
        assert reports[1].error["step"] == "load"
        summary = summarize(reports)
        assert summary["counts"][ERROR] == 2
        assert summary["unexpected"] == ["gone", "bare"]

    def test_expectation_flag(self):
        report = run_corpus(MANIFEST)[0]
        assert report.to_dict()["matches_expectation"] is True

    @pytest.mark.parametrize("content,message", [
        ('{"myth_id": "x"}', "array"),
        ('[{"myth_id": "x", "colour": "red"}]', "unknown manifest fields: colour"),
        ('[{"myth_text": "x"}]', "without myth_id"),
        ('[{"myth_id": "x"}, {"myth_id": "x"}]', "duplicate"),
    ])
    def test_manifest_validation(self, tmp_path, content, message):
        (tmp_path / "m.json").write_text(content)
        with pytest.raises(ValueError, match=message):
            load_manifest(tmp_path / "m.json")

    def test_entry_defaults(self):
        e = CorpusEntry.from_dict({"myth_id": "x", "background_paths": ["a", "b"]})
        assert e.background_paths == ("a", "b") and e.rules_path is None


def test_empty_inputs():
    assert check_claim(KnowledgeBase(), KnowledgeBase()).verdict == CONSISTENT
