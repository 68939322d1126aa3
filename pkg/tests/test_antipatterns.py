import pytest

from kbgen import Gen
from mythos.antipatterns import DISJOINT_SUBSUMPTION, OIL, UE, detect_antipatterns
from mythos.krss import parse_kb
from mythos.model import TOP, And, Atom, Disjoint, Exists, ForAll, GCI, KnowledgeBase, Not
from mythos.tableau import is_satisfiable


def test_oil(example):
    [m] = detect_antipatterns(example("oil"))
    assert m.pattern_id == OIL and m.label == "modeling smell"
    assert m.participants == {"A": "Antibiotics", "r": "kills", "B": "Virus", "C": "Bacteria"}
    assert len(m.axioms) == 3


def test_ue(example):
    [m] = detect_antipatterns(example("ue"))
    assert m.pattern_id == UE and m.label == "incoherence"
    assert m.participants == {"A": "Antibiotics", "r": "kills", "B": "Bacteria", "C": "Virus"}
    assert [type(ax).__name__ for ax in m.axioms] == ["GCI", "GCI", "Disjoint"]


def test_no_value_restrictions():
    assert detect_antipatterns(parse_kb("(IMPLIES A B)\n(DISJOINT B C)\n(INSTANCE x A)")) == []


def test_disjoint_subsumption(example):
    [m] = detect_antipatterns(example("example3"))
    assert m.pattern_id == DISJOINT_SUBSUMPTION
    assert m.participants == {"A": "Covid-19", "B": "InfectionDisease"}


@pytest.mark.parametrize("disjointness", [
    "(DISJOINT Virus Bacteria)", "(DISJOINT Bacteria Virus)",
    "(IMPLIES Virus (NOT Bacteria))", "(IMPLIES Bacteria (NOT Virus))",
    "(EQUIVALENT Virus (AND Pathogen (NOT Bacteria)))",
])
def test_disjointness_forms(disjointness):
    kb = parse_kb(f"(IMPLIES Antibiotics (ALL kills Virus))\n(IMPLIES Antibiotics (SOME kills Bacteria))\n{disjointness}")
    assert [m.pattern_id for m in detect_antipatterns(kb)] == [UE]


def test_conjunctions_split_and_equivalence():
    kb = parse_kb("(EQUIVALENT Antibiotics (AND Drug (ALL kills Virus) (ALL kills Bacteria)))\n(DISJOINT Virus Bacteria)")
    [m] = detect_antipatterns(kb)
    assert m.pattern_id == OIL and m.participants["A"] == "Antibiotics"


def test_oil_symmetric_pair_reported_once():
    kb = parse_kb("(IMPLIES A (ALL r B))\n(IMPLIES A (ALL r C))\n(DISJOINT B C)\n(DISJOINT C B)")
    assert len(detect_antipatterns(kb)) == 1


def test_no_subsumption_closure():
    kb = parse_kb("(IMPLIES A D)\n(IMPLIES D (ALL r B))\n(IMPLIES A (SOME r C))\n(DISJOINT B C)")
    assert detect_antipatterns(kb) == []
    assert not is_satisfiable(kb, Atom("A"))


def test_sorted_and_deterministic():
    text = """
    (IMPLIES Z (ALL r B)) (IMPLIES Z (SOME r C))
    (IMPLIES A (ALL s B)) (IMPLIES A (ALL s C))
    (IMPLIES A (ALL r B)) (IMPLIES A (SOME r C))
    (IMPLIES M X) (IMPLIES M (NOT X))
    (DISJOINT B C)
    """
    kb = parse_kb(text)
    found = [(m.pattern_id, m.participants["A"], m.participants.get("r")) for m in detect_antipatterns(kb)]
    assert found == [(DISJOINT_SUBSUMPTION, "M", None), (OIL, "A", "s"), (UE, "A", "r"), (UE, "Z", "r")]
    assert detect_antipatterns(kb) == detect_antipatterns(kb)


def test_axioms_come_from_kb(example):
    kb = example("ue")
    for m in detect_antipatterns(kb):
        assert all(ax in kb.tbox for ax in m.axioms)


def test_to_dict(example):
    d = detect_antipatterns(example("ue"))[0].to_dict()
    assert d["axioms"] == ["(IMPLIES Antibiotics (ALL kills Virus))", "(IMPLIES Antibiotics (SOME kills Bacteria))",
                           "(DISJOINT Virus Bacteria)"]


def pattern_kbs(seed):
    """A planted pattern shape (sometimes missing its disjointness) plus random noise axioms."""
    g = Gen(seed, nominals=False, facets=False)
    rng = g.rng
    a, b, c = (Atom(n) for n in rng.sample("ABCD", 3))
    shape = rng.choice(["oil", "ue", "ds"])
    if shape == "oil":
        tbox = [GCI(a, ForAll("r", b)), GCI(a, ForAll("r", c))]
    elif shape == "ue":
        tbox = [GCI(a, ForAll("r", c)), GCI(a, Exists("r", b))]
    else:
        tbox = [GCI(a, b)]
        c = b
    if rng.random() < 0.8:
        tbox.append(rng.choice([Disjoint(a, b), Disjoint(b, a), GCI(a, Not(b))]) if shape == "ds"
                    else rng.choice([Disjoint(b, c), GCI(c, Not(b))]))
    for _ in range(rng.randint(0, 3)):
        sub = Atom(rng.choice("ABCD"))
        tbox.insert(rng.randint(0, len(tbox)), GCI(sub, g.concept(2)))
    return KnowledgeBase(tbox=tbox)


def test_random_kbs_exercise_every_pattern():
    counts = {}
    for seed in range(150):
        for m in detect_antipatterns(pattern_kbs(seed)):
            counts[m.pattern_id] = counts.get(m.pattern_id, 0) + 1
    assert all(counts.get(p, 0) >= 10 for p in (OIL, UE, DISJOINT_SUBSUMPTION)), counts


@pytest.mark.parametrize("seed", range(150))
def test_soundness_against_tableau(seed):
    kb = pattern_kbs(seed)
    for m in detect_antipatterns(kb):
        a = Atom(m.participants["A"])
        if m.pattern_id in (UE, DISJOINT_SUBSUMPTION):
            assert not is_satisfiable(kb, a)
        else:
            # OIL alone leaves A satisfiable, only without r-successors
            sub = KnowledgeBase(tbox=m.axioms)
            assert is_satisfiable(sub, a)
            assert not is_satisfiable(sub, And((a, Exists(m.participants["r"], TOP))))
