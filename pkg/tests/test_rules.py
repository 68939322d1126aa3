import random

import pytest

from mythos import data_path, load_kb
from mythos.errors import ResourceLimitError, UnsafeRuleError
from mythos.krss import parse_kb
from mythos.model import Atom, ConceptAssertion, DataAssertion, GCI, Facet, KnowledgeBase, RoleAssertion
from mythos.rules import ConceptAtom, QualityAtom, RoleAtom, Rule, Var, apply_rules

x, y, z = Var("x"), Var("y"), Var("z")

ELDERLY = load_kb(data_path("elderly.rules")).rules[0]

STEP3 = KnowledgeBase(abox=[
    RoleAssertion("hasQuality", "affect_1", "Only"),
    RoleAssertion("Experiencer", "affect_1", "elderly_1"),
    RoleAssertion("Experiencer", "affect_1", "person_1"),
    ConceptAssertion("elderly_1", Atom("Elderly")),
])

CHAIN = Rule("up", (RoleAtom("r", x, y), ConceptAtom(y, "A")), ConceptAtom(x, "A"))


def chain_kb(n):
    abox = [RoleAssertion("r", f"n{i}", f"n{i + 1}") for i in range(n - 1)]
    return KnowledgeBase(abox=abox + [ConceptAssertion(f"n{n - 1}", Atom("A"))])


def concept_facts(kb):
    return {(a.individual, a.concept) for a in kb.abox if isinstance(a, ConceptAssertion)}


def test_elderly_rule():
    out = apply_rules(STEP3, [ELDERLY])
    new = out.abox[len(STEP3.abox):]
    assert new == (ConceptAssertion("person_1", Atom("Elderly")),)
    fact = new[0]
    assert fact.source == "inferred"
    assert fact.derivation.rule == "elderly-only"
    assert dict(fact.derivation.bindings) == {"?x": "affect_1", "?y": "elderly_1", "?z": "person_1"}
    assert RoleAssertion("hasQuality", "affect_1", "Only") in fact.derivation.premises
    # elderly_1 itself matches ?z too, but nothing new is added for it
    assert sum(1 for a in out.abox if a == ConceptAssertion("elderly_1", Atom("Elderly"))) == 1


def test_input_unchanged():
    before = STEP3.abox
    apply_rules(STEP3, [ELDERLY])
    assert STEP3.abox == before


def test_empty_rule_set():
    assert apply_rules(STEP3, []) is STEP3
    assert apply_rules(STEP3) is STEP3


def test_rules_from_kb_by_default():
    kb = STEP3.replace(rules=(ELDERLY,))
    assert ConceptAssertion("person_1", Atom("Elderly")) in apply_rules(kb).abox


def test_unmatched_body():
    rule = Rule("none", (ConceptAtom(x, "Nothing"),), ConceptAtom(x, "A"))
    assert apply_rules(STEP3, [rule]) is STEP3


def test_chain():
    out = apply_rules(chain_kb(4), [CHAIN])
    assert {i for i, c in concept_facts(out) if c == Atom("A")} == {"n0", "n1", "n2", "n3"}


def test_constants_in_rules():
    rule = Rule("c", (QualityAtom(x, "Only"),), ConceptAtom("marker", "Seen"))
    out = apply_rules(STEP3, [rule])
    assert ConceptAssertion("marker", Atom("Seen")) in out.abox


def test_quality_atom_is_role_atom():
    assert QualityAtom(x, "Only") == RoleAtom("hasQuality", x, "Only")


def test_variables_may_coincide():
    rule = Rule("self", (RoleAtom("r", x, y), RoleAtom("r", x, z)), ConceptAtom(z, "B"))
    kb = KnowledgeBase(abox=[RoleAssertion("r", "a", "b")])
    assert ConceptAssertion("b", Atom("B")) in apply_rules(kb, [rule]).abox


def test_syntactic_boundary():
    # jon's Elderly membership would follow from the TBox, but rules only see asserted facts
    kb = KnowledgeBase(
        tbox=[GCI(Facet("hasAge", ">", 65), Atom("Elderly"))],
        abox=[DataAssertion("hasAge", "jon", 80), RoleAssertion("knows", "jon", "ann")],
    )
    rule = Rule("friend", (ConceptAtom(x, "Elderly"), RoleAtom("knows", x, y)), ConceptAtom(y, "Elderly"))
    assert apply_rules(kb, [rule]) is kb
    asserted = kb.add(ConceptAssertion("jon", Atom("Elderly")))
    assert ConceptAssertion("ann", Atom("Elderly")) in apply_rules(asserted, [rule]).abox


def test_complex_concept_assertions_do_not_match():
    kb = parse_kb("(INSTANCE a (AND A B))")
    rule = Rule("r", (ConceptAtom(x, "A"),), ConceptAtom(x, "C"))
    assert apply_rules(kb, [rule]) is kb


def test_unsafe_rule():
    with pytest.raises(UnsafeRuleError):
        apply_rules(STEP3, [Rule("bad", (ConceptAtom(x, "A"),), ConceptAtom(y, "B"))])


def test_head_must_be_concept_atom():
    with pytest.raises(TypeError):
        Rule("bad", (), RoleAtom("r", x, y))


def test_inference_cap():
    with pytest.raises(ResourceLimitError):
        apply_rules(chain_kb(50), [CHAIN], max_inferred=10)
    assert len(apply_rules(chain_kb(50), [CHAIN], max_inferred=49).abox) == 49 + 50


def random_case(seed):
    rng = random.Random(seed)
    inds = [f"i{k}" for k in range(5)]
    abox = []
    for _ in range(rng.randint(2, 10)):
        if rng.random() < 0.5:
            abox.append(RoleAssertion(rng.choice("rs"), rng.choice(inds), rng.choice(inds)))
        else:
            abox.append(ConceptAssertion(rng.choice(inds), Atom(rng.choice("ABC"))))
    rules = [
        CHAIN,
        Rule("b", (ConceptAtom(x, "A"), RoleAtom("s", x, y)), ConceptAtom(y, "B")),
        Rule("c", (ConceptAtom(x, "B"), ConceptAtom(x, "A")), ConceptAtom(x, "C")),
        Rule("d", (RoleAtom("s", y, x), ConceptAtom(y, "C")), ConceptAtom(x, "A")),
    ]
    return rng, KnowledgeBase(abox=abox), rules


@pytest.mark.parametrize("seed", range(40))
def test_fixpoint_properties(seed):
    rng, kb, rules = random_case(seed)
    out = apply_rules(kb, rules)
    assert set(kb.abox) <= set(out.abox)
    again = apply_rules(out, rules)
    assert again.abox == out.abox
    shuffled_rules = rules[:]
    rng.shuffle(shuffled_rules)
    shuffled_abox = list(kb.abox)
    rng.shuffle(shuffled_abox)
    other = apply_rules(kb.replace(abox=tuple(shuffled_abox)), shuffled_rules)
    assert set(other.abox) == set(out.abox)
