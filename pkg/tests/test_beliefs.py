from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefagents.beliefs import (
    BeliefBase,
    NonGroundBelief,
    OwnershipViolation,
    Predicate,
    PredicateSyntaxError,
    Var,
    current_agent,
    parse_predicate,
    pred,
    unify,
)

FOODIE = [pred("food", "nuts"), pred("food", "apples"), pred("food", "oranges")]


def brute_force_query(facts, pattern):
    """Enumerate every fact and check it arg by arg with an explicit binding table."""
    out = []
    for f in facts:
        if f.functor != pattern.functor or len(f.args) != len(pattern.args):
            continue
        table = {}
        ok = True
        for p, v in zip(pattern.args, f.args):
            if isinstance(p, Var):
                if p.type == "int" and not (type(v) is int):
                    ok = False
                elif p.type == "string" and not isinstance(v, str):
                    ok = False
                elif p.name in table and table[p.name] != v:
                    ok = False
                else:
                    table[p.name] = v
            elif type(p) is not type(v) or p != v:
                ok = False
            if not ok:
                break
        if ok:
            out.append(table)
    return out


def test_query_foodie_in_insertion_order():
    bb = BeliefBase(FOODIE)
    assert bb.query(pred("food", Var("A"))) == [{"A": "nuts"}, {"A": "apples"}, {"A": "oranges"}]


def test_query_partial_ground():
    bb = BeliefBase([pred("location", 0, 0, "X")])
    assert bb.query(pred("location", 0, 0, Var("V"))) == [{"V": "X"}]


def test_repeated_variable_binds_consistently():
    bb = BeliefBase([pred("on", "a", "b"), pred("on", "c", "c")])
    assert bb.query(pred("on", Var("A"), Var("A"))) == [{"A": "c"}]


def test_holds():
    assert BeliefBase([pred("location", 0, 0, "")]).holds(pred("location", 0, 0, ""))
    assert not BeliefBase(FOODIE).holds(pred("food", "kiwi"))
    assert BeliefBase([pred("on", "a", "table")]).holds(pred("on", Var("A"), "table"))


def test_typed_variables_filter_terms():
    bb = BeliefBase([pred("v", 1), pred("v", "1")])
    assert bb.query(pred("v", Var("N", "int"))) == [{"N": 1}]
    assert bb.query(pred("v", Var("S"))) == [{"S": "1"}]


def test_bool_is_not_a_term():
    with pytest.raises(TypeError):
        pred("flag", True)


def test_add_duplicate_is_ignored():
    bb = BeliefBase()
    assert bb.add(pred("food", "nuts"))
    assert not bb.add(pred("food", "nuts"))
    assert len(bb) == 1


def test_add_non_ground_raises():
    with pytest.raises(NonGroundBelief):
        BeliefBase().add(pred("food", Var("A")))
    with pytest.raises(NonGroundBelief):
        BeliefBase().remove(pred("food", Var("A")))


def test_remove_and_reinsert_moves_to_end():
    a, b = pred("x", "a"), pred("x", "b")
    bb = BeliefBase([a, b])
    bb.remove(a)
    bb.add(a)
    assert list(bb) == [b, a]
    assert not bb.remove(pred("food", "kiwi"))


def test_dumps_loads_round_trip():
    bb = BeliefBase([pred("location", 0, 1, ""), pred("said", 'he said "hi"\\'), pred("n", -3)])
    text = bb.dumps()
    assert text.splitlines()[0] == 'location(0,1,"")'
    assert list(BeliefBase.loads(text)) == list(bb)


def test_parse_predicate_forms():
    p = parse_predicate("food(string A)")
    assert p.args == (Var("A", "string"),)
    assert parse_predicate('location(0,0,"")') == pred("location", 0, 0, "")
    assert parse_predicate("your_turn(int n)").args == (Var("n", "int"),)
    with pytest.raises(PredicateSyntaxError):
        parse_predicate("broken(")


def test_ownership_audit():
    bb = BeliefBase(owner="alice")
    token = current_agent.set("alice")
    try:
        bb.add(pred("ok", 1))
    finally:
        current_agent.reset(token)
    token = current_agent.set("bob")
    try:
        with pytest.raises(OwnershipViolation):
            bb.add(pred("bad", 1))
    finally:
        current_agent.reset(token)


def test_subscribers_see_changes():
    seen = []
    bb = BeliefBase()
    bb.subscribe(lambda change, p: seen.append((change, str(p))))
    bb.add(pred("a", 1))
    bb.add(pred("a", 1))
    bb.remove(pred("a", 1))
    assert seen == [("add", "a(1)"), ("remove", "a(1)")]


# random generators shared with the acceptance suite
FUNCTORS = ("p", "q")
ATOMS = ("a", "b", "c", 0, 1, 2)


def random_fact(rng: random.Random) -> Predicate:
    return pred(rng.choice(FUNCTORS), *(rng.choice(ATOMS) for _ in range(rng.randint(1, 3))))


def random_pattern(rng: random.Random) -> Predicate:
    args = []
    for _ in range(rng.randint(1, 3)):
        r = rng.random()
        if r < 0.5:
            args.append(Var(rng.choice("XYZ"), rng.choice(("string", "int"))))
        else:
            args.append(rng.choice(ATOMS))
    # a repeated name must keep one type
    types = {}
    fixed = []
    for a in args:
        if isinstance(a, Var):
            a = Var(a.name, types.setdefault(a.name, a.type))
        fixed.append(a)
    return pred(rng.choice(FUNCTORS), *fixed)


def test_query_matches_brute_force_sample():
    rng = random.Random(7)
    for _ in range(500):
        facts = [random_fact(rng) for _ in range(rng.randint(0, 30))]
        bb = BeliefBase(facts)
        pattern = random_pattern(rng)
        assert bb.query(pattern) == brute_force_query(list(bb), pattern)


terms = st.one_of(st.sampled_from(["a", "b", ""]), st.integers(-2, 2))
facts_st = st.builds(lambda f, args: pred(f, *args), st.sampled_from(FUNCTORS), st.lists(terms, min_size=1, max_size=3))


@settings(max_examples=200, deadline=None)
@given(st.lists(facts_st, max_size=40), st.data())
def test_query_sound_and_complete(facts, data):
    bb = BeliefBase(facts)
    pattern = data.draw(st.builds(random_pattern, st.randoms(use_true_random=False)))
    results = bb.query(pattern)
    for s in results:
        assert pattern.apply(s) in bb
    assert len(results) == sum(unify(pattern, f) is not None for f in bb)
    # result order follows insertion order
    seqs = [bb.sequence(pattern.apply(s)) for s in results]
    assert seqs == sorted(seqs)


@settings(max_examples=200, deadline=None)
@given(st.lists(facts_st, max_size=20), facts_st)
def test_add_then_remove_restores_set(facts, extra):
    bb = BeliefBase(facts)
    before = set(bb)
    if extra in bb:
        return
    bb.add(extra)
    bb.remove(extra)
    assert set(bb) == before


def test_unify_rejects_type_and_arity():
    assert unify(pred("p", Var("X", "int")), pred("p", "a")) is None
    assert unify(pred("p", Var("X")), pred("p", "a", "b")) is None
    assert list(itertools.islice(unify(pred("p", Var("X")), pred("p", "a")).items(), 1)) == [("X", "a")]
