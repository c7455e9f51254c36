from __future__ import annotations

import random
import string
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefagents.beliefs import BeliefBase, Var, pred
from beliefagents.templates import (
    AmbiguousPattern,
    EmptyComposite,
    InconsistentCapture,
    MalformedTemplate,
    NoMatch,
    TemplateBody,
    UnboundParameter,
    UnknownParameter,
    create_composite,
    create_prompt_template,
    create_rag_template,
    create_response_template,
    render,
)

GOLDEN = Path(__file__).parent / "golden"
FOODIE = [pred("food", "nuts"), pred("food", "apples"), pred("food", "oranges")]


def test_joker():
    t = create_prompt_template("why did the ${animal} cross the road?")
    assert t.params == ["animal"]
    t.add_binding("animal", "hedgehog")
    assert t.render() == "why did the hedgehog cross the road?"


def test_happy():
    t = create_response_template("Result **${answer}**")
    t.infer_bindings("Result **YES**")
    assert t.get_binding("answer") == "YES"


def test_foodie_golden():
    rag = create_rag_template("Which of the following are fruits?")
    rag.add_input(pred("food", Var("A")), "${A}")
    assert rag.render(BeliefBase(FOODIE)) == (GOLDEN / "foodie.txt").read_text(encoding="utf-8")


def test_parse_shapes():
    assert create_prompt_template("no params here").params == []
    body = TemplateBody.parse("${a}${b}")
    assert body.params == ["a", "b"]
    assert body.reconstruct() == "${a}${b}"
    for bad in ("${", "x ${a", "${}"):
        with pytest.raises(MalformedTemplate):
            TemplateBody.parse(bad)


def test_unknown_and_unbound():
    t = create_prompt_template("${a} and ${b}")
    with pytest.raises(UnknownParameter):
        t.add_binding("c", "x")
    t.add_binding("a", "1")
    with pytest.raises(UnboundParameter) as e:
        t.render()
    assert "b" in str(e.value)
    with pytest.raises(UnboundParameter):
        t.get_binding("b")


def test_reset_clears_bindings():
    t = create_prompt_template("${a}")
    t.reset()
    t.add_binding("a", "1")
    t.reset()
    with pytest.raises(UnboundParameter):
        t.render()
    assert create_prompt_template("plain").render() == "plain"


def test_move_inference_with_prebound_player():
    t = create_response_template("**Play ${player} at ${x}, ${y}**")
    t.add_binding("player", "X")
    t.infer_bindings("Sure! **Play X at 1, 2** is best.")
    assert (t.get_binding("x"), t.get_binding("y")) == ("1", "2")


def test_prebound_mismatch_is_no_match():
    t = create_response_template("**Play ${player} at ${x}, ${y}**")
    t.add_binding("player", "X")
    with pytest.raises(NoMatch):
        t.infer_bindings("**Play O at 1, 2**")


def test_fenced_json():
    t = create_response_template("```json${json}```")
    t.infer_bindings('Here:\n```json\n[{"a": 1}]\n```\nthanks')
    assert t.get_binding("json").strip() == '[{"a": 1}]'


def test_first_match_wins():
    t = create_response_template("<${x}>")
    t.infer_bindings("<one> <two>")
    assert t.get_binding("x") == "one"


def test_no_match():
    with pytest.raises(NoMatch):
        create_response_template("Result **${answer}**").infer_bindings("I am not sure")


def test_adjacent_params_are_ambiguous():
    with pytest.raises(AmbiguousPattern):
        create_response_template("${a}${b}").infer_bindings("xy")


def test_repeated_param_must_agree():
    t = create_response_template("${a}-${a};")
    t.infer_bindings("q-q;")
    assert t.get_binding("a") == "q"
    with pytest.raises(InconsistentCapture):
        create_response_template("[${a}] [${a}]").infer_bindings("[p] [q]")


def test_rag_rules():
    rag = create_rag_template("")
    with pytest.raises(UnknownParameter):
        rag.add_input(pred("food", Var("A")), "${B}")
    rag.add_input(pred("food", Var("A")), "${A}")
    assert rag.render(BeliefBase(FOODIE)) == "nuts\napples\noranges"
    assert create_rag_template("Intro ${x}").render(BeliefBase()) == "Intro ${x}"


def test_rag_towerworld_lines():
    rag = create_rag_template("State:")
    rag.add_input(pred("on", Var("A"), Var("B")), "block ${A} is on top of ${B}.")
    rag.add_input(pred("holding", Var("C")), "the gripper is holding ${C}.")
    bb = BeliefBase([pred("holding", "b"), pred("on", "a", "table")])
    assert rag.render(bb) == "State:\nblock a is on top of table.\nthe gripper is holding b."


def test_composite():
    with pytest.raises(EmptyComposite):
        create_composite().render()
    assert create_composite(create_prompt_template("A"), create_prompt_template("B")).render() == "A\nB"
    one = create_prompt_template("solo")
    assert create_composite(one).render() == one.render()


def test_composite_routes_bindings_and_late_rag():
    first = create_prompt_template("intro")
    rag = create_rag_template("facts:")
    rag.add_input(pred("food", Var("A")), "${A}")
    last = create_prompt_template("build ${tower}")
    c = create_composite(first, rag, last)
    c.add_binding("tower", "[1]")
    assert last.get_binding("tower") == "[1]"
    with pytest.raises(UnknownParameter):
        c.add_binding("nothing", "x")
    bb = BeliefBase()
    assert c.render(bb) == "intro\nfacts:\nbuild [1]"
    bb.add(pred("food", "nuts"))
    assert c.render(bb) == "intro\nfacts:\nnuts\nbuild [1]"
    c.reset()
    with pytest.raises(UnboundParameter):
        c.render(bb)


def test_render_helper_accepts_text():
    assert render("plain text") == "plain text"


# Round trip: anchors from one alphabet, values from a disjoint one.
ANCHOR_CHARS = "*#:|<>-"
VALUE_CHARS = string.ascii_letters + string.digits + " "


def random_round_trip_case(rng: random.Random):
    n = rng.randint(1, 4)
    names = [f"p{i}" for i in range(n)]
    pieces = []
    for i, name in enumerate(names):
        lead = "".join(rng.choice(ANCHOR_CHARS) for _ in range(rng.randint(0 if i == 0 else 1, 3)))
        pieces.append(lead + "${" + name + "}")
    pieces.append("".join(rng.choice(ANCHOR_CHARS) for _ in range(rng.randint(0, 3))))
    source = "".join(pieces)
    values = {
        name: "".join(rng.choice(VALUE_CHARS) for _ in range(rng.randint(1, 8))).strip() or "v"
        for name in names
    }
    return source, values


def round_trips(source: str, values: dict) -> bool:
    prompt = create_prompt_template(source)
    for k, v in values.items():
        prompt.add_binding(k, v)
    response = create_response_template(source)
    response.infer_bindings(prompt.render())
    return all(response.get_binding(k) == v for k, v in values.items())


def test_round_trip_sample():
    rng = random.Random(1)
    for _ in range(200):
        assert round_trips(*random_round_trip_case(rng))


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_round_trip_property(rng):
    assert round_trips(*random_round_trip_case(rng))


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet=string.ascii_letters + "${} ", max_size=30))
def test_parse_is_lossless_or_rejects(source):
    try:
        body = TemplateBody.parse(source)
    except MalformedTemplate:
        return
    assert body.reconstruct() == source


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=20))
def test_render_is_pure(value):
    t = create_prompt_template("a ${x} b")
    t.add_binding("x", value)
    assert t.render() == t.render() == f"a {value} b"
