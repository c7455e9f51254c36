from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from blocks_gen import any_action, legal_actions, random_state
from helpers import mock
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefagents.beliefs import BeliefBase, pred
from beliefagents.blocks import (
    TABLE,
    BlockAction,
    BlockNotClear,
    BlocksError,
    BlocksState,
    GripperEmpty,
    GripperFull,
    InvalidState,
    MalformedPlan,
    UnknownBlock,
    build_tower_prompt,
    check_invariants,
    exec_action,
    goal_satisfied,
    parse_plan,
    plan_to_fenced_json,
    run_tower_scenario,
    tower_template,
)
from beliefagents.blocks.world import is_clear
from beliefagents.templates import NoMatch

PLANS = Path(__file__).parent / "fixtures" / "plans"
ABC_PLAN = [
    BlockAction.pickup("b"),
    BlockAction.putdown("b", "a"),
    BlockAction.pickup("c"),
    BlockAction.putdown("c", "b"),
]


def oracle_goal(s: BlocksState, goal) -> bool:
    """Walk up from the table: the block on the table, then whatever sits on it."""
    if s.holding is not None:
        return False
    above = {support: b for b, support in s.on.items() if support != TABLE}
    if s.on.get(goal[0]) != TABLE:
        return False
    chain = [goal[0]]
    while chain[-1] in above:
        chain.append(above[chain[-1]])
    return chain == list(goal)


def test_clear_checks():
    s = BlocksState({"a": TABLE})
    assert is_clear(s, "a")
    assert not is_clear(BlocksState({"a": TABLE, "b": "a"}), "a")
    assert not is_clear(BlocksState({"a": TABLE}, "b"), "b")
    with pytest.raises(UnknownBlock):
        is_clear(s, "q")


def test_basic_actions():
    s = BlocksState({"a": TABLE})
    held = exec_action(s, BlockAction.pickup("a"))
    assert held.holding == "a" and held.on == {}
    back = exec_action(held, BlockAction.putdown("a", TABLE))
    assert back == s
    with pytest.raises(BlockNotClear):
        exec_action(BlocksState({"a": TABLE, "b": "a"}), BlockAction.pickup("a"))
    with pytest.raises(GripperFull):
        exec_action(BlocksState({"a": TABLE}, "b"), BlockAction.pickup("a"))
    with pytest.raises(GripperEmpty):
        exec_action(s, BlockAction.putdown("a", TABLE))


def test_invalid_states_rejected():
    for on, holding in [({"a": "b"}, None), ({"a": "b", "b": "a"}, None), ({"a": TABLE}, "a"),
                        ({"a": TABLE, "b": "a", "c": "a"}, None), ({"a": "c"}, "c")]:
        with pytest.raises(InvalidState):
            BlocksState(on, holding)


def test_action_validation():
    with pytest.raises(ValueError):
        BlockAction("fly", ("a",))
    with pytest.raises(ValueError):
        BlockAction("pickup", ("a", "b"))
    with pytest.raises(ValueError):
        BlockAction.pickup("A")


def test_goal_examples():
    assert goal_satisfied(BlocksState({"a": TABLE, "b": "a"}), ["a", "b"])
    assert goal_satisfied(BlocksState({"a": TABLE, "b": "a", "c": "b"}), ["a", "b", "c"])
    assert not goal_satisfied(BlocksState({"a": TABLE, "b": "a", "d": "b"}), ["b", "a", "d"])
    assert not goal_satisfied(BlocksState({"a": TABLE, "b": "a", "c": "b"}), ["a", "b"])


def test_goal_matches_oracle():
    rng = random.Random(5)
    for _ in range(3000):
        s = random_state(rng)
        names = sorted(s.blocks)
        goal = rng.sample(names, rng.randint(1, len(names)))
        assert goal_satisfied(s, goal) == oracle_goal(s, goal)


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(1, 30))
def test_random_legal_sequences_keep_invariants(rng, steps):
    s = random_state(rng)
    for _ in range(steps):
        acts = legal_actions(s)
        assert acts
        s = exec_action(s, rng.choice(acts))
        check_invariants(s)


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_failed_action_leaves_state_unchanged(rng):
    s = random_state(rng)
    before = (dict(s.on), s.holding)
    act = any_action(rng)
    try:
        s2 = exec_action(s, act)
    except BlocksError:
        assert (dict(s.on), s.holding) == before
    else:
        assert act in legal_actions(s)
        check_invariants(s2)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_pickup_putdown_back_is_identity(rng):
    s = random_state(rng)
    if s.holding is not None:
        s = exec_action(s, BlockAction.putdown(s.holding, TABLE))
    for act in legal_actions(s):
        (b,) = act.args
        held = exec_action(s, act)
        assert exec_action(held, BlockAction.putdown(b, s.on[b])).on == s.on


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(0, 8))
def test_plan_round_trip(rng, n):
    plan = [rng.choice([BlockAction.pickup("a"), BlockAction.putdown("b", "table"), BlockAction.putdown("c", "a")])
            for _ in range(n)]
    assert parse_plan(plan_to_fenced_json(plan)) == plan


EXPECTED = json.loads((PLANS / "expected.json").read_text())


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_parse_plan_fixtures(name):
    got = parse_plan((PLANS / f"{name}.txt").read_text())
    assert [[a.kind, list(a.args)] for a in got] == EXPECTED[name]


@pytest.mark.parametrize("name", sorted(p.stem for p in PLANS.glob("bad_*.txt")))
def test_malformed_plan_fixtures(name):
    with pytest.raises((MalformedPlan, NoMatch)):
        parse_plan((PLANS / f"{name}.txt").read_text())


def test_tower_prompt():
    t = tower_template()
    bb = BeliefBase(BlocksState.on_table("a", "b", "c").beliefs())
    prompt = build_tower_prompt(t, ["a", "b", "c"], bb)
    assert prompt.count("is on top of table.") == 3
    assert 'build the tower\n["a", "b", "c"]?' in prompt
    assert prompt.index("I am an agent") < prompt.index("block a is on top") < prompt.index("I can perform")
    empty = build_tower_prompt(t, ["b", "a", "d"], BeliefBase())
    assert "is on top of" not in empty.split("blocks.", 2)[-1].split("I can perform")[0]
    assert '["b", "a", "d"]' in empty and '["a", "b", "c"]' not in empty


def test_tower_prompt_holding_line():
    bb = BeliefBase([pred("on", "a", "table"), pred("holding", "b")])
    prompt = build_tower_prompt(tower_template(), ["a", "b"], bb)
    assert "block a is on top of table.\nthe gripper is holding b." in prompt


def test_scenario_abc_plan_succeeds():
    provider = mock(default=[plan_to_fenced_json(ABC_PLAN)])
    r = run_tower_scenario(provider, BlocksState.on_table("a", "b", "c"), ["a", "b", "c"], timeout=5)
    assert r.goal_satisfied and r.error is None
    assert r.plan == ABC_PLAN and all(o.ok for o in r.outcomes)
    assert r.final_state == BlocksState({"a": TABLE, "b": "a", "c": "b"})
    assert r.prompt.count("is on top of table.") == 3


def test_scenario_same_plan_fails_other_goal():
    provider = mock(default=[plan_to_fenced_json(ABC_PLAN)])
    r = run_tower_scenario(provider, BlocksState.on_table("a", "b", "c", "d"), ["b", "a", "d"], timeout=5)
    assert not r.goal_satisfied
    assert all(o.ok for o in r.outcomes)


def test_scenario_records_precondition_failure():
    provider = mock(default=[plan_to_fenced_json([BlockAction.pickup("a"), BlockAction.putdown("a", TABLE)])])
    r = run_tower_scenario(provider, BlocksState({"a": TABLE, "b": "a"}), ["b", "a"], timeout=5)
    assert r.failed_step == 1 and len(r.outcomes) == 1
    assert r.outcomes[0].error.startswith("BlockNotClear")
    assert r.final_state == BlocksState({"a": TABLE, "b": "a"})


def test_scenario_unknown_block_in_plan():
    provider = mock(default=[plan_to_fenced_json([BlockAction.pickup("z")])])
    r = run_tower_scenario(provider, BlocksState.on_table("a"), ["a"], timeout=5)
    assert r.outcomes[0].error.startswith("UnknownBlock")


def test_scenario_captures_parse_and_provider_errors():
    r = run_tower_scenario(mock(default=["I cannot help"]), BlocksState.on_table("a"), ["a"], timeout=5)
    assert r.error_type == "NoMatch" and r.plan is None
    r = run_tower_scenario(mock(("nothing", ["x"])), BlocksState.on_table("a"), ["a"], timeout=5)
    assert r.error_type == "provider"
    with pytest.raises(ValueError):
        run_tower_scenario(mock(default=["x"]), BlocksState.on_table("a"), [], timeout=5)
