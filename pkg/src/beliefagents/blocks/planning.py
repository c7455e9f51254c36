"""Tower-building prompt and fenced-JSON plan extraction."""

from __future__ import annotations

import json
import textwrap

from ..beliefs import BeliefBase, Var, pred
from ..templates import (
    CompositeTemplate,
    create_composite,
    create_prompt_template,
    create_rag_template,
    create_response_template,
)
from .world import BlockAction, tower_text


class MalformedPlan(ValueError):
    pass


def _text(s: str) -> str:
    return textwrap.dedent(s).strip()


INSTRUCTIONS = _text("""
    I am an agent that can build block towers.  A block tower is
    formed by placing blocks so they sit on top of each other.
    The bottom block of the tower sits on the table. Towers are
    defined as a list of blocks where blocks have names like
    "a", "b" or "c". The first block in the list sits on
    the table.

    In the situation where I want to build the tower
    ["a", "b"] then the desired state of the table would be:

    block "a" is on the table and block "b" is on "a".
    Block names should be lowercase.
""")

STATE_INTRO = _text("""
    The following sentences define the current state of the
    blocks.
""")

ACTIONS = _text("""
    I can perform two actions:
    - if I am not holding anything, I can pick up a block
      using the json "{ 'action':'pickup', 'args':[X] }".
    - if I am holding a block A, then I can put A down on
      either another block or the table using the json
      "{ 'action':'putdown', 'args':[A, B] }"
      where B is either the name of a block or the 'table'.

    Given the current state of the blocks, what sequence of
    actions should be performed next to build the tower
    ${tower}?

    Answer with only the list of actions defined using JSON.
""")

PLAN_RESPONSE = "```json${json}```"


def tower_template() -> CompositeTemplate:
    """Instructions, a belief-mined state section, then the action request."""
    rag = create_rag_template(STATE_INTRO)
    rag.add_input(pred("on", Var("A"), Var("B")), "block ${A} is on top of ${B}.")
    rag.add_input(pred("holding", Var("C")), "the gripper is holding ${C}.")
    return create_composite(create_prompt_template(INSTRUCTIONS), rag, create_prompt_template(ACTIONS))


def build_tower_prompt(template: CompositeTemplate, goal, beliefs: BeliefBase) -> str:
    template.reset()
    template.add_binding("tower", tower_text(goal))
    return template.render(beliefs)


def normalize_quotes(text: str) -> str:
    """Turn single-quoted strings into double-quoted ones, leaving "..." alone."""
    out = []
    state = None  # None, '"' or "'"
    i = 0
    while i < len(text):
        ch = text[i]
        if state is None:
            if ch == '"':
                state = '"'
                out.append(ch)
            elif ch == "'":
                state = "'"
                out.append('"')
            else:
                out.append(ch)
        elif state == '"':
            out.append(ch)
            if ch == "\\" and i + 1 < len(text):
                out.append(text[i + 1])
                i += 1
            elif ch == '"':
                state = None
        else:
            if ch == "\\" and i + 1 < len(text):
                nxt = text[i + 1]
                out.append(nxt if nxt == "'" else ch + nxt)
                i += 1
            elif ch == "'":
                state = None
                out.append('"')
            elif ch == '"':
                out.append('\\"')
            else:
                out.append(ch)
        i += 1
    return "".join(out)


def parse_plan(reply: str) -> list[BlockAction]:
    """Extract the first ```json fenced block of ``reply`` as a list of actions.

    Raises :class:`~beliefagents.templates.NoMatch` when there is no fenced
    block and :class:`MalformedPlan` when its content is not a valid plan.
    Argument names are lowercased.
    """
    response = create_response_template(PLAN_RESPONSE)
    response.infer_bindings(reply)
    body = response.get_binding("json")
    try:
        data = json.loads(body)
    except json.JSONDecodeError:
        try:
            data = json.loads(normalize_quotes(body))
        except json.JSONDecodeError as e:
            raise MalformedPlan(f"plan is not valid JSON: {e}") from None
    if not isinstance(data, list):
        raise MalformedPlan("plan must be a JSON array of actions")
    actions = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "action" not in item or "args" not in item:
            raise MalformedPlan(f"step {i} must be an object with 'action' and 'args'")
        args = item["args"]
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise MalformedPlan(f"step {i}: 'args' must be a list of block names")
        try:
            actions.append(BlockAction(str(item["action"]).lower(), tuple(a.strip().lower() for a in args)))
        except ValueError as e:
            raise MalformedPlan(f"step {i}: {e}") from None
    return actions


def plan_to_fenced_json(actions) -> str:
    return "```json\n" + json.dumps([a.to_dict() for a in actions]) + "\n```"
