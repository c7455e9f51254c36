"""Random blocks-world states and action sequences shared by the block tests."""

from __future__ import annotations

import random

from beliefagents.blocks import TABLE, BlockAction, BlocksState
from beliefagents.blocks.world import is_clear

NAMES = ("a", "b", "c", "d", "e")


def random_state(rng: random.Random, n: int | None = None) -> BlocksState:
    """Random towers over the first ``n`` names, possibly holding a block."""
    n = n or rng.randint(1, len(NAMES))
    blocks = list(NAMES[:n])
    rng.shuffle(blocks)
    holding = blocks.pop() if blocks and rng.random() < 0.3 else None
    on, tops = {}, []
    for b in blocks:
        if tops and rng.random() < 0.5:
            i = rng.randrange(len(tops))
            on[b] = tops[i]
            tops[i] = b
        else:
            on[b] = TABLE
            tops.append(b)
    return BlocksState(on, holding)


def legal_actions(s: BlocksState) -> list[BlockAction]:
    if s.holding is None:
        return [BlockAction.pickup(b) for b in sorted(s.blocks) if is_clear(s, b)]
    dests = [TABLE] + [b for b in sorted(s.blocks) if b != s.holding and is_clear(s, b)]
    return [BlockAction.putdown(s.holding, d) for d in dests]


def any_action(rng: random.Random) -> BlockAction:
    """Any syntactically valid action, legal or not."""
    if rng.random() < 0.5:
        return BlockAction.pickup(rng.choice(NAMES + ("z",)))
    return BlockAction.putdown(rng.choice(NAMES + ("z",)), rng.choice(NAMES + (TABLE, "z")))
