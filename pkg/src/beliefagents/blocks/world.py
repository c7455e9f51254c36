"""Blocks-world state with a single gripper and pickup/putdown actions."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..beliefs import Predicate, pred

TABLE = "table"
_NAME = re.compile(r"^[a-z0-9_]+$")


class BlocksError(Exception):
    pass


class GripperFull(BlocksError):
    pass


class GripperEmpty(BlocksError):
    pass


class NotHolding(BlocksError):
    """Putdown names a block other than the one in the gripper."""


class BlockNotClear(BlocksError):
    pass


class UnknownBlock(BlocksError):
    pass


class InvalidDestination(BlocksError):
    pass


class InvalidState(BlocksError):
    pass


@dataclass(frozen=True)
class BlockAction:
    kind: str  # "pickup" | "putdown"
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        arity = {"pickup": 1, "putdown": 2}.get(self.kind)
        if arity is None:
            raise ValueError(f"unknown action {self.kind!r}")
        if len(self.args) != arity:
            raise ValueError(f"{self.kind} takes {arity} argument(s), got {len(self.args)}")
        for a in self.args:
            if not isinstance(a, str) or not _NAME.match(a):
                raise ValueError(f"bad block name {a!r}")

    @classmethod
    def pickup(cls, block: str) -> "BlockAction":
        return cls("pickup", (block,))

    @classmethod
    def putdown(cls, block: str, dest: str) -> "BlockAction":
        return cls("putdown", (block, dest))

    def to_dict(self) -> dict:
        return {"action": self.kind, "args": list(self.args)}

    def __str__(self) -> str:
        return f"{self.kind}({', '.join(self.args)})"


@dataclass(frozen=True)
class BlocksState:
    """``on`` maps every block not in the gripper to its support."""

    on: dict[str, str] = field(default_factory=dict)
    holding: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "on", dict(self.on))
        check_invariants(self)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.on.items())), self.holding))

    @property
    def blocks(self) -> set[str]:
        names = set(self.on)
        if self.holding:
            names.add(self.holding)
        return names

    @classmethod
    def on_table(cls, *blocks: str) -> "BlocksState":
        return cls({b: TABLE for b in blocks})

    def to_dict(self) -> dict:
        return {"on": dict(self.on), "holding": self.holding}

    @classmethod
    def from_dict(cls, d: dict) -> "BlocksState":
        return cls(d.get("on", {}), d.get("holding"))

    def beliefs(self) -> list[Predicate]:
        """``on(A, B)`` and ``holding(C)`` facts describing this state."""
        facts = [pred("on", a, b) for a, b in self.on.items()]
        if self.holding:
            facts.append(pred("holding", self.holding))
        return facts


def check_invariants(s: BlocksState) -> None:
    if TABLE in s.on or s.holding == TABLE:
        raise InvalidState("'table' is not a block")
    if s.holding is not None and s.holding in s.on:
        raise InvalidState(f"held block {s.holding!r} also has a support")
    blocks = s.blocks
    for b, support in s.on.items():
        if support != TABLE and support not in blocks:
            raise InvalidState(f"{b!r} sits on unknown block {support!r}")
        if support == s.holding:
            raise InvalidState(f"{b!r} sits on the held block {support!r}")
    supported = [sup for sup in s.on.values() if sup != TABLE]
    if len(supported) != len(set(supported)):
        raise InvalidState("two blocks share one support")
    for b in s.on:
        seen = {b}
        cur = s.on[b]
        while cur != TABLE:
            if cur in seen:
                raise InvalidState(f"support cycle through {b!r}")
            seen.add(cur)
            cur = s.on[cur]


def is_clear(s: BlocksState, block: str) -> bool:
    if block not in s.blocks:
        raise UnknownBlock(f"no block named {block!r}")
    if s.holding == block:
        return False
    return block not in s.on.values()


def exec_action(s: BlocksState, act: BlockAction) -> BlocksState:
    """Apply ``act`` and return the new state; ``s`` is never modified."""
    if act.kind == "pickup":
        (x,) = act.args
        if x not in s.blocks:
            raise UnknownBlock(f"no block named {x!r}")
        if s.holding is not None:
            raise GripperFull(f"already holding {s.holding!r}")
        if not is_clear(s, x):
            raise BlockNotClear(f"{x!r} has a block on top")
        on = dict(s.on)
        del on[x]
        return BlocksState(on, x)
    a, b = act.args
    if s.holding is None:
        raise GripperEmpty("the gripper is empty")
    if a not in s.blocks:
        raise UnknownBlock(f"no block named {a!r}")
    if s.holding != a:
        raise NotHolding(f"holding {s.holding!r}, not {a!r}")
    if b == a:
        raise InvalidDestination(f"cannot put {a!r} on itself")
    if b != TABLE:
        if b not in s.blocks:
            raise UnknownBlock(f"no block named {b!r}")
        if not is_clear(s, b):
            raise BlockNotClear(f"{b!r} has a block on top")
    on = dict(s.on)
    on[a] = b
    return BlocksState(on, None)


def goal_satisfied(s: BlocksState, goal) -> bool:
    goal = list(goal)
    if not goal or len(set(goal)) != len(goal) or s.holding is not None:
        return False
    below = TABLE
    for block in goal:
        if s.on.get(block) != below:
            return False
        below = block
    return goal[-1] not in s.on.values()


def tower_text(goal) -> str:
    """Goal list rendered the way it appears in prompts: ``["a", "b", "c"]``."""
    return json.dumps(list(goal))
