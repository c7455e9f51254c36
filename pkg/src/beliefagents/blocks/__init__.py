"""Blocks world (Towerworld): state, actions, planning prompt and scenario."""

from .planning import (
    MalformedPlan,
    build_tower_prompt,
    normalize_quotes,
    parse_plan,
    plan_to_fenced_json,
    tower_template,
)
from .tower import ActionOutcome, ScenarioResult, run_tower_scenario
from .world import (
    TABLE,
    BlockAction,
    BlockNotClear,
    BlocksError,
    BlocksState,
    GripperEmpty,
    GripperFull,
    InvalidDestination,
    InvalidState,
    NotHolding,
    UnknownBlock,
    check_invariants,
    exec_action,
    goal_satisfied,
    is_clear,
    tower_text,
)
