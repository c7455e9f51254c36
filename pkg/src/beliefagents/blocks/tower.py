"""
Tower scenario: a planner agent asks the LLM for a whole plan, then executes
it step by step against an environment agent that owns the blocks state.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from ..beliefs import Predicate, Var, pred
from ..providers import ChatProvider, ProviderError
from ..runtime import Agent, AgentSpec, AgentSystem, Behavior, EventLog, WaitTimeout, on_message
from ..templates import TemplateError
from .planning import MalformedPlan, build_tower_prompt, parse_plan, tower_template
from .world import BlockAction, BlocksError, BlocksState, exec_action, goal_satisfied

log = logging.getLogger(__name__)


@dataclass
class ActionOutcome:
    action: BlockAction
    ok: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {"action": self.action.to_dict(), "ok": self.ok, "error": self.error}


@dataclass
class ScenarioResult:
    goal: list[str]
    initial_state: BlocksState
    final_state: BlocksState | None = None
    plan: list[BlockAction] | None = None
    outcomes: list[ActionOutcome] = field(default_factory=list)
    goal_satisfied: bool = False
    error: str | None = None
    error_type: str | None = None
    prompt: str | None = None
    reply: str | None = None

    @property
    def failed_step(self) -> int | None:
        """1-based index of the first failed action, if any."""
        for i, o in enumerate(self.outcomes, 1):
            if not o.ok:
                return i
        return None

    def to_dict(self) -> dict:
        return {
            "goal": self.goal,
            "initial_state": self.initial_state.to_dict(),
            "final_state": self.final_state.to_dict() if self.final_state else None,
            "plan": [a.to_dict() for a in self.plan] if self.plan is not None else None,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "failed_step": self.failed_step,
            "goal_satisfied": self.goal_satisfied,
            "error": self.error,
            "error_type": self.error_type,
        }


class BlocksEnvironment(Behavior):
    """Owns the blocks state and executes action requests from one planner."""

    def __init__(self, state: BlocksState, planner: str = "planner") -> None:
        self.state = state
        self.planner = planner

    def _publish(self, agent: Agent) -> None:
        agent.send("inform", self.planner, pred("state", json.dumps(self.state.to_dict(), sort_keys=True)))

    async def on_start(self, agent: Agent) -> None:
        self._publish(agent)
        for b in sorted(self.state.blocks):
            agent.send("inform", self.planner, pred("block", b))

    async def _execute(self, agent: Agent, sender: str, act: BlockAction, ref: int) -> None:
        try:
            self.state = exec_action(self.state, act)
        except BlocksError as e:
            agent.send("inform", sender, pred("failed", ref, f"{type(e).__name__}: {e}"))
            return
        self._publish(agent)

    @on_message("request", "pickup(string block, int ref)")
    async def handle_pickup(self, agent: Agent, sender: str, block: str, ref: int) -> None:
        await self._execute(agent, sender, BlockAction.pickup(block), ref)

    @on_message("request", "putdown(string block, string dest, int ref)")
    async def handle_putdown(self, agent: Agent, sender: str, block: str, dest: str, ref: int) -> None:
        await self._execute(agent, sender, BlockAction.putdown(block, dest), ref)


class TowerPlanner(Behavior):
    """Mirrors environment state into ``on``/``holding`` beliefs and plans towers."""

    def __init__(self, timeout: float | None = 120.0) -> None:
        self.template = tower_template()
        self.timeout = timeout

    @on_message("inform", "block(string name)")
    async def handle_block(self, agent: Agent, sender: str, name: str) -> None:
        agent.add_belief(pred("block", name))

    @on_message("inform", "failed(int ref, string error)")
    async def handle_failed(self, agent: Agent, sender: str, ref: int, error: str) -> None:
        agent.add_belief(pred("failed", ref, error))

    @on_message("inform", "state(string payload)")
    async def handle_state(self, agent: Agent, sender: str, payload: str) -> None:
        state = BlocksState.from_dict(json.loads(payload))
        current = set(state.beliefs())
        for pattern in (pred("on", Var("A"), Var("B")), pred("holding", Var("C"))):
            for s in agent.query(pattern):
                fact = pattern.apply(s)
                if fact not in current:
                    agent.remove_belief(fact)
        for fact in state.beliefs():
            agent.add_belief(fact)

    async def tower(self, agent: Agent, goal: list[str], result: ScenarioResult) -> None:
        result.prompt = build_tower_prompt(self.template, goal, agent.beliefs)
        result.reply = await agent.chat(result.prompt)
        result.plan = parse_plan(result.reply)
        for ref, act in enumerate(result.plan, 1):
            if act.kind == "pickup":
                (blk,) = act.args
                agent.send("request", "env", pred("pickup", blk, ref))
                done: Predicate = pred("holding", blk)
            else:
                x, y = act.args
                agent.send("request", "env", pred("putdown", x, y, ref))
                done = pred("on", x, y)
            i, subst = await agent.wait_any([done, pred("failed", ref, Var("E"))], self.timeout)
            if i == 1:
                result.outcomes.append(ActionOutcome(act, False, subst["E"]))
                return
            result.outcomes.append(ActionOutcome(act, True))


def run_tower_scenario(provider: ChatProvider, s0: BlocksState, goal, *,
                       timeout: float | None = 120.0, log: EventLog | None = None) -> ScenarioResult:
    """Build the prompt, ask for a plan, execute it; errors land in the result."""
    goal = list(goal)
    if not goal or len(set(goal)) != len(goal):
        raise ValueError("goal must be a nonempty list of distinct block names")
    result = ScenarioResult(goal=goal, initial_state=s0)
    env = BlocksEnvironment(s0)
    planner = TowerPlanner(timeout)
    system = AgentSystem(provider, log=log)
    system.register("TowerPlanner", lambda: planner)
    system.register("BlocksEnvironment", lambda: env)
    system.spawn(AgentSpec("TowerPlanner"), "planner")
    system.spawn(AgentSpec("BlocksEnvironment"), "env")
    last_block = sorted(s0.blocks)[-1] if s0.blocks else None

    async def main(system: AgentSystem) -> None:
        agent = system.agent("planner")

        async def goal_plan():
            if last_block is not None:
                await agent.wait(pred("block", last_block), timeout)
            agent.add_belief(pred("target", json.dumps(goal)))
            await planner.tower(agent, goal, result)

        try:
            await agent.start_intention(goal_plan)
        except (TemplateError, MalformedPlan, ProviderError, WaitTimeout) as e:
            result.error = f"{type(e).__name__}: {e}"
            result.error_type = "provider" if isinstance(e, ProviderError) else type(e).__name__

    system.run(main)
    result.final_state = env.state
    result.goal_satisfied = goal_satisfied(env.state, goal)
    return result
