"""
Round-robin group chat over the FIPA Request protocol.

An orchestrator spawns one assistant per role and sends each, in order, a
``request task(...)`` carrying the task plus every earlier result. Each
assistant answers ``agree`` and then ``inform result(...)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .beliefs import Predicate, Var, pred
from .providers import ChatProvider
from .runtime import Agent, AgentSpec, AgentSystem, Behavior, EventLog, on_message
from .templates import create_prompt_template

log = logging.getLogger(__name__)

SEPARATOR = "\n\n"
TERMINATE = "TERMINATE"


@dataclass(frozen=True)
class Role:
    name: str
    description: str
    system_message: str


# Role texts for the travel planning team; line breaks collapsed to spaces.
TRAVEL_ROLES = (
    Role(
        "planner",
        "A helpful assistant that can plan trips.",
        "You are a helpful assistant that can suggest a travel plan for a user based on their request.",
    ),
    Role(
        "local",
        "A local assistant that can suggest local activities or places to visit.",
        "You are a helpful assistant that can suggest authentic and interesting local activities "
        "or places to visit for a user and can utilize any context information provided.",
    ),
    Role(
        "language",
        "A helpful assistant that can provide language tips for a given destination.",
        "You are a helpful assistant that can review travel plans, providing feedback on "
        "important/critical tips about how best to address language or communication challenges "
        "for the given destination. If the plan already includes language tips, you can mention "
        "that the plan is satisfactory, with rationale.",
    ),
    Role(
        "summary",
        "A helpful assistant that can summarize the travel plan.",
        "You are a helpful assistant that can take in all of the suggestions and advice from the "
        "other agents and provide a detailed final travel plan. You must ensure that the final plan "
        "is integrated and complete. YOUR FINAL RESPONSE MUST BE THE COMPLETE PLAN. When the plan "
        "is complete and all perspectives are integrated, you can respond with TERMINATE.",
    ),
)
TRAVEL_ORDER = ("planner", "local", "language", "summary")
TRAVEL_TASK = "Plan a 3 day trip to Nepal."


class Assistant(Behavior):
    """Answers ``request task(T)`` with agree, one chat call, then inform."""

    async def on_start(self, agent: Agent, description: str, system_message: str) -> None:
        agent.add_belief(pred("description", description))
        agent.add_belief(pred("systemMessage", system_message))

    @on_message("request", "task(string task)")
    async def handle_task(self, agent: Agent, sender: str, task: str) -> None:
        agent.send("agree", sender, pred("task", task))
        desc = agent.query(pred("description", Var("D")))[0]["D"]
        sm = agent.query(pred("systemMessage", Var("S")))[0]["S"]
        template = create_prompt_template("${description}${systemMessage}${task}")
        template.add_binding("description", desc)
        template.add_binding("systemMessage", sm)
        template.add_binding("task", task)
        try:
            reply = await agent.chat(template)
        except Exception as e:
            log.error("%s: chat failed: %s", agent.name, e)
            agent.system.log.emit(agent.name, "chat-error", error=f"{type(e).__name__}: {e}")
            reply = f"ERROR {type(e).__name__}: {e}"
        agent.send("inform", sender, pred("result", reply))


@dataclass
class RoundRobinResult:
    sections: list[tuple[str, str]] = field(default_factory=list)
    requests: list[tuple[str, str]] = field(default_factory=list)
    status: str = "completed"

    def printable(self) -> str:
        return "".join(f"-----{name}-----\n{result}\n" for name, result in self.sections)


class RoundRobin(Behavior):
    """Orchestrator: records every ``inform result(R)`` as ``responded(sender, R)``."""

    @on_message("inform", "result(string result)")
    async def handle_result(self, agent: Agent, sender: str, result: str) -> None:
        agent.add_belief(pred("responded", sender, result))

    async def setup(self, agent: Agent) -> None:
        for s in agent.query("role(string name, string desc, string sm)"):
            agent.system.spawn(AgentSpec("Assistant", args=[s["desc"], s["sm"]]), s["name"])

    async def plan(self, agent: Agent, task: str, order: list[str], *,
                   timeout: float | None = 120.0, echo=None) -> RoundRobinResult:
        out = RoundRobinResult()
        mess = task
        for name in order:
            out.requests.append((name, mess))
            agent.send("request", name, pred("task", mess))
            subst = await agent.wait(pred("responded", name, Var("result")), timeout)
            result = subst["result"]
            out.sections.append((name, result))
            if echo:
                echo(f"-----{name}-----\n{result}\n")
            if TERMINATE in result:
                out.status = "terminated"
                break
            mess = mess + SEPARATOR + result
        return out


def make_system(provider: ChatProvider, roles=TRAVEL_ROLES, *, log: EventLog | None = None) -> AgentSystem:
    system = AgentSystem(provider, log=log)
    system.register("Assistant", Assistant)
    system.register("RoundRobin", RoundRobin)
    beliefs: list[Predicate] = [pred("role", r.name, r.description, r.system_message) for r in roles]
    system.spawn(AgentSpec("RoundRobin", beliefs=beliefs), "main")
    return system


def run_round_robin(provider: ChatProvider, roles=TRAVEL_ROLES, task: str = TRAVEL_TASK,
                    order=None, *, timeout: float | None = 120.0, log: EventLog | None = None,
                    echo=None) -> tuple[RoundRobinResult, AgentSystem]:
    """Spawn the role assistants, run the round robin and return the result."""
    roles = list(roles)
    if not roles:
        raise ValueError("round robin needs at least one role")
    order = list(order) if order is not None else [r.name for r in roles]
    unknown = set(order) - {r.name for r in roles}
    if unknown:
        raise ValueError(f"order names unknown roles: {sorted(unknown)}")
    system = make_system(provider, roles, log=log)

    async def main(system: AgentSystem) -> RoundRobinResult:
        orchestrator = system.agent("main")
        behavior: RoundRobin = orchestrator.behavior

        async def goal():
            await behavior.setup(orchestrator)
            return await behavior.plan(orchestrator, task, order, timeout=timeout, echo=echo)

        return await orchestrator.start_intention(goal)

    return system.run(main), system
