"""
A small multi-agent executor.

Agents own a belief base and a mailbox and run on one asyncio loop. Each
agent processes its mailbox one message at a time; message handlers are
registered on a :class:`Behavior` with :func:`on_message`. Longer activities
(goals) run as *intentions*, separate tasks that may suspend in
:meth:`Agent.wait` while the agent's handlers keep draining the mailbox.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Awaitable, Callable, Iterable

from .beliefs import BeliefBase, Predicate, Substitution, current_agent, parse_predicate, unify
from .providers import ChatProvider
from .templates import render

log = logging.getLogger(__name__)

PERFORMATIVES = frozenset({"request", "agree", "inform"})


class AgentRuntimeError(Exception):
    """Base class for runtime errors."""


class DuplicateName(AgentRuntimeError):
    pass


class UnknownBehavior(AgentRuntimeError):
    pass


class UnknownReceiver(AgentRuntimeError):
    pass


class NonGroundContent(AgentRuntimeError):
    pass


class UnknownPerformative(AgentRuntimeError):
    pass


class WaitTimeout(AgentRuntimeError):
    pass


@dataclass(frozen=True)
class Message:
    performative: str
    sender: str
    receiver: str
    content: Predicate


@dataclass
class AgentSpec:
    behavior: str
    beliefs: list[Predicate] = field(default_factory=list)
    args: list[Any] = field(default_factory=list)


def on_message(performative: str, pattern: str | Predicate):
    """Mark a behavior coroutine as the handler for matching messages.

    The handler is called as ``handler(agent, sender, **bindings)`` where
    ``bindings`` maps the pattern's variable names to their values.
    """
    pat = parse_predicate(pattern) if isinstance(pattern, str) else pattern

    def deco(fn):
        fn._handles = (performative, pat)
        return fn

    return deco


class Behavior:
    """Plan-like handlers for one agent type. One instance per agent."""

    _handlers: list[tuple[str, Predicate, str]] = []

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        handlers = []
        seen = set()
        for klass in cls.__mro__:
            for attr, fn in vars(klass).items():
                spec = getattr(fn, "_handles", None)
                if spec and attr not in seen:
                    handlers.append((spec[0], spec[1], attr))
                seen.add(attr)
        cls._handlers = handlers

    async def on_start(self, agent: "Agent", *args) -> None:
        """Startup plan, run once with the spawn arguments."""


class EventLog:
    """
    Ordered runtime events with a per-agent sequence number.

    Each event is a dict; ``ts`` is the only wall-clock field and is dropped
    by :meth:`body`.
    """

    def __init__(self, stream_path: str | os.PathLike | None = None) -> None:
        self.events: list[dict] = []
        self._per_agent: dict[str, int] = {}
        self.stream_path = stream_path
        if stream_path:
            open(stream_path, "w").close()

    def emit(self, agent: str, event: str, **data) -> dict:
        n = self._per_agent.get(agent, 0) + 1
        self._per_agent[agent] = n
        record = {"seq": len(self.events) + 1, "agent": agent, "agent_seq": n, "event": event}
        record.update(data)
        record["ts"] = time.time()
        self.events.append(record)
        if self.stream_path:
            with open(self.stream_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
        return record

    def body(self) -> list[dict]:
        return [{k: v for k, v in e.items() if k != "ts"} for e in self.events]

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]


class Agent:
    def __init__(self, system: "AgentSystem", name: str, behavior: Behavior, spec: AgentSpec,
                 provider: ChatProvider | None = None) -> None:
        self.system = system
        self.name = name
        self.behavior = behavior
        self.spec = spec
        self.provider = provider
        self.beliefs = BeliefBase(spec.beliefs, owner=name)
        self.beliefs.subscribe(self._on_belief_change)
        self.mailbox: asyncio.Queue[Message] = asyncio.Queue()
        self._changed = asyncio.Event()
        self._tasks: list[asyncio.Task] = []

    def __repr__(self) -> str:
        return f"Agent({self.name!r}, {type(self.behavior).__name__})"

    # --- beliefs ---------------------------------------------------------

    def _on_belief_change(self, change: str, p: Predicate) -> None:
        self._changed.set()
        self._changed = asyncio.Event()

    def add_belief(self, p: Predicate) -> None:
        if self.beliefs.add(p):
            self.system.log.emit(self.name, "belief-add", belief=str(p))

    def remove_belief(self, p: Predicate) -> None:
        if self.beliefs.remove(p):
            self.system.log.emit(self.name, "belief-remove", belief=str(p))

    def query(self, pattern: Predicate | str) -> list[Substitution]:
        if isinstance(pattern, str):
            pattern = parse_predicate(pattern)
        return self.beliefs.query(pattern)

    def holds(self, pattern: Predicate | str) -> bool:
        return bool(self.query(pattern))

    async def wait(self, pattern: Predicate | str, timeout: float | None = None) -> Substitution:
        """Suspend this intention until a belief matches ``pattern``."""
        _, subst = await self.wait_any([pattern], timeout)
        return subst

    async def wait_any(self, patterns: Iterable[Predicate | str], timeout: float | None = None):
        """Like :meth:`wait` over alternatives; returns ``(index, substitution)``."""
        pats = [parse_predicate(p) if isinstance(p, str) else p for p in patterns]
        desc = " | ".join(str(p) for p in pats)
        self.system.log.emit(self.name, "wait-begin", pattern=desc)

        async def poll():
            while True:
                for i, p in enumerate(pats):
                    found = self.beliefs.query(p)
                    if found:
                        return i, found[0]
                await self._changed.wait()

        try:
            i, subst = await asyncio.wait_for(poll(), timeout)
        except asyncio.TimeoutError:
            self.system.log.emit(self.name, "wait-timeout", pattern=desc)
            raise WaitTimeout(f"{self.name}: no belief matching {desc} within {timeout}s") from None
        self.system.log.emit(self.name, "wait-end", pattern=str(pats[i]), bindings=subst)
        return i, subst

    # --- communication ---------------------------------------------------

    def send(self, performative: str, to: str, content: Predicate | str) -> None:
        if isinstance(content, str):
            content = parse_predicate(content)
        self.system.deliver(self.name, performative, to, content)

    async def chat(self, template, provider: ChatProvider | None = None) -> str:
        """Render ``template`` against this agent's beliefs and chat."""
        provider = provider or self.provider or self.system.provider
        if provider is None:
            raise AgentRuntimeError(f"{self.name} has no chat provider")
        prompt = render(template, self.beliefs)
        if provider.remote:
            ex = await asyncio.to_thread(provider.chat_exchange, prompt)
        else:
            ex = provider.chat_exchange(prompt)
        self.system.log.emit(self.name, "chat", exchange=ex.index)
        return ex.reply

    def log_exchanges(self, provider: ChatProvider, start: int) -> list[int]:
        """Emit chat events for exchanges recorded since ``start``."""
        if provider.session is None:
            return []
        refs = list(range(start, len(provider.session)))
        for i in refs:
            self.system.log.emit(self.name, "chat", exchange=i)
        return refs

    # --- execution -------------------------------------------------------

    def start_intention(self, coro_fn: Callable[..., Awaitable], *args, **kwargs) -> asyncio.Task:
        """Run ``coro_fn(*args)`` as a concurrent activity of this agent."""

        async def runner():
            current_agent.set(self.name)
            try:
                return await coro_fn(*args, **kwargs)
            except asyncio.CancelledError:
                raise
            except Exception as e:
                log.error("%s: intention %s failed: %s", self.name, getattr(coro_fn, "__name__", coro_fn), e)
                self.system.log.emit(self.name, "error", error=f"{type(e).__name__}: {e}")
                raise

        task = asyncio.get_running_loop().create_task(runner())
        self._tasks.append(task)
        return task

    async def _dispatch(self, msg: Message) -> None:
        for performative, pattern, attr in self.behavior._handlers:
            if performative != msg.performative:
                continue
            subst = unify(pattern, msg.content)
            if subst is None:
                continue
            self.system.log.emit(self.name, "handle", performative=msg.performative,
                                 sender=msg.sender, content=str(msg.content), handler=attr)
            try:
                await getattr(self.behavior, attr)(self, msg.sender, **subst)
            except asyncio.CancelledError:
                raise
            except Exception as e:
                log.error("%s: handler %s failed: %s", self.name, attr, e)
                self.system.log.emit(self.name, "error", error=f"{type(e).__name__}: {e}")
            return
        log.warning("%s: dropped unhandled %s from %s: %s", self.name, msg.performative, msg.sender, msg.content)
        self.system.log.emit(self.name, "drop", performative=msg.performative,
                             sender=msg.sender, content=str(msg.content))

    async def _main(self) -> None:
        current_agent.set(self.name)
        try:
            await self.behavior.on_start(self, *self.spec.args)
        except Exception as e:
            log.error("%s: startup failed: %s", self.name, e)
            self.system.log.emit(self.name, "error", error=f"{type(e).__name__}: {e}")
        while True:
            msg = await self.mailbox.get()
            await self._dispatch(msg)

    def _start(self) -> None:
        self._tasks.append(asyncio.get_running_loop().create_task(self._main()))


class AgentSystem:
    """Registry of behaviors and running agents; owns the event loop lifecycle."""

    def __init__(self, provider: ChatProvider | None = None, *, log: EventLog | None = None,
                 performatives: Iterable[str] = PERFORMATIVES) -> None:
        self.provider = provider
        self.log = log or EventLog()
        self.performatives = frozenset(performatives)
        self.behaviors: dict[str, Callable[[], Behavior]] = {}
        self.agents: dict[str, Agent] = {}
        self._running = False

    def register(self, behavior_id: str, factory: Callable[[], Behavior]) -> None:
        self.behaviors[behavior_id] = factory

    def spawn(self, spec: AgentSpec, name: str, provider: ChatProvider | None = None) -> str:
        if not name:
            raise ValueError("agent name must be nonempty")
        if name in self.agents:
            raise DuplicateName(f"agent {name!r} already exists")
        factory = self.behaviors.get(spec.behavior)
        if factory is None:
            raise UnknownBehavior(f"behavior {spec.behavior!r} is not registered")
        agent = Agent(self, name, factory(), spec, provider)
        self.agents[name] = agent
        self.log.emit(name, "spawn", behavior=spec.behavior, beliefs=[str(b) for b in spec.beliefs])
        if self._running:
            agent._start()
        return name

    def kill(self, name: str) -> None:
        agent = self.agents.pop(name)
        for t in agent._tasks:
            t.cancel()
        self.log.emit(name, "stop")

    def agent(self, name: str) -> Agent:
        return self.agents[name]

    def deliver(self, sender: str, performative: str, receiver: str, content: Predicate) -> None:
        if performative not in self.performatives:
            raise UnknownPerformative(f"performative {performative!r} is not enabled")
        if not content.is_ground:
            raise NonGroundContent(f"message content must be ground: {content}")
        target = self.agents.get(receiver)
        if target is None:
            raise UnknownReceiver(f"no agent named {receiver!r}")
        self.log.emit(sender, "send", performative=performative, receiver=receiver, content=str(content))
        target.mailbox.put_nowait(Message(performative, sender, receiver, content))

    async def run_async(self, main: Callable[["AgentSystem"], Awaitable[Any]]) -> Any:
        self._running = True
        for agent in list(self.agents.values()):
            agent._start()
        try:
            return await main(self)
        finally:
            self._running = False
            tasks = [t for a in self.agents.values() for t in a._tasks]
            for t in tasks:
                t.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)

    def run(self, main: Callable[["AgentSystem"], Awaitable[Any]]) -> Any:
        """Start every agent, await ``main(system)``, then stop everything."""
        return asyncio.run(self.run_async(main))
