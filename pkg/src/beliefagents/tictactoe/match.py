"""
Match harness: an environment agent owns the board, two player agents take
turns. After moving, a player sends ``request your_turn(n)`` to its opponent.
"""

from __future__ import annotations

import asyncio
import logging
import random
from dataclasses import dataclass, field
from typing import Callable

from ..beliefs import Var, pred
from ..providers import ChatProvider, ProviderError
from ..runtime import Agent, AgentSpec, AgentSystem, Behavior, EventLog, WaitTimeout, on_message
from .board import Board, BoardError, IN_PROGRESS, MoveDecision
from .players import (
    DECISION_ERRORS,
    IllegalMoveProposed,
    defensive_decide,
    linear_decide,
    llm_decide,
    random_decide,
    reflective_decide,
)

log = logging.getLogger(__name__)

PLAYER_TYPES = ("linear", "random", "llm-basic", "llm-defensive", "llm-reflective")
POLICIES = ("forfeit", "retry", "fallback")


@dataclass
class MatchRules:
    illegal_policy: str = "fallback"
    max_retries: int = 3
    timeout: float | None = 120.0
    reflective_rounds: int = 3

    def __post_init__(self) -> None:
        if self.illegal_policy not in POLICIES:
            raise ValueError(f"unknown illegal policy {self.illegal_policy!r}")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")


@dataclass
class PlayerStats:
    illegal: int = 0
    unparseable: int = 0
    retries: int = 0
    fallbacks: int = 0
    exhausted: int = 0

    @property
    def bad_proposals(self) -> int:
        return self.illegal + self.unparseable


@dataclass
class MatchResult:
    winner: str | None
    outcome: str  # "win" | "draw" | "forfeit"
    moves: list[tuple[str, int, int]]
    stats: dict[str, PlayerStats]
    exchanges: list[list[int]] = field(default_factory=list)
    forfeited_by: str | None = None
    rejected: list[dict] = field(default_factory=list)
    provider_errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "winner": self.winner,
            "outcome": self.outcome,
            "forfeited_by": self.forfeited_by,
            "moves": [list(m) for m in self.moves],
            "players": {t: vars(s) | {"bad_proposals": s.bad_proposals} for t, s in self.stats.items()},
            "rejected": self.rejected,
            "provider_errors": self.provider_errors,
            "exchanges": self.exchanges,
        }


Strategy = Callable[[Board], MoveDecision]


def make_strategy(kind: str, token: str, provider: ChatProvider | None = None, *,
                  seed: int | str | None = 0, rules: MatchRules | None = None) -> Strategy:
    rules = rules or MatchRules()
    if kind == "linear":
        return linear_decide
    if kind == "random":
        rng = random.Random(f"{seed}-{token}")
        return lambda b: random_decide(b, rng)
    if provider is None:
        raise ValueError(f"{kind} player needs a chat provider")
    if kind == "llm-basic":
        return lambda b: llm_decide(provider, b, token)
    if kind == "llm-defensive":
        return lambda b: defensive_decide(provider, b, token)
    if kind == "llm-reflective":
        return lambda b: reflective_decide(provider, b, token, rules.reflective_rounds)
    raise ValueError(f"unknown player type {kind!r}")


def _other(token: str) -> str:
    return "O" if token == "X" else "X"


class Environment(Behavior):
    """Owns the board; adjudicates ``play`` requests and announces the result."""

    def __init__(self) -> None:
        self.board = Board()
        self.finished = asyncio.Event()
        self.forfeited_by: str | None = None
        self.rejected: list[dict] = []

    async def on_start(self, agent: Agent) -> None:
        agent.send("request", "X", pred("your_turn", 1))

    def _broadcast(self, agent: Agent, content) -> None:
        for t in ("X", "O"):
            agent.send("inform", t, content)

    @on_message("request", "play(string token, int row, int col, int ref)")
    async def handle_play(self, agent: Agent, sender: str, token: str, row: int, col: int, ref: int) -> None:
        try:
            if sender != token:
                raise BoardError(f"{sender} cannot play for {token}")
            status = self.board.apply_move(token, row, col)
        except BoardError as e:
            log.warning("rejected move by %s at (%d, %d): %s", token, row, col, e)
            self.rejected.append({"player": token, "row": row, "col": col, "error": type(e).__name__})
            agent.send("inform", sender, pred("outcome", ref, type(e).__name__))
            return
        self._broadcast(agent, pred("cell", row, col, token))
        if status == IN_PROGRESS:
            agent.send("inform", sender, pred("outcome", ref, "ok"))
            return
        agent.send("inform", sender, pred("outcome", ref, "over"))
        self._broadcast(agent, pred("game_over", str(status)))
        self.finished.set()

    @on_message("request", "forfeit(string token)")
    async def handle_forfeit(self, agent: Agent, sender: str, token: str) -> None:
        self.forfeited_by = sender
        self._broadcast(agent, pred("game_over", f"forfeit({sender})"))
        self.finished.set()


class Player(Behavior):
    """A player whose ``?location`` test goal is answered by ``strategy``."""

    def __init__(self, strategy: Strategy, provider: ChatProvider | None, rules: MatchRules) -> None:
        self.strategy = strategy
        self.provider = provider
        self.rules = rules
        self.stats = PlayerStats()
        self.exchanges: list[list[int]] = []
        self.provider_errors: list[str] = []
        self._ref = 0

    async def on_start(self, agent: Agent, token: str) -> None:
        agent.add_belief(pred("token", token))
        for i in range(3):
            for j in range(3):
                agent.add_belief(pred("location", i, j, ""))

    @on_message("inform", "cell(int row, int col, string token)")
    async def handle_cell(self, agent: Agent, sender: str, row: int, col: int, token: str) -> None:
        agent.remove_belief(pred("location", row, col, ""))
        agent.add_belief(pred("location", row, col, token))

    @on_message("inform", "outcome(int ref, string status)")
    async def handle_outcome(self, agent: Agent, sender: str, ref: int, status: str) -> None:
        agent.add_belief(pred("outcome", ref, status))

    @on_message("inform", "game_over(string result)")
    async def handle_game_over(self, agent: Agent, sender: str, result: str) -> None:
        agent.add_belief(pred("game_over", result))

    @on_message("request", "your_turn(int n)")
    async def handle_turn(self, agent: Agent, sender: str, n: int) -> None:
        agent.start_intention(self.take_turn, agent, n)

    def _board(self, agent: Agent) -> Board:
        cells = [[""] * 3 for _ in range(3)]
        for s in agent.query(pred("location", Var("R", "int"), Var("C", "int"), Var("V"))):
            cells[s["R"]][s["C"]] = s["V"]
        return Board.from_cells(cells)

    async def _decide(self, agent: Agent, board: Board, fallback: bool) -> MoveDecision:
        if fallback:
            return linear_decide(board)
        if self.provider is not None and self.provider.remote:
            return await asyncio.to_thread(self.strategy, board)
        return self.strategy(board)

    async def take_turn(self, agent: Agent, n: int) -> None:
        token = agent.query("token(string T)")[0]["T"]
        session = self.provider.session if self.provider is not None else None
        refs: list[int] = []
        bad = 0
        while True:
            fallback = self.rules.illegal_policy == "fallback" and bad >= self.rules.max_retries
            board = self._board(agent)
            start = len(session) if session is not None else 0
            try:
                decision = await self._decide(agent, board, fallback)
            except DECISION_ERRORS as e:
                decision = None
                error = e
            except ProviderError as e:
                # A dead backend ends the game rather than stalling it.
                self.provider_errors.append(f"{type(e).__name__}: {e}")
                self.exchanges.append(refs)
                agent.send("request", "board", pred("forfeit", token))
                return
            finally:
                if self.provider is not None:
                    refs.extend(agent.log_exchanges(self.provider, start))
            if decision is not None:
                if decision.exhausted:
                    self.stats.exhausted += 1
                self._ref += 1
                ref = self._ref
                agent.send("request", "board", pred("play", token, decision.row, decision.col, ref))
                status = (await agent.wait(pred("outcome", ref, Var("S")), self.rules.timeout))["S"]
                if status in ("ok", "over"):
                    if fallback:
                        self.stats.fallbacks += 1
                    break
                error = IllegalMoveProposed(decision.row, decision.col, status)
            if isinstance(error, IllegalMoveProposed):
                self.stats.illegal += 1
            else:
                self.stats.unparseable += 1
            log.warning("player %s bad proposal on turn %d: %s", token, n, error)
            agent.system.log.emit(agent.name, "bad-proposal", turn=n, error=f"{type(error).__name__}: {error}")
            bad += 1
            if self.rules.illegal_policy == "forfeit" or (
                self.rules.illegal_policy == "retry" and bad >= self.rules.max_retries
            ):
                self.exchanges.append(refs)
                agent.send("request", "board", pred("forfeit", token))
                return
            self.stats.retries += 1
        self.exchanges.append(refs)
        if status == "ok":
            agent.send("request", _other(token), pred("your_turn", n + 1))


def play_match(player_x: str, player_o: str, rules: MatchRules | None = None, *,
               provider: ChatProvider | None = None, providers: dict | None = None,
               seed: int | str | None = 0, log: EventLog | None = None) -> MatchResult:
    """Play one game. ``providers`` may give each token its own provider."""
    rules = rules or MatchRules()
    providers = providers or {}
    system = AgentSystem(provider, log=log)
    env = Environment()
    system.register("Environment", lambda: env)
    players: dict[str, Player] = {}
    for token, kind in (("X", player_x), ("O", player_o)):
        if kind not in PLAYER_TYPES:
            raise ValueError(f"unknown player type {kind!r}")
        p = providers.get(token, provider) if kind.startswith("llm") else None
        players[token] = Player(make_strategy(kind, token, p, seed=seed, rules=rules), p, rules)
        system.register(f"Player{token}", lambda pl=players[token]: pl)
        system.spawn(AgentSpec(f"Player{token}", args=[token]), token)
    system.spawn(AgentSpec("Environment"), "board")

    async def main(system: AgentSystem) -> None:
        try:
            await asyncio.wait_for(env.finished.wait(), rules.timeout)
        except asyncio.TimeoutError:
            raise WaitTimeout("match did not finish in time") from None

    system.run(main)
    board = env.board
    status = board.status()
    if env.forfeited_by:
        winner, outcome = _other(env.forfeited_by), "forfeit"
    elif status.state == "win":
        winner, outcome = status.winner, "win"
    else:
        winner, outcome = None, "draw"
    exchanges = []
    for i in range(max(len(players["X"].exchanges), len(players["O"].exchanges))):
        for t in ("X", "O"):
            if i < len(players[t].exchanges):
                exchanges.append(players[t].exchanges[i])
    return MatchResult(
        winner=winner,
        outcome=outcome,
        moves=list(board.history),
        stats={t: p.stats for t, p in players.items()},
        exchanges=exchanges,
        forfeited_by=env.forfeited_by,
        rejected=env.rejected,
        provider_errors=players["X"].provider_errors + players["O"].provider_errors,
    )
