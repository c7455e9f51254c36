"""
Scenario runners shared by the command line and the tests.

Each ``run_*`` takes a :class:`RunConfig`, builds the provider (mock, replay
or hosted), runs the scenario and returns a :class:`Transcript` holding the
runtime event log, the chat exchanges and an outcome summary.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from .blocks import TABLE, BlocksState, InvalidState, run_tower_scenario
from .providers import (
    ChatProvider,
    MockScript,
    ProviderConfig,
    ReplayProvider,
    initialize,
    load_api_key_from_file,
    resolve_key_file,
)
from .roundrobin import TRAVEL_ROLES, TRAVEL_TASK, Role, run_round_robin
from .runtime import EventLog
from .tictactoe import PLAYER_TYPES, MatchRules, play_match

SCENARIOS = ("travel", "ttt", "tower")
DEFAULT_MODELS = {"mock": "mock", "openai": "gpt-4o", "gemini": "gemini-1.5-flash"}

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_PROVIDER = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str
    provider: str = "mock"
    model: str | None = None
    params: dict[str, Any] = field(default_factory=dict)
    key_file: str = "../api.key"
    mock_script: str | None = None
    record: str | None = None
    replay: str | None = None
    out: str | None = None
    strict: bool = False
    seed: int = 0
    timeout: float = 120.0
    # travel
    roles: str | None = None
    task: str | None = None
    # ttt
    players: tuple[str, str] = ("linear", "linear")
    matches: int = 1
    illegal_policy: str = "fallback"
    max_retries: int = 3
    # tower
    state: str | None = None
    goal: list[str] | None = None

    def validate(self) -> "RunConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.replay:
            if not Path(self.replay).is_file():
                raise ConfigError(f"replay mode needs an existing recording: {self.replay}")
            if self.record:
                raise ConfigError("--record and --replay are mutually exclusive")
        elif self.provider == "mock" and not self.mock_script and self.needs_llm:
            raise ConfigError("the mock provider needs --mock-script")
        if self.provider not in DEFAULT_MODELS:
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.scenario == "ttt":
            if len(self.players) != 2 or any(p not in PLAYER_TYPES for p in self.players):
                raise ConfigError(f"players must be two of {', '.join(PLAYER_TYPES)}")
            if self.matches < 1:
                raise ConfigError("--matches must be positive")
        if self.scenario == "tower":
            self.params.setdefault("temperature", 0.0)
        return self

    @property
    def needs_llm(self) -> bool:
        return self.scenario != "ttt" or any(p.startswith("llm") for p in self.players)

    def echo(self) -> dict:
        """Config as written to the run metadata (no secrets are held here)."""
        d = asdict(self)
        d["players"] = list(self.players)
        return d

    def hash(self) -> str:
        return config_hash(self.echo())


def config_hash(echo: dict) -> str:
    return hashlib.sha256(json.dumps(echo, sort_keys=True).encode()).hexdigest()


@dataclass
class Transcript:
    scenario: str
    config: dict
    config_hash: str
    events: list[dict]
    exchanges: list[dict]
    outcome: dict
    started: float
    ended: float
    exit_code: int = EXIT_OK

    def body(self) -> dict:
        """Everything except wall-clock fields, for reproducibility checks."""
        return {
            "events": [{k: v for k, v in e.items() if k != "ts"} for e in self.events],
            "exchanges": [{k: v for k, v in x.items() if k != "ts"} for x in self.exchanges],
            "outcome": self.outcome,
        }

    def metadata(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "config_hash": self.config_hash,
            "started": self.started,
            "ended": self.ended,
            "exit_code": self.exit_code,
            "outcome": self.outcome,
        }

    def write(self, out_dir: str | os.PathLike) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "transcript.jsonl").open("w", encoding="utf-8") as f:
            for e in self.events:
                f.write(json.dumps(e, ensure_ascii=False) + "\n")
        with (out / "exchanges.jsonl").open("w", encoding="utf-8") as f:
            for x in self.exchanges:
                f.write(json.dumps(x, ensure_ascii=False) + "\n")
        (out / "run.json").write_text(json.dumps(self.metadata(), indent=2, ensure_ascii=False) + "\n")
        (out / f"{self.scenario}_result.json").write_text(
            json.dumps(self.outcome, indent=2, ensure_ascii=False) + "\n"
        )


def build_provider(cfg: RunConfig) -> ChatProvider:
    """Provider for ``cfg``; always records exchanges (to ``cfg.record`` if set)."""
    if cfg.replay:
        provider: ChatProvider = ReplayProvider.from_file(cfg.replay)
    elif cfg.provider == "mock":
        pc = ProviderConfig("mock", cfg.model or "mock", dict(cfg.params), script_path=cfg.mock_script,
                            timeout=cfg.timeout)
        provider = initialize(pc, script=MockScript.load(cfg.mock_script))
    else:
        key = load_api_key_from_file(resolve_key_file(cfg.key_file))
        pc = ProviderConfig(cfg.provider, cfg.model or DEFAULT_MODELS[cfg.provider], dict(cfg.params),
                            api_key=key, timeout=60.0)
        provider = initialize(pc)
    provider.record(cfg.record)
    return provider


def _exchanges(provider: ChatProvider | None) -> list[dict]:
    if provider is None or provider.session is None:
        return []
    return [json.loads(x.to_json()) | {"index": x.index} for x in provider.session.exchanges]


def load_roles(path: str) -> tuple[list[Role], list[str] | None, str | None]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        roles = [Role(r["name"], r["description"], r["system_message"]) for r in data["roles"]]
    except (KeyError, TypeError) as e:
        raise ConfigError(f"roles file {path} is malformed: {e}") from None
    return roles, data.get("order"), data.get("task")


def load_tower_config(cfg: RunConfig) -> tuple[BlocksState, list[str]]:
    goal = cfg.goal
    if cfg.state:
        data = json.loads(Path(cfg.state).read_text(encoding="utf-8"))
        on = dict(data.get("on", {}))
        for b in data.get("blocks", []):
            if b not in on and b != data.get("holding"):
                on[b] = TABLE
        try:
            state = BlocksState(on, data.get("holding"))
        except InvalidState as e:
            raise ConfigError(f"invalid initial state: {e}") from None
        goal = goal or data.get("goal")
    else:
        state = BlocksState.on_table("a", "b", "c")
    goal = list(goal or ["a", "b", "c"])
    unknown = [b for b in goal if b not in state.blocks]
    if unknown:
        raise ConfigError(f"goal mentions unknown blocks: {unknown}")
    return state, goal


Echo = Callable[[str], None]


def _transcript(cfg: RunConfig, provider: ChatProvider | None, log: EventLog, outcome: dict,
                started: float, exit_code: int) -> Transcript:
    return Transcript(cfg.scenario, cfg.echo(), cfg.hash(), log.events, _exchanges(provider),
                      outcome, started, time.time(), exit_code)


def run_travel(cfg: RunConfig, echo: Echo | None = None) -> Transcript:
    started = time.time()
    roles, order, task = list(TRAVEL_ROLES), None, None
    if cfg.roles:
        roles, order, task = load_roles(cfg.roles)
    task = cfg.task or task or TRAVEL_TASK
    provider = build_provider(cfg)
    log = EventLog()
    result, _ = run_round_robin(provider, roles, task, order, timeout=cfg.timeout, log=log, echo=echo)
    errors = [e["error"] for e in log.of("chat-error")]
    outcome = {
        "status": "provider-error" if errors else result.status,
        "sections": [{"name": n, "result": r} for n, r in result.sections],
        "errors": errors,
    }
    return _transcript(cfg, provider, log, outcome, started, EXIT_PROVIDER if errors else EXIT_OK)


def run_ttt(cfg: RunConfig, echo: Echo | None = None) -> Transcript:
    started = time.time()
    provider = build_provider(cfg) if cfg.needs_llm else None
    rules = MatchRules(cfg.illegal_policy, cfg.max_retries, cfg.timeout)
    log = EventLog()
    x_kind, o_kind = cfg.players
    reports = []
    agg = {"X_wins": 0, "O_wins": 0, "draws": 0, "forfeits": 0,
           "illegal": {"X": 0, "O": 0}, "unparseable": {"X": 0, "O": 0}}
    provider_errors = []
    for i in range(cfg.matches):
        log.emit("harness", "match-start", match=i + 1, players=[x_kind, o_kind])
        r = play_match(x_kind, o_kind, rules, provider=provider, seed=f"{cfg.seed}-{i}", log=log)
        rep = r.to_dict() | {"match": i + 1}
        reports.append(rep)
        log.emit("harness", "match-end", match=i + 1, winner=r.winner, outcome=r.outcome)
        if r.winner:
            agg[f"{r.winner}_wins"] += 1
        else:
            agg["draws"] += 1
        agg["forfeits"] += r.outcome == "forfeit"
        for t in ("X", "O"):
            agg["illegal"][t] += r.stats[t].illegal
            agg["unparseable"][t] += r.stats[t].unparseable
        provider_errors.extend(r.provider_errors)
        if echo:
            moves = " ".join(f"{t}{row}{col}" for t, row, col in r.moves)
            echo(f"match {i + 1}: {r.outcome} winner={r.winner or '-'} moves={moves} "
                 f"illegal X={r.stats['X'].illegal} O={r.stats['O'].illegal}\n")
    if echo:
        echo(format_aggregate(x_kind, o_kind, agg))
    outcome = {"players": {"X": x_kind, "O": o_kind}, "matches": reports, "aggregate": agg,
               "provider_errors": provider_errors}
    return _transcript(cfg, provider, log, outcome, started, EXIT_PROVIDER if provider_errors else EXIT_OK)


def format_aggregate(x_kind: str, o_kind: str, agg: dict) -> str:
    rows = [
        ("player", "wins", "losses", "draws", "illegal", "unparseable"),
        (f"X ({x_kind})", agg["X_wins"], agg["O_wins"], agg["draws"], agg["illegal"]["X"], agg["unparseable"]["X"]),
        (f"O ({o_kind})", agg["O_wins"], agg["X_wins"], agg["draws"], agg["illegal"]["O"], agg["unparseable"]["O"]),
    ]
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "".join("  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip() + "\n" for r in rows)


def run_tower(cfg: RunConfig, echo: Echo | None = None) -> Transcript:
    started = time.time()
    state, goal = load_tower_config(cfg)
    provider = build_provider(cfg)
    log = EventLog()
    result = run_tower_scenario(provider, state, goal, timeout=cfg.timeout, log=log)
    outcome = result.to_dict()
    if echo:
        if result.plan is not None:
            echo("plan:\n" + "".join(f"  {i}. {a}\n" for i, a in enumerate(result.plan, 1)))
        for i, o in enumerate(result.outcomes, 1):
            echo(f"  step {i} {o.action}: {'ok' if o.ok else o.error}\n")
        if result.error:
            echo(f"error: {result.error}\n")
        echo(f"goal {goal}: {'satisfied' if result.goal_satisfied else 'NOT satisfied'}\n")
    if result.error_type == "provider":
        code = EXIT_PROVIDER
    elif cfg.strict and not result.goal_satisfied:
        code = EXIT_FAILED
    else:
        code = EXIT_OK
    return _transcript(cfg, provider, log, outcome, started, code)


RUNNERS = {"travel": run_travel, "ttt": run_ttt, "tower": run_tower}


def run(cfg: RunConfig, echo: Echo | None = None) -> Transcript:
    cfg.validate()
    return RUNNERS[cfg.scenario](cfg, echo)
