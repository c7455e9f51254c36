"""Command line entry point: ``beliefagents --scenario {travel,ttt,tower} ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .providers import KeyFileEmpty, KeyFileMissing, ProviderError, ScriptMissing
from .providers import InvalidConfig as ProviderConfigError
from .runtime import AgentRuntimeError
from .scenarios import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_PROVIDER,
    SCENARIOS,
    ConfigError,
    RunConfig,
    run,
)
from .tictactoe import PLAYER_TYPES, POLICIES

log = logging.getLogger("beliefagents")


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beliefagents", description="Run a belief-driven multi-agent LLM scenario.")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--provider", default="mock", choices=("mock", "openai", "gemini"))
    p.add_argument("--model")
    p.add_argument("--key-file", default="../api.key",
                   help="API key file; BELIEFAGENTS_KEY_FILE overrides it")
    p.add_argument("--mock-script", help="JSON rules for the mock provider")
    p.add_argument("--record", help="append every exchange to this JSONL file")
    p.add_argument("--replay", help="answer from a recorded JSONL session instead of a provider")
    p.add_argument("--out", help="directory for transcript.jsonl, run.json and the result file")
    p.add_argument("--strict", action="store_true", help="exit 1 when the scenario goal is not met")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=120.0, help="seconds per wait")
    p.add_argument("--temperature", type=float)
    p.add_argument("--top-k", type=int)
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="extra model parameter (repeatable)")
    g = p.add_argument_group("travel")
    g.add_argument("--roles", help="JSON file with roles, optional order and task")
    g.add_argument("--task")
    g = p.add_argument_group("ttt")
    g.add_argument("--players", nargs=2, metavar=("X", "O"), default=["linear", "linear"],
                   choices=PLAYER_TYPES)
    g.add_argument("--matches", type=int, default=1)
    g.add_argument("--illegal-policy", default="fallback", choices=POLICIES)
    g.add_argument("--max-retries", type=int, default=3)
    g = p.add_argument_group("tower")
    g.add_argument("--state", help="JSON file with 'on', optional 'blocks', 'holding' and 'goal'")
    g.add_argument("--goal", help="comma separated tower, bottom first, e.g. a,b,c")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = dict(args.param)
    if args.temperature is not None:
        params["temperature"] = args.temperature
    if args.top_k is not None:
        params["topK"] = args.top_k
    goal = [b.strip() for b in args.goal.split(",") if b.strip()] if args.goal else None
    return RunConfig(
        scenario=args.scenario, provider=args.provider, model=args.model, params=params,
        key_file=args.key_file, mock_script=args.mock_script, record=args.record, replay=args.replay,
        out=args.out, strict=args.strict, seed=args.seed, timeout=args.timeout, roles=args.roles,
        task=args.task, players=tuple(args.players), matches=args.matches,
        illegal_policy=args.illegal_policy, max_retries=args.max_retries, state=args.state, goal=goal,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    echo = sys.stdout.write
    try:
        cfg = config_from_args(args)
        transcript = run(cfg, echo)
    except (ConfigError, KeyFileMissing, KeyFileEmpty, ProviderConfigError, ScriptMissing, OSError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ProviderError as e:
        print(f"provider error: {e}", file=sys.stderr)
        return EXIT_PROVIDER
    except AgentRuntimeError as e:
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    if cfg.out:
        transcript.write(cfg.out)
    return transcript.exit_code


if __name__ == "__main__":
    sys.exit(main())
