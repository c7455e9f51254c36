from __future__ import annotations

import json
from pathlib import Path

from beliefagents.providers import MockProvider, MockScript

ROOT = Path(__file__).resolve().parent.parent
MOCK_DIR = ROOT / "mock_scripts"


def mock(*rules, default=None) -> MockProvider:
    """Mock provider from (substring, replies) pairs plus an optional default reply list."""
    data = [{"match": {"kind": "substring", "value": v}, "replies": list(r)} for v, r in rules]
    if default is not None:
        data.append({"match": {"kind": "default"}, "replies": list(default)})
    provider = MockProvider(MockScript.from_data(data))
    provider.record()
    return provider


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def fipa_violations(events: list[dict], responders: set[str]) -> list[str]:
    """Check that each request a responder handled got one agree, then one inform, back."""
    problems = []
    for name in responders:
        own = [e for e in events if e["agent"] == name]
        handled = [e for e in own if e["event"] == "handle" and e["performative"] == "request"]
        for i, h in enumerate(handled):
            nxt = handled[i + 1]["seq"] if i + 1 < len(handled) else float("inf")
            replies = [
                e["performative"] for e in own
                if e["event"] == "send" and h["seq"] < e["seq"] < nxt and e["receiver"] == h["sender"]
            ]
            if replies != ["agree", "inform"]:
                problems.append(f"{name} request #{i}: replies {replies}")
    return problems
