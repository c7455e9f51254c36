"""Scripted mock provider and session replay."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .base import (
    ChatExchange,
    ChatProvider,
    InvalidConfig,
    NoScriptMatch,
    ReplayMismatch,
    ScriptMissing,
    SessionRecording,
)

MATCH_KINDS = ("exact", "substring", "default")


@dataclass
class MockRule:
    kind: str
    value: str | None
    replies: list[str]
    consumed: int = 0

    def matches(self, prompt: str) -> bool:
        if self.kind == "exact":
            return prompt == self.value
        if self.kind == "substring":
            return self.value in prompt
        return True

    def next_reply(self) -> str:
        reply = self.replies[min(self.consumed, len(self.replies) - 1)]
        self.consumed += 1
        return reply


class MockScript:
    """Ordered reply rules. Non-default rules are tried in order, default last."""

    def __init__(self, rules: list[MockRule]) -> None:
        if sum(r.kind == "default" for r in rules) > 1:
            raise InvalidConfig("mock script has more than one default rule")
        self.rules = rules

    @classmethod
    def from_data(cls, data) -> "MockScript":
        if not isinstance(data, list):
            raise InvalidConfig("mock script must be a JSON list of rules")
        rules = []
        for i, item in enumerate(data):
            try:
                match = item["match"]
                kind = match["kind"]
                replies = item["replies"]
            except (KeyError, TypeError):
                raise InvalidConfig(f"rule {i} needs 'match.kind' and 'replies'") from None
            if kind not in MATCH_KINDS:
                raise InvalidConfig(f"rule {i}: unknown match kind {kind!r}")
            value = match.get("value")
            if kind != "default" and not isinstance(value, str):
                raise InvalidConfig(f"rule {i}: {kind} rule needs a text 'value'")
            if not replies or not all(isinstance(r, str) for r in replies):
                raise InvalidConfig(f"rule {i}: 'replies' must be a nonempty list of text")
            rules.append(MockRule(kind, value, list(replies)))
        return cls(rules)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "MockScript":
        p = Path(path)
        if not p.is_file():
            raise ScriptMissing(f"mock script not found: {p}")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InvalidConfig(f"mock script {p} is not valid JSON: {e}") from None
        return cls.from_data(data)

    def reply_for(self, prompt: str) -> str:
        default = None
        for rule in self.rules:
            if rule.kind == "default":
                default = rule
            elif rule.matches(prompt):
                return rule.next_reply()
        if default is None:
            raise NoScriptMatch(f"no mock rule matches prompt: {prompt[:80]!r}")
        return default.next_reply()


class MockProvider(ChatProvider):
    kind = "mock"

    def __init__(self, script: MockScript, model: str = "mock", session=None) -> None:
        super().__init__(model, session)
        self.script = script

    def _complete(self, prompt: str) -> str:
        with self._lock:
            return self.script.reply_for(prompt)


class ReplayProvider(ChatProvider):
    """Serves the replies of a recorded session, in order."""

    kind = "replay"

    def __init__(self, exchanges: list[ChatExchange], *, strict: bool = True, session=None) -> None:
        model = exchanges[0].model if exchanges else "replay"
        super().__init__(model, session)
        self.exchanges = exchanges
        self.strict = strict
        self.position = 0
        if exchanges:
            self.kind = exchanges[0].provider

    @classmethod
    def from_file(cls, path: str | os.PathLike, **kwargs) -> "ReplayProvider":
        if not Path(path).is_file():
            raise ScriptMissing(f"recording not found: {path}")
        return cls(SessionRecording.load(path), **kwargs)

    def _complete(self, prompt: str) -> str:
        with self._lock:
            if self.position >= len(self.exchanges):
                raise ReplayMismatch("recording exhausted")
            ex = self.exchanges[self.position]
            if self.strict and ex.prompt != prompt:
                raise ReplayMismatch(f"prompt #{self.position} differs from the recording")
            self.position += 1
            return ex.reply
