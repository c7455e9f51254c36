"""Provider configuration, chat exchanges, session recording and key loading."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from ..beliefs import BeliefBase
from ..templates import render

KEY_FILE_ENV = "BELIEFAGENTS_KEY_FILE"

PROVIDER_KINDS = {
    "mock": "mock",
    "openai": "openai-compatible",
    "openai-compatible": "openai-compatible",
    "gemini": "gemini-compatible",
    "gemini-compatible": "gemini-compatible",
}


class ProviderError(Exception):
    """Base class for provider errors."""


class KeyFileMissing(ProviderError):
    pass


class KeyFileEmpty(ProviderError):
    pass


class InvalidConfig(ProviderError):
    pass


class ScriptMissing(ProviderError):
    pass


class NoScriptMatch(ProviderError):
    pass


class ReplayMismatch(ProviderError):
    """A replayed session was asked a prompt it did not record."""


class ProviderUnavailable(ProviderError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


def resolve_key_file(path: str | os.PathLike | None) -> Path:
    """The environment override wins over the given path."""
    override = os.environ.get(KEY_FILE_ENV)
    return Path(override or path or "../api.key")


def load_api_key_from_file(path: str | os.PathLike) -> str:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyFileMissing(f"key file not found: {p}") from None
    except OSError as e:
        raise KeyFileMissing(f"key file unreadable: {p} ({e.strerror})") from None
    key = text.rstrip("\r\n")
    if not key.strip():
        raise KeyFileEmpty(f"key file is empty: {p}")
    return key


@dataclass
class ProviderConfig:
    kind: str = "mock"
    model: str = ""
    params: dict[str, Any] = field(default_factory=dict)
    api_key: str | None = field(default=None, repr=False)
    script_path: str | None = None
    base_url: str | None = None
    timeout: float = 60.0

    def validate(self) -> "ProviderConfig":
        kind = PROVIDER_KINDS.get(self.kind)
        if kind is None:
            raise InvalidConfig(f"unknown provider kind {self.kind!r}")
        self.kind = kind
        temp = self.params.get("temperature")
        if temp is not None:
            if isinstance(temp, bool) or not isinstance(temp, (int, float)) or not 0 <= temp <= 2:
                raise InvalidConfig(f"temperature must be within [0, 2], got {temp!r}")
        top_k = self.params.get("topK")
        if top_k is not None:
            if isinstance(top_k, bool) or not isinstance(top_k, int) or top_k < 1:
                raise InvalidConfig(f"topK must be a positive integer, got {top_k!r}")
        if kind != "mock":
            if not self.model:
                raise InvalidConfig(f"{kind} provider needs a model id")
            if not self.api_key:
                raise InvalidConfig(f"{kind} provider needs an api key")
        if self.timeout <= 0:
            raise InvalidConfig("timeout must be positive")
        return self


@dataclass
class ChatExchange:
    prompt: str
    reply: str
    provider: str
    model: str
    ts: float
    index: int | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("index")
        return json.dumps(d, ensure_ascii=False)


class SessionRecording:
    """
    Ordered log of chat exchanges, optionally streamed to a JSONL file.

    Appends are atomic per exchange.
    """

    def __init__(self, path: str | os.PathLike | None = None) -> None:
        self.path = Path(path) if path else None
        self.exchanges: list[ChatExchange] = []
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def append(self, ex: ChatExchange) -> ChatExchange:
        with self._lock:
            ex.index = len(self.exchanges)
            self.exchanges.append(ex)
            if self.path:
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(ex.to_json() + "\n")
        return ex

    def __len__(self) -> int:
        return len(self.exchanges)

    def __getitem__(self, i):
        return self.exchanges[i]

    @staticmethod
    def load(path: str | os.PathLike) -> list[ChatExchange]:
        out = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    d = json.loads(line)
                    out.append(
                        ChatExchange(d["prompt"], d["reply"], d["provider"], d["model"], d["ts"], len(out))
                    )
        return out


class ChatProvider:
    """
    A named LLM backend with a single-turn chat operation.

    Subclasses implement :meth:`_complete`. Every call is stateless; any
    conversation context must be in the prompt.
    """

    kind = "abstract"
    remote = False

    def __init__(self, model: str = "", session: SessionRecording | None = None) -> None:
        self.model = model
        self.session = session
        self._lock = threading.Lock()

    def _complete(self, prompt: str) -> str:
        raise NotImplementedError

    def chat_exchange(self, prompt: str) -> ChatExchange:
        reply = self._complete(prompt)
        ex = ChatExchange(prompt, reply, self.kind, self.model, time.time())
        if self.session is not None:
            self.session.append(ex)
        return ex

    def chat(self, prompt: str) -> str:
        return self.chat_exchange(prompt).reply

    def chat_templated(self, template, beliefs: BeliefBase | None = None) -> str:
        return self.chat(render(template, beliefs))

    def record(self, path: str | os.PathLike | None = None) -> SessionRecording:
        """Start recording exchanges (in memory, plus ``path`` if given)."""
        self.session = SessionRecording(path)
        return self.session
