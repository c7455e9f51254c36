"""Uniform chat interface over mock, replayed and hosted LLM backends."""

from __future__ import annotations

from .base import (
    KEY_FILE_ENV,
    ChatExchange,
    ChatProvider,
    InvalidConfig,
    KeyFileEmpty,
    KeyFileMissing,
    NoScriptMatch,
    ProviderConfig,
    ProviderError,
    ProviderUnavailable,
    ReplayMismatch,
    ScriptMissing,
    SessionRecording,
    load_api_key_from_file,
    resolve_key_file,
)
from .http import GeminiProvider, HTTPChatProvider, OpenAIProvider
from .mock import MockProvider, MockRule, MockScript, ReplayProvider

__all__ = [
    "KEY_FILE_ENV",
    "ChatExchange",
    "ChatProvider",
    "GeminiProvider",
    "HTTPChatProvider",
    "InvalidConfig",
    "KeyFileEmpty",
    "KeyFileMissing",
    "MockProvider",
    "MockRule",
    "MockScript",
    "NoScriptMatch",
    "OpenAIProvider",
    "ProviderConfig",
    "ProviderError",
    "ProviderUnavailable",
    "ReplayMismatch",
    "ReplayProvider",
    "ScriptMissing",
    "SessionRecording",
    "initialize",
    "load_api_key_from_file",
    "resolve_key_file",
]


def initialize(cfg: ProviderConfig, *, script: MockScript | None = None, client=None) -> ChatProvider:
    """Build a ready provider from a validated config."""
    cfg.validate()
    if cfg.kind == "mock":
        if script is None:
            if not cfg.script_path:
                raise ScriptMissing("mock provider needs a script")
            script = MockScript.load(cfg.script_path)
        return MockProvider(script, model=cfg.model or "mock")
    cls = OpenAIProvider if cfg.kind == "openai-compatible" else GeminiProvider
    return cls(
        cfg.model,
        cfg.api_key,
        cfg.params,
        base_url=cfg.base_url,
        timeout=cfg.timeout,
        client=client,
    )
