"""HTTP chat providers for OpenAI-compatible and Gemini-compatible services."""

from __future__ import annotations

import logging

import httpx

from .base import ChatProvider, ProviderUnavailable

log = logging.getLogger(__name__)

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class HTTPChatProvider(ChatProvider):
    """
    Base for hosted providers.

    A transport failure or retryable status gets exactly one retry, then
    surfaces as :class:`ProviderUnavailable`. The API key is scrubbed from
    every error message.
    """

    remote = True
    default_base_url = ""

    def __init__(
        self,
        model: str,
        api_key: str,
        params: dict | None = None,
        *,
        base_url: str | None = None,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
        session=None,
    ) -> None:
        super().__init__(model, session)
        self._api_key = api_key
        self.params = dict(params or {})
        self.base_url = (base_url or self.default_base_url).rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(model={self.model!r}, base_url={self.base_url!r})"

    def _scrub(self, text: str) -> str:
        return text.replace(self._api_key, "***") if self._api_key else text

    def _request(self) -> tuple[str, dict]:
        raise NotImplementedError

    def _body(self, prompt: str) -> dict:
        raise NotImplementedError

    def _extract(self, data: dict) -> str:
        raise NotImplementedError

    def _complete(self, prompt: str) -> str:
        url, headers = self._request()
        body = self._body(prompt)
        last_error: ProviderUnavailable | None = None
        for attempt in range(2):
            try:
                resp = self._client.post(url, json=body, headers=headers)
            except httpx.TransportError as e:
                last_error = ProviderUnavailable(self._scrub(f"{self.kind} transport failure: {e}"))
                log.warning("chat attempt %d failed: %s", attempt + 1, last_error)
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = ProviderUnavailable(
                    self._scrub(f"{self.kind} returned HTTP {resp.status_code}"), resp.status_code
                )
                log.warning("chat attempt %d failed: %s", attempt + 1, last_error)
                continue
            if resp.status_code >= 400:
                raise ProviderUnavailable(
                    self._scrub(f"{self.kind} returned HTTP {resp.status_code}: {resp.text[:200]}"),
                    resp.status_code,
                )
            try:
                return self._extract(resp.json())
            except (ValueError, KeyError, IndexError, TypeError) as e:
                raise ProviderUnavailable(
                    self._scrub(f"{self.kind} returned an unexpected payload: {e!r}"), resp.status_code
                ) from None
        assert last_error is not None
        raise last_error


class OpenAIProvider(HTTPChatProvider):
    kind = "openai-compatible"
    default_base_url = "https://api.openai.com/v1"

    def _request(self):
        return f"{self.base_url}/chat/completions", {"Authorization": f"Bearer {self._api_key}"}

    def _body(self, prompt: str) -> dict:
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt}]}
        for name, value in self.params.items():
            body["top_k" if name == "topK" else name] = value
        return body

    def _extract(self, data: dict) -> str:
        return data["choices"][0]["message"]["content"]


class GeminiProvider(HTTPChatProvider):
    kind = "gemini-compatible"
    default_base_url = "https://generativelanguage.googleapis.com/v1beta"

    def _request(self):
        return (
            f"{self.base_url}/models/{self.model}:generateContent",
            {"x-goog-api-key": self._api_key},
        )

    def _body(self, prompt: str) -> dict:
        body: dict = {"contents": [{"role": "user", "parts": [{"text": prompt}]}]}
        if self.params:
            body["generationConfig"] = dict(self.params)
        return body

    def _extract(self, data: dict) -> str:
        parts = data["candidates"][0]["content"]["parts"]
        return "".join(p.get("text", "") for p in parts)
