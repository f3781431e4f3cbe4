"""Text-completion providers for the stance classifier.

A provider is anything with ``complete(request) -> str``. Shipped providers:

* :class:`HttpProvider` - OpenAI-compatible ``/chat/completions`` endpoint;
* :class:`TranscriptRecorder` - wraps a provider and logs every exchange;
* :class:`ReplayProvider` - answers from a recorded transcript, offline.

Configuration is read from the environment:

``ROLEFIDELITY_ENDPOINT``  chat-completions URL (default: Mistral's public API)
``ROLEFIDELITY_MODEL``     model name (default ``mistral-large-latest``)
``ROLEFIDELITY_API_KEY``   bearer credential (required for live calls)
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, runtime_checkable

import httpx

ENV_ENDPOINT = "ROLEFIDELITY_ENDPOINT"
ENV_MODEL = "ROLEFIDELITY_MODEL"
ENV_API_KEY = "ROLEFIDELITY_API_KEY"

DEFAULT_ENDPOINT = "https://api.mistral.ai/v1/chat/completions"
DEFAULT_MODEL = "mistral-large-latest"
CLASSIFIER_TEMPERATURE = 0.1


class ConfigError(RuntimeError):
    pass


class ProviderError(RuntimeError):
    """Transport-level failure (network, timeout, non-2xx status, bad envelope)."""

    def __init__(self, message: str, *, status: int | None = None, retryable: bool = True, kind: str = "transport"):
        super().__init__(message)
        self.status = status
        self.retryable = retryable
        self.kind = kind


@dataclass(frozen=True)
class ProviderRequest:
    prompt: str
    temperature: float = CLASSIFIER_TEMPERATURE
    max_attempts: int = 3
    timeout: float = 60.0


@runtime_checkable
class ProviderClient(Protocol):
    def complete(self, request: ProviderRequest) -> str: ...


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model: str
    api_key: str

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> ProviderConfig:
        env = os.environ if env is None else env
        key = env.get(ENV_API_KEY, "").strip()
        if not key:
            raise ConfigError(f"{ENV_API_KEY} is not set; pass --stub for offline classification")
        return cls(
            endpoint=env.get(ENV_ENDPOINT, "").strip() or DEFAULT_ENDPOINT,
            model=env.get(ENV_MODEL, "").strip() or DEFAULT_MODEL,
            api_key=key,
        )

    def redacted(self) -> dict[str, str]:
        return {"endpoint": self.endpoint, "model": self.model, "api_key": "***"}


class HttpProvider:
    """Synchronous chat-completions client; one request per call, no streaming.

    Safe to share across threads (httpx.Client is thread-safe).
    """

    def __init__(self, config: ProviderConfig, *, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(transport=transport)

    def close(self) -> None:
        self._client.close()

    def request_body(self, request: ProviderRequest) -> dict:
        return {
            "model": self.config.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        }

    def complete(self, request: ProviderRequest) -> str:
        try:
            resp = self._client.post(
                self.config.endpoint,
                json=self.request_body(request),
                headers={"Authorization": f"Bearer {self.config.api_key}"},
                timeout=request.timeout,
            )
        except httpx.TimeoutException as exc:
            raise ProviderError(f"timeout after {request.timeout}s") from exc
        except httpx.HTTPError as exc:
            raise ProviderError(f"transport error: {exc}") from exc
        if resp.status_code != 200:
            retryable = resp.status_code == 429 or resp.status_code >= 500
            raise ProviderError(f"HTTP {resp.status_code}", status=resp.status_code, retryable=retryable)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError("unexpected response envelope") from exc


class TranscriptRecorder:
    """Delegate to ``inner`` and append each exchange to a JSONL transcript.

    Lines hold the prompt, its SHA-256, request settings, and either the
    response text or the error. Credentials are never written.
    """

    def __init__(self, inner: ProviderClient, path: str | Path, *, meta: Mapping[str, str] | None = None):
        self.inner = inner
        self.path = Path(path)
        self.meta = dict(meta or {})
        self._lock = threading.Lock()

    def _write(self, entry: dict) -> None:
        line = json.dumps(entry, ensure_ascii=False, sort_keys=True)
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def complete(self, request: ProviderRequest) -> str:
        entry = {
            "prompt_sha256": prompt_digest(request.prompt),
            "prompt": request.prompt,
            "temperature": request.temperature,
            **{k: v for k, v in self.meta.items() if "key" not in k.lower()},
        }
        try:
            text = self.inner.complete(request)
        except ProviderError as exc:
            self._write({**entry, "error": str(exc), "status": exc.status})
            raise
        self._write({**entry, "response": text})
        return text


class ReplayProvider:
    """Serve responses from a transcript, in recorded order per prompt."""

    def __init__(self, path: str | Path):
        self._queues: dict[str, deque[dict]] = defaultdict(deque)
        self._lock = threading.Lock()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                entry = json.loads(line)
                self._queues[entry["prompt_sha256"]].append(entry)

    def complete(self, request: ProviderRequest) -> str:
        key = prompt_digest(request.prompt)
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                raise ProviderError("no recorded response for prompt", retryable=False)
            entry = queue.popleft()
        if "error" in entry:
            raise ProviderError(entry["error"], status=entry.get("status"))
        return entry["response"]
