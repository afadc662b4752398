"""Chat-completions client, fixture store, and the replaying mock."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from .errors import (
    AuthError,
    ClientError,
    FixtureMiss,
    MalformedResponse,
    RateLimited,
    RequestTimeout,
)

log = logging.getLogger(__name__)

API_KEY_ENV = "LLM_API_KEY"


@dataclass(frozen=True)
class ClientConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o"
    temperature: float = 0.0
    max_tokens: int = 4096
    request_timeout: float = 60.0
    max_retries: int = 5
    max_concurrency: int = 4
    backoff_base: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.max_retries < 0 or self.max_concurrency < 1:
            raise ValueError("max_retries must be >= 0 and max_concurrency >= 1")


@dataclass(frozen=True)
class ChatExchange:
    prompt: str
    completion: str
    model: str
    latency: float = 0.0  # milliseconds
    token_counts: tuple[int, int] = (0, 0)


def fixture_key(model: str, temperature: float, prompt: str, round_index: int = 0) -> str:
    """Stable key for a stored completion; sampling rounds past the first get their own key."""
    parts: list[object] = [model, float(temperature), prompt]
    if round_index:
        parts.append(int(round_index))
    blob = json.dumps(parts, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FixtureStore:
    """A directory of ``<key>.txt`` completions plus ``index.json`` metadata."""

    def __init__(self, root: str | os.PathLike) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.txt"

    def get(self, key: str) -> str | None:
        path = self.path_for(key)
        if not path.is_file():
            return None
        return path.read_text(encoding="utf-8")

    def __contains__(self, key: str) -> bool:
        return self.path_for(key).is_file()

    def index(self) -> dict[str, dict]:
        path = self.root / "index.json"
        if not path.is_file():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, key: str, exchange: ChatExchange, temperature: float, round_index: int = 0) -> None:
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            self.path_for(key).write_text(exchange.completion, encoding="utf-8")
            index = self.index()
            index[key] = {
                "model": exchange.model,
                "temperature": float(temperature),
                "round": int(round_index),
                "prompt_sha256": hashlib.sha256(exchange.prompt.encode("utf-8")).hexdigest(),
                "prompt_chars": len(exchange.prompt),
            }
            (self.root / "index.json").write_text(
                json.dumps(index, indent=1, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
            )


class LLMClient(Protocol):
    config: ClientConfig

    def complete(self, prompt: str, round_index: int = 0) -> ChatExchange: ...


class MockClient:
    """Replays stored completions; unknown prompts raise FixtureMiss."""

    def __init__(self, store: FixtureStore | str | os.PathLike, config: ClientConfig | None = None) -> None:
        self.store = store if isinstance(store, FixtureStore) else FixtureStore(store)
        self.config = config or ClientConfig()

    def complete(self, prompt: str, round_index: int = 0) -> ChatExchange:
        key = fixture_key(self.config.model, self.config.temperature, prompt, round_index)
        text = self.store.get(key)
        if text is None:
            raise FixtureMiss(key)
        return ChatExchange(prompt, text, self.config.model)


_TRANSIENT = (500, 502, 503, 504)


class HTTPClient:
    """OpenAI-compatible ``/chat/completions`` client with retries and optional recording."""

    def __init__(
        self,
        config: ClientConfig | None = None,
        api_key: str | None = None,
        session: requests.Session | None = None,
        recorder: FixtureStore | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config or ClientConfig()
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.session = session or requests.Session()
        self.recorder = recorder
        self._sleep = sleep

    def _backoff(self, attempt: int, retry_after: str | None = None) -> None:
        delay = self.config.backoff_base * (2**attempt)
        if retry_after:
            try:
                delay = max(delay, float(retry_after))
            except ValueError:
                pass
        self._sleep(delay)

    def complete(self, prompt: str, round_index: int = 0) -> ChatExchange:
        if not self.api_key:
            raise AuthError(f"no API key: set {API_KEY_ENV}")
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last: ClientError | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                self._backoff(attempt - 1, getattr(last, "retry_after", None))
            started = time.perf_counter()
            try:
                resp = self.session.post(url, json=body, headers=headers, timeout=cfg.request_timeout)
            except requests.Timeout:
                last = RequestTimeout(f"no response within {cfg.request_timeout}s")
                continue
            except requests.ConnectionError as exc:
                last = ClientError(f"connection failed: {exc}")
                continue
            latency = (time.perf_counter() - started) * 1000.0
            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code == 429:
                last = RateLimited("rate limited")
                last.retry_after = resp.headers.get("Retry-After")  # type: ignore[attr-defined]
                continue
            if resp.status_code in _TRANSIENT:
                last = ClientError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ClientError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            exchange = self._decode(prompt, resp, latency)
            if self.recorder is not None:
                key = fixture_key(cfg.model, cfg.temperature, prompt, round_index)
                self.recorder.put(key, exchange, cfg.temperature, round_index)
            return exchange
        assert last is not None
        raise last

    def _decode(self, prompt: str, resp: requests.Response, latency: float) -> ChatExchange:
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
            if not isinstance(text, str):
                raise TypeError("content is not text")
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response body: {exc}") from None
        usage = data.get("usage") or {}
        tokens = (int(usage.get("prompt_tokens", 0)), int(usage.get("completion_tokens", 0)))
        return ChatExchange(prompt, text, data.get("model", self.config.model), latency, tokens)


def complete(config: ClientConfig, prompt: str, client: LLMClient | None = None) -> ChatExchange:
    return (client or HTTPClient(config)).complete(prompt)


@dataclass
class _Job:
    prompt: str
    round_index: int = 0


def complete_many(
    client: LLMClient,
    prompts: Sequence[str | tuple[str, int]],
    max_concurrency: int | None = None,
) -> list[ChatExchange | ClientError]:
    """Complete every prompt; results keep input order and failures sit at their index.

    A prompt may be given as ``(prompt, round_index)`` for repeated sampling.
    """
    jobs = [_Job(*p) if isinstance(p, tuple) else _Job(p) for p in prompts]
    if not jobs:
        return []
    workers = max_concurrency or client.config.max_concurrency

    def run(job: _Job) -> ChatExchange | ClientError:
        try:
            return client.complete(job.prompt, job.round_index)
        except ClientError as exc:
            return exc

    if workers <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))

