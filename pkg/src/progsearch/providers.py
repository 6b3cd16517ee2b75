"""Provider abstraction: one OpenAI-compatible HTTP client plus deterministic
scripted and replay providers for tests and offline runs.

Every chat call returns a ChatExchange with token and cost accounting; the
cost model is tokens * price-per-million. Token counts come from the
provider's usage fields when present and a whitespace approximation
otherwise, so scripted runs stay reproducible.
"""

from __future__ import annotations

import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import AuthError, EmptyResponseError, ProviderUnavailable, ReplayExhausted
from .logio import prompt_sha, read_jsonl, write_jsonl


@dataclass
class ProviderConfig:
    name: str
    endpoint_url: str
    model_id: str
    api_key_env: str = ""
    max_retries: int = 3
    requests_per_minute: int = 60
    price_per_million_in: float = 0.0
    price_per_million_out: float = 0.0
    max_response_tokens: int = 4096
    temperature: float | None = None
    extra_headers: dict[str, str] = field(default_factory=dict)
    backoff_base_s: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.price_per_million_in < 0 or self.price_per_million_out < 0:
            raise ValueError("prices must be >= 0")


@dataclass
class ChatExchange:
    prompt_text: str
    response_text: str
    tokens_in: int
    tokens_out: int
    cost_usd: float
    latency_ms: float
    prompt_sha: str = ""


def approx_tokens(text: str) -> int:
    return len(text.split())


def cost_usd(tokens_in: int, tokens_out: int, price_in: float, price_out: float) -> float:
    return tokens_in * price_in / 1e6 + tokens_out * price_out / 1e6


_FENCE = re.compile(r"```[ \t]*[\w+-]*[ \t]*\n(.*?)```", re.DOTALL)


def extract_code(response_text: str) -> str:
    """First fenced code block, stripped of fence markers; the whole response
    when no fence is present."""
    if not response_text.strip():
        raise EmptyResponseError("provider returned an empty response")
    m = _FENCE.search(response_text)
    if m:
        return m.group(1)
    return response_text


class _RateLimiter:
    """Sliding 60 s window; blocks until a slot frees up."""

    def __init__(self, per_minute: int):
        self.per_minute = max(1, per_minute)
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def wait(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                delay = 60.0 - (now - self._stamps[0])
            time.sleep(max(delay, 0.01))


class ScriptedProvider:
    """Replays a fixed response list in order; optionally cycles forever."""

    deterministic = True

    def __init__(self, responses: list[str], cycle: bool = False,
                 name: str = "scripted", model_id: str = "scripted"):
        if not responses:
            raise ValueError("scripted provider needs at least one response")
        self.responses = list(responses)
        self.cycle = cycle
        self.name = name
        self.model_id = model_id
        self._next = 0
        self._lock = threading.Lock()

    def chat(self, prompt) -> ChatExchange:
        with self._lock:
            if self._next >= len(self.responses):
                if not self.cycle:
                    raise ReplayExhausted(f"scripted provider out of responses after {self._next}")
                self._next = 0
            text = self.responses[self._next]
            self._next += 1
        full_prompt = prompt.system_text + "\n" + prompt.user_text
        return ChatExchange(
            prompt_text=full_prompt,
            response_text=text,
            tokens_in=approx_tokens(full_prompt),
            tokens_out=approx_tokens(text),
            cost_usd=0.0,
            latency_ms=0.0,
            prompt_sha=prompt_sha(prompt.system_text, prompt.user_text),
        )


class ReplayProvider:
    """Serves recorded exchanges from a cassette.

    Entries carrying a prompt_sha are matched to the incoming prompt's hash
    (each consumed once); entries without one are served sequentially.
    """

    deterministic = True

    def __init__(self, entries: list[dict], name: str = "replay",
                 model_id: str = "replay"):
        if not entries:
            raise ValueError("replay cassette is empty")
        self.name = name
        self.model_id = model_id
        self._keyed: dict[str, deque[dict]] = {}
        self._sequence: deque[dict] = deque()
        self._lock = threading.Lock()
        for entry in entries:
            sha = entry.get("prompt_sha")
            if sha:
                self._keyed.setdefault(sha, deque()).append(entry)
            else:
                self._sequence.append(entry)

    @classmethod
    def from_file(cls, path: str | Path, **kw) -> "ReplayProvider":
        return cls(read_jsonl(path), **kw)

    def chat(self, prompt) -> ChatExchange:
        sha = prompt_sha(prompt.system_text, prompt.user_text)
        with self._lock:
            bucket = self._keyed.get(sha)
            if bucket:
                entry = bucket.popleft()
            elif self._sequence:
                entry = self._sequence.popleft()
            else:
                raise ReplayExhausted("no cassette entry left for this prompt")
        text = entry.get("response", "")
        full_prompt = prompt.system_text + "\n" + prompt.user_text
        return ChatExchange(
            prompt_text=full_prompt,
            response_text=text,
            tokens_in=int(entry.get("tokens_in", approx_tokens(full_prompt))),
            tokens_out=int(entry.get("tokens_out", approx_tokens(text))),
            cost_usd=float(entry.get("cost_usd", 0.0)),
            latency_ms=0.0,
            prompt_sha=sha,
        )


def replay_provider(entries_or_path) -> ReplayProvider:
    if isinstance(entries_or_path, (str, Path)):
        return ReplayProvider.from_file(entries_or_path)
    return ReplayProvider(list(entries_or_path))


class HttpProvider:
    """OpenAI-style chat-completions client with retry and rate limiting.

    Transient failures (HTTP 429 and 5xx, plus transport errors) are retried
    with exponential backoff up to max_retries; auth problems fail
    immediately.
    """

    deterministic = False

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self.name = config.name
        self.model_id = config.model_id
        self._limiter = _RateLimiter(config.requests_per_minute)
        self._client = httpx.Client(transport=transport, timeout=120.0)
        self.attempts_log: list[int] = []

    def _api_key(self) -> str:
        if not self.config.api_key_env:
            return ""
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise AuthError(f"environment variable {self.config.api_key_env} is not set")
        return key

    def chat(self, prompt) -> ChatExchange:
        key = self._api_key()
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        headers.update(self.config.extra_headers)
        body = {
            "model": self.config.model_id,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "max_tokens": self.config.max_response_tokens,
        }
        if self.config.temperature is not None:
            body["temperature"] = self.config.temperature
        started = time.monotonic()
        attempts = 0
        last_error = ""
        while attempts <= self.config.max_retries:
            self._limiter.wait()
            attempts += 1
            try:
                resp = self._client.post(self.config.endpoint_url, headers=headers, json=body)
            except httpx.HTTPError as e:
                last_error = f"transport error: {e}"
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"{self.config.name}: HTTP {resp.status_code}")
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                elif resp.status_code != 200:
                    raise ProviderUnavailable(f"{self.config.name}: HTTP {resp.status_code}: {resp.text[:200]}")
                else:
                    self.attempts_log.append(attempts)
                    return self._parse(prompt, resp.json(), started)
            if attempts <= self.config.max_retries:
                time.sleep(self.config.backoff_base_s * (2 ** (attempts - 1)))
        self.attempts_log.append(attempts)
        raise ProviderUnavailable(f"{self.config.name}: retries exhausted ({last_error})")

    def _parse(self, prompt, payload: dict, started: float) -> ChatExchange:
        try:
            text = payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise ProviderUnavailable(f"{self.config.name}: malformed response body") from None
        usage = payload.get("usage") or {}
        full_prompt = prompt.system_text + "\n" + prompt.user_text
        tokens_in = int(usage.get("prompt_tokens", approx_tokens(full_prompt)))
        tokens_out = int(usage.get("completion_tokens", approx_tokens(text)))
        return ChatExchange(
            prompt_text=full_prompt,
            response_text=text,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            cost_usd=cost_usd(tokens_in, tokens_out,
                              self.config.price_per_million_in,
                              self.config.price_per_million_out),
            latency_ms=(time.monotonic() - started) * 1000.0,
            prompt_sha=prompt_sha(prompt.system_text, prompt.user_text),
        )


def write_cassette(path: str | Path, exchanges: list[ChatExchange]) -> None:
    write_jsonl(path, [
        {"prompt_sha": ex.prompt_sha, "response": ex.response_text,
         "tokens_in": ex.tokens_in, "tokens_out": ex.tokens_out}
        for ex in exchanges
    ])


def make_provider(spec: str, provider_configs: dict[str, ProviderConfig] | None = None):
    """Resolve a CLI provider spec: 'scripted:<path>', 'replay:<path>', or a
    configured provider name."""
    if spec.startswith("scripted:"):
        entries = read_jsonl(spec.split(":", 1)[1])
        return ScriptedProvider([e.get("response", "") for e in entries], name="scripted")
    if spec.startswith("replay:"):
        return ReplayProvider.from_file(spec.split(":", 1)[1])
    configs = provider_configs or {}
    if spec in configs:
        return HttpProvider(configs[spec])
    raise ProviderUnavailable(f"unknown provider {spec!r}; expected scripted:<path>, "
                              f"replay:<path>, or a configured name")
