"""Provider-agnostic LLM access with deterministic on-disk caching.

The gateway fronts a transport (live chat-completions HTTP or an offline
stub) with a persistent response cache keyed by a digest of the full
request, a shared token-bucket rate limiter, and an exponential-backoff
retry policy. Identical requests are answered from disk with zero network
calls, which is what makes probing, proofreading, and evaluation runs
resumable and reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_EMBED_DIM = 512
API_KEY_ENV = "ALIGNCOT_API_KEY"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class RateLimited(TransportError):
    pass


class AuthError(GatewayError):
    pass


class StubMiss(GatewayError):
    pass


class DimensionMismatch(GatewayError):
    pass


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class CompletionRequest:
    model: str
    messages: tuple[tuple[str, str], ...]  # (role, content) pairs
    temperature: float = 0.0
    max_tokens: int = 1024
    stop: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        for role, _ in self.messages:
            if role not in ("system", "user", "assistant"):
                raise ValueError(f"invalid role {role!r}")
        if self.messages[0][0] not in ("system", "user"):
            raise ValueError("first message role must be system or user")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @property
    def greedy(self) -> bool:
        return self.temperature == 0

    @staticmethod
    def user(model: str, content: str, **kwargs) -> "CompletionRequest":
        return CompletionRequest(model=model, messages=(("user", content),), **kwargs)

    def last_user_content(self) -> str:
        for role, content in reversed(self.messages):
            if role == "user":
                return content
        return ""


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    finish_reason: str = "stop"  # "stop" | "length" | "other"
    usage: Usage = Usage()
    from_cache: bool = False


def cache_key(request: CompletionRequest) -> str:
    """Collision-resistant digest over the canonical request serialization.

    Any field change changes the key; identical requests share one key.
    """
    payload = {
        "model": request.model,
        "messages": [[role, content] for role, content in request.messages],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
        "stop": list(request.stop) if request.stop is not None else None,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-safe on-disk store: one JSON file per digest, atomic writes."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, digest: str) -> Path:
        return self.directory / digest[:2] / f"{digest}.json"

    def get(self, digest: str) -> CompletionResponse | None:
        path = self._path(digest)
        if not path.exists():
            return None
        raw = json.loads(path.read_text(encoding="utf-8"))
        return CompletionResponse(
            text=raw["text"],
            finish_reason=raw.get("finish_reason", "stop"),
            usage=Usage(**raw.get("usage", {})),
            from_cache=False,
        )

    def put(self, digest: str, response: CompletionResponse) -> None:
        path = self._path(digest)
        payload = json.dumps(
            {
                "text": response.text,
                "finish_reason": response.finish_reason,
                "usage": {
                    "prompt_tokens": response.usage.prompt_tokens,
                    "completion_tokens": response.usage.completion_tokens,
                },
            },
            ensure_ascii=False,
        )
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp-{os.getpid()}-{threading.get_ident()}")
            tmp.write_text(payload, encoding="utf-8")
            os.replace(tmp, path)


class RateLimiter:
    """Token bucket shared across workers; ``rpm=None`` disables limiting."""

    def __init__(self, rpm: float | None = None):
        self.rpm = rpm
        self._tokens = float(rpm) if rpm else 0.0
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if not self.rpm:
            return
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(float(self.rpm), self._tokens + (now - self._last) * self.rpm / 60.0)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) * 60.0 / self.rpm
            time.sleep(wait)


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 4
    base_delay: float = 0.5
    max_delay: float = 30.0

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2**attempt), self.max_delay)


def _approx_usage(prompt: str, completion: str) -> Usage:
    return Usage(prompt_tokens=len(prompt.split()), completion_tokens=len(completion.split()))


class StubTransport:
    """Offline transport answering from a fixture table.

    Lookup order: exact request digest, then the first pattern whose regex
    matches the last user message, then the default. A miss raises
    StubMiss -- a fixture-authoring error, never retried.
    """

    def __init__(
        self,
        responses: dict[str, str] | None = None,
        patterns: Sequence[tuple[str, str]] = (),
        default: str | None = None,
    ):
        self.responses = dict(responses or {})
        self.patterns = [(re.compile(p, re.DOTALL), text) for p, text in patterns]
        self.default = default
        self.call_count = 0
        self._lock = threading.Lock()

    @staticmethod
    def from_file(path: str | Path) -> "StubTransport":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return StubTransport(
            responses=raw.get("responses", {}),
            patterns=[(p["pattern"], p["response"]) for p in raw.get("patterns", [])],
            default=raw.get("default"),
        )

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.call_count += 1
        digest = cache_key(request)
        text = self.responses.get(digest)
        if text is None:
            last_user = request.last_user_content()
            for pattern, canned in self.patterns:
                if pattern.search(last_user):
                    text = canned
                    break
        if text is None:
            text = self.default
        if text is None:
            raise StubMiss(f"no stub entry for digest {digest[:12]}... and no default")
        prompt = "\n".join(content for _, content in request.messages)
        return CompletionResponse(text=text, finish_reason="stop", usage=_approx_usage(prompt, text))


class HttpTransport:
    """Chat-completions-compatible HTTP JSON transport."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        timeout: float = 120.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.call_count = 0

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        import httpx

        if not self.api_key:
            raise AuthError(f"no API key: set {API_KEY_ENV} or pass api_key")
        self.call_count += 1
        payload = {
            "model": request.model,
            "messages": [{"role": role, "content": content} for role, content in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.stop:
            payload["stop"] = list(request.stop)
        try:
            resp = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"authentication failed: HTTP {resp.status_code}")
        if resp.status_code == 429:
            raise RateLimited("HTTP 429: rate limited")
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            choice = body["choices"][0]
            usage = body.get("usage", {})
            return CompletionResponse(
                text=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "other"),
                usage=Usage(
                    prompt_tokens=usage.get("prompt_tokens", 0),
                    completion_tokens=usage.get("completion_tokens", 0),
                ),
            )
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc


_TOKEN_RE = re.compile(r"[a-z0-9]+")


class HashedBagOfWordsEmbedder:
    """Deterministic offline embedding: hashed token counts, L2-normalized.

    Order-invariant by construction ("a a b" and "b a a" embed
    identically), which makes similarity retrieval oracle-testable
    without network access.
    """

    def __init__(self, dim: int = DEFAULT_EMBED_DIM):
        self.dim = dim

    def embed(self, texts: Sequence[str], model: str = "hashed-bow") -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            for token in _TOKEN_RE.findall(text.lower()):
                bucket = int.from_bytes(
                    hashlib.sha256(token.encode("utf-8")).digest()[:8], "big"
                )
                out[i, bucket % self.dim] += 1.0
            if not out[i].any():
                out[i, 0] = 1.0  # empty text still embeds deterministically
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        return out / norms


class HttpEmbedder:
    """Embeddings endpoint sibling of HttpTransport."""

    def __init__(self, base_url: str, api_key: str | None = None, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout

    def embed(self, texts: Sequence[str], model: str) -> np.ndarray:
        import httpx

        if not self.api_key:
            raise AuthError(f"no API key: set {API_KEY_ENV} or pass api_key")
        try:
            resp = httpx.post(
                f"{self.base_url}/embeddings",
                json={"model": model, "input": list(texts)},
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            data = resp.json()["data"]
        except httpx.HTTPStatusError as exc:
            if exc.response.status_code in (401, 403):
                raise AuthError("authentication failed") from exc
            raise TransportError(f"embedding request failed: {exc}") from exc
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        vectors = np.asarray([row["embedding"] for row in data], dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return vectors / norms


class Gateway:
    """complete/embed front door; safe for concurrent invocation."""

    def __init__(
        self,
        transport,
        cache: ResponseCache | None = None,
        rate_limiter: RateLimiter | None = None,
        retry: RetryPolicy = RetryPolicy(),
        embedder=None,
    ):
        self.transport = transport
        self.cache = cache
        self.rate_limiter = rate_limiter or RateLimiter(None)
        self.retry = retry
        self.embedder = embedder or HashedBagOfWordsEmbedder()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        digest = cache_key(request)
        if self.cache is not None:
            hit = self.cache.get(digest)
            if hit is not None:
                return replace(hit, from_cache=True)
        response = self._call_with_retry(request)
        if self.cache is not None:
            self.cache.put(digest, response)
        return response

    def _call_with_retry(self, request: CompletionRequest) -> CompletionResponse:
        last_exc: Exception | None = None
        for attempt in range(self.retry.attempts):
            self.rate_limiter.acquire()
            try:
                return self.transport.complete(request)
            except (AuthError, StubMiss):
                raise  # never retried: retrying cannot change the outcome
            except (RateLimited, TransportError) as exc:
                last_exc = exc
                if attempt < self.retry.attempts - 1:
                    time.sleep(self.retry.delay(attempt))
        assert last_exc is not None
        raise last_exc

    def embed(self, texts: Sequence[str], model: str = "hashed-bow") -> np.ndarray:
        """One unit-norm vector per text, all the same dimension."""
        if not texts:
            raise ValueError("texts must be non-empty")
        vectors = np.asarray(self.embedder.embed(texts, model), dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(texts):
            raise DimensionMismatch(
                f"expected {len(texts)} vectors, got shape {vectors.shape}"
            )
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            vectors = vectors / norms[:, None]
        return vectors
