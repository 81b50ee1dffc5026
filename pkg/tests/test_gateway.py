from __future__ import annotations

import json
import random
import string
import threading
import time

import numpy as np
import pytest

from aligncot.gateway import (
    AuthError,
    CompletionRequest,
    CompletionResponse,
    DimensionMismatch,
    Gateway,
    HashedBagOfWordsEmbedder,
    RateLimited,
    RateLimiter,
    ResponseCache,
    RetryPolicy,
    StubMiss,
    StubTransport,
    TransportError,
    cache_key,
)


def request(content="hello", **kwargs) -> CompletionRequest:
    return CompletionRequest.user("test-model", content, **kwargs)


class TestCompletionRequest:
    def test_greedy_iff_temperature_zero(self):
        assert request(temperature=0.0).greedy
        assert not request(temperature=0.7).greedy

    def test_validation(self):
        with pytest.raises(ValueError):
            CompletionRequest(model="m", messages=())
        with pytest.raises(ValueError):
            CompletionRequest(model="m", messages=(("assistant", "hi"),))
        with pytest.raises(ValueError):
            CompletionRequest(model="m", messages=(("oracle", "hi"),))
        with pytest.raises(ValueError):
            request(temperature=-1.0)
        with pytest.raises(ValueError):
            request(max_tokens=0)


class TestCacheKey:
    def test_identical_requests_share_keys(self):
        assert cache_key(request()) == cache_key(request())

    @pytest.mark.parametrize(
        "change",
        [
            {"temperature": 0.1},
            {"max_tokens": 2048},
            {"stop": ("###",)},
        ],
    )
    def test_any_field_change_changes_key(self, change):
        assert cache_key(request()) != cache_key(request(**change))

    def test_message_change_changes_key(self):
        assert cache_key(request("a")) != cache_key(request("b"))

    def test_injectivity_on_generated_corpus(self):
        rng = random.Random(7)
        digests = set()
        seen = set()
        for _ in range(10_000):
            content = "".join(rng.choices(string.ascii_letters + string.digits + " ", k=24))
            temperature = rng.choice([0.0, 0.5, 1.0])
            max_tokens = rng.choice([128, 256, 1024])
            key = (content, temperature, max_tokens)
            if key in seen:
                continue
            seen.add(key)
            digests.add(cache_key(request(content, temperature=temperature, max_tokens=max_tokens)))
        assert len(digests) == len(seen)


class CountingTransport:
    def __init__(self, fail_times=0, exc=TransportError("boom")):
        self.calls = 0
        self.fail_times = fail_times
        self.exc = exc

    def complete(self, req):
        self.calls += 1
        if self.calls <= self.fail_times:
            raise self.exc
        return CompletionResponse(text=f"reply to {req.last_user_content()}")


class TestGatewayCache:
    def test_cache_hit_skips_transport(self, tmp_path):
        transport = CountingTransport()
        gateway = Gateway(transport, cache=ResponseCache(tmp_path / "cache"))
        first = gateway.complete(request())
        second = gateway.complete(request())
        assert transport.calls == 1
        assert first.text == second.text
        assert not first.from_cache
        assert second.from_cache

    def test_cache_survives_restart(self, tmp_path):
        cache_dir = tmp_path / "cache"
        transport_a = CountingTransport()
        Gateway(transport_a, cache=ResponseCache(cache_dir)).complete(request())
        transport_b = CountingTransport()
        gateway = Gateway(transport_b, cache=ResponseCache(cache_dir))
        response = gateway.complete(request())
        assert response.from_cache
        assert transport_b.calls == 0
        assert response.text == "reply to hello"

    def test_without_cache_every_call_hits_transport(self):
        transport = CountingTransport()
        gateway = Gateway(transport)
        gateway.complete(request())
        gateway.complete(request())
        assert transport.calls == 2


class TestRetryPolicy:
    def test_retries_transport_errors(self):
        transport = CountingTransport(fail_times=2)
        gateway = Gateway(transport, retry=RetryPolicy(attempts=4, base_delay=0.0))
        assert gateway.complete(request()).text.startswith("reply")
        assert transport.calls == 3

    def test_exhausted_retries_surface(self):
        transport = CountingTransport(fail_times=99, exc=RateLimited("slow down"))
        gateway = Gateway(transport, retry=RetryPolicy(attempts=3, base_delay=0.0))
        with pytest.raises(RateLimited):
            gateway.complete(request())
        assert transport.calls == 3

    def test_auth_error_never_retried(self):
        transport = CountingTransport(fail_times=99, exc=AuthError("bad key"))
        gateway = Gateway(transport, retry=RetryPolicy(attempts=5, base_delay=0.0))
        with pytest.raises(AuthError):
            gateway.complete(request())
        assert transport.calls == 1

    def test_stub_miss_never_retried(self):
        transport = StubTransport()
        gateway = Gateway(transport, retry=RetryPolicy(attempts=5, base_delay=0.0))
        with pytest.raises(StubMiss):
            gateway.complete(request())
        assert transport.call_count == 1


class TestStubTransport:
    def test_digest_table(self):
        req = request("what is 2+2?")
        transport = StubTransport(responses={cache_key(req): "The answer is 4."})
        assert transport.complete(req).text == "The answer is 4."

    def test_pattern_table_on_last_user_message(self):
        transport = StubTransport(patterns=[(r"2\+2", "The answer is 4.")])
        assert transport.complete(request("what is 2+2?")).text == "The answer is 4."

    def test_first_matching_pattern_wins(self):
        transport = StubTransport(patterns=[(r"2", "first"), (r"2\+2", "second")])
        assert transport.complete(request("2+2")).text == "first"

    def test_default_fallback(self):
        transport = StubTransport(default="canned")
        assert transport.complete(request("anything")).text == "canned"

    def test_miss_raises(self):
        with pytest.raises(StubMiss):
            StubTransport(patterns=[("nope", "x")]).complete(request("other"))

    def test_from_file(self, tmp_path):
        req = request("digest me")
        fixture = {
            "responses": {cache_key(req): "via digest"},
            "patterns": [{"pattern": "regex", "response": "via pattern"}],
            "default": "via default",
        }
        path = tmp_path / "stub.json"
        path.write_text(json.dumps(fixture))
        transport = StubTransport.from_file(path)
        assert transport.complete(req).text == "via digest"
        assert transport.complete(request("regex here")).text == "via pattern"
        assert transport.complete(request("nothing")).text == "via default"

    def test_call_counter(self):
        transport = StubTransport(default="x")
        for _ in range(3):
            transport.complete(request())
        assert transport.call_count == 3


class TestRateLimiter:
    def test_unlimited_is_noop(self):
        limiter = RateLimiter(None)
        start = time.monotonic()
        for _ in range(100):
            limiter.acquire()
        assert time.monotonic() - start < 0.1

    def test_bucket_blocks_when_drained(self):
        limiter = RateLimiter(rpm=1200)  # 20 per second
        limiter._tokens = 2.0
        start = time.monotonic()
        for _ in range(4):
            limiter.acquire()
        elapsed = time.monotonic() - start
        assert elapsed >= 0.08  # two refills at 50 ms apiece

    def test_shared_across_threads(self):
        limiter = RateLimiter(rpm=6000)
        limiter._tokens = 5.0
        done = []

        def worker():
            limiter.acquire()
            done.append(1)

        threads = [threading.Thread(target=worker) for _ in range(10)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(done) == 10


class TestEmbeddings:
    def test_unit_norm(self):
        gateway = Gateway(StubTransport(default="x"))
        vectors = gateway.embed(["alpha beta", "gamma", ""])
        norms = np.linalg.norm(vectors, axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-6)

    def test_duplicates_embed_identically(self):
        gateway = Gateway(StubTransport(default="x"))
        vectors = gateway.embed(["same text", "same text"])
        assert np.array_equal(vectors[0], vectors[1])

    def test_bag_of_words_order_invariance(self):
        embedder = HashedBagOfWordsEmbedder()
        a = embedder.embed(["a a b"])[0]
        b = embedder.embed(["b a a"])[0]
        assert np.array_equal(a, b)

    def test_dimension_fixed(self):
        embedder = HashedBagOfWordsEmbedder(dim=64)
        assert embedder.embed(["x", "y z"]).shape == (2, 64)

    def test_empty_texts_rejected(self):
        gateway = Gateway(StubTransport(default="x"))
        with pytest.raises(ValueError):
            gateway.embed([])

    def test_ragged_embedder_rejected(self):
        class Ragged:
            def embed(self, texts, model):
                return np.zeros((len(texts) + 1, 4))

        gateway = Gateway(StubTransport(default="x"), embedder=Ragged())
        with pytest.raises(DimensionMismatch):
            gateway.embed(["a"])


class TestConcurrency:
    def test_parallel_completions_agree(self, tmp_path):
        transport = StubTransport(default="stable reply")
        gateway = Gateway(transport, cache=ResponseCache(tmp_path / "cache"))
        results = []

        def worker(i):
            results.append(gateway.complete(request(f"prompt {i % 3}")).text)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(12)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert set(results) == {"stable reply"}
