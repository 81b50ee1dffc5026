from __future__ import annotations

import json
from pathlib import Path

import pytest

from aligncot.gateway import Gateway, ResponseCache, RetryPolicy, StubTransport

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
GOLDENS = Path(__file__).resolve().parent / "goldens"
PROMPTS = ROOT / "prompts"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def goldens_dir() -> Path:
    return GOLDENS


@pytest.fixture
def prompts_dir() -> Path:
    return PROMPTS


def load_jsonl(path: Path) -> list[dict]:
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


def stub_gateway(
    stub_file: Path | None = None,
    cache_dir: Path | None = None,
    **stub_kwargs,
) -> Gateway:
    """A no-retry-delay gateway over a stub transport."""
    transport = StubTransport.from_file(stub_file) if stub_file else StubTransport(**stub_kwargs)
    return Gateway(
        transport=transport,
        cache=ResponseCache(cache_dir) if cache_dir else None,
        retry=RetryPolicy(attempts=3, base_delay=0.0),
    )
