"""Exemplar selection strategies over an example pool.

Three strategies build k-shot prompts: seeded uniform random, step-count
complexity (most complex reasoning first), and embedding-similarity
retrieval (most similar exemplar placed nearest the test question). All
three are pure functions of (pool, parameters); ordering conventions are
pinned because prompt bytes depend on them.
"""

from __future__ import annotations

import heapq
import json
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .gateway import Gateway
from .prompting import Exemplar

POOL_SOURCES = ("original", "aligned", "conversion")


class SelectionError(Exception):
    pass


class EmptyPool(SelectionError):
    pass


class MissingEmbeddings(SelectionError):
    pass


@dataclass(frozen=True)
class ExamplePool:
    source: str
    exemplars: tuple[Exemplar, ...]
    embeddings: np.ndarray | None = None  # unit-norm rows aligned to exemplars

    def __post_init__(self):
        if self.embeddings is not None and len(self.embeddings) != len(self.exemplars):
            raise ValueError("one embedding row per exemplar required")

    def __len__(self) -> int:
        return len(self.exemplars)


@dataclass(frozen=True)
class SelectionResult:
    strategy: str  # "random" | "complexity" | "similarity"
    chosen_ids: tuple[str, ...]
    scores: dict[str, float]
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "strategy": self.strategy,
                "chosen_ids": list(self.chosen_ids),
                "scores": {k: self.scores[k] for k in sorted(self.scores)},
                "seed": self.seed,
            },
            sort_keys=True,
            ensure_ascii=False,
        )


def step_count(cot: str) -> int:
    """Reasoning-step count: non-empty lines of the CoT."""
    return sum(1 for line in cot.splitlines() if line.strip())


def _effective_k(pool: ExamplePool, k: int) -> int:
    if len(pool) == 0:
        raise EmptyPool("example pool is empty")
    if k > len(pool):
        warnings.warn(f"k={k} exceeds pool size {len(pool)}; selecting whole pool")
        return len(pool)
    return k


def select_random(pool: ExamplePool, k: int, seed: int) -> SelectionResult:
    """Uniform sample without replacement; chosen order is draw order."""
    k = _effective_k(pool, k)
    rng = random.Random(seed)
    chosen = rng.sample([e.id for e in pool.exemplars], k)
    return SelectionResult(strategy="random", chosen_ids=tuple(chosen), scores={}, seed=seed)


def select_complex(pool: ExamplePool, k: int) -> SelectionResult:
    """Top-k by step count, descending; ties broken by ascending id."""
    k = _effective_k(pool, k)
    scored = [(-step_count(e.cot), e.id) for e in pool.exemplars]
    top = heapq.nsmallest(k, scored)
    return SelectionResult(
        strategy="complexity",
        chosen_ids=tuple(eid for _, eid in top),
        scores={eid: float(-neg) for neg, eid in top},
    )


def select_similar(
    pool: ExamplePool,
    query_question: str,
    k: int,
    gateway: Gateway | None = None,
    query_embedding: np.ndarray | None = None,
    embed_model: str = "hashed-bow",
) -> SelectionResult:
    """Top-k by cosine similarity to the query question.

    chosen_ids are in prompt order: ascending similarity, so the most
    similar exemplar sits nearest the test question.
    """
    k = _effective_k(pool, k)
    if pool.embeddings is None:
        raise MissingEmbeddings("pool has no embeddings; run ensure_embeddings first")
    if query_embedding is None:
        if gateway is None:
            raise SelectionError("need a gateway or a precomputed query embedding")
        query_embedding = gateway.embed([query_question], model=embed_model)[0]
    sims = pool.embeddings @ np.asarray(query_embedding, dtype=np.float64)
    scored = [(-float(sims[i]), e.id) for i, e in enumerate(pool.exemplars)]
    top = heapq.nsmallest(k, scored)
    top.reverse()  # ascending similarity toward the test question
    return SelectionResult(
        strategy="similarity",
        chosen_ids=tuple(eid for _, eid in top),
        scores={eid: -neg for neg, eid in top},
    )


def exemplars_by_id(pool: ExamplePool, ids: Sequence[str]) -> list[Exemplar]:
    index = {e.id: e for e in pool.exemplars}
    return [index[i] for i in ids]


def ensure_embeddings(
    pool: ExamplePool, gateway: Gateway, embed_model: str = "hashed-bow"
) -> ExamplePool:
    """Embed exemplar questions once; result is cached in the pool file."""
    if pool.embeddings is not None:
        return pool
    vectors = gateway.embed([e.question for e in pool.exemplars], model=embed_model)
    return ExamplePool(source=pool.source, exemplars=pool.exemplars, embeddings=vectors)


def load_pool(path: str | Path, source: str = "original") -> ExamplePool:
    """Read a pool file: exemplar JSONL with optional embedding arrays."""
    exemplars: list[Exemplar] = []
    vectors: list[list[float]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        raw = json.loads(line)
        exemplars.append(
            Exemplar(
                question=raw["question"],
                cot=raw.get("cot", ""),
                answer=str(raw["answer"]),
                style=raw.get("style", "manual"),
                id=str(raw.get("id", f"pool-{len(exemplars):05d}")),
            )
        )
        if "embedding" in raw:
            vectors.append(raw["embedding"])
    embeddings = None
    if vectors:
        if len(vectors) != len(exemplars):
            raise SelectionError("pool file mixes rows with and without embeddings")
        embeddings = np.asarray(vectors, dtype=np.float64)
    return ExamplePool(source=source, exemplars=tuple(exemplars), embeddings=embeddings)


def save_pool(pool: ExamplePool, path: str | Path) -> None:
    lines = []
    for i, e in enumerate(pool.exemplars):
        raw: dict = {
            "id": e.id,
            "question": e.question,
            "cot": e.cot,
            "answer": e.answer,
            "style": e.style,
        }
        if pool.embeddings is not None:
            raw["embedding"] = [float(x) for x in pool.embeddings[i]]
        lines.append(json.dumps(raw, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
