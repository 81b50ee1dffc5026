"""aligncot: align few-shot CoT exemplars with an LLM's native style.

Pipeline: probe (zero-shot native CoTs) -> proofread (human fixes the
first error, the model re-completes) -> format (deterministic surface
unification), plus dataset overwriting, exemplar selection strategies,
and a greedy-decoding evaluation harness.
"""

from .canonical import canonical_choice, canonical_number
from .dataset import GoldAnswer, ProblemRecord, load_dataset, parse_gold
from .extraction import ExtractedAnswer, extract, is_correct
from .formatting import FormatReport, lint, normalize
from .gateway import CompletionRequest, CompletionResponse, Gateway, StubTransport, cache_key
from .prompting import Exemplar, PromptSpec, render_conversion, render_fewshot, render_probe

__version__ = "0.1.0"

__all__ = [
    "CompletionRequest",
    "CompletionResponse",
    "Exemplar",
    "ExtractedAnswer",
    "FormatReport",
    "Gateway",
    "GoldAnswer",
    "ProblemRecord",
    "PromptSpec",
    "StubTransport",
    "cache_key",
    "canonical_choice",
    "canonical_number",
    "extract",
    "is_correct",
    "lint",
    "load_dataset",
    "normalize",
    "parse_gold",
    "render_conversion",
    "render_fewshot",
    "render_probe",
]
