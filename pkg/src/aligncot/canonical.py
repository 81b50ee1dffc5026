"""Canonical answer tokens.

Numeric answers are kept as exact decimal strings (never floats): an
optional leading minus, digits, and an optional fractional part with
trailing zeros stripped. No thousands separators, currency symbols, or
percent signs survive canonicalization. Choice answers are single
uppercase letters A-E.
"""

from __future__ import annotations

import re

CHOICE_LETTERS = "ABCDE"

_DECIMAL_RE = re.compile(r"^[-+]?(?:\d+(?:\.\d*)?|\.\d+)$")
_CHOICE_RE = re.compile(r"^\(?([A-Ea-e])[).:]?$")


def canonical_number(raw: str) -> str | None:
    """Return the canonical decimal string for *raw*, or None if non-numeric.

    Strips "$", ",", trailing "%" and trailing "." before parsing, so
    "$1,234.00." canonicalizes to "1234". Idempotent: feeding the result
    back in returns it unchanged.
    """
    s = raw.strip()
    if not s:
        return None
    s = s.replace(",", "").replace("$", "")
    s = s.rstrip("%")
    if s.endswith("."):
        s = s[:-1]
    if not _DECIMAL_RE.match(s):
        return None

    sign = ""
    if s[0] in "+-":
        if s[0] == "-":
            sign = "-"
        s = s[1:]
    if "." in s:
        int_part, frac_part = s.split(".", 1)
    else:
        int_part, frac_part = s, ""

    int_part = int_part.lstrip("0") or "0"
    frac_part = frac_part.rstrip("0")
    out = int_part + ("." + frac_part if frac_part else "")
    if out == "0":
        return "0"  # never "-0"
    return sign + out


def canonical_choice(raw: str) -> str | None:
    """Return the uppercase choice letter in *raw* ("(c)" -> "C"), or None."""
    m = _CHOICE_RE.match(raw.strip())
    if not m:
        return None
    return m.group(1).upper()
