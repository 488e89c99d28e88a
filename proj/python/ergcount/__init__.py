"""Exact counting constructions: Python front end to the C++ library."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence, Tuple

from . import _ergcount
from ._ergcount import BudgetError, CapExceeded, ConfigError, SchemaError, schema_version

__all__ = [
    "BudgetError",
    "CapExceeded",
    "ConfigError",
    "SchemaError",
    "schema_version",
    "run",
    "count_N",
    "brute_force_N",
    "m_p",
    "life_tower",
    "nu_compositional",
    "save_base",
    "load_base",
    "parse_rational",
]

Rational = Fraction | int | str


def _rat(v: Rational) -> str:
    f = Fraction(v)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(s: str) -> Fraction:
    """Read "num/den" or "num/den*2^e" as written in reports."""
    if "*2^" in s:
        q, e = s.split("*2^")
        return Fraction(q) * Fraction(2) ** int(e)
    return Fraction(s)


def run(config: dict) -> Tuple[dict, Optional[str], dict]:
    """Run a configuration; returns (report document, rendered picture, estimate)."""
    doc, artifact, estimate = _ergcount.run(json.dumps(config))
    return json.loads(doc), artifact, json.loads(estimate)


def _levels(levels: Iterable[Tuple[Rational, Sequence[Tuple[Rational, Rational]]]]) -> str:
    return json.dumps([[_rat(v), [[_rat(a), _rat(b)] for a, b in ivs]] for v, ivs in levels])


def count_N(levels, J: int, x: Rational, n: Rational, wrap: bool = True) -> int:
    """#{1 <= k < n max f : f(x + k 2^-J) / k > 1/n} for the step function given by (value, intervals) levels."""
    return int(_ergcount.count_N(_levels(levels), J, wrap, _rat(x), _rat(n)))


def brute_force_N(levels, J: int, x: Rational, n: Rational, wrap: bool = True, cap: int = 10**6) -> int:
    return int(_ergcount.brute_force_N(_levels(levels), J, wrap, _rat(x), _rat(n), str(cap)))


def m_p(p: int) -> int:
    return _ergcount.m_p(p)


def life_tower(M: int, k_max: int) -> list[int]:
    return [int(c) for c in _ergcount.life_tower(M, k_max)]


def nu_compositional(M: int, k: int, N: int) -> int:
    return int(_ergcount.nu_compositional(M, k, str(N)))


def save_base(params: dict[str, Any] | None = None) -> dict:
    return json.loads(_ergcount.save_base(json.dumps(params or {})))


def load_base(doc: dict) -> dict:
    return json.loads(_ergcount.load_base(json.dumps(doc)))
