"""Alarm-analysis utilities: pair rules from patterns and coverage evaluation.

A star pattern splits into one (cause, derivative) rule per core value and
leaf value; rules inherit the pattern's code length as their score, ranked
ascending.  Coverage measures how much of a known-valid rule library the
top-k mined rules recover.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Collection, Sequence, TextIO

from .errors import InputError
from .graph import SymbolTable
from .miner import AttributeStar


@dataclass(frozen=True)
class PairRule:
    cause: int
    derivative: int
    score: float  # inherited pattern code length in bits
    rank: int


def split_to_pairs(patterns: Sequence[AttributeStar]) -> list[PairRule]:
    """Expand ranked patterns into deduplicated, re-ranked pair rules.

    A pattern yields the cross product of its core and leaf values; when the
    same pair falls out of several patterns, the occurrence with the best
    (lowest) code length wins.
    """
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for star in patterns:
        for cause in star.coreset:
            for derivative in star.leafset:
                key = (cause, derivative)
                entry = (star.code_bits, star.rank)
                if key not in best or entry < best[key]:
                    best[key] = entry
    ordered = sorted(best.items(), key=lambda kv: (kv[1][0], kv[1][1], kv[0]))
    return [
        PairRule(cause, derivative, score, rank)
        for rank, ((cause, derivative), (score, _)) in enumerate(ordered, start=1)
    ]


def pairs_as_labels(
    rules: Sequence[PairRule], values: SymbolTable
) -> list[tuple[str, str]]:
    return [(values.name(r.cause), values.name(r.derivative)) for r in rules]


def coverage_ratio(
    valid: Collection[tuple[str, str]],
    found: Sequence[tuple[str, str]],
    k: int,
) -> float:
    """Fraction of the valid rules present among the top-k found rules."""
    if k < 1:
        raise InputError("k must be at least 1")
    valid_set = set(valid)
    if not valid_set:
        raise InputError("empty rule library")
    return len(valid_set & set(found[:k])) / len(valid_set)


def load_rule_library(source: str | TextIO) -> list[tuple[str, str]]:
    """JSON array of {"cause": ..., "derivative": ...}, duplicates removed."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    else:
        payload = json.load(source)
    if not isinstance(payload, list):
        raise InputError("rule library must be a JSON array")
    rules: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for i, entry in enumerate(payload):
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("cause"), str)
            or not isinstance(entry.get("derivative"), str)
        ):
            raise InputError(f"rule library entry {i} needs string cause/derivative")
        pair = (entry["cause"], entry["derivative"])
        if pair not in seen:
            seen.add(pair)
            rules.append(pair)
    if not rules:
        raise InputError("empty rule library")
    return rules
