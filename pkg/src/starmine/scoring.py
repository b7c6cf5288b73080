"""Node-attribute scoring from mined patterns, score fusion, and ranking metrics.

A target node is scored by the patterns whose leafsets resemble the
attribute values seen on its neighbors: each pattern contributes
``-w * code_bits`` to its core values, where ``w`` grows with dissimilarity,
and each attribute keeps its best contribution.  Scores from an external
completion model are fused by normalizing both vectors and multiplying.
"""

from __future__ import annotations

import logging
from math import inf, log2
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import InputError
from .graph import AttributedGraph, Leafset
from .miner import AttributeStar

logger = logging.getLogger(__name__)

SENTINEL = -inf  # "no supporting pattern"


def similarity_weight(leafset: Leafset, neighbor_values: frozenset[int] | set[int]) -> float:
    """Dissimilarity weight in [1, 2]; 1 iff the leafset is fully present."""
    if not leafset:
        raise InputError("empty leafset")
    overlap = sum(1 for a in leafset if a in neighbor_values)
    return 2.0 - overlap / len(leafset)


def score_node(
    patterns: Sequence[AttributeStar], graph: AttributedGraph, v: int
) -> list[float]:
    """Score every attribute value as a completion candidate for vertex ``v``.

    Returns one score per interned attribute value; entries stay at the
    sentinel minimum when no pattern supports them or when the value is
    already present on ``v`` (completion targets missing values only).
    """
    scores = [SENTINEL] * len(graph.values)
    neighbor_values = graph.neighbor_value_union(v)
    if not neighbor_values:
        logger.warning(
            "vertex %s has no attributed neighbors; nothing to score",
            graph.vertices.name(v),
        )
        return scores
    present = set(graph.vertex_values(v))
    for star in patterns:
        w = similarity_weight(star.leafset, neighbor_values)
        cl = -w * star.code_bits
        for core_value in star.coreset:
            if core_value in present:
                continue
            if cl > scores[core_value]:
                scores[core_value] = cl
    return scores


def minmax_normalize(vector: Sequence[float]) -> list[float]:
    """Min-max to [0, 1]; sentinels count as the minimum, flat vectors become ones."""
    finite = [x for x in vector if x != SENTINEL]
    if not finite:
        logger.warning("normalizing an all-sentinel vector; it contributes nothing")
        return [1.0] * len(vector)
    lo, hi = min(finite), max(finite)
    if hi == lo:
        logger.warning("normalizing a constant vector; it contributes nothing")
        return [1.0] * len(vector)
    span = hi - lo
    return [((x if x != SENTINEL else lo) - lo) / span for x in vector]


def fuse_scores(
    model_scores: Sequence[float], external_scores: Sequence[float]
) -> list[float]:
    """Normalize the two aligned score vectors separately and multiply them."""
    if len(model_scores) != len(external_scores):
        raise InputError(
            f"score vectors disagree on length: {len(model_scores)} vs {len(external_scores)}"
        )
    a = minmax_normalize(model_scores)
    b = minmax_normalize(external_scores)
    return [x * y for x, y in zip(a, b)]


def recall_at_k(ranked: Sequence[Hashable], truth: Iterable[Hashable], k: int) -> float:
    if k < 1:
        raise InputError("k must be at least 1")
    truth_set = set(truth)
    if not truth_set:
        raise InputError("empty truth set")
    hits = sum(1 for item in ranked[:k] if item in truth_set)
    return hits / len(truth_set)


def ndcg_at_k(ranked: Sequence[Hashable], truth: Iterable[Hashable], k: int) -> float:
    """Binary-relevance NDCG with log2 position discounting."""
    if k < 1:
        raise InputError("k must be at least 1")
    truth_set = set(truth)
    if not truth_set:
        raise InputError("empty truth set")
    dcg = sum(
        1.0 / log2(position + 1)
        for position, item in enumerate(ranked[:k], start=1)
        if item in truth_set
    )
    ideal = sum(
        1.0 / log2(position + 1)
        for position in range(1, min(k, len(truth_set)) + 1)
    )
    return dcg / ideal


def evaluate_completion(
    predictions: Mapping[str, Sequence[str]],
    truth: Mapping[str, Iterable[str]],
    ks: Sequence[int],
) -> list[dict]:
    """Mean Recall@K and NDCG@K over nodes; nodes without truth are skipped."""
    rows = []
    for k in ks:
        recalls: list[float] = []
        ndcgs: list[float] = []
        skipped = 0
        for vertex, ranked in predictions.items():
            truth_set = set(truth.get(vertex, ()))
            if not truth_set:
                skipped += 1
                continue
            recalls.append(recall_at_k(ranked, truth_set, k))
            ndcgs.append(ndcg_at_k(ranked, truth_set, k))
        rows.append(
            {
                "k": k,
                "recall": sum(recalls) / len(recalls) if recalls else 0.0,
                "ndcg": sum(ndcgs) / len(ndcgs) if ndcgs else 0.0,
                "nodes": len(recalls),
                "skipped": skipped,
            }
        )
    return rows
