"""Scikit-learn style estimator facade over the mining and scoring modules."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .graph import AttributedGraph, Coreset
from .miner import GAIN_NET, mine
from .scoring import SENTINEL, fuse_scores, score_node


class StarPatternMiner(BaseEstimator):
    """Mine compressing star-shaped attribute patterns from an attributed graph.

    Parameters
    ----------
    algo : {"partial", "basic"}, default="partial"
        Candidate maintenance strategy.  Both produce identical patterns;
        "partial" re-evaluates far fewer pair gains per merge.
    gain : {"net", "data-only"}, default="net"
        Merge acceptance criterion: total description length including the
        code-table cost, or the database encoding cost alone.
    coresets : sequence of value-id tuples, optional
        Explicit coreset universe (enables multi-value coresets).  Defaults
        to one singleton per attribute value.
    threads : int, optional
        Worker threads for pair-gain evaluation and per-node scoring.
    verbose : bool, default=False
        Log a description-length report after every merge.

    Attributes
    ----------
    model_ : Model
        Standard and coreset/leafset code tables.
    db_ : InvertedDatabase
        Final merged database; one record per mined pattern.
    patterns_ : list of AttributeStar
        Patterns ranked by ascending code length.
    stats_ : MinerStats
        Per-iteration search statistics.
    graph_ : AttributedGraph
        The graph the miner was fitted on.
    """

    def __init__(
        self,
        algo: str = "partial",
        gain: str = GAIN_NET,
        coresets: Sequence[Coreset] | None = None,
        threads: int | None = None,
        verbose: bool = False,
    ) -> None:
        self.algo = algo
        self.gain = gain
        self.coresets = coresets
        self.threads = threads
        self.verbose = verbose

    def fit(self, X: AttributedGraph, y=None) -> "StarPatternMiner":
        if not isinstance(X, AttributedGraph):
            raise TypeError("X must be an AttributedGraph")
        result = mine(
            X,
            algorithm=self.algo,
            coresets=self.coresets,
            gain_mode=self.gain,
            threads=self.threads,
            verbose=self.verbose,
        )
        self.graph_ = X
        self.model_ = result.model
        self.db_ = result.db
        self.patterns_ = result.patterns
        self.stats_ = result.stats
        self.attribute_names_ = list(X.values.names)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "patterns_"):
            raise NotFittedError("this StarPatternMiner instance is not fitted yet")

    def transform(self, X: Sequence[int] | None = None) -> np.ndarray:
        """Completion-score matrix for the given vertices of the fitted graph.

        Rows follow ``X`` (all vertices when omitted); columns follow the
        interned attribute-value order in ``attribute_names_``.  Entries with
        no supporting pattern are ``-inf``.
        """
        self._check_fitted()
        vertices = list(X) if X is not None else list(range(self.graph_.vertex_count))
        matrix = np.full((len(vertices), len(self.attribute_names_)), SENTINEL)
        for row, v in enumerate(vertices):
            matrix[row] = score_node(self.patterns_, self.graph_, v)
        return matrix

    def fit_transform(self, X: AttributedGraph, y=None) -> np.ndarray:
        return self.fit(X).transform()

    def predict(self, X: Sequence[int] | None = None) -> list[str | None]:
        """Best completion candidate per vertex, or None when nothing scores."""
        scores = self.transform(X)
        out: list[str | None] = []
        for row in scores:
            best = int(np.argmax(row))
            out.append(self.attribute_names_[best] if row[best] != SENTINEL else None)
        return out

    def rank_attributes(
        self, v: int, external_scores: Sequence[float] | None = None
    ) -> list[tuple[str, float]]:
        """Ranked (attribute, score) candidates for one vertex.

        With ``external_scores`` (aligned to ``attribute_names_``) the two
        vectors are normalized and multiplied before ranking; otherwise
        unsupported attributes are omitted.
        """
        self._check_fitted()
        scores = score_node(self.patterns_, self.graph_, v)
        if external_scores is not None:
            fused = fuse_scores(scores, list(external_scores))
            ranked = [(self.attribute_names_[i], s) for i, s in enumerate(fused)]
        else:
            ranked = [
                (self.attribute_names_[i], s)
                for i, s in enumerate(scores)
                if s != SENTINEL
            ]
        ranked.sort(key=lambda item: (-item[1], item[0]))
        return ranked
