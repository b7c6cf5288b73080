"""Greedy merge search over the inverted database.

Candidates are unordered leafset pairs with a positive description-length
gain.  The full-rescan variant re-enumerates every pair after each merge;
the partial variant keeps a max-ordered store and re-evaluates only pairs
whose gain can actually have changed, namely pairs touching a coreset where
the accepted merge moved positions.  Both variants accept the same merge at
every step, so their outputs are identical.
"""

from __future__ import annotations

import heapq
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import log2
from typing import Callable, Iterable, Sequence

from .encoding import (
    CoreCodeTable,
    Model,
    StandardCodeTable,
    dl_report,
    leaf_code_length,
    total_length,
    xlog2,
)
from .errors import InvariantError
from .graph import (
    AttributedGraph,
    Coreset,
    Leafset,
    MappingTable,
    SymbolTable,
    build_mapping_table,
    default_coresets,
)
from .inverted import InvertedDatabase, MergeReport, build_inverted_database

logger = logging.getLogger(__name__)

GAIN_NET = "net"
GAIN_DATA_ONLY = "data-only"
GAIN_MODES = (GAIN_NET, GAIN_DATA_ONLY)

PairKey = tuple[Leafset, Leafset]


def canonical_pair(x: Leafset, y: Leafset) -> PairKey:
    return (x, y) if x < y else (y, x)


def leafset_merge_term(x_e: int, y_e: int, xy_e: int, existing: int = 0) -> float:
    """Frequency-entropy change of the merged lines at one coreset.

    Covers all three merge cases (partly merged, one line gone, both lines
    gone) in one expression; ``existing`` is the frequency of a pre-existing
    record of the union leafset that absorbs the moved positions.
    """
    before = xlog2(x_e) + xlog2(y_e) + xlog2(existing)
    after = xlog2(x_e - xy_e) + xlog2(y_e - xy_e) + xlog2(existing + xy_e)
    return before - after


def _evaluate(
    db: InvertedDatabase, model: Model | None, x: Leafset, y: Leafset
) -> tuple[float, float]:
    """(data gain, model-length delta) of merging x and y, both in bits.

    Pure read of the database; exact with respect to a from-scratch
    before/after recomputation of the corresponding lengths.
    """
    merged = tuple(sorted(set(x) | set(y)))
    shared = db.by_leafset.get(x, set()) & db.by_leafset.get(y, set())
    data = 0.0
    model_delta = 0.0
    for e in sorted(shared):
        px = db.positions_of(e, x)
        py = db.positions_of(e, y)
        xy = len(px & py)
        if xy == 0:
            continue
        x_e, y_e = len(px), len(py)
        c_e = db.core_totals[e]
        z_e = db.frequency(e, merged)
        data += xlog2(c_e) - xlog2(c_e - xy)
        data -= leafset_merge_term(x_e, y_e, xy, z_e)
        if model is None:
            continue
        code_c = model.ct_c.code(e)
        rows = len(db.by_coreset[e])
        rows_after = rows
        if z_e == 0:
            model_delta += model.st.set_cost(merged) + code_c
            rows_after += 1
        if x_e == xy:
            model_delta -= model.st.set_cost(x) + code_c
            rows_after -= 1
        if y_e == xy:
            model_delta -= model.st.set_cost(y) + code_c
            rows_after -= 1
        # Leaf codes are log2(c_e) - log2(f); every row at this coreset is
        # repriced by the new total, and the merged rows change frequency.
        model_delta += rows_after * log2(c_e - xy) - rows * log2(c_e)
        before_logs = log2(x_e) + log2(y_e) + (log2(z_e) if z_e else 0.0)
        after_logs = (
            (log2(x_e - xy) if x_e > xy else 0.0)
            + (log2(y_e - xy) if y_e > xy else 0.0)
            + log2(z_e + xy)
        )
        model_delta -= after_logs - before_logs
    return data, model_delta


def data_gain(db: InvertedDatabase, x: Leafset, y: Leafset) -> float:
    """Reduction of the encoded database size from merging x and y."""
    return _evaluate(db, None, x, y)[0]


def net_gain(db: InvertedDatabase, model: Model, x: Leafset, y: Leafset) -> float:
    """Reduction of the total description length (data and code tables)."""
    data, model_delta = _evaluate(db, model, x, y)
    return data - model_delta


def pair_gain(
    db: InvertedDatabase, model: Model, x: Leafset, y: Leafset, mode: str = GAIN_NET
) -> float:
    if mode == GAIN_NET:
        return net_gain(db, model, x, y)
    if mode == GAIN_DATA_ONLY:
        return data_gain(db, x, y)
    raise ValueError(f"unknown gain mode {mode!r}")


@dataclass(frozen=True)
class Candidate:
    x: Leafset
    y: Leafset
    gain: float
    stamp: int


class CandidateStore:
    """Max-gain candidate pairs with lazy heap invalidation.

    The authoritative state is the pair -> gain map plus the symmetric
    relatedness index; heap entries carry the stamp they were pushed with
    and are discarded on pop when superseded.  Pop order is descending gain,
    then canonical pair order, matching a full descending sort.
    """

    def __init__(self) -> None:
        self._gains: dict[PairKey, float] = {}
        self._stamps: dict[PairKey, int] = {}
        self._heap: list[tuple[float, Leafset, Leafset, int]] = []
        self._counter = 0
        self.rdict: dict[Leafset, set[Leafset]] = {}

    def __len__(self) -> int:
        return len(self._gains)

    def __contains__(self, pair: PairKey) -> bool:
        return canonical_pair(*pair) in self._gains

    def gain(self, x: Leafset, y: Leafset) -> float | None:
        return self._gains.get(canonical_pair(x, y))

    def pairs(self) -> dict[PairKey, float]:
        return dict(self._gains)

    def set(self, x: Leafset, y: Leafset, gain: float) -> None:
        pair = canonical_pair(x, y)
        if self._gains.get(pair) == gain:
            return
        self._gains[pair] = gain
        self._counter += 1
        self._stamps[pair] = self._counter
        heapq.heappush(self._heap, (-gain, pair[0], pair[1], self._counter))
        self.rdict.setdefault(pair[0], set()).add(pair[1])
        self.rdict.setdefault(pair[1], set()).add(pair[0])

    def discard(self, x: Leafset, y: Leafset) -> None:
        pair = canonical_pair(x, y)
        if pair not in self._gains:
            return
        del self._gains[pair]
        del self._stamps[pair]
        self._unlink(*pair)

    def _unlink(self, x: Leafset, y: Leafset) -> None:
        for a, b in ((x, y), (y, x)):
            related = self.rdict.get(a)
            if related is not None:
                related.discard(b)
                if not related:
                    del self.rdict[a]

    def remove_leafset(self, leafset: Leafset) -> None:
        for other in sorted(self.rdict.get(leafset, ())):
            self.discard(leafset, other)

    def pop_best(self) -> Candidate | None:
        """Remove and return the highest-gain pair, or None if empty."""
        while self._heap:
            neg_gain, x, y, stamp = heapq.heappop(self._heap)
            pair = (x, y)
            if self._stamps.get(pair) != stamp:
                continue
            del self._gains[pair]
            del self._stamps[pair]
            self._unlink(x, y)
            return Candidate(x, y, -neg_gain, stamp)
        return None


def _evaluate_pairs(
    db: InvertedDatabase,
    model: Model,
    pairs: Sequence[PairKey],
    mode: str,
    threads: int | None,
) -> list[tuple[float, Leafset, Leafset]]:
    if threads and threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            gains = list(
                pool.map(lambda p: pair_gain(db, model, p[0], p[1], mode), pairs)
            )
    else:
        gains = [pair_gain(db, model, x, y, mode) for x, y in pairs]
    return [(g, x, y) for g, (x, y) in zip(gains, pairs)]


def generate_candidates(
    db: InvertedDatabase,
    model: Model,
    mode: str = GAIN_NET,
    threads: int | None = None,
) -> list[tuple[float, Leafset, Leafset]]:
    """All positive-gain pairs, sorted by descending gain then pair order."""
    pairs = list(combinations(sorted(db.by_leafset), 2))
    evaluated = _evaluate_pairs(db, model, pairs, mode, threads)
    positive = [(g, x, y) for g, x, y in evaluated if g > 0]
    positive.sort(key=lambda item: (-item[0], item[1], item[2]))
    return positive


def update_after_merge(
    store: CandidateStore,
    report: MergeReport,
    db: InvertedDatabase,
    model: Model,
    mode: str = GAIN_NET,
) -> int:
    """Refresh the store after a merge; returns the number of gain evaluations.

    Pairs involving leafsets that disappeared are dropped.  Every pair whose
    gain can have changed is re-evaluated: the merge only alters record
    frequencies, row counts and coreset totals at the coresets it touched,
    so that is pairs involving the merged or surviving leafsets, plus pairs
    of unrelated leafsets that co-occur at a touched coreset.
    """
    if report.is_noop:
        return 0
    for dead in report.removed:
        store.remove_leafset(dead)
    specials = {report.merged, *report.reduced}
    to_eval: set[PairKey] = set()
    for outcome in report.outcomes:
        rows = sorted(db.by_coreset.get(outcome.coreset, ()))
        for i, p in enumerate(rows):
            pos_p = None
            for q in rows[i + 1 :]:
                if p in specials or q in specials:
                    continue
                if pos_p is None:
                    pos_p = db.positions_of(outcome.coreset, p)
                if pos_p & db.positions_of(outcome.coreset, q):
                    to_eval.add((p, q))
        for s in sorted(specials):
            for q in rows:
                if q != s:
                    to_eval.add(canonical_pair(s, q))
    evaluations = 0
    for x, y in sorted(to_eval):
        gain = pair_gain(db, model, x, y, mode)
        evaluations += 1
        if gain > 0:
            store.set(x, y, gain)
        else:
            store.discard(x, y)
    return evaluations


@dataclass(frozen=True)
class AttributeStar:
    """A mined pattern: a coreset, a leafset, and its code length in bits."""

    coreset: Coreset
    leafset: Leafset
    code_bits: float
    frequency: int
    rank: int


def extract_patterns(model: Model, db: InvertedDatabase) -> list[AttributeStar]:
    """One pattern per live record, ranked by ascending code length.

    Ties break toward higher frequency, then coreset, then leafset order.
    """
    rows = []
    for coreset, leafset, f in db.record_items():
        code = model.ct_c.code(coreset) + leaf_code_length(f, db.core_totals[coreset])
        rows.append((code, -f, coreset, leafset))
    rows.sort()
    return [
        AttributeStar(coreset, leafset, code, -neg_f, rank)
        for rank, (code, neg_f, coreset, leafset) in enumerate(rows, start=1)
    ]


def pattern_json_line(star: AttributeStar, values: SymbolTable) -> str:
    return json.dumps(
        {
            "rank": star.rank,
            "core": sorted(values.name(a) for a in star.coreset),
            "leaves": sorted(values.name(a) for a in star.leafset),
            "code_bits": star.code_bits,
            "frequency": star.frequency,
        },
        ensure_ascii=False,
    )


def patterns_to_jsonl(patterns: Sequence[AttributeStar], values: SymbolTable) -> str:
    return "".join(pattern_json_line(star, values) + "\n" for star in patterns)


@dataclass
class IterationStats:
    iteration: int
    evaluated_pairs: int
    possible_pairs: int
    update_ratio: float
    accepted_x: Leafset
    accepted_y: Leafset
    net_gain_bits: float
    total_bits: float


@dataclass
class MinerStats:
    algorithm: str
    gain_mode: str
    initial_bits: float
    iterations: list[IterationStats] = field(default_factory=list)

    @property
    def final_bits(self) -> float:
        return self.iterations[-1].total_bits if self.iterations else self.initial_bits

    @property
    def accepted_gain_total(self) -> float:
        return sum(it.net_gain_bits for it in self.iterations)


@dataclass
class MineResult:
    graph: AttributedGraph
    mapping: MappingTable
    model: Model
    db: InvertedDatabase
    patterns: list[AttributeStar]
    stats: MinerStats
    merges: list[PairKey]


MergeHook = Callable[[InvertedDatabase, Model, MergeReport], None]
CandidatesHook = Callable[
    [InvertedDatabase, Model, list[tuple[float, Leafset, Leafset]]], None
]


def _setup(
    graph: AttributedGraph, coresets: Sequence[Coreset] | None
) -> tuple[MappingTable, InvertedDatabase, Model]:
    universe = list(coresets) if coresets is not None else default_coresets(graph)
    mapping = build_mapping_table(graph, universe)
    db = build_inverted_database(graph, mapping)
    model = Model(StandardCodeTable.from_graph(graph), CoreCodeTable.from_mapping(mapping))
    model.refresh_leaf_codes(db)
    return mapping, db, model


def _possible_pairs(db: InvertedDatabase) -> int:
    n = len(db.by_leafset)
    return n * (n - 1) // 2


def mine_basic(
    graph: AttributedGraph,
    *,
    coresets: Sequence[Coreset] | None = None,
    gain_mode: str = GAIN_NET,
    threads: int | None = None,
    verbose: bool = False,
    on_candidates: CandidatesHook | None = None,
    on_merge: MergeHook | None = None,
) -> MineResult:
    """Greedy mining with a full candidate rescan before every merge."""
    mapping, db, model = _setup(graph, coresets)
    stats = MinerStats("basic", gain_mode, total_length(model, db))
    merges: list[PairKey] = []
    iteration = 0
    while True:
        pairs = list(combinations(sorted(db.by_leafset), 2))
        evaluated = _evaluate_pairs(db, model, pairs, gain_mode, threads)
        if on_candidates is not None:
            on_candidates(db, model, evaluated)
        best: tuple[float, Leafset, Leafset] | None = None
        for g, x, y in evaluated:
            if g > 0 and (best is None or (-g, x, y) < (-best[0], best[1], best[2])):
                best = (g, x, y)
        if best is None:
            break
        iteration += 1
        gain, x, y = best
        report = db.apply_merge(x, y)
        model.refresh_leaf_codes(db)
        if on_merge is not None:
            on_merge(db, model, report)
        total = total_length(model, db)
        stats.iterations.append(
            IterationStats(iteration, len(pairs), len(pairs), 1.0, x, y, gain, total)
        )
        merges.append((x, y))
        if verbose:
            logger.info("iteration %d: %s", iteration, json.dumps(dl_report(model, db)))
    return MineResult(graph, mapping, model, db, extract_patterns(model, db), stats, merges)


def mine_partial(
    graph: AttributedGraph,
    *,
    coresets: Sequence[Coreset] | None = None,
    gain_mode: str = GAIN_NET,
    threads: int | None = None,
    verbose: bool = False,
    on_merge: MergeHook | None = None,
) -> MineResult:
    """Greedy mining with incremental candidate maintenance.

    Produces the same merge sequence, patterns, and description lengths as
    :func:`mine_basic`; only the amount of gain evaluation work differs.
    """
    mapping, db, model = _setup(graph, coresets)
    stats = MinerStats("partial", gain_mode, total_length(model, db))
    merges: list[PairKey] = []
    store = CandidateStore()
    initial = generate_candidates(db, model, gain_mode, threads)
    for g, x, y in initial:
        store.set(x, y, g)
    pending_evaluations = _possible_pairs(db)
    iteration = 0
    while True:
        possible = _possible_pairs(db)
        candidate = store.pop_best()
        if candidate is None:
            break
        iteration += 1
        report = db.apply_merge(candidate.x, candidate.y)
        if report.is_noop:
            raise InvariantError(
                f"stale candidate ({candidate.x}, {candidate.y}) reached application"
            )
        model.refresh_leaf_codes(db)
        if on_merge is not None:
            on_merge(db, model, report)
        total = total_length(model, db)
        ratio = pending_evaluations / possible if possible else 0.0
        stats.iterations.append(
            IterationStats(
                iteration,
                pending_evaluations,
                possible,
                ratio,
                candidate.x,
                candidate.y,
                candidate.gain,
                total,
            )
        )
        merges.append(canonical_pair(candidate.x, candidate.y))
        if verbose:
            logger.info("iteration %d: %s", iteration, json.dumps(dl_report(model, db)))
        pending_evaluations = update_after_merge(store, report, db, model, gain_mode)
    if len(store) or store.rdict:
        logger.warning(
            "candidate store and relatedness index diverged at termination "
            "(%d pairs, %d related leafsets)",
            len(store),
            len(store.rdict),
        )
    return MineResult(graph, mapping, model, db, extract_patterns(model, db), stats, merges)


def mine(
    graph: AttributedGraph,
    *,
    algorithm: str = "partial",
    coresets: Sequence[Coreset] | None = None,
    gain_mode: str = GAIN_NET,
    threads: int | None = None,
    verbose: bool = False,
) -> MineResult:
    if algorithm == "basic":
        return mine_basic(
            graph, coresets=coresets, gain_mode=gain_mode, threads=threads, verbose=verbose
        )
    if algorithm == "partial":
        return mine_partial(
            graph, coresets=coresets, gain_mode=gain_mode, threads=threads, verbose=verbose
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")
