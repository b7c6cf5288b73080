"""Inverted pattern database: the substrate all merging and covering runs on.

Each record keys a (coreset, leafset) pair to the set of positions where the
coreset appears with every leaf value realized in the neighborhood.  Merging
two leafsets moves their co-occurring positions into a combined record, so a
sequence of merges is a lossless re-grouping of the initial single-leaf
facts.  Per-coreset totals (the column sums the code lengths depend on) are
maintained incrementally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import InvariantError
from .graph import AttributedGraph, Coreset, Leafset, MappingTable

RecordKey = tuple[Coreset, Leafset]

PARTLY_MERGED = "partly"
TWO_TOTAL = "two_total"
ONE_TOTAL = "one_total"


@dataclass(frozen=True)
class InvertedRecord:
    leafset: Leafset
    coreset: Coreset
    positions: tuple[int, ...]

    @property
    def frequency(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class CoreOutcome:
    """What a merge did at one shared coreset."""

    coreset: Coreset
    moved: int
    case: str
    x_removed: bool
    y_removed: bool
    target_created: bool


@dataclass(frozen=True)
class MergeReport:
    x: Leafset
    y: Leafset
    merged: Leafset
    outcomes: tuple[CoreOutcome, ...]
    removed: tuple[Leafset, ...]  # leafsets deleted from every coreset
    reduced: tuple[Leafset, ...]  # leafsets surviving with fewer positions

    @property
    def is_noop(self) -> bool:
        return not self.outcomes


class InvertedDatabase:
    """Mutable three-column table with leafset and coreset indexes.

    Mutation (:meth:`apply_merge`) is single-threaded; reads against a
    database between merges are safe from any number of threads.
    """

    def __init__(self) -> None:
        self._positions: dict[RecordKey, set[int]] = {}
        self.by_leafset: dict[Leafset, set[Coreset]] = {}
        self.by_coreset: dict[Coreset, set[Leafset]] = {}
        self.core_totals: dict[Coreset, int] = {}
        self.total_uses = 0  # sum of record frequencies

    # -- construction --------------------------------------------------------

    @classmethod
    def build(
        cls, graph: AttributedGraph, mapping: MappingTable
    ) -> "InvertedDatabase":
        """One record per (coreset, leaf value) with non-empty positions."""
        db = cls()
        neighbor_values = [graph.neighbor_value_union(v) for v in range(graph.vertex_count)]
        for coreset, positions in mapping.entries.items():
            for p in positions:
                for leaf in neighbor_values[p]:
                    db._insert(coreset, (leaf,), p)
        return db

    def _insert(self, coreset: Coreset, leafset: Leafset, position: int) -> None:
        key = (coreset, leafset)
        bucket = self._positions.get(key)
        if bucket is None:
            self._positions[key] = {position}
            self.by_leafset.setdefault(leafset, set()).add(coreset)
            self.by_coreset.setdefault(coreset, set()).add(leafset)
        else:
            bucket.add(position)
        self.core_totals[coreset] = self.core_totals.get(coreset, 0) + 1
        self.total_uses += 1

    def clone(self) -> "InvertedDatabase":
        other = InvertedDatabase()
        other._positions = {k: set(v) for k, v in self._positions.items()}
        other.by_leafset = {k: set(v) for k, v in self.by_leafset.items()}
        other.by_coreset = {k: set(v) for k, v in self.by_coreset.items()}
        other.core_totals = dict(self.core_totals)
        other.total_uses = self.total_uses
        return other

    # -- read access ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._positions)

    def __contains__(self, key: RecordKey) -> bool:
        return key in self._positions

    def record(self, coreset: Coreset, leafset: Leafset) -> InvertedRecord | None:
        positions = self._positions.get((coreset, leafset))
        if positions is None:
            return None
        return InvertedRecord(leafset, coreset, tuple(sorted(positions)))

    def frequency(self, coreset: Coreset, leafset: Leafset) -> int:
        positions = self._positions.get((coreset, leafset))
        return len(positions) if positions else 0

    def positions_of(self, coreset: Coreset, leafset: Leafset) -> set[int]:
        return self._positions.get((coreset, leafset), set())

    def records(self) -> Iterator[InvertedRecord]:
        for (coreset, leafset), positions in self._positions.items():
            yield InvertedRecord(leafset, coreset, tuple(sorted(positions)))

    def record_items(self) -> Iterator[tuple[Coreset, Leafset, int]]:
        """(coreset, leafset, frequency) without materializing positions."""
        for (coreset, leafset), positions in self._positions.items():
            yield coreset, leafset, len(positions)

    @property
    def leafsets(self) -> set[Leafset]:
        return set(self.by_leafset)

    def cooccurrence(self, coreset: Coreset, x: Leafset, y: Leafset) -> list[int]:
        """Sorted positions where both leafsets appear around ``coreset``."""
        px = self._positions.get((coreset, x))
        py = self._positions.get((coreset, y))
        if not px or not py:
            return []
        if x == y:
            return sorted(px)
        return sorted(px & py)

    # -- mutation ---------------------------------------------------------------

    def apply_merge(
        self, x: Leafset, y: Leafset, _core_order: Iterable[Coreset] | None = None
    ) -> MergeReport:
        """Merge leafsets ``x`` and ``y`` into their union at every shared coreset.

        At each coreset where the two leafsets co-occur, the common positions
        move into the record of the union leafset (created on demand, extended
        if it already exists); records left without positions are deleted.
        Returns a no-op report when the pair never co-occurs.  The processing
        order of shared coresets does not affect the result.
        """
        if x == y:
            raise InvariantError("cannot merge a leafset with itself")
        merged = tuple(sorted(set(x) | set(y)))
        shared = self.by_leafset.get(x, set()) & self.by_leafset.get(y, set())
        cores = list(_core_order) if _core_order is not None else sorted(shared)
        outcomes: list[CoreOutcome] = []
        for e in cores:
            if e not in shared:
                continue
            px = self._positions[(e, x)]
            py = self._positions[(e, y)]
            moved = px & py
            if not moved:
                continue
            x_removed = moved == px
            y_removed = moved == py
            if x_removed and y_removed:
                case = TWO_TOTAL
            elif x_removed or y_removed:
                case = ONE_TOTAL
            else:
                case = PARTLY_MERGED
            target_key = (e, merged)
            target = self._positions.get(target_key)
            target_created = target is None
            if target_created:
                self._positions[target_key] = set(moved)
                self.by_leafset.setdefault(merged, set()).add(e)
                self.by_coreset[e].add(merged)
            else:
                if target & moved:
                    raise InvariantError(
                        f"positions of {merged} at {e} overlap the merged pair"
                    )
                target.update(moved)
            for side, removed in ((x, x_removed), (y, y_removed)):
                if removed:
                    self._delete_record(e, side)
                else:
                    self._positions[(e, side)] -= moved
            self.core_totals[e] -= len(moved)
            self.total_uses -= len(moved)
            outcomes.append(
                CoreOutcome(e, len(moved), case, x_removed, y_removed, target_created)
            )
        if outcomes:
            # Every touched coreset strips positions from both sides, so a side
            # that still has records anywhere survived with reduced positions.
            removed = tuple(side for side in (x, y) if side not in self.by_leafset)
            reduced = tuple(side for side in (x, y) if side in self.by_leafset)
        else:
            removed = reduced = ()
        return MergeReport(x, y, merged, tuple(outcomes), removed, reduced)

    def _delete_record(self, coreset: Coreset, leafset: Leafset) -> None:
        del self._positions[(coreset, leafset)]
        self.by_coreset[coreset].discard(leafset)
        cores = self.by_leafset[leafset]
        cores.discard(coreset)
        if not cores:
            del self.by_leafset[leafset]

    # -- diagnostics ------------------------------------------------------------

    def validate(self) -> None:
        """Cross-check indexes and running totals; raises on inconsistency."""
        totals: dict[Coreset, int] = {}
        uses = 0
        for (coreset, leafset), positions in self._positions.items():
            if not positions:
                raise InvariantError(f"empty record ({coreset}, {leafset})")
            if coreset not in self.by_leafset.get(leafset, ()):
                raise InvariantError("by_leafset out of sync")
            if leafset not in self.by_coreset.get(coreset, ()):
                raise InvariantError("by_coreset out of sync")
            totals[coreset] = totals.get(coreset, 0) + len(positions)
            uses += len(positions)
        live = {c for c, t in self.core_totals.items() if t}
        if totals != {c: t for c, t in self.core_totals.items() if t} or live != set(totals):
            raise InvariantError("core_totals out of sync with records")
        if uses != self.total_uses:
            raise InvariantError("total_uses out of sync with records")
        for leafset, cores in self.by_leafset.items():
            for coreset in cores:
                if (coreset, leafset) not in self._positions:
                    raise InvariantError("dangling leafset index entry")

    def dump_jsonl(self, out: TextIO, graph: AttributedGraph) -> None:
        """Debug dump, one record per line, sorted by (core, leaves)."""
        rows = []
        for record in self.records():
            core = sorted(graph.values.name(a) for a in record.coreset)
            leaves = sorted(graph.values.name(a) for a in record.leafset)
            positions = sorted(graph.vertices.name(p) for p in record.positions)
            rows.append((core, leaves, positions))
        rows.sort(key=lambda r: (r[0], r[1]))
        for core, leaves, positions in rows:
            out.write(
                json.dumps(
                    {"core": core, "leaves": leaves, "positions": positions},
                    ensure_ascii=False,
                )
                + "\n"
            )


def build_inverted_database(
    graph: AttributedGraph, mapping: MappingTable
) -> InvertedDatabase:
    return InvertedDatabase.build(graph, mapping)
