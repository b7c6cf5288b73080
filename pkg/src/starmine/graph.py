"""Attributed-graph data model, file ingestion, and the coreset position index.

The input is an undirected simple graph plus a per-vertex set of nominal
attribute values.  Vertex labels and attribute values are interned to dense
integer ids in first-appearance order, so every downstream structure
(mapping table, inverted database, mined patterns) is deterministic for a
fixed input byte stream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

from .errors import InputError

logger = logging.getLogger(__name__)

# Sorted, duplicate-free tuples of interned attribute-value ids.
ValueSet = tuple[int, ...]
Coreset = ValueSet
Leafset = ValueSet


class SymbolTable:
    """Bijective string <-> dense-id interning, in first-appearance order."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        sid = self._ids.get(name)
        if sid is None:
            sid = len(self._names)
            self._ids[name] = sid
            self._names.append(name)
        return sid

    def lookup(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, sid: int) -> str:
        return self._names[sid]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymbolTable) and self._names == other._names


@dataclass
class LoadSummary:
    """Side observations from a load: nothing here is fatal."""

    self_loops: int = 0
    duplicate_edges: int = 0
    components: int = 1


class AttributedGraph:
    """Undirected simple graph with a set of attribute values per vertex.

    Invariants enforced at construction time: no self-loops, symmetric and
    duplicate-free adjacency.  Vertices may carry an empty attribute set.
    Instances are immutable after construction and safe for concurrent reads.
    """

    def __init__(
        self,
        vertices: SymbolTable,
        values: SymbolTable,
        edges: list[tuple[int, int]],
        attrs: list[ValueSet],
        attr_row_order: list[int] | None = None,
    ) -> None:
        n = len(vertices)
        if len(attrs) != n:
            raise InputError(f"attribute table covers {len(attrs)} of {n} vertices")
        self.vertices = vertices
        self.values = values
        self.edges = edges
        self.attrs = attrs
        # Row order of the attribute file, kept so a save/load cycle replays
        # the exact interning sequence.
        self._attr_row_order = (
            attr_row_order
            if attr_row_order is not None
            else [v for v in range(n) if attrs[v]]
        )
        neighbor_sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise InputError(f"self-loop on vertex {vertices.name(u)!r}")
            if v in neighbor_sets[u]:
                raise InputError("duplicate edge in edge list")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        self.adj: list[tuple[int, ...]] = [tuple(sorted(s)) for s in neighbor_sets]

    # -- basic accessors ---------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def vertex_values(self, v: int) -> ValueSet:
        return self.attrs[v]

    def neighbor_value_union(self, v: int) -> frozenset[int]:
        """All attribute values carried by at least one neighbor of ``v``."""
        out: set[int] = set()
        for u in self.adj[v]:
            out.update(self.attrs[u])
        return frozenset(out)

    def value_counts(self) -> dict[int, int]:
        """Occurrence count of each attribute value over all vertices."""
        counts: dict[int, int] = {}
        for vals in self.attrs:
            for a in vals:
                counts[a] = counts.get(a, 0) + 1
        return counts

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, AttributedGraph)
            and self.vertices == other.vertices
            and self.values == other.values
            and self.adj == other.adj
            and self.attrs == other.attrs
        )

    # -- construction helpers ----------------------------------------------

    @classmethod
    def from_data(
        cls,
        edges: Iterable[tuple[str, str]],
        attrs: Mapping[str, Iterable[str]],
    ) -> "AttributedGraph":
        """Build a graph from label pairs and a label -> values mapping.

        Interning follows iteration order of ``edges`` then ``attrs``, mirroring
        what loading the equivalent files would produce.
        """
        vertices = SymbolTable()
        values = SymbolTable()
        edge_list: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        for u_label, v_label in edges:
            u, v = vertices.intern(u_label), vertices.intern(v_label)
            if u == v:
                raise InputError(f"self-loop on {u_label!r}")
            key = (min(u, v), max(u, v))
            if key not in seen:
                seen.add(key)
                edge_list.append((u, v))
        vertex_values: dict[int, ValueSet] = {}
        row_order: list[int] = []
        for label, vals in attrs.items():
            v = vertices.intern(label)
            ids = sorted({values.intern(a) for a in vals})
            vertex_values[v] = tuple(ids)
            row_order.append(v)
        attr_table = [vertex_values.get(v, ()) for v in range(len(vertices))]
        return cls(vertices, values, edge_list, attr_table, row_order)

    # -- serialization -----------------------------------------------------

    def write_edges(self, out: TextIO) -> None:
        for u, v in self.edges:
            out.write(f"{self.vertices.name(u)}\t{self.vertices.name(v)}\n")

    def write_attrs(self, out: TextIO) -> None:
        for v in self._attr_row_order:
            names = ",".join(self.values.name(a) for a in self.attrs[v])
            out.write(f"{self.vertices.name(v)}\t{names}\n")


def _line_stream(source: str | TextIO | Iterable[str]) -> Iterator[tuple[int, str]]:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as handle:
            yield from enumerate(handle, start=1)
    else:
        yield from enumerate(source, start=1)


def load_graph(
    edges_source: str | TextIO | Iterable[str],
    attrs_source: str | TextIO | Iterable[str],
) -> tuple[AttributedGraph, LoadSummary]:
    """Load a graph from the two-file format.

    Edge lines are ``u<TAB>v``; attribute lines are ``v<TAB>a1,a2,...``.
    Lines starting with ``#`` and blank lines are skipped.  Duplicate edges
    are collapsed and self-loops dropped (both only counted in the summary);
    a malformed line raises :class:`InputError` with its line number.
    Vertices that appear only in the attribute file become isolated vertices.
    """
    vertices = SymbolTable()
    values = SymbolTable()
    summary = LoadSummary()

    edge_list: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    for lineno, raw in _line_stream(edges_source):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise InputError(f"edges:{lineno}: expected 'u<TAB>v', got {line!r}")
        if parts[0] == parts[1]:
            summary.self_loops += 1
            continue
        u, v = vertices.intern(parts[0]), vertices.intern(parts[1])
        key = (min(u, v), max(u, v))
        if key in seen_edges:
            summary.duplicate_edges += 1
            continue
        seen_edges.add(key)
        edge_list.append((u, v))

    vertex_values: dict[int, ValueSet] = {}
    row_order: list[int] = []
    for lineno, raw in _line_stream(attrs_source):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise InputError(
                f"attrs:{lineno}: expected 'v<TAB>a1,a2,...', got {line!r}"
            )
        tokens = parts[1].split(",")
        if any(not tok for tok in tokens):
            raise InputError(f"attrs:{lineno}: empty attribute value in {line!r}")
        v = vertices.intern(parts[0])
        if v in vertex_values:
            raise InputError(f"attrs:{lineno}: duplicate row for vertex {parts[0]!r}")
        vertex_values[v] = tuple(sorted({values.intern(tok) for tok in tokens}))
        row_order.append(v)

    attr_table = [vertex_values.get(v, ()) for v in range(len(vertices))]
    graph = AttributedGraph(vertices, values, edge_list, attr_table, row_order)

    if summary.self_loops:
        logger.warning("dropped %d self-loop line(s)", summary.self_loops)
    components = connected_components(graph)
    summary.components = len(components)
    if summary.components > 1:
        logger.warning(
            "input graph has %d connected components; mining proceeds on the whole graph",
            summary.components,
        )
    return graph, summary


def connected_components(graph: AttributedGraph) -> list[list[int]]:
    """Partition of the vertex set, each component sorted by vertex id."""
    seen = [False] * graph.vertex_count
    components: list[list[int]] = []
    for start in range(graph.vertex_count):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in graph.adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        components.append(sorted(comp))
    return components


@dataclass
class MappingTable:
    """Positions of each coreset: the vertices whose value set contains it."""

    entries: dict[Coreset, tuple[int, ...]]
    empty_coresets: tuple[Coreset, ...] = ()

    def positions(self, coreset: Coreset) -> tuple[int, ...]:
        return self.entries.get(coreset, ())


def default_coresets(graph: AttributedGraph) -> list[Coreset]:
    """One singleton coreset per attribute value occurring in the graph."""
    return [(a,) for a in sorted(graph.value_counts())]


def build_mapping_table(
    graph: AttributedGraph, coresets: Sequence[Coreset]
) -> MappingTable:
    if not coresets:
        raise InputError("empty coreset universe")
    by_value: dict[int, set[int]] = {}
    for v, vals in enumerate(graph.attrs):
        for a in vals:
            by_value.setdefault(a, set()).add(v)
    entries: dict[Coreset, tuple[int, ...]] = {}
    empty: list[Coreset] = []
    for coreset in coresets:
        pos: set[int] | None = None
        for a in coreset:
            holders = by_value.get(a)
            if holders is None:
                pos = set()
                break
            pos = set(holders) if pos is None else pos & holders
        positions = tuple(sorted(pos or ()))
        entries[coreset] = positions
        if not positions:
            empty.append(coreset)
    if empty:
        logger.warning("%d coreset(s) have no positions in the graph", len(empty))
    return MappingTable(entries, tuple(empty))


def load_coresets(
    source: str | TextIO | Iterable[str], values: SymbolTable
) -> list[Coreset]:
    """Read one coreset per line (comma-separated values).

    Values unseen in the graph are interned anyway; such coresets map to no
    positions and are reported by :func:`build_mapping_table`.
    """
    coresets: list[Coreset] = []
    seen: set[Coreset] = set()
    for lineno, raw in _line_stream(source):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        tokens = line.split(",")
        if any(not tok for tok in tokens):
            raise InputError(f"coresets:{lineno}: empty value in {line!r}")
        coreset = tuple(sorted({values.intern(tok) for tok in tokens}))
        if coreset not in seen:
            seen.add(coreset)
            coresets.append(coreset)
    if not coresets:
        raise InputError("coreset file contains no coresets")
    return coresets
