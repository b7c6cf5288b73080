import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from starmine.errors import InputError
from starmine.graph import (
    AttributedGraph,
    build_mapping_table,
    connected_components,
    default_coresets,
    load_coresets,
    load_graph,
)

from conftest import value_ids, vertex_ids
from oracles import brute_records, random_graph


def load_from_text(edges: str, attrs: str):
    return load_graph(io.StringIO(edges), io.StringIO(attrs))


class TestLoadGraph:
    def test_minimal_graph(self):
        graph, _ = load_from_text("v1\tv2\n", "v1\tx\nv2\ty\n")
        assert graph.vertex_count == 2
        assert graph.edge_count == 1
        u, v = graph.vertices.lookup("v1"), graph.vertices.lookup("v2")
        assert graph.neighbors(u) == (v,)
        assert graph.neighbors(v) == (u,)

    def test_symmetric_duplicate_collapses(self):
        graph, summary = load_from_text("a\tb\nb\ta\n", "a\tx\n")
        assert graph.edge_count == 1
        assert summary.duplicate_edges == 1

    def test_example_edge_count(self, example_files):
        graph, summary = load_graph(*example_files)
        assert graph.vertex_count == 5
        assert graph.edge_count == 5
        assert summary.components == 1
        adjacency = {
            graph.vertices.name(v): {graph.vertices.name(u) for u in graph.neighbors(v)}
            for v in range(graph.vertex_count)
        }
        assert adjacency == {
            "v1": {"v2", "v3", "v4"},
            "v2": {"v1"},
            "v3": {"v1", "v5"},
            "v4": {"v1", "v5"},
            "v5": {"v3", "v4"},
        }

    def test_self_loop_rejected_and_counted(self):
        graph, summary = load_from_text("a\ta\nb\tc\n", "b\tx\n")
        assert summary.self_loops == 1
        assert graph.edge_count == 1
        assert "a" not in graph.vertices

    def test_malformed_edge_line_reports_lineno(self):
        with pytest.raises(InputError, match="edges:2"):
            load_from_text("a\tb\nbad line\n", "a\tx\n")

    def test_malformed_attr_line_reports_lineno(self):
        with pytest.raises(InputError, match="attrs:1"):
            load_from_text("a\tb\n", "a x\n")

    def test_empty_attr_token_rejected(self):
        with pytest.raises(InputError, match="attrs:1"):
            load_from_text("a\tb\n", "a\tx,,y\n")

    def test_duplicate_attr_row_rejected(self):
        with pytest.raises(InputError, match="duplicate row"):
            load_from_text("a\tb\n", "a\tx\na\ty\n")

    def test_attr_only_vertex_becomes_isolated(self):
        graph, _ = load_from_text("a\tb\n", "z\tx\n")
        z = graph.vertices.lookup("z")
        assert z is not None
        assert graph.neighbors(z) == ()

    def test_comments_and_blanks_ignored(self):
        graph, _ = load_from_text("# header\n\na\tb\n", "# c\na\tx\n\n")
        assert graph.edge_count == 1

    def test_vertex_without_attrs_allowed(self):
        graph, _ = load_from_text("a\tb\n", "a\tx\n")
        b = graph.vertices.lookup("b")
        assert graph.vertex_values(b) == ()


class TestRoundTrip:
    def assert_round_trips(self, graph):
        edges_out, attrs_out = io.StringIO(), io.StringIO()
        graph.write_edges(edges_out)
        graph.write_attrs(attrs_out)
        reloaded, _ = load_from_text(edges_out.getvalue(), attrs_out.getvalue())
        assert reloaded == graph

    def test_example_round_trip(self, example_files):
        graph, _ = load_graph(*example_files)
        self.assert_round_trips(graph)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_random_round_trip(self, seed):
        graph = random_graph(random.Random(seed))
        self.assert_round_trips(graph)

    def test_interleaved_interning_round_trip(self):
        # first-appearance ids are not label-sorted; round trip must keep them
        graph, _ = load_from_text("n0\tn5\nn1\tn2\n", "n5\tzz\nn1\taa\n")
        self.assert_round_trips(graph)


class TestComponents:
    def test_path_graph_single_component(self):
        graph, _ = load_from_text("a\tb\nb\tc\n", "a\tx\n")
        assert len(connected_components(graph)) == 1

    def test_two_disjoint_edges(self):
        graph, summary = load_from_text("a\tb\nc\td\n", "a\tx\n")
        assert len(connected_components(graph)) == 2
        assert summary.components == 2

    def test_example_is_connected(self, example_graph):
        assert len(connected_components(example_graph)) == 1

    def test_components_partition_vertices(self):
        rng = random.Random(7)
        for _ in range(20):
            graph = random_graph(rng, max_vertices=12)
            comps = connected_components(graph)
            seen = sorted(v for comp in comps for v in comp)
            assert seen == list(range(graph.vertex_count))


class TestMappingTable:
    def test_example_positions_of_c(self, example_graph):
        mapping = build_mapping_table(example_graph, default_coresets(example_graph))
        coreset = value_ids(example_graph, "c")
        assert mapping.positions(coreset) == vertex_ids(example_graph, "v2", "v3")

    def test_unseen_value_maps_to_empty(self, example_graph):
        unseen = (len(example_graph.values) + 5,)
        mapping = build_mapping_table(example_graph, [unseen])
        assert mapping.positions(unseen) == ()
        assert unseen in mapping.empty_coresets

    def test_singletons_match_direct_scan(self):
        rng = random.Random(11)
        for _ in range(25):
            graph = random_graph(rng, max_vertices=10)
            coresets = default_coresets(graph)
            mapping = build_mapping_table(graph, coresets)
            for coreset in coresets:
                expected = tuple(
                    sorted(
                        v
                        for v in range(graph.vertex_count)
                        if set(coreset) <= set(graph.vertex_values(v))
                    )
                )
                assert mapping.positions(coreset) == expected

    def test_multi_value_coreset_superset_semantics(self, example_graph):
        coreset = value_ids(example_graph, "a", "c")
        mapping = build_mapping_table(example_graph, [coreset])
        assert mapping.positions(coreset) == vertex_ids(example_graph, "v2")

    def test_positions_are_exactly_supersets(self):
        rng = random.Random(3)
        graph = random_graph(rng, max_vertices=15)
        mapping = build_mapping_table(graph, default_coresets(graph))
        for coreset, positions in mapping.entries.items():
            for v in range(graph.vertex_count):
                holds = set(coreset) <= set(graph.vertex_values(v))
                assert (v in positions) == holds

    def test_empty_universe_rejected(self, example_graph):
        with pytest.raises(InputError):
            build_mapping_table(example_graph, [])


class TestCoresetFile:
    def test_loads_and_dedups(self, example_graph):
        text = "a,c\nb\na,c\n"
        coresets = load_coresets(io.StringIO(text), example_graph.values)
        assert coresets == [
            value_ids(example_graph, "a", "c"),
            value_ids(example_graph, "b"),
        ]

    def test_unseen_value_interned(self, example_graph):
        before = len(example_graph.values)
        [coreset] = load_coresets(io.StringIO("zz\n"), example_graph.values)
        assert len(example_graph.values) == before + 1
        mapping = build_mapping_table(example_graph, [coreset])
        assert mapping.positions(coreset) == ()

    def test_empty_file_rejected(self, example_graph):
        with pytest.raises(InputError):
            load_coresets(io.StringIO("# nothing\n"), example_graph.values)
