import pytest

from starmine.graph import AttributedGraph

# 5-vertex example used throughout: a hub v1 and a 4-cycle through v5.
EXAMPLE_EDGES = [("v1", "v2"), ("v1", "v3"), ("v1", "v4"), ("v3", "v5"), ("v4", "v5")]
EXAMPLE_ATTRS = {
    "v1": ["a"],
    "v2": ["a", "c"],
    "v3": ["c"],
    "v4": ["b"],
    "v5": ["a", "b"],
}


@pytest.fixture
def example_graph() -> AttributedGraph:
    return AttributedGraph.from_data(EXAMPLE_EDGES, EXAMPLE_ATTRS)


@pytest.fixture
def example_files(tmp_path):
    edges = tmp_path / "g.tsv"
    attrs = tmp_path / "a.tsv"
    edges.write_text("".join(f"{u}\t{v}\n" for u, v in EXAMPLE_EDGES))
    attrs.write_text(
        "".join(f"{v}\t{','.join(vals)}\n" for v, vals in EXAMPLE_ATTRS.items())
    )
    return str(edges), str(attrs)


def value_ids(graph: AttributedGraph, *names: str) -> tuple[int, ...]:
    return tuple(sorted(graph.values.lookup(n) for n in names))


def vertex_ids(graph: AttributedGraph, *names: str) -> tuple[int, ...]:
    return tuple(sorted(graph.vertices.lookup(n) for n in names))
