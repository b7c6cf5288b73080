"""Description-length accounting for the pattern model and the database.

All lengths are real-valued Shannon code lengths in bits (base-2 logs, no
integer rounding) with the 0*log2(0) = 0 convention.  The total splits into
a model part (two code tables priced against the standard table) and a data
part; the data part equals the number of record uses times the conditional
entropy of leafsets given coresets, and reduces to the closed form
sum_e c_e*log2(c_e) - sum_records f*log2(f) over the inverted database.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log2

from .errors import InputError, InvariantError
from .graph import AttributedGraph, Coreset, Leafset, MappingTable, ValueSet
from .inverted import InvertedDatabase


def xlog2(n: float) -> float:
    """n * log2(n) with the entropy convention that 0 maps to 0."""
    return n * log2(n) if n > 0 else 0.0


def leaf_code_length(f_l: int, f_c: int) -> float:
    """Conditional code length -log2(f_l / f_c) in bits."""
    if f_l < 1 or f_l > f_c:
        raise InvariantError(f"leaf frequency {f_l} outside [1, {f_c}]")
    return log2(f_c) - log2(f_l)


class StandardCodeTable:
    """Per-value Shannon lengths from global occurrence frequencies."""

    def __init__(self, counts: dict[int, int]) -> None:
        self.counts = counts
        self.total = sum(counts.values())
        if self.total == 0:
            raise InputError("empty attribute universe")
        self.lengths = {a: log2(self.total) - log2(c) for a, c in counts.items()}

    @classmethod
    def from_graph(cls, graph: AttributedGraph) -> "StandardCodeTable":
        return cls(graph.value_counts())

    def length(self, value: int) -> float:
        return self.lengths[value]

    def set_cost(self, values: ValueSet) -> float:
        """Bits to spell out a value set symbol by symbol."""
        return sum(self.lengths[a] for a in values)


class CoreCodeTable:
    """Code lengths for the fixed coreset universe.

    Lengths come from the relative usage of each coreset in the mapping
    table.  With an all-singleton universe this reproduces the standard code
    table exactly; zero-usage coresets carry no code and stay out of the
    model.
    """

    def __init__(self, codes: dict[Coreset, float]) -> None:
        self.codes = codes

    @classmethod
    def from_mapping(cls, mapping: MappingTable) -> "CoreCodeTable":
        usages = {c: len(p) for c, p in mapping.entries.items() if p}
        total = sum(usages.values())
        if total == 0:
            raise InputError("no coreset occurs in the graph")
        return cls({c: log2(total) - log2(u) for c, u in usages.items()})

    def code(self, coreset: Coreset) -> float:
        return self.codes[coreset]


@dataclass
class Model:
    """The compressing pattern model: standard table plus both code tables.

    ``ct_l`` caches the per-record leaf code and is refreshed after every
    merge; every cached entry must equal the recomputation from the current
    record and coreset-total frequencies.
    """

    st: StandardCodeTable
    ct_c: CoreCodeTable
    ct_l: dict[tuple[Coreset, Leafset], float] = field(default_factory=dict)

    def refresh_leaf_codes(self, db: InvertedDatabase) -> None:
        self.ct_l = {
            (coreset, leafset): leaf_code_length(f, db.core_totals[coreset])
            for coreset, leafset, f in db.record_items()
        }

    def leaf_row_cost(self, coreset: Coreset, leafset: Leafset, code_l: float) -> float:
        """Materialize the leafset, point at the coreset, then the code itself."""
        return self.st.set_cost(leafset) + self.ct_c.code(coreset) + code_l

    def core_table_length(self) -> float:
        return sum(
            self.st.set_cost(coreset) + code for coreset, code in self.ct_c.codes.items()
        )


def data_length(db: InvertedDatabase) -> float:
    """Encoded size of the database in bits (closed column-sum form)."""
    bits = sum(xlog2(t) for t in db.core_totals.values() if t)
    for _, _, f in db.record_items():
        bits -= xlog2(f)
    return bits


def conditional_entropy(db: InvertedDatabase) -> float:
    """Average leaf-code bits per record use."""
    if db.total_uses == 0:
        raise InvariantError("conditional entropy of an empty database")
    return data_length(db) / db.total_uses


def model_length(model: Model, db: InvertedDatabase) -> float:
    bits = model.core_table_length()
    for coreset, leafset, f in db.record_items():
        code_l = leaf_code_length(f, db.core_totals[coreset])
        bits += model.leaf_row_cost(coreset, leafset, code_l)
    return bits


def total_length(model: Model, db: InvertedDatabase) -> float:
    return model_length(model, db) + data_length(db)


def dl_report(model: Model, db: InvertedDatabase) -> dict:
    bits_model = model_length(model, db)
    bits_data = data_length(db)
    return {
        "bits_model": bits_model,
        "bits_data": bits_data,
        "bits_total": bits_model + bits_data,
        "records": len(db),
        "s": db.total_uses,
    }
