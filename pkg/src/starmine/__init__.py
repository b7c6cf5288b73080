"""starmine: compressing star-shaped attribute patterns in attributed graphs.

The miner greedily merges leaf-value sets under a minimum-description-length
objective with conditional-entropy code lengths; the mined patterns support
node-attribute completion scoring and rule-coverage evaluation.
"""

from .errors import InputError, InvariantError, StarmineError
from .estimator import StarPatternMiner
from .graph import (
    AttributedGraph,
    MappingTable,
    SymbolTable,
    build_mapping_table,
    connected_components,
    default_coresets,
    load_coresets,
    load_graph,
)
from .inverted import InvertedDatabase, MergeReport, build_inverted_database
from .encoding import (
    CoreCodeTable,
    Model,
    StandardCodeTable,
    conditional_entropy,
    data_length,
    leaf_code_length,
    model_length,
    total_length,
)
from .miner import (
    AttributeStar,
    CandidateStore,
    MineResult,
    MinerStats,
    data_gain,
    extract_patterns,
    generate_candidates,
    mine,
    mine_basic,
    mine_partial,
    net_gain,
    update_after_merge,
)
from .scoring import (
    fuse_scores,
    ndcg_at_k,
    recall_at_k,
    score_node,
    similarity_weight,
)
from .rules import PairRule, coverage_ratio, split_to_pairs

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph",
    "AttributeStar",
    "CandidateStore",
    "CoreCodeTable",
    "InputError",
    "InvariantError",
    "InvertedDatabase",
    "MappingTable",
    "MergeReport",
    "MineResult",
    "MinerStats",
    "Model",
    "PairRule",
    "StandardCodeTable",
    "StarPatternMiner",
    "StarmineError",
    "SymbolTable",
    "build_inverted_database",
    "build_mapping_table",
    "conditional_entropy",
    "connected_components",
    "coverage_ratio",
    "data_gain",
    "data_length",
    "default_coresets",
    "extract_patterns",
    "fuse_scores",
    "generate_candidates",
    "leaf_code_length",
    "load_coresets",
    "load_graph",
    "mine",
    "mine_basic",
    "mine_partial",
    "model_length",
    "ndcg_at_k",
    "net_gain",
    "recall_at_k",
    "score_node",
    "similarity_weight",
    "split_to_pairs",
    "total_length",
    "update_after_merge",
]
