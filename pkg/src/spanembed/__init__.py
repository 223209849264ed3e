"""Spanning embeddings of max-degree-2 graphs into dense random hosts."""

__version__ = "0.1.0"

from ._accel import backend
from .embedder import EmbedOutcome, embed, verify_embedding
from .goodness import GoodnessParams, check_p1, check_p2, partition_sites
from .graph import Degree2Spec, Graph, gen_degree2, gen_gnp, gen_random_degree2, read_edge_list, write_edge_list
from .matching import BipartiteInstance, DeficiencyWitness, Matching, max_matching, saturating_or_witness
from .pattern import PatternPartition, maximalize, partition_pattern

__all__ = [
    "BipartiteInstance",
    "DeficiencyWitness",
    "Degree2Spec",
    "EmbedOutcome",
    "GoodnessParams",
    "Graph",
    "Matching",
    "PatternPartition",
    "backend",
    "check_p1",
    "check_p2",
    "embed",
    "gen_degree2",
    "gen_gnp",
    "gen_random_degree2",
    "max_matching",
    "maximalize",
    "partition_pattern",
    "partition_sites",
    "read_edge_list",
    "saturating_or_witness",
    "verify_embedding",
    "write_edge_list",
]
