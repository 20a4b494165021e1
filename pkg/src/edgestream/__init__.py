"""Streaming edge partitioning toolkit.

Two streaming partitioners over a common on-disk graph interface:

* ``heistreame`` -- buffered multilevel partitioner over a contracted
  split-and-connect batch model,
* ``freighte`` -- one-pass partitioner over the implicit dual hypergraph,

plus evaluation metrics, a hashing baseline, and a synthetic graph
generator.
"""

from edgestream.errors import (
    BalanceInfeasibleError,
    EdgeStreamError,
    GraphFormatError,
    PartitionStageError,
)
from edgestream.graph_io import (
    BatchGraph,
    GraphHeader,
    convert_text_to_binary,
    load_batch,
    open_binary_stream,
    open_graph,
    open_metis_stream,
)
from edgestream.model import (
    CspacModel,
    ModelMode,
    augment_with_blocks,
    build_cspac,
    dump_model_metis,
    induced_edge_partition,
)
from edgestream.multilevel import (
    AlphaPolicy,
    BlockMinQueue,
    FennelParams,
    Hierarchy,
    coarsen,
    compute_alpha,
    compute_cluster_cap,
    fennel_gain,
    initial_partition,
    refine,
    select_block,
)
from edgestream.heistreame import PartitionState, RunConfig, commit, partition_stream
from edgestream.freighte import DualState, freighte_partition_stream, freighte_score
from edgestream.metrics import (
    MetricsReport,
    balance_report,
    compute_l_max,
    connectivity_sum,
    hash_partition,
    replication_factor,
)
from edgestream.rmat import generate_rmat

__version__ = "0.1.0"

__all__ = [
    "AlphaPolicy",
    "BalanceInfeasibleError",
    "BatchGraph",
    "BlockMinQueue",
    "CspacModel",
    "DualState",
    "EdgeStreamError",
    "FennelParams",
    "GraphFormatError",
    "GraphHeader",
    "Hierarchy",
    "MetricsReport",
    "ModelMode",
    "PartitionStageError",
    "PartitionState",
    "RunConfig",
    "augment_with_blocks",
    "balance_report",
    "build_cspac",
    "coarsen",
    "commit",
    "compute_alpha",
    "compute_cluster_cap",
    "compute_l_max",
    "connectivity_sum",
    "convert_text_to_binary",
    "dump_model_metis",
    "fennel_gain",
    "freighte_partition_stream",
    "freighte_score",
    "generate_rmat",
    "hash_partition",
    "induced_edge_partition",
    "initial_partition",
    "load_batch",
    "open_binary_stream",
    "open_graph",
    "open_metis_stream",
    "partition_stream",
    "refine",
    "replication_factor",
    "select_block",
]
