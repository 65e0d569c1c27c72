"""Correlation-network feature selection for labeled categorical datasets."""

from .community import CommunityPartition, louvain, modularity
from .correlation import (
    CorrelationMatrix,
    DistanceMatrix,
    SimilarityMatrix,
    rank_transform,
    spearman_matrix,
    to_distance,
    to_similarity,
)
from .dataset import (
    FeatureTable,
    Partition,
    class_proportions,
    load_dataset,
    partition,
    save_csv,
)
from .evaluation import (
    EvalReport,
    FeatureSubsetSpec,
    GBTParams,
    GradientBoostedTrees,
    PowerIterationPCA,
    evaluate,
    project_pca,
    train_gbt,
)
from .graph import (
    GammaEstimate,
    HubReport,
    SpanningTree,
    WeightedGraph,
    build_graph,
    degree_distribution,
    degrees,
    estimate_gamma,
    find_hubs,
    maximum_spanning_tree,
    minimum_spanning_tree,
)
from .pipeline import (
    EvalComparison,
    PipelineConfig,
    RunManifest,
    run_eval,
    run_pipeline,
    select_connected_hubs,
    stability_check,
)

__version__ = "0.1.0"

__all__ = [
    "CommunityPartition",
    "CorrelationMatrix",
    "DistanceMatrix",
    "EvalComparison",
    "EvalReport",
    "FeatureSubsetSpec",
    "FeatureTable",
    "GBTParams",
    "GammaEstimate",
    "GradientBoostedTrees",
    "HubReport",
    "Partition",
    "PipelineConfig",
    "PowerIterationPCA",
    "RunManifest",
    "SimilarityMatrix",
    "SpanningTree",
    "WeightedGraph",
    "build_graph",
    "class_proportions",
    "degree_distribution",
    "degrees",
    "estimate_gamma",
    "evaluate",
    "find_hubs",
    "load_dataset",
    "louvain",
    "maximum_spanning_tree",
    "minimum_spanning_tree",
    "modularity",
    "partition",
    "project_pca",
    "rank_transform",
    "run_eval",
    "run_pipeline",
    "save_csv",
    "select_connected_hubs",
    "spearman_matrix",
    "stability_check",
    "to_distance",
    "to_similarity",
    "train_gbt",
]
