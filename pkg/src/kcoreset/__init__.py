"""k-means coresets: five constructions, a planted-clustering benchmark and distortion evaluation."""
from .benchmark import (BenchmarkInstance, CompositeSpec, clustering_distance, composite, confusion_matrix,
                        generate, planted_centers, planted_cluster_cost)
from .core import (Assignment, CenterSet, PointSet, WeightedCoreset, assign, centroid, cluster_costs,
                   clustering_cost, nearest, pairwise_sq_distances, squared_distance)
from .dimred import ProjectionModel, explained_variance, fit_pca, fit_random, project
from .evaluation import (DistortionReport, EvalConfig, aggregate, distortion, evaluate_benchmark,
                         evaluate_real)
from .kmeans import (SeedConfig, approx_meb, bicriteria, kmeanspp_indices, kmeanspp_seed, lloyd,
                     optimal_1d_kmeans)
from .movement import BicoConfig, RayConfig, bico_coreset, raymaker_coreset
from .sampling import GroupingConfig, SamplingConfig, group_coreset, sensitivity_coreset, streamkmpp_coreset

__version__ = "0.1.0"

__all__ = [
    "Assignment", "BenchmarkInstance", "BicoConfig", "CenterSet", "CompositeSpec", "DistortionReport",
    "EvalConfig", "GroupingConfig", "PointSet", "ProjectionModel", "RayConfig", "SamplingConfig",
    "SeedConfig", "WeightedCoreset", "aggregate", "approx_meb", "assign", "bico_coreset", "bicriteria",
    "centroid", "cluster_costs", "clustering_cost", "clustering_distance", "composite", "confusion_matrix",
    "distortion", "evaluate_benchmark", "evaluate_real", "explained_variance", "fit_pca", "fit_random",
    "generate", "group_coreset", "kmeanspp_indices", "kmeanspp_seed", "lloyd", "nearest",
    "optimal_1d_kmeans", "pairwise_sq_distances", "planted_centers", "planted_cluster_cost", "project",
    "raymaker_coreset", "sensitivity_coreset", "squared_distance", "streamkmpp_coreset",
]
