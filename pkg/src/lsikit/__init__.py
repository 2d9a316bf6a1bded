"""Numerical toolkit for SVD-based graph clustering and latent semantic
indexing with similarity-driven matrix completion."""

from .matrix import (
    EigenPairs,
    SparseMatrix,
    SvdFactors,
    as_dense,
    frobenius_norm,
    kmeans,
    nmf_factorize,
    rank_k_reconstruct,
    symmetric_eigen_topk,
    truncated_svd,
)
from .graphs import (
    AffinityGraph,
    DirectedWeights,
    KernelSpec,
    bipartite_embed,
    bipartite_normalize,
    degree_matrix,
    diagonal_shift,
    directed_symmetrize,
    directed_weights,
    kernel_affinity,
    normalize_affinity,
)
from .cluster import (
    ClusteringRun,
    QualityScores,
    bipartite_svd_cluster,
    eval_clustering,
    nmf_cluster,
    spectral_cluster,
    two_moons,
    two_rings,
)
from .lsi import (
    CompletionTrace,
    SimilarityMatrix,
    complete,
    completion_step,
    perfect_pair_percentage,
    word_similarity,
)
from .retrieval import (
    EvalReport,
    evaluate,
    interpolated_avg_precision,
    pseudo_precision,
    score_query,
)
from .corpus import (
    Document,
    TermDocMatrix,
    TokenizerConfig,
    Vocabulary,
    build_matrix,
    build_query_matrix,
    column_normalize,
    default_stoplist,
    log_scale,
    parse_qrels,
    parse_smart,
    tokenize,
)
from .mmio import read_matrix, write_matrix

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph",
    "ClusteringRun",
    "CompletionTrace",
    "DirectedWeights",
    "Document",
    "EigenPairs",
    "EvalReport",
    "KernelSpec",
    "QualityScores",
    "SimilarityMatrix",
    "SparseMatrix",
    "SvdFactors",
    "TermDocMatrix",
    "TokenizerConfig",
    "Vocabulary",
    "as_dense",
    "bipartite_embed",
    "bipartite_normalize",
    "bipartite_svd_cluster",
    "build_matrix",
    "build_query_matrix",
    "column_normalize",
    "complete",
    "completion_step",
    "default_stoplist",
    "degree_matrix",
    "diagonal_shift",
    "directed_symmetrize",
    "directed_weights",
    "eval_clustering",
    "evaluate",
    "frobenius_norm",
    "interpolated_avg_precision",
    "kernel_affinity",
    "kmeans",
    "log_scale",
    "nmf_cluster",
    "nmf_factorize",
    "normalize_affinity",
    "parse_qrels",
    "parse_smart",
    "perfect_pair_percentage",
    "pseudo_precision",
    "rank_k_reconstruct",
    "read_matrix",
    "score_query",
    "spectral_cluster",
    "symmetric_eigen_topk",
    "tokenize",
    "truncated_svd",
    "two_moons",
    "two_rings",
    "word_similarity",
    "write_matrix",
]
