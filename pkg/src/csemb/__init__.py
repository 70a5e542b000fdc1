"""csemb: compressive spectral embeddings of sparse matrices.

Approximates the pairwise geometry of eigenvector embeddings
E = [f(l1) v1 ... f(ln) vn] without any eigendecomposition, by applying a
finite Legendre expansion of f to the matrix and projecting onto random
sign vectors. Includes a desk-scale dense oracle and a clustering harness
for validation.
"""

from .cluster import (
    ClusterAssignment,
    ClusterExperiment,
    ModularityScore,
    cluster_experiment,
    kmeans,
    modularity,
)
from .engine import (
    EmbedConfig,
    EmbeddingMatrix,
    SpmvCounter,
    default_dimension,
    estimate_spectral_norm,
    fast_embed_cascaded,
    fast_embed_eig,
    fast_embed_general,
    fold_seed,
    jl_dimension,
    sample_projection,
)
from .errors import (
    CsembError,
    DivergenceError,
    InputFormatError,
    OracleCapError,
    OracleError,
)
from .functions import (
    SpectralFunction,
    commute_time,
    constant,
    identity,
    indicator_above,
    odd_extension,
    parse_function,
    remapped,
    root_function,
    tabulated,
)
from .legendre import (
    ApproximationReport,
    LegendreExpansion,
    QuadratureSpec,
    approximation_report,
    expansion_eval,
    legendre_coefficients,
    legendre_eval,
    legendre_table,
)
from .oracle import (
    DistortionReport,
    ExactEmbedding,
    ORACLE_CAP,
    distance_bound_audit,
    distortion_percentiles,
    exact_embedding,
    normalized_correlation,
    sample_pairs,
)
from .sparse import (
    AffineMap,
    KernelSpec,
    SparseMatrix,
    dilate,
    kernel_matrix,
    normalized_adjacency,
    rescale_spectrum,
    scale_values,
    spmv_multi,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "ApproximationReport",
    "ClusterAssignment",
    "ClusterExperiment",
    "CsembError",
    "DistortionReport",
    "DivergenceError",
    "EmbedConfig",
    "EmbeddingMatrix",
    "ExactEmbedding",
    "InputFormatError",
    "KernelSpec",
    "LegendreExpansion",
    "ModularityScore",
    "ORACLE_CAP",
    "OracleCapError",
    "OracleError",
    "QuadratureSpec",
    "SparseMatrix",
    "SpectralFunction",
    "SpmvCounter",
    "approximation_report",
    "cluster_experiment",
    "commute_time",
    "constant",
    "default_dimension",
    "dilate",
    "distance_bound_audit",
    "distortion_percentiles",
    "estimate_spectral_norm",
    "exact_embedding",
    "expansion_eval",
    "fast_embed_cascaded",
    "fast_embed_eig",
    "fast_embed_general",
    "fold_seed",
    "identity",
    "indicator_above",
    "jl_dimension",
    "kernel_matrix",
    "kmeans",
    "legendre_coefficients",
    "legendre_eval",
    "legendre_table",
    "modularity",
    "normalized_adjacency",
    "normalized_correlation",
    "odd_extension",
    "parse_function",
    "remapped",
    "rescale_spectrum",
    "root_function",
    "sample_pairs",
    "sample_projection",
    "scale_values",
    "spmv_multi",
    "tabulated",
]
