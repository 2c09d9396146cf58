"""Anytime graph node embeddings from streaming similarity-matrix sketches."""

from .graph import Graph, load_edgelist, transition_row, write_edgelist
from .linalg import (
    CapabilityError,
    SvdResult,
    covariance_error,
    projection_error,
    svd_oracle_embedding,
    thin_svd,
)
from .pipeline import RunConfig, embed_oracle, embed_stream, node_order, similarity_matrix
from .similarity import (
    PprConfig,
    PprConvergenceError,
    SimilarityRow,
    log_transform,
    ppr_exact,
    ppr_monte_carlo,
    similarity_row,
)
from .sketch import (
    Embedding,
    FrequentDirectionsSketch,
    HashingSketch,
    RandomProjectionSketch,
    SamplingSketch,
    load_sketch,
    make_sketch,
    merge,
    read_embedding_text,
    save_sketch,
    write_embedding_text,
)
from .evaluation import (
    EvalSplit,
    LabelSet,
    classify,
    edge_features,
    link_predict,
    link_predict_presplit,
    make_split,
    sample_non_edges,
)

__version__ = "0.1.0"

__all__ = [
    "CapabilityError",
    "Embedding",
    "EvalSplit",
    "FrequentDirectionsSketch",
    "Graph",
    "HashingSketch",
    "LabelSet",
    "PprConfig",
    "PprConvergenceError",
    "RandomProjectionSketch",
    "RunConfig",
    "SamplingSketch",
    "SimilarityRow",
    "SvdResult",
    "classify",
    "covariance_error",
    "edge_features",
    "embed_oracle",
    "embed_stream",
    "link_predict",
    "link_predict_presplit",
    "load_edgelist",
    "load_sketch",
    "log_transform",
    "make_sketch",
    "make_split",
    "merge",
    "node_order",
    "ppr_exact",
    "ppr_monte_carlo",
    "projection_error",
    "read_embedding_text",
    "sample_non_edges",
    "save_sketch",
    "similarity_matrix",
    "similarity_row",
    "svd_oracle_embedding",
    "thin_svd",
    "transition_row",
    "write_edgelist",
    "write_embedding_text",
]
