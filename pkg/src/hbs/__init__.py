"""Black-box randomized compression of hierarchically block separable
operators: probe an n x n operator and its transpose with O(rank) random
vectors, rebuild a telescoping factorization level by level, then store,
apply, serialize, and benchmark the compressed form."""

import os

# Cap BLAS threading before numpy loads anything, so one env var governs
# all internal parallelism.
_threads = os.environ.get("HBS_THREADS")
if _threads:
    for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)
del os, _threads

from .compress import (
    CompressedNode,
    CompressionConfig,
    NodeSamples,
    SampleSet,
    compress,
    compress_from_samples,
    compute_discrepancy,
    compute_root,
    draw_samples,
    leaf_node_samples,
    lift_to_parent,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    FormatError,
    IllConditionedProbeError,
    ResourceLimitError,
)
from .factorization import (
    HbsFactorization,
    StorageReport,
    apply,
    apply_matrix,
    apply_transpose,
    random_hbs,
    storage,
    to_dense,
)
from .linalg import col, gaussian_matrix, lstsq_right, nullspace, power_method_relnorm
from .oracle import MatVecOracle
from .serialize import load_factorization, save_factorization
from .tree import ClusterTree, Node, build_tree, nodes_at_level

__version__ = "0.1.0"

__all__ = [
    "ClusterTree",
    "CompressedNode",
    "CompressionConfig",
    "ConfigurationError",
    "DimensionError",
    "FormatError",
    "HbsFactorization",
    "IllConditionedProbeError",
    "MatVecOracle",
    "Node",
    "NodeSamples",
    "ResourceLimitError",
    "SampleSet",
    "StorageReport",
    "apply",
    "apply_matrix",
    "apply_transpose",
    "build_tree",
    "col",
    "compress",
    "compress_from_samples",
    "compute_discrepancy",
    "compute_root",
    "draw_samples",
    "gaussian_matrix",
    "leaf_node_samples",
    "lift_to_parent",
    "load_factorization",
    "lstsq_right",
    "nodes_at_level",
    "nullspace",
    "power_method_relnorm",
    "random_hbs",
    "save_factorization",
    "storage",
    "to_dense",
]
