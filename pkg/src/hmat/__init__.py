"""Hierarchical matrices with per-block error budgets.

Dense kernel matrices ``B[i, j] = K(||x_i - x_j||)`` over a particle cloud
admit blockwise low-rank compression once well-separated clusters are
tiled off by an admissibility condition.  This package builds such
H-matrix approximations and, in particular, compares three ways of turning
one requested matrix-wide tolerance ``eps`` into per-block budgets:

- ``BREM``: the same relative Frobenius tolerance for every block;
- ``MREM``: absolute Frobenius budgets proportional to ``sqrt(m * n)``,
  equalising error per entry, which needs ``||B||_F`` up front;
- ``MREMmax``: absolute entrywise budgets from the induced 1-norm, giving
  an elementwise error bound.

All three guarantee the same global bound; the matrix-wise methods spend
the budget where the matrix actually has mass and so store less.  The
``||B||_F`` they need can come from an exact sweep, a stochastic column
sampler with a jackknife stopping rule, or a coarse compressed copy.

Blocks are approximated by partially pivoted adaptive cross approximation
run tight, then recompressed through a thin SVD of the factors.  The
:mod:`hmat.bench` module (also installed as the ``hmat-bench`` command)
runs method comparisons over the built-in particle geometries and kernels
and writes one CSV row per build.

Randomness is always explicit: clouds, samplers, and benchmarks take
integer seeds and use NumPy's PCG64 generator, so every result here is
reproducible from its recorded parameters.
"""

from .assembly import (
    BuildConfig,
    BuildReport,
    ErrorReport,
    HMatrix,
    achieved_error,
    assemble,
    improvement_factor,
)
from .clustering import (
    Block,
    BlockPartition,
    ClusterNode,
    ClusterTree,
    build_block_partition,
    build_cluster_tree,
    is_admissible,
)
from .geometry import (
    Geometry,
    Kernel,
    KernelMatrix,
    MatrixBlockView,
    PointCloud,
    entry,
    generate_points,
)
from .lowrank import (
    LowRankFactors,
    OuterProductSVD,
    StopCriterion,
    aca,
    build_block,
    outer_product_svd,
    stage_tolerances,
    truncate_fro,
    truncate_maxnorm,
)
from .normest import (
    NormEstimate,
    UnconvergedEstimateError,
    estimate_fro_stochastic,
    estimate_fro_via_coarse,
    exact_fro_norm,
    induced_one_norm,
)
from .serialization import load_hmatrix, save_hmatrix
from .tolerances import (
    BlockBudget,
    BudgetKind,
    GlobalBoundCheck,
    Method,
    TolerancePolicy,
    block_budget,
    fnpe,
    verify_global_bound,
)

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockBudget",
    "BlockPartition",
    "BudgetKind",
    "BuildConfig",
    "BuildReport",
    "ClusterNode",
    "ClusterTree",
    "ErrorReport",
    "Geometry",
    "GlobalBoundCheck",
    "HMatrix",
    "Kernel",
    "KernelMatrix",
    "LowRankFactors",
    "MatrixBlockView",
    "Method",
    "NormEstimate",
    "OuterProductSVD",
    "PointCloud",
    "StopCriterion",
    "TolerancePolicy",
    "UnconvergedEstimateError",
    "aca",
    "achieved_error",
    "assemble",
    "block_budget",
    "build_block",
    "build_block_partition",
    "build_cluster_tree",
    "entry",
    "estimate_fro_stochastic",
    "estimate_fro_via_coarse",
    "exact_fro_norm",
    "fnpe",
    "generate_points",
    "improvement_factor",
    "induced_one_norm",
    "is_admissible",
    "load_hmatrix",
    "outer_product_svd",
    "save_hmatrix",
    "stage_tolerances",
    "truncate_fro",
    "truncate_maxnorm",
    "verify_global_bound",
    "__version__",
]
