"""Sparse approximate Cholesky factorization of graph Laplacians by
randomized elimination with clique sampling, plus an iterative-refinement
solver and a dense verification oracle."""

from ._kernels import NUMBA_ENABLED, backend_name, get_backend
from .factorizer import (Config, DiagnosticsRow, Factorization, RunStats,
                         Variant, choose_vertex_low_degree,
                         choose_vertex_random, effective_rho,
                         random_permutation, sparse_cholesky)
from .multigraph import DedupScratch, MultiEdge, MultiGraph
from .rng import SplitMix64, derive_stream
from .sampling import (AliasTable, CliqueSampleOutput, alias_build,
                       alias_sample, alias_sample_many, clique_sample)
from .solver import (SolveReport, apply_precond, iterative_refinement,
                     laplacian_operator, perm_apply, perm_apply_t,
                     project_mean_zero, refinement_iterations)

__version__ = "0.1.0"

__all__ = [
    "AliasTable", "CliqueSampleOutput", "Config", "DedupScratch",
    "DiagnosticsRow", "Factorization", "MultiEdge", "MultiGraph",
    "NUMBA_ENABLED", "RunStats", "SolveReport", "SplitMix64", "Variant",
    "alias_build", "alias_sample", "alias_sample_many", "apply_precond",
    "backend_name", "choose_vertex_low_degree", "choose_vertex_random",
    "clique_sample", "derive_stream", "effective_rho", "get_backend",
    "iterative_refinement", "laplacian_operator", "perm_apply",
    "perm_apply_t", "project_mean_zero", "random_permutation",
    "refinement_iterations", "sparse_cholesky",
]
