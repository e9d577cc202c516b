"""Sparse-measure training of shallow ReLU networks on the sphere.

Dual certificates are maximized exactly over the hyperplane arrangement of
the data, which gives checkable certificates of optimality, localization and
uniqueness.
"""

from .arrangement import (Stratum, cover_count, enumerate_strata, full_regions,
                          pattern_feasible, sparsity_bound, strata_by_codim)
from .certificate import (CandidatePoint, DualCertificate, ExtendedSupport, candidates,
                          check_LC, check_ND, dual_from_primal, extended_support,
                          min_norm_certificate_approx, sup_abs)
from .conditions import check_full_rank, check_independence, permanent
from .geometry import Flat, ProblemInstance, SparseMeasure, flat_from_normals, normalize
from .operators import adjoint_eval, adjoint_grad, derivative_matrix, evaluation_matrix, forward
from .solver import SolverConfig, SolveReport, solve, stability_sweep, sweep_lambda

__version__ = "0.1.0"
