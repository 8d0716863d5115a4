"""Meshless local boundary-domain integral solver for 2D Helmholtz-type problems.

Solves (Laplacian + lambda) u = f on rectangles with Dirichlet/Neumann data by
collocating a subdomain integral representation at every interior node of a
quasi-uniform scattered node set. Local interpolation uses Gaussian RBFs,
either directly (lbdim) or through a flat-limit-stable basis change (slbdim)
that keeps the method accurate for arbitrarily small shape parameters.
"""

from .bench import (SweepResult, SweepRow, best_rms_over_eps, get_case, l2_error,
                    local_condition_number, rms, run_case, run_sweep)
from .errors import (AssemblyError, IllConditionedStencilError, InvalidDomainError,
                     InvalidParameterError, NumericFailureError, OutOfSubdomainError,
                     RankDeficiencyError, SingularityError, SingularSystemError,
                     SlbdimError, UndefinedMetricError, UnstableFactorizationError)
from .geometry import (NodeSet, Rectangle, Stencil, Subdomain, build_stencils,
                       build_subdomain, build_subdomains, generate_quasi_uniform,
                       spacing_for_target)
from .kernels import (DiskGreen, GaussianKernel, disk_green_normal_derivative,
                      disk_green_value, fundamental_solution, gaussian_laplacian,
                      gaussian_matrix, gaussian_value)
from .quadrature import (InfluenceCoefficients, QuadratureRule1D, SubdomainRules,
                         circle_rule, disk_rule, gauss_legendre, influence_coefficients)
from .solver import (BvpSolution, GlobalSystem, LocalOperator, ProblemSpec,
                     SolveReport, SolverConfig, assemble, build_local_operator_direct,
                     build_local_operator_stable, load_field, operator_matrix_b,
                     prepare_geometry, save_field, solve, solve_bvp)
from .stablebasis import (BasisFactorization, ExpansionTerm, eval_boundary_operator,
                          eval_gradients, eval_values, factorize)

__version__ = "0.1.0"
