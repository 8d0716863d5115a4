"""Per-node local integral operators, global assembly, and the BVP driver.

Each interior node gets a weight vector z and a scalar source integral
f_tilde such that u_i = z . d_i + f_tilde, where d_i stacks the stencil's
interior nodal values (unknowns) followed by its boundary data. The weights
come from the subdomain integral representation of (Laplacian + lambda)u = f:
circle and disk influence coefficients projected through the local
interpolation systems, computed inverse-free with two transposed solves.

The direct path collocates with Gaussians; the stabilized path runs the same
algebra in the flat-limit-stable basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import stablebasis
from .errors import (AssemblyError, IllConditionedStencilError, InvalidParameterError,
                     SingularSystemError)
from .geometry import (DIRICHLET, NEUMANN, NodeSet, Rectangle, Stencil, Subdomain,
                       build_stencils, build_subdomains, generate_quasi_uniform,
                       spacing_for_target)
from .kernels import GaussianKernel, gaussian_gradient, gaussian_matrix
from .quadrature import (DEFAULT_ANGULAR_ORDER, DEFAULT_CIRCLE_ORDER,
                         DEFAULT_RADIAL_ORDER, SubdomainRules, influence_coefficients)

COND_LIMIT = 1e15


@dataclass
class ProblemSpec:
    """Helmholtz-type problem (Laplacian + lam) u = f with boundary data.

    All callables take an (m, 2) point array and return an (m,) array.
    exact_solution is used only for error reporting.
    """

    lam: float
    source: Callable
    dirichlet: Callable | None = None
    neumann: Callable | None = None
    exact_solution: Callable | None = None


@dataclass
class LocalOperator:
    """Weights of one collocation node: u_i = z . d_i + f_tilde."""

    stencil: Stencil
    z: np.ndarray
    f_tilde: float


@dataclass
class GlobalSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    column_map: np.ndarray      # interior node id -> unknown index (identity here)


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual: float
    method: str                 # 'gmres' or 'direct'
    converged: bool


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the end-to-end solve; either h or n_int_target fixes the mesh."""

    h: float | None = None
    n_int_target: int | None = None
    n: int = 25
    epsilon: float = 1.0
    method: str = "slbdim"
    c_R: float = 0.9
    circle_order: int = DEFAULT_CIRCLE_ORDER
    radial_order: int = DEFAULT_RADIAL_ORDER
    angular_order: int = DEFAULT_ANGULAR_ORDER
    tol: float = 1e-12
    restart: int = 50
    maxit: int = 1000
    fallback_eps_scale: float = stablebasis.FALLBACK_EPS_SCALE
    cond_limit: float = COND_LIMIT


@dataclass
class Discretization:
    """Geometry shared across solves with the same mesh and stencil size."""

    nodes: NodeSet
    stencils: list
    subdomains: list
    rules: list


def prepare_geometry(domain: Rectangle, config: SolverConfig) -> Discretization:
    if config.h is not None:
        h = config.h
    elif config.n_int_target is not None:
        h = spacing_for_target(domain, config.n_int_target)
    else:
        raise InvalidParameterError("config must set h or n_int_target")
    nodes = generate_quasi_uniform(domain, h)
    stencils = build_stencils(nodes, config.n)
    subdomains = build_subdomains(nodes, config.c_R)
    rules = [SubdomainRules.build(s, config.circle_order, config.radial_order,
                                  config.angular_order) for s in subdomains]
    return Discretization(nodes, stencils, subdomains, rules)


def operator_matrix_b(problem: ProblemSpec, basis_values: np.ndarray,
                      basis_gradients=None) -> np.ndarray:
    """Matrix applying the split right-hand-side operator to each basis function.

    For the Helmholtz split b = f - lam*u this is -lam times the basis value
    matrix; the gradient argument is accepted for operators that need it.
    """
    return -problem.lam * np.asarray(basis_values, dtype=float)


def _boundary_kinds(nodes: NodeSet, stencil: Stencil):
    """(points, normals, bc kind) for the stencil's boundary members, in order."""
    gids = stencil.members[stencil.n_int:]
    pts = nodes.all_points[gids]
    idx = gids - nodes.n_int
    normals = nodes.normals[idx]
    kinds = [nodes.domain.bc[s] for s in nodes.segments[idx]]
    return pts, normals, kinds


def _interpolation_rows_direct(kernel, nodes, stencil, member_pts):
    """Collocation matrix: value rows for interior members, boundary-operator
    rows (value or normal-derivative) for boundary members."""
    A = gaussian_matrix(kernel, member_pts, member_pts)
    if stencil.n_int == len(stencil.members) or nodes.domain is None:
        return A
    bpts, bnormals, kinds = _boundary_kinds(nodes, stencil)
    neu = [j for j, k in enumerate(kinds) if k == NEUMANN]
    if neu:
        g = gaussian_gradient(kernel, bpts[neu], member_pts)
        rows = (bnormals[neu, 0:1] * g[:, :, 0] + bnormals[neu, 1:2] * g[:, :, 1])
        A[stencil.n_int + np.asarray(neu)] = rows
    return A


def build_local_operator_direct(stencil: Stencil, subdomain: Subdomain,
                                problem: ProblemSpec, nodes: NodeSet, epsilon: float,
                                rules: SubdomainRules,
                                cond_limit: float = COND_LIMIT) -> LocalOperator:
    """Local weights in the direct Gaussian basis.

    Raises IllConditionedStencilError when the interpolation matrix condition
    exceeds cond_limit; that is the known failure mode of flat Gaussians.
    """
    kernel = GaussianKernel(epsilon)
    member_pts = nodes.all_points[stencil.members]
    A = _interpolation_rows_direct(kernel, nodes, stencil, member_pts)
    kappa = np.linalg.cond(A)
    if not np.isfinite(kappa) or kappa > cond_limit:
        raise IllConditionedStencilError(
            kappa, f"stencil {stencil.center_index}: condition {kappa:.3e} "
                   f"exceeds {cond_limit:.1e}")
    A_tilde = gaussian_matrix(kernel, member_pts, member_pts)
    coeffs = influence_coefficients(
        subdomain, lambda p: gaussian_matrix(kernel, p, member_pts),
        problem.source, rules, stencil_id=stencil.center_index)
    A_b = operator_matrix_b(problem, A_tilde)
    s = np.linalg.solve(A_tilde.T, coeffs.g)
    z = np.linalg.solve(A.T, coeffs.h + A_b.T @ s)
    return LocalOperator(stencil, z, coeffs.f_tilde)


def build_local_operator_stable(stencil: Stencil, subdomain: Subdomain,
                                problem: ProblemSpec, nodes: NodeSet, epsilon: float,
                                rules: SubdomainRules,
                                fallback_eps_scale: float = stablebasis.FALLBACK_EPS_SCALE
                                ) -> LocalOperator:
    """Local weights computed in the flat-limit-stable basis.

    Identical contract to the direct operator; all interpolation systems use
    the psi-basis, with boundary members contributing boundary-operator rows.
    """
    member_pts = nodes.all_points[stencil.members]
    fact = stablebasis.factorize(member_pts, epsilon, fallback_threshold=fallback_eps_scale)
    B_tilde = stablebasis.eval_values(fact, member_pts)
    B = B_tilde
    if stencil.n_int < len(stencil.members) and nodes.domain is not None:
        bpts, bnormals, kinds = _boundary_kinds(nodes, stencil)
        neu = [j for j, k in enumerate(kinds) if k == NEUMANN]
        if neu:
            B = B_tilde.copy()
            B[stencil.n_int + np.asarray(neu)] = stablebasis.eval_boundary_operator(
                fact, bpts[neu], bnormals[neu], NEUMANN)
    coeffs = influence_coefficients(
        subdomain, lambda p: stablebasis.eval_values(fact, p),
        problem.source, rules, stencil_id=stencil.center_index)
    B_b = operator_matrix_b(problem, B_tilde)
    s = np.linalg.solve(B_tilde.T, coeffs.g)
    z = np.linalg.solve(B.T, coeffs.h + B_b.T @ s)
    return LocalOperator(stencil, z, coeffs.f_tilde)


def assemble(local_ops: list, nodes: NodeSet, problem: ProblemSpec) -> GlobalSystem:
    """Global sparse system over interior unknowns.

    Row i encodes u_i - sum_j z_ij u_j = f_tilde_i + boundary data terms;
    Dirichlet and Neumann data enter the right-hand side only.
    """
    n_int = nodes.n_int
    n_total = n_int + nodes.n_bnd
    rows, cols, vals = [], [], []
    rhs = np.zeros(n_int)
    for op in local_ops:
        i = op.stencil.center_index
        members = op.stencil.members
        if members.min() < 0 or members.max() >= n_total:
            raise AssemblyError(f"stencil {i} references unknown node id")
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        interior = members[:op.stencil.n_int]
        rows.extend([i] * len(interior))
        cols.extend(interior.tolist())
        vals.extend((-op.z[:op.stencil.n_int]).tolist())
        rhs[i] += op.f_tilde
        if op.stencil.n_int < len(members):
            bpts, _, kinds = _boundary_kinds(nodes, op.stencil)
            zb = op.z[op.stencil.n_int:]
            for p, k, zj in zip(bpts, kinds, zb):
                data_fn = problem.dirichlet if k == DIRICHLET else problem.neumann
                if data_fn is None:
                    raise AssemblyError(f"missing {k} data for boundary member of stencil {i}")
                rhs[i] += zj * float(np.asarray(data_fn(p[None, :])).ravel()[0])
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n_int, n_int)).tocsr()
    if np.any(matrix.diagonal() == 0.0):
        raise AssemblyError("zero diagonal entry in assembled system")
    return GlobalSystem(matrix, rhs, np.arange(n_int))


def solve(system: GlobalSystem, tol: float = 1e-12, restart: int = 50,
          maxit: int = 1000) -> SolveReport:
    """Restarted GMRES with a direct sparse fallback on stagnation."""
    if tol <= 0.0:
        raise InvalidParameterError("tolerance must be positive")
    A, b = system.matrix, system.rhs
    bnorm = np.linalg.norm(b)
    iters = [0]

    def _count(_):
        iters[0] += 1

    x, info = spla.gmres(A, b, rtol=tol, atol=0.0, restart=restart,
                         maxiter=max(1, maxit // max(1, restart)),
                         callback=_count, callback_type="pr_norm")
    residual = np.linalg.norm(b - A @ x) / (bnorm if bnorm > 0 else 1.0)
    if info == 0 and np.isfinite(residual) and residual <= 10.0 * tol:
        return SolveReport(x, iters[0], float(residual), "gmres", True)
    x = spla.spsolve(A.tocsc(), b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("direct sparse factorization produced non-finite values")
    residual = np.linalg.norm(b - A @ x) / (bnorm if bnorm > 0 else 1.0)
    return SolveReport(x, iters[0], float(residual), "direct",
                       bool(residual <= 10.0 * tol))


@dataclass
class BvpSolution:
    """Interior nodal solution plus the geometry it lives on."""

    nodes: NodeSet
    stencils: list
    values: np.ndarray
    report: SolveReport
    config: SolverConfig


def solve_bvp(domain: Rectangle, problem: ProblemSpec, config: SolverConfig,
              discretization: Discretization | None = None) -> BvpSolution:
    """End-to-end solve: nodes, stencils, subdomains, local operators, GMRES."""
    if config.method not in ("lbdim", "slbdim"):
        raise InvalidParameterError(f"unknown method {config.method!r}")
    disc = discretization or prepare_geometry(domain, config)
    nodes = disc.nodes
    ops = []
    for stencil, sub, rules in zip(disc.stencils, disc.subdomains, disc.rules):
        if config.method == "lbdim":
            op = build_local_operator_direct(stencil, sub, problem, nodes,
                                             config.epsilon, rules,
                                             cond_limit=config.cond_limit)
        else:
            op = build_local_operator_stable(stencil, sub, problem, nodes,
                                             config.epsilon, rules,
                                             fallback_eps_scale=config.fallback_eps_scale)
        ops.append(op)
    system = assemble(ops, nodes, problem)
    report = solve(system, tol=config.tol, restart=config.restart, maxit=config.maxit)
    return BvpSolution(nodes, disc.stencils, report.solution, report, config)


def save_field(path, nodes: NodeSet, values) -> None:
    """Write interior nodal values in the line-oriented text format (v1)."""
    values = np.asarray(values, dtype=float)
    if len(values) != nodes.n_int:
        raise InvalidParameterError("field length must match interior node count")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"field v1 {nodes.n_int}\n")
        for (x, y), u in zip(nodes.interior, values):
            f.write(f"{x:.17g} {y:.17g} {u:.17g}\n")


def load_field(path):
    """Read a field file; returns (points, values)."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 3 or header[0] != "field" or header[1] != "v1":
            raise InvalidParameterError(f"unrecognized field header: {header}")
        count = int(header[2])
        data = np.array([[float(v) for v in f.readline().split()]
                         for _ in range(count)], dtype=float).reshape(count, 3)
    return data[:, :2], data[:, 2]
