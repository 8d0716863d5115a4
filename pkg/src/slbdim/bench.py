"""Benchmark harness: error metrics, manufactured-solution cases, sweeps, CSV.

Case 1: (Laplacian - 81) u = f on [-1,1]^2, exact u = sin(x^2 + y).
Case 2: (Laplacian + 2) u = f on [0,1]^2,  exact u = sin(sqrt3 x) sinh y
        + cos(sqrt2 y) + x - 2y, f = 2x - 4y.
Both use Dirichlet data sampled from the exact solution, so every interior
nodal error is measurable exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, SlbdimError, UndefinedMetricError
from .geometry import NodeSet, Rectangle
from .kernels import GaussianKernel, gaussian_matrix
from .solver import Discretization, ProblemSpec, SolverConfig, prepare_geometry, solve_bvp

CSV_HEADER = ("case,method,N_int,N_bnd,n,eps,l2_error,rms,"
              "log10_max_cond,iters,runtime_ms,status")


def l2_error(exact, approx) -> float:
    """Relative l2 error sqrt(sum (e-a)^2 / sum e^2)."""
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if exact.shape != approx.shape or exact.size < 1:
        raise InvalidParameterError("vectors must share a nonzero length")
    denom = float((exact ** 2).sum())
    if denom == 0.0:
        raise UndefinedMetricError("reference vector is identically zero")
    return math.sqrt(float(((exact - approx) ** 2).sum()) / denom)


def rms(exact, approx) -> float:
    """Root mean square error sqrt(sum (e-a)^2 / N)."""
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if exact.shape != approx.shape or exact.size < 1:
        raise InvalidParameterError("vectors must share a nonzero length")
    return math.sqrt(float(((exact - approx) ** 2).sum()) / exact.size)


def local_condition_number(stencil_points, epsilon: float) -> float:
    """2-norm condition of the direct Gaussian collocation matrix on a stencil."""
    pts = np.atleast_2d(np.asarray(stencil_points, dtype=float))
    A = gaussian_matrix(GaussianKernel(epsilon), pts, pts)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 0.0 or not np.isfinite(sv[-1]):
        return np.inf
    return float(sv[0] / sv[-1])


def max_local_condition(nodes: NodeSet, stencils, epsilon: float) -> float:
    return max(local_condition_number(nodes.all_points[s.members], epsilon)
               for s in stencils)


def _case1_exact(p):
    return np.sin(p[:, 0] ** 2 + p[:, 1])


def _case1_source(p):
    x, y = p[:, 0], p[:, 1]
    return 2.0 * np.cos(x * x + y) - (4.0 * x * x + 1.0 + 81.0) * np.sin(x * x + y)


def _case2_exact(p):
    x, y = p[:, 0], p[:, 1]
    return np.sin(math.sqrt(3.0) * x) * np.sinh(y) + np.cos(math.sqrt(2.0) * y) + x - 2.0 * y


def _case2_source(p):
    return 2.0 * p[:, 0] - 4.0 * p[:, 1]


def get_case(case_id: int):
    """Domain and problem spec of a benchmark case."""
    if case_id == 1:
        domain = Rectangle(-1.0, 1.0, -1.0, 1.0)
        problem = ProblemSpec(lam=-81.0, source=_case1_source,
                              dirichlet=_case1_exact, exact_solution=_case1_exact)
    elif case_id == 2:
        domain = Rectangle(0.0, 1.0, 0.0, 1.0)
        problem = ProblemSpec(lam=2.0, source=_case2_source,
                              dirichlet=_case2_exact, exact_solution=_case2_exact)
    else:
        raise InvalidParameterError(f"unknown case id {case_id}")
    return domain, problem


@dataclass(frozen=True)
class SweepRow:
    case: int
    method: str
    n_int: int
    n_bnd: int
    n: int
    eps: float
    l2_error: float
    rms: float
    log10_max_cond: float
    iters: int
    runtime_ms: float
    status: str

    def to_csv(self) -> str:
        def num(v):
            return f"{v:.5E}"
        return ",".join([str(self.case), self.method, str(self.n_int), str(self.n_bnd),
                         str(self.n), num(self.eps), num(self.l2_error), num(self.rms),
                         num(self.log10_max_cond), str(self.iters),
                         num(self.runtime_ms), self.status])


@dataclass
class SweepResult:
    rows: list

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(CSV_HEADER + "\n")
            for row in self.rows:
                f.write(row.to_csv() + "\n")


def run_case(case_id: int, config: SolverConfig,
             discretization: Discretization | None = None,
             compute_condition: bool = True) -> SweepRow:
    """Solve one benchmark configuration and report both error metrics."""
    domain, problem = get_case(case_id)
    disc = discretization or prepare_geometry(domain, config)
    start = time.perf_counter()
    status, l2v, rmsv, iters = "ok", np.nan, np.nan, 0
    try:
        sol = solve_bvp(domain, problem, config, discretization=disc)
        exact = problem.exact_solution(disc.nodes.interior)
        l2v = l2_error(exact, sol.values)
        rmsv = rms(exact, sol.values)
        iters = sol.report.iterations
    except SlbdimError:
        status = "unstable"
    runtime_ms = 1e3 * (time.perf_counter() - start)
    kappa = (max_local_condition(disc.nodes, disc.stencils, config.epsilon)
             if compute_condition else np.nan)
    return SweepRow(case_id, config.method, disc.nodes.n_int, disc.nodes.n_bnd,
                    config.n, config.epsilon, l2v, rmsv,
                    float(np.log10(kappa)) if np.isfinite(kappa) else np.inf,
                    iters, runtime_ms, status)


def run_sweep(case_id: int, eps_grid, n_grid, n_int_grid, methods,
              base_config: SolverConfig = SolverConfig(),
              compute_condition: bool = True) -> SweepResult:
    """Cartesian-product sweep; instability is recorded as data, not raised.

    Geometry is prepared once per (N, n) pair and shared across the eps grid
    and methods. Rows come out sorted by (N, n, eps, method).
    """
    domain, _ = get_case(case_id)
    rows = []
    for target in n_int_grid:
        for n in n_grid:
            cfg_geo = replace(base_config, n_int_target=int(target), n=int(n))
            disc = prepare_geometry(domain, cfg_geo)
            for eps in eps_grid:
                for method in methods:
                    cfg = replace(cfg_geo, epsilon=float(eps), method=method)
                    rows.append(run_case(case_id, cfg, discretization=disc,
                                         compute_condition=compute_condition))
    rows.sort(key=lambda r: (r.n_int, r.n, r.eps, r.method))
    return SweepResult(rows)


def best_rms_over_eps(case_id: int, eps_values, config: SolverConfig,
                      discretization: Discretization | None = None):
    """(eps, rms) of the best-performing shape parameter in the given range."""
    domain, _ = get_case(case_id)
    disc = discretization or prepare_geometry(domain, config)
    best = None
    for eps in eps_values:
        row = run_case(case_id, replace(config, epsilon=float(eps)),
                       discretization=disc, compute_condition=False)
        if row.status == "ok" and np.isfinite(row.rms):
            if best is None or row.rms < best[1]:
                best = (float(eps), row.rms)
    if best is None:
        raise SlbdimError("no stable configuration in the requested range")
    return best


def write_isoline_csvs(case_id: int, eps_grid, n_grid, n_int_target: int,
                       out_error, out_cond,
                       base_config: SolverConfig = SolverConfig()) -> SweepResult:
    """Error and condition-number surfaces over the (eps, n) grid as log10 CSVs."""
    result = run_sweep(case_id, eps_grid, n_grid, [n_int_target],
                       methods=["slbdim"], base_config=base_config)
    with open(out_error, "w", encoding="utf-8", newline="\n") as f:
        f.write("eps,n,log10_l2_error\n")
        for r in result.rows:
            v = np.log10(r.l2_error) if np.isfinite(r.l2_error) and r.l2_error > 0 else np.nan
            f.write(f"{r.eps:.5E},{r.n},{v:.5E}\n")
    with open(out_cond, "w", encoding="utf-8", newline="\n") as f:
        f.write("eps,n,log10_max_cond\n")
        for r in result.rows:
            f.write(f"{r.eps:.5E},{r.n},{r.log10_max_cond:.5E}\n")
    return result
