"""Flat-limit-stable evaluation of a Gaussian RBF space on a stencil.

Direct collocation with Gaussians exp(-(eps r)^2) degenerates as eps -> 0:
the basis functions flatten into near-linear dependence and the interpolation
matrix condition number explodes. This module changes to an equivalent basis
{psi_k} spanning the same space in exact arithmetic but evaluable stably for
arbitrarily small eps.

Each Gaussian centered inside the (shifted, scaled) unit disk expands through
the modified-Bessel generating function into polar expansion functions

    V(r, theta) = exp(-(eps r)^2) * r^mu * T_q(2 r^2 - 1) * {cos, sin}(mu theta)

whose coefficient on a Gaussian splits into an eps-power scale factor
(diagonal, one per expansion function, growing like eps^(2*(mu + 2q))) and a
bounded remainder. QR-factorizing the bounded coefficient matrix and forming
the correction block with the scale-factor *ratios* (never the factors
themselves) removes the eps-power degeneracy analytically. Truncation drops
expansion columns whose scale ratio to the last structurally required column
falls below unit roundoff.

When eps * scale is large the expansion converges slowly and direct Gaussian
collocation is perfectly stable, so the factorization falls back to the
direct basis automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import qr as _qr, solve_triangular

from .errors import InvalidParameterError, RankDeficiencyError, UnstableFactorizationError
from .kernels import GaussianKernel, gaussian_gradient, gaussian_matrix

FALLBACK_EPS_SCALE = 2.0
_LOG_EPS_MACH = math.log(np.finfo(float).eps)
_DEGREE_SAFETY = math.log(1e3)   # keep a little past the roundoff cutoff
_MAX_EXTRA_DEGREES = 80


class ExpansionTerm(NamedTuple):
    """One retained expansion function."""

    degree: int        # mu + 2q, sets the eps-power scale eps^(2*degree)
    frequency: int     # angular frequency mu
    parity: str        # 'c' -> cos(mu theta), 's' -> sin(mu theta)

    @property
    def radial_index(self) -> int:
        return (self.degree - self.frequency) // 2


def _degree_terms(d: int):
    terms = []
    for mu in range(d, -1, -2):
        terms.append(ExpansionTerm(d, mu, "c"))
        if mu > 0:
            terms.append(ExpansionTerm(d, mu, "s"))
    return terms


def _log_scale(term: ExpansionTerm, log_eps: float) -> float:
    """log of the diagonal scale factor for one expansion column."""
    mu, q = term.frequency, term.radial_index
    out = 2.0 * term.degree * log_eps - math.lgamma(q + 1) - math.lgamma(q + mu + 1)
    if mu > 0:
        out += math.log(2.0)
    if q > 0:
        out += (1 - 2 * q) * math.log(2.0)
    return out


def _max_log_scale_of_degree(d: int, log_eps: float) -> float:
    return max(_log_scale(t, log_eps) for t in _degree_terms(d))


@dataclass
class BasisFactorization:
    """Stable evaluation data for the psi-basis on one stencil.

    In 'rbfqr' mode, psi values at points x are V(x) @ [I_n; correction.T]
    with V the retained-expansion-function matrix; 'direct' mode evaluates
    the Gaussians themselves.
    """

    stencil_nodes: np.ndarray
    epsilon: float
    shift: np.ndarray
    scale: float
    mode: str                      # 'rbfqr' or 'direct'
    terms: list                    # retained ExpansionTerms (rbfqr mode)
    correction: np.ndarray         # (n, M - n) scaled correction block

    @property
    def n(self) -> int:
        return len(self.stencil_nodes)

    @property
    def eps_scaled(self) -> float:
        return self.epsilon * self.scale


def _polar(points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(p[:, 0], p[:, 1])
    theta = np.arctan2(p[:, 1], p[:, 0])
    return p, r, theta


def _coefficient_matrix(r, theta, eps, terms) -> np.ndarray:
    """Bounded part of the Gaussian-to-expansion coefficients, (n, M).

    Row k holds, for each retained term, exp(-(eps r_k)^2) trig(mu theta_k)
    r_k^(mu+2q) * S where S sums the higher-power Chebyshev foldbacks
    ((eps^2 r_k)^2 per step, factorially damped).
    """
    n = len(r)
    mu_arr = np.array([t.frequency for t in terms])
    q_arr = np.array([t.radial_index for t in terms])
    # one radial profile per distinct (mu, q) pair; cos/sin columns share it
    pair_key = mu_arr * (q_arr.max() + 1 if len(q_arr) else 1) + q_arr
    _, pair_first, pair_of_col = np.unique(pair_key, return_index=True, return_inverse=True)
    pmu, pq = mu_arr[pair_first], q_arr[pair_first]

    dmax = int(mu_arr.max() + 2 * q_arr.max()) if len(terms) else 0
    powers = np.ones((n, dmax + 1))
    for d in range(1, dmax + 1):
        powers[:, d] = powers[:, d - 1] * r

    x2 = (eps * eps * r) ** 2                      # (n,)
    term = np.ones((n, len(pmu)))
    S = term.copy()
    for s in range(1, 200):
        mratio = ((2 * pq + 2 * s) * (2 * pq + 2 * s - 1)
                  / (4.0 * s * (2 * pq + s)))
        term = term * x2[:, None] * (mratio / ((pq + s) * (pq + s + pmu)))[None, :]
        S += term
        if np.max(np.abs(term)) <= 1e-18 * max(np.max(np.abs(S)), 1.0):
            break

    radial = np.exp(-(eps * r) ** 2)[:, None] * powers[:, pmu + 2 * pq] * S
    ang = np.outer(theta, mu_arr)
    is_cos = np.array([t.parity == "c" for t in terms])
    trig = np.where(is_cos[None, :], np.cos(ang), np.sin(ang))
    return radial[:, pair_of_col] * trig


def factorize(nodes, epsilon: float,
              fallback_threshold: float = FALLBACK_EPS_SCALE) -> BasisFactorization:
    """Build the stable basis for Gaussians centered at the given nodes.

    Nodes are shifted to their centroid and scaled into the unit disk; the
    effective shape parameter is epsilon * scale. Raises RankDeficiencyError
    for duplicate nodes and UnstableFactorizationError if the retained
    expansion columns cannot represent the stencil.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    n = len(nodes)
    if not np.isfinite(epsilon) or epsilon <= 0.0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if n < 1:
        raise InvalidParameterError("at least one node required")
    if n > 1:
        d2 = ((nodes[:, None, :] - nodes[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        if d2.min() == 0.0:
            raise RankDeficiencyError("duplicate stencil nodes")

    shift = nodes.mean(axis=0)
    scale = float(np.sqrt(((nodes - shift) ** 2).sum(axis=1)).max())
    if scale == 0.0:
        scale = 1.0
    eps_s = epsilon * scale

    if eps_s > fallback_threshold:
        return BasisFactorization(nodes, epsilon, shift, scale, "direct", [],
                                  np.zeros((n, 0)))

    log_eps = math.log(eps_s)
    # smallest degree whose cumulative term count covers the stencil
    d_n = 0
    while (d_n + 1) * (d_n + 2) // 2 < n:
        d_n += 1
    terms = [t for d in range(d_n + 1) for t in _degree_terms(d)]
    ref_mag = max(_max_log_scale_of_degree(d, log_eps) for d in range(d_n + 1))
    d = d_n + 1
    while d <= d_n + _MAX_EXTRA_DEGREES:
        if 2.0 * (d - d_n) * log_eps < _LOG_EPS_MACH:
            break
        if _max_log_scale_of_degree(d, log_eps) < ref_mag + _LOG_EPS_MACH - _DEGREE_SAFETY:
            break
        terms.extend(_degree_terms(d))
        d += 1

    scaled = (nodes - shift) / scale
    _, r, theta = _polar(scaled)
    C = _coefficient_matrix(r, theta, eps_s, terms)
    R = _qr(C, mode="r")[0]
    R1, R2 = R[:, :n], R[:, n:]
    diag = np.abs(np.diag(R1))
    if diag.min() <= 1e-12 * max(diag.max(), np.finfo(float).tiny):
        raise UnstableFactorizationError(
            f"stencil does not span the retained expansion space "
            f"(pivot ratio {diag.min() / diag.max():.2e})")
    X = solve_triangular(R1, R2)
    log_scales = np.array([_log_scale(t, log_eps) for t in terms])
    ratio = np.exp(log_scales[None, n:] - log_scales[:n, None])
    correction = X * ratio
    return BasisFactorization(nodes, epsilon, shift, scale, "rbfqr", terms, correction)


def _expansion_tables(fact: BasisFactorization, points):
    """Shared point-wise tables: scaled coords, Gaussian prefactor, Chebyshev
    values/derivatives, and harmonic polynomials Re/Im((x+iy)^mu)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    sp = (p - fact.shift[None, :]) / fact.scale
    x, y = sp[:, 0], sp[:, 1]
    r2 = x * x + y * y
    rho = 2.0 * r2 - 1.0
    e = fact.eps_scaled
    pref = np.exp(-e * e * r2)

    qmax = max((t.radial_index for t in fact.terms), default=0)
    mumax = max((t.frequency for t in fact.terms), default=0)
    T = np.empty((qmax + 1, len(sp)))
    Tp = np.zeros((qmax + 1, len(sp)))
    T[0] = 1.0
    if qmax >= 1:
        T[1] = rho
        Tp[1] = 1.0
    for q in range(2, qmax + 1):
        T[q] = 2.0 * rho * T[q - 1] - T[q - 2]
        Tp[q] = 2.0 * T[q - 1] + 2.0 * rho * Tp[q - 1] - Tp[q - 2]

    z = x + 1j * y
    H = np.empty((mumax + 1, len(sp)), dtype=complex)
    H[0] = 1.0
    for mu in range(1, mumax + 1):
        H[mu] = H[mu - 1] * z
    return sp, x, y, pref, T, Tp, H


def _term_arrays(terms):
    mu = np.array([t.frequency for t in terms], dtype=int)
    q = np.array([t.radial_index for t in terms], dtype=int)
    is_cos = np.array([t.parity == "c" for t in terms])
    return mu, q, is_cos


def _expansion_values(fact: BasisFactorization, points) -> np.ndarray:
    _, _, _, pref, T, _, H = _expansion_tables(fact, points)
    mu, q, is_cos = _term_arrays(fact.terms)
    harm = np.where(is_cos[:, None], H[mu].real, H[mu].imag)
    return (pref[None, :] * T[q] * harm).T


def _expansion_gradients(fact: BasisFactorization, points):
    """Gradients of the expansion functions w.r.t. the original coordinates."""
    _, x, y, pref, T, Tp, H = _expansion_tables(fact, points)
    e2 = fact.eps_scaled ** 2
    mu, q, is_cos = _term_arrays(fact.terms)
    harm = np.where(is_cos[:, None], H[mu].real, H[mu].imag)
    Hm1 = H[np.maximum(mu - 1, 0)]
    # mu = 0 rows vanish through the factor mu
    dhx = mu[:, None] * np.where(is_cos[:, None], Hm1.real, Hm1.imag)
    dhy = mu[:, None] * np.where(is_cos[:, None], -Hm1.imag, Hm1.real)
    Tq, Tpq = T[q], Tp[q]
    common = (-2.0 * e2 * Tq + 4.0 * Tpq) * harm
    Gx = pref[None, :] * (common * x[None, :] + Tq * dhx)
    Gy = pref[None, :] * (common * y[None, :] + Tq * dhy)
    return Gx.T / fact.scale, Gy.T / fact.scale


def eval_values(fact: BasisFactorization, points) -> np.ndarray:
    """psi-basis values, one row per point, one column per stencil function."""
    if fact.mode == "direct":
        return gaussian_matrix(GaussianKernel(fact.epsilon), points, fact.stencil_nodes)
    V = _expansion_values(fact, points)
    n = fact.n
    return V[:, :n] + V[:, n:] @ fact.correction.T


def eval_gradients(fact: BasisFactorization, points):
    """psi-basis gradients (d/dx, d/dy), each (npoints, n)."""
    if fact.mode == "direct":
        g = gaussian_gradient(GaussianKernel(fact.epsilon), points, fact.stencil_nodes)
        return g[:, :, 0], g[:, :, 1]
    Gx, Gy = _expansion_gradients(fact, points)
    n = fact.n
    return (Gx[:, :n] + Gx[:, n:] @ fact.correction.T,
            Gy[:, :n] + Gy[:, n:] @ fact.correction.T)


def eval_boundary_operator(fact: BasisFactorization, points, normals, bc_kind: str) -> np.ndarray:
    """Rows of the boundary operator applied to each basis function.

    Dirichlet rows are plain values; Neumann rows are outward normal
    derivatives assembled from analytic expansion-function gradients.
    """
    if bc_kind == "dirichlet":
        return eval_values(fact, points)
    if bc_kind != "neumann":
        raise InvalidParameterError(f"unknown boundary operator kind: {bc_kind!r}")
    if normals is None:
        raise InvalidParameterError("neumann rows require outward normals")
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    Gx, Gy = eval_gradients(fact, points)
    return normals[:, 0:1] * Gx + normals[:, 1:2] * Gy
