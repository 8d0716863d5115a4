"""Gauss-Legendre rules on circles and disks, and Green-kernel influence integrals.

The disk rule is a polar product rule. The radial direction uses Gauss-Legendre
points under the graded map r = R t^3, which clusters nodes toward the center
so the weak log singularity of the disk Green function integrates to ~1e-12
relative accuracy at order 16 (a plain affine rule stalls near 1e-5). Weights
carry the full polar Jacobian, and no point sits at r = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericFailureError
from .geometry import Subdomain
from .kernels import TWO_PI

DEFAULT_CIRCLE_ORDER = 32
DEFAULT_RADIAL_ORDER = 16
DEFAULT_ANGULAR_ORDER = 32


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes and positive weights on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray


def gauss_legendre(order: int) -> QuadratureRule1D:
    """Gauss-Legendre rule of the given order, exact to polynomial degree 2*order - 1."""
    if order < 1:
        raise InvalidParameterError(f"quadrature order must be >= 1, got {order}")
    x, w = np.polynomial.legendre.leggauss(order)
    return QuadratureRule1D(x, w)


def circle_rule(sub: Subdomain, order: int = DEFAULT_CIRCLE_ORDER):
    """Points and weights for line integrals over the subdomain circle."""
    gl = gauss_legendre(order)
    theta = np.pi * (gl.nodes + 1.0)
    w = np.pi * sub.radius * gl.weights
    pts = sub.center[None, :] + sub.radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return pts, w


def disk_rule(sub: Subdomain, radial_order: int = DEFAULT_RADIAL_ORDER,
              angular_order: int = DEFAULT_ANGULAR_ORDER):
    """Polar product rule over the subdomain disk, weights summing to pi R^2."""
    if radial_order < 1 or angular_order < 1:
        raise InvalidParameterError("quadrature orders must be >= 1")
    glr = gauss_legendre(radial_order)
    t = 0.5 * (glr.nodes + 1.0)
    r = sub.radius * t ** 3
    dr = 3.0 * sub.radius * t ** 2
    wr = 0.5 * glr.weights * dr * r          # polar Jacobian folded in
    gla = gauss_legendre(angular_order)
    theta = np.pi * (gla.nodes + 1.0)
    wt = np.pi * gla.weights
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    pts = sub.center[None, None, :] + r[:, None, None] * np.stack(
        [np.broadcast_to(cos_t, (radial_order, angular_order)),
         np.broadcast_to(sin_t, (radial_order, angular_order))], axis=2)
    w = wr[:, None] * wt[None, :]
    return pts.reshape(-1, 2), w.ravel()


@dataclass(frozen=True)
class SubdomainRules:
    """Precomputed circle and disk rules for one subdomain."""

    circle_points: np.ndarray
    circle_weights: np.ndarray
    disk_points: np.ndarray
    disk_weights: np.ndarray

    @classmethod
    def build(cls, sub: Subdomain, circle_order: int = DEFAULT_CIRCLE_ORDER,
              radial_order: int = DEFAULT_RADIAL_ORDER,
              angular_order: int = DEFAULT_ANGULAR_ORDER) -> "SubdomainRules":
        cp, cw = circle_rule(sub, circle_order)
        dp, dw = disk_rule(sub, radial_order, angular_order)
        return cls(cp, cw, dp, dw)


@dataclass(frozen=True)
class InfluenceCoefficients:
    """Quadrature projections of the Green kernels onto local basis functions.

    h[j] integrates the rim flux kernel against basis j over the circle,
    g[j] integrates the Green function against basis j over the disk, and
    f_tilde integrates the Green function against the source term.
    """

    h: np.ndarray
    g: np.ndarray
    f_tilde: float


def influence_coefficients(sub: Subdomain, basis_eval, source_f,
                           rules: SubdomainRules,
                           stencil_id=None) -> InfluenceCoefficients:
    """Influence coefficients of one subdomain for a basis-evaluation callback.

    basis_eval maps an (m, 2) array of points to an (m, n) array of basis
    values. With the source point at the disk center, the rim kernel is the
    constant 1/(2 pi R), so h is the circle average of each basis function.
    """
    R = sub.radius
    Q = 1.0 / (TWO_PI * R)
    vals_c = np.asarray(basis_eval(rules.circle_points), dtype=float)
    if not np.all(np.isfinite(vals_c)):
        raise NumericFailureError("non-finite basis values on the subdomain circle",
                                  stencil_id=stencil_id)
    h = (rules.circle_weights * Q) @ vals_c

    rdisk = np.sqrt(((rules.disk_points - sub.center[None, :]) ** 2).sum(axis=1))
    G = np.log(rdisk / R) / TWO_PI
    vals_d = np.asarray(basis_eval(rules.disk_points), dtype=float)
    if not np.all(np.isfinite(vals_d)):
        raise NumericFailureError("non-finite basis values inside the subdomain",
                                  stencil_id=stencil_id)
    wG = rules.disk_weights * G
    g = wG @ vals_d

    if source_f is None:
        f_tilde = 0.0
    else:
        fv = np.asarray(source_f(rules.disk_points), dtype=float)
        f_tilde = float(wG @ fv)
    return InfluenceCoefficients(h, g, f_tilde)
