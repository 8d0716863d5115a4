"""Closed-form kernels: Gaussian RBF, log fundamental solution, disk Green function.

All evaluators are vectorized over points; shapes follow numpy broadcasting.
The disk Green function here is the Laplace Green function of a disk with
homogeneous Dirichlet data on its rim and source at the center, which is the
only configuration the local integral representation needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, OutOfSubdomainError, SingularityError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian radial basis function exp(-(eps*r)^2)."""

    epsilon: float

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0.0:
            raise InvalidParameterError(f"epsilon must be positive and finite, got {self.epsilon}")


def gaussian_value(kernel: GaussianKernel, r):
    """Value exp(-(eps*r)^2) for distances r >= 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise InvalidParameterError("distance r must be non-negative")
    return np.exp(-((kernel.epsilon * r) ** 2))


def gaussian_matrix(kernel: GaussianKernel, points, centers) -> np.ndarray:
    """Interpolation matrix M[j, k] = exp(-eps^2 ||p_j - c_k||^2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-(kernel.epsilon ** 2) * d2)


def gaussian_gradient(kernel: GaussianKernel, points, centers) -> np.ndarray:
    """Gradient of each basis function at each point, shape (npts, ncenters, 2).

    grad exp(-eps^2 r^2) = -2 eps^2 (p - c) exp(-eps^2 r^2)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    diff = points[:, None, :] - centers[None, :, :]
    vals = np.exp(-(kernel.epsilon ** 2) * (diff ** 2).sum(axis=2))
    return -2.0 * kernel.epsilon ** 2 * diff * vals[:, :, None]


def gaussian_laplacian(kernel: GaussianKernel, p, center):
    """Laplacian (4 eps^4 r^2 - 4 eps^2) exp(-eps^2 r^2) with r = ||p - center||."""
    p = np.asarray(p, dtype=float)
    center = np.asarray(center, dtype=float)
    r2 = ((p - center) ** 2).sum(axis=-1)
    e2 = kernel.epsilon ** 2
    return (4.0 * e2 * e2 * r2 - 4.0 * e2) * np.exp(-e2 * r2)


def fundamental_solution(x, xi):
    """Laplace free-space solution (1/2pi) ln ||x - xi||."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = np.sqrt(((x - xi) ** 2).sum(axis=-1))
    if np.any(r == 0.0):
        raise SingularityError("fundamental solution evaluated at its source point")
    return np.log(r) / TWO_PI


@dataclass(frozen=True)
class DiskGreen:
    """Green function of a disk, zero on the rim, source at the center.

    G(x) = (1/2pi) ln(r/R) for 0 < r <= R; its outward normal derivative on
    the rim is the constant Q = 1/(2pi R).
    """

    center: tuple
    radius: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0.0:
            raise InvalidParameterError(f"radius must be positive, got {self.radius}")

    def _r(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center, dtype=float)
        return np.sqrt(((x - c) ** 2).sum(axis=-1))


def disk_green_value(g: DiskGreen, x):
    """G(x) = (1/2pi) ln(r/R); nonpositive inside, zero on the rim."""
    r = g._r(x)
    if np.any(r == 0.0):
        raise SingularityError("disk Green function evaluated at its center")
    if np.any(r > g.radius * (1.0 + 1e-12)):
        raise OutOfSubdomainError("point outside the disk")
    return np.log(r / g.radius) / TWO_PI


def disk_green_normal_derivative(g: DiskGreen, x_on_boundary):
    """Outward normal derivative on the rim: constant 1/(2pi R)."""
    r = g._r(x_on_boundary)
    if np.any(np.abs(r - g.radius) > 1e-10 * g.radius):
        raise InvalidParameterError("point not on the disk boundary")
    return np.full_like(r, 1.0 / (TWO_PI * g.radius)) if r.ndim else 1.0 / (TWO_PI * g.radius)
