"""Node distributions, boundary discretization, stencils and subdomains.

Interior nodes are generated by marching inward from the boundary in offset
rings (a constant-density advancing front), which yields the quasi-uniform
scattered layouts the local integral solver collocates on. Boundary nodes are
equispaced along each rectangle side and carry outward unit normals; corner
nodes take the bisector of the two adjacent side normals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidDomainError, InvalidParameterError

# ring advance per step, in units of h; calibrated so rectangle meshes hit the
# reported interior/boundary count ratios while keeping the nearest-neighbor
# spread well under 2 (hex-ideal sqrt(3)/2 packs ~4% too densely here)
ROW_OFFSET = 0.92

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

# rectangle sides walked counterclockwise; a corner belongs to the side it starts
SIDE_NORMALS = ((0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0))


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle with one boundary-condition label per side.

    Sides are indexed 0=bottom, 1=right, 2=top, 3=left.
    """

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    bc: tuple = (DIRICHLET, DIRICHLET, DIRICHLET, DIRICHLET)

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidDomainError("rectangle must have positive extent in both axes")
        if len(self.bc) != 4 or any(b not in (DIRICHLET, NEUMANN) for b in self.bc):
            raise InvalidDomainError(f"each side label must be '{DIRICHLET}' or '{NEUMANN}'")

    @property
    def side_lengths(self):
        lx = self.xmax - self.xmin
        ly = self.ymax - self.ymin
        return (lx, ly, lx, ly)

    def boundary_distance(self, points) -> np.ndarray:
        """Distance from interior points to the boundary curve."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.minimum.reduce([p[:, 0] - self.xmin, self.xmax - p[:, 0],
                               p[:, 1] - self.ymin, self.ymax - p[:, 1]])
        return d if np.asarray(points).ndim > 1 else d[0]

    def contains(self, points, margin: float = 0.0):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ok = ((p[:, 0] >= self.xmin + margin) & (p[:, 0] <= self.xmax - margin)
              & (p[:, 1] >= self.ymin + margin) & (p[:, 1] <= self.ymax - margin))
        return ok if np.asarray(points).ndim > 1 else ok[0]


@dataclass
class NodeSet:
    """Interior and boundary collocation nodes with target spacing h.

    Global node ids index the concatenation [interior; boundary]; interior
    node i therefore has global id i, and boundary node j has id n_int + j.
    """

    interior: np.ndarray          # (N_int, 2)
    boundary: np.ndarray          # (N_bnd, 2)
    normals: np.ndarray           # (N_bnd, 2) unit outward
    segments: np.ndarray          # (N_bnd,) side label ids
    h: float
    domain: Rectangle | None = None
    _all: np.ndarray = field(init=False, repr=False, default=None)

    @property
    def n_int(self) -> int:
        return len(self.interior)

    @property
    def n_bnd(self) -> int:
        return len(self.boundary)

    @property
    def all_points(self) -> np.ndarray:
        if self._all is None:
            self._all = np.vstack([self.interior, self.boundary])
        return self._all

    def is_boundary_id(self, ids):
        return np.asarray(ids) >= self.n_int

    def save(self, path):
        """Write the line-oriented text format (v1)."""
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"nodeset v1 {self.n_int} {self.n_bnd}\n")
            for x, y in self.interior:
                f.write(f"{x:.17g} {y:.17g}\n")
            for (x, y), (nx, ny), s in zip(self.boundary, self.normals, self.segments):
                f.write(f"{x:.17g} {y:.17g} {nx:.17g} {ny:.17g} {int(s)}\n")

    @classmethod
    def load(cls, path) -> "NodeSet":
        with open(path, encoding="utf-8") as f:
            header = f.readline().split()
            if len(header) != 4 or header[0] != "nodeset" or header[1] != "v1":
                raise InvalidParameterError(f"unrecognized node-set header: {header}")
            n_int, n_bnd = int(header[2]), int(header[3])
            interior = np.array([[float(v) for v in f.readline().split()]
                                 for _ in range(n_int)], dtype=float).reshape(n_int, 2)
            rows = [f.readline().split() for _ in range(n_bnd)]
        boundary = np.array([[float(r[0]), float(r[1])] for r in rows]).reshape(n_bnd, 2)
        normals = np.array([[float(r[2]), float(r[3])] for r in rows]).reshape(n_bnd, 2)
        segments = np.array([int(r[4]) for r in rows], dtype=int)
        # spacing is not stored; recover it from the boundary discretization
        h = 0.0
        if n_bnd > 1:
            d = np.linalg.norm(boundary[1] - boundary[0])
            h = float(d)
        return cls(interior, boundary, normals, segments, h)


@dataclass(frozen=True)
class Stencil:
    """The n nodes nearest a collocation center, interior members first."""

    center_index: int
    members: np.ndarray           # global node ids, center first
    n_int: int

    def __post_init__(self):
        if self.n_int < 1 or self.n_int > len(self.members):
            raise InvalidParameterError("stencil must contain at least its interior center")


@dataclass(frozen=True)
class Subdomain:
    """Closed integration disk around a collocation node, contained in the domain."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidParameterError(f"subdomain radius must be positive, got {self.radius}")


def _boundary_nodes(domain: Rectangle, h: float):
    """Equispaced nodes per side, corners shared, bisector normals at corners."""
    corners = np.array([[domain.xmin, domain.ymin], [domain.xmax, domain.ymin],
                        [domain.xmax, domain.ymax], [domain.xmin, domain.ymax]])
    pts, nrm, seg = [], [], []
    lengths = domain.side_lengths
    counts = [max(1, round(L / h)) for L in lengths]
    for side in range(4):
        a, b = corners[side], corners[(side + 1) % 4]
        m = counts[side]
        t = np.arange(m) / m
        side_pts = a[None, :] * (1.0 - t[:, None]) + b[None, :] * t[:, None]
        pts.append(side_pts)
        n = np.tile(SIDE_NORMALS[side], (m, 1)).astype(float)
        # starting corner: average with the preceding side's normal
        prev = np.asarray(SIDE_NORMALS[(side - 1) % 4])
        n[0] = prev + n[0]
        n[0] /= np.linalg.norm(n[0])
        nrm.append(n)
        seg.append(np.full(m, side, dtype=int))
    return np.vstack(pts), np.vstack(nrm), np.concatenate(seg)


def _ring_nodes(x0, x1, y0, y1, h, stagger: bool):
    """Equispaced nodes around an inner-rectangle perimeter."""
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    pts = []
    for side in range(4):
        a, b = corners[side], corners[(side + 1) % 4]
        L = np.linalg.norm(b - a)
        m = max(1, round(L / h))
        t = (np.arange(m) + (0.5 if stagger else 0.0)) / m
        pts.append(a[None, :] * (1.0 - t[:, None]) + b[None, :] * t[:, None])
    return np.vstack(pts)


def _accept(candidates, accepted, min_dist):
    """Keep candidates at least min_dist from accepted nodes and one another."""
    kept = []
    if len(accepted):
        tree = cKDTree(accepted)
        near = tree.query(candidates, k=1)[0]
    else:
        near = np.full(len(candidates), np.inf)
    batch: list = []
    for p, d in zip(candidates, near):
        if d < min_dist:
            continue
        if batch and np.min(np.linalg.norm(np.asarray(batch) - p, axis=1)) < min_dist:
            continue
        batch.append(p)
        kept.append(p)
    return kept


def generate_quasi_uniform(domain: Rectangle, h: float) -> NodeSet:
    """Quasi-uniform node distribution advancing inward from the boundary.

    Rings of nodes are offset by h*sqrt(3)/2 per advance (hex-like packing),
    staggered by half a spacing on alternate rings; the leftover core becomes
    a centerline strip or a single node. Fully deterministic.
    """
    if not np.isfinite(h) or h <= 0.0:
        raise InvalidParameterError(f"spacing h must be positive, got {h}")
    lx = domain.xmax - domain.xmin
    ly = domain.ymax - domain.ymin
    if h >= min(lx, ly):
        raise InvalidParameterError(f"spacing h={h} must be below the min side {min(lx, ly)}")

    bpts, bnrm, bseg = _boundary_nodes(domain, h)

    interior: list = []
    step = ROW_OFFSET * h
    j = 1
    while True:
        delta = j * step
        x0, x1 = domain.xmin + delta, domain.xmax - delta
        y0, y1 = domain.ymin + delta, domain.ymax - delta
        wx, wy = x1 - x0, y1 - y0
        if min(wx, wy) < 1.5 * h:
            # core: centerline strip along the longer extent, or a single node
            if max(wx, wy) <= 0.9 * h:
                cand = np.array([[0.5 * (x0 + x1), 0.5 * (y0 + y1)]])
            elif wx >= wy:
                m = max(1, round(wx / h))
                xs = np.linspace(x0, x1, m + 1)
                cand = np.column_stack([xs, np.full(m + 1, 0.5 * (y0 + y1))])
            else:
                m = max(1, round(wy / h))
                ys = np.linspace(y0, y1, m + 1)
                cand = np.column_stack([np.full(m + 1, 0.5 * (x0 + x1)), ys])
            if min(wx, wy) > -0.5 * h:   # skip the core entirely once rings overshoot
                interior.extend(_accept(cand, np.asarray(interior) if interior else
                                        np.empty((0, 2)), 0.68 * h))
            break
        ring = _ring_nodes(x0, x1, y0, y1, h, stagger=(j % 2 == 1))
        interior.extend(ring)
        j += 1

    interior_arr = np.asarray(interior, dtype=float).reshape(-1, 2)
    return NodeSet(interior_arr, bpts, bnrm, bseg, h, domain=domain)


@lru_cache(maxsize=64)
def _spacing_scan(domain: Rectangle, target: int, lo: float, hi: float, samples: int):
    best_h, best_gap = None, None
    for htry in np.linspace(lo, hi, samples):
        n = generate_quasi_uniform(domain, float(htry)).n_int
        gap = abs(n - target)
        if best_gap is None or gap < best_gap:
            best_h, best_gap = float(htry), gap
    return best_h, best_gap


def spacing_for_target(domain: Rectangle, n_int_target: int, samples: int = 181) -> float:
    """Spacing h whose generated interior count is closest to the target."""
    if n_int_target < 1:
        raise InvalidParameterError("target interior count must be >= 1")
    area = (domain.xmax - domain.xmin) * (domain.ymax - domain.ymin)
    h0 = math.sqrt(area / (0.95 * n_int_target))
    return _spacing_scan(domain, n_int_target, 0.7 * h0, 1.45 * h0, samples)[0]


def build_stencils(nodes: NodeSet, n: int) -> list:
    """One stencil of the n nearest nodes per interior node.

    Members are ordered interior-first and, within each group, by squared
    distance with node id breaking ties, so the layout is deterministic.
    """
    total = nodes.n_int + nodes.n_bnd
    if n < 1 or n > total:
        raise InvalidParameterError(f"stencil size {n} outside [1, {total}]")
    pts = nodes.all_points
    tree = cKDTree(pts)
    k = min(total, n + 16)
    _, idx = tree.query(nodes.interior, k=k)
    idx = np.atleast_2d(idx)
    stencils = []
    for i in range(nodes.n_int):
        cand = idx[i]
        d2 = ((pts[cand] - nodes.interior[i]) ** 2).sum(axis=1)
        order = np.lexsort((cand, d2))
        cand, d2 = cand[order], d2[order]
        if k < total and d2[n - 1] == d2[-1]:
            # tie straddles the candidate cut; fall back to an exact scan
            d2 = ((pts - nodes.interior[i]) ** 2).sum(axis=1)
            cand = np.arange(total)
            order = np.lexsort((cand, d2))
            cand, d2 = cand[order], d2[order]
        sel, seld2 = cand[:n], d2[:n]
        isb = (sel >= nodes.n_int).astype(int)
        order = np.lexsort((sel, seld2, isb))
        members = sel[order]
        stencils.append(Stencil(i, members, int((isb == 0).sum())))
    return stencils


def nearest_node_distances(nodes: NodeSet) -> np.ndarray:
    """Distance from each interior node to its nearest distinct node."""
    tree = cKDTree(nodes.all_points)
    d, _ = tree.query(nodes.interior, k=2)
    return d[:, 1]


def build_subdomain(nodes: NodeSet, center_index: int, c_R: float = 0.9,
                    nearest_dist: float | None = None) -> Subdomain:
    """Integration disk at an interior node, kept strictly inside the domain.

    Radius is c_R times the smaller of the nearest-node distance and the
    distance to the boundary curve.
    """
    if not 0.0 < c_R < 1.0:
        raise InvalidParameterError(f"c_R must lie in (0, 1), got {c_R}")
    if center_index < 0 or center_index >= nodes.n_int:
        raise InvalidParameterError("subdomain center must be an interior node")
    if nodes.domain is None:
        raise InvalidParameterError("node set carries no domain; boundary distance unknown")
    center = nodes.interior[center_index]
    if nearest_dist is None:
        tree = cKDTree(nodes.all_points)
        nearest_dist = tree.query(center, k=2)[0][1]
    d_bnd = nodes.domain.boundary_distance(center)
    return Subdomain(center.copy(), c_R * min(float(nearest_dist), float(d_bnd)))


def build_subdomains(nodes: NodeSet, c_R: float = 0.9) -> list:
    """Integration disks for every interior node (shared neighbor query)."""
    dists = nearest_node_distances(nodes)
    return [build_subdomain(nodes, i, c_R, nearest_dist=dists[i])
            for i in range(nodes.n_int)]
