"""Uniform triangulations of the unit square with edge topology."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of [0, 1]^2 obtained from an ``n x n`` grid.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counter-clockwise vertex triples
    edges : (E, 2) int array, each stored as (low, high) vertex index
    triangle_edges : (T, 3) int array; local edge k is opposite local vertex k
    edge_signs : (T, 3) array of +-1; +1 when the counter-clockwise traversal
        of the local edge runs from the lower to the higher global vertex
    boundary : (E,) bool array
    n : cells per side
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    triangle_edges: np.ndarray
    edge_signs: np.ndarray
    boundary: np.ndarray
    n: int

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @property
    def h(self) -> float:
        """Grid spacing 1/n (the leg length of every triangle)."""
        return 1.0 / self.n

    @cached_property
    def jacobians(self) -> np.ndarray:
        """(T, 2, 2) affine maps from the reference triangle, columns P1-P0 and P2-P0."""
        p = self.vertices[self.triangles]
        return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)

    @cached_property
    def dets(self) -> np.ndarray:
        J = self.jacobians
        return J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    @cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * self.dets

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def _cell_lookup(self) -> np.ndarray:
        keys = _grid_keys(self.centroids, self.n)
        lookup = np.full(2 * self.n * self.n, -1, dtype=np.int64)
        lookup[keys] = np.arange(self.num_triangles)
        if np.any(lookup < 0):
            raise ValueError("mesh is not a uniform grid triangulation")
        return lookup

    def locate(self, points) -> np.ndarray:
        """Index of the triangle containing each point (ties broken consistently)."""
        return self._cell_lookup[_grid_keys(np.asarray(points, dtype=float), self.n)]

    def to_reference(self, points, tri) -> np.ndarray:
        """Reference coordinates of ``points`` inside triangles ``tri``."""
        J = self.jacobians[tri]
        d = np.asarray(points, dtype=float) - self.vertices[self.triangles[tri, 0]]
        det = self.dets[tri]
        xi = (J[:, 1, 1] * d[:, 0] - J[:, 0, 1] * d[:, 1]) / det
        eta = (-J[:, 1, 0] * d[:, 0] + J[:, 0, 0] * d[:, 1]) / det
        return np.stack([xi, eta], axis=1)

    def dump(self, path) -> None:
        """Plain-text dump: counts line, then vertex, triangle and edge records."""
        lines = [f"# n={self.n} V={self.num_vertices} E={self.num_edges} T={self.num_triangles}"]
        lines += [f"v {i} {x:.17g} {y:.17g}" for i, (x, y) in enumerate(self.vertices)]
        lines += [f"t {i} {a} {b} {c}" for i, (a, b, c) in enumerate(self.triangles)]
        lines += [
            f"e {i} {a} {b} {int(bd)}"
            for i, ((a, b), bd) in enumerate(zip(self.edges, self.boundary))
        ]
        Path(path).write_text("\n".join(lines) + "\n")


def _grid_keys(points: np.ndarray, n: int) -> np.ndarray:
    s = points * n
    ij = np.clip(np.floor(s).astype(np.int64), 0, n - 1)
    local = s - ij
    upper = local[:, 1] > local[:, 0]
    return 2 * (ij[:, 1] * n + ij[:, 0]) + upper


def _from_triangles(vertices: np.ndarray, triangles: np.ndarray, n: int) -> Mesh:
    # local edge k joins local vertices k+1 -> k+2 (counter-clockwise)
    a = triangles[:, [1, 2, 0]]
    b = triangles[:, [2, 0, 1]]
    lo = np.minimum(a, b).ravel()
    hi = np.maximum(a, b).ravel()
    keys = lo * len(vertices) + hi
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        raise ValueError("non-manifold edge")
    edges = np.stack([uniq // len(vertices), uniq % len(vertices)], axis=1)
    tri_edges = inverse.reshape(-1, 3)
    signs = np.where(a < b, 1.0, -1.0)
    for arr in (vertices, triangles, edges, tri_edges, signs):
        arr.setflags(write=False)
    boundary = counts == 1
    boundary.setflags(write=False)
    return Mesh(vertices, triangles, edges, tri_edges, signs, boundary, int(n))


def build_uniform(n: int) -> Mesh:
    """Split each cell of an ``n x n`` grid along its (0,0)-(1,1) parallel diagonal."""
    if int(n) != n or n < 1:
        raise ValueError(f"need a positive number of subdivisions, got {n}")
    n = int(n)
    g = np.arange(n + 1) / n
    X, Y = np.meshgrid(g, g)
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    v00 = j * (n + 1) + i
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3).astype(np.int64)
    return _from_triangles(vertices, triangles, n)


def red_refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four congruent children through edge midpoints."""
    nv = mesh.num_vertices
    mid = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    vertices = np.vstack([mesh.vertices, mid])
    t = mesh.triangles
    m = nv + mesh.triangle_edges  # m[:, k] = midpoint opposite vertex k
    children = np.stack(
        [
            np.stack([t[:, 0], m[:, 2], m[:, 1]], axis=1),
            np.stack([m[:, 2], t[:, 1], m[:, 0]], axis=1),
            np.stack([m[:, 1], m[:, 0], t[:, 2]], axis=1),
            np.stack([m[:, 0], m[:, 1], m[:, 2]], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)
    return _from_triangles(vertices, children.astype(np.int64), 2 * mesh.n)


def level_to_n(level: int) -> int:
    """Cells per side on refinement level ``level`` (level 6 is the 128 x 128 grid)."""
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    return 2 ** (level + 1)


def level_mesh(level: int) -> Mesh:
    return build_uniform(level_to_n(level))
