"""Quadrature rules on triangles.

Rules are stored on the reference triangle (0,0), (1,0), (0,1) with weights
summing to its area 1/2. Degrees 0-2 and 3-5 use classical symmetric rules
(centroid, three-point, seven-point Radon); degrees 6-10 use the collapsed
Gauss-Jacobi conical product, which keeps every weight positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

MAX_DEGREE = 10


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    degree: int
    points: np.ndarray  # (Q, 3) barycentric coordinates
    weights: np.ndarray  # (Q,)

    @property
    def xy(self) -> np.ndarray:
        """Reference-triangle coordinates, shape (Q, 2)."""
        return self.points[:, 1:]

    def __len__(self) -> int:
        return len(self.weights)


def _bary(xy) -> np.ndarray:
    xy = np.asarray(xy, dtype=float)
    return np.column_stack([1.0 - xy[:, 0] - xy[:, 1], xy[:, 0], xy[:, 1]])


def _perm3(a: float, b: float) -> list[tuple[float, float, float]]:
    return [(a, a, b), (a, b, a), (b, a, a)]


def _radon7():
    r = np.sqrt(15.0)
    a1, a2 = (6.0 - r) / 21.0, (6.0 + r) / 21.0
    w1, w2 = (155.0 - r) / 1200.0, (155.0 + r) / 1200.0
    pts = [(1 / 3, 1 / 3, 1 / 3)] + _perm3(a1, 1 - 2 * a1) + _perm3(a2, 1 - 2 * a2)
    w = [9.0 / 40.0] + [w1] * 3 + [w2] * 3
    return np.array(pts), 0.5 * np.array(w)


def _conical(degree: int):
    k = (degree + 2) // 2
    # integral over T of f = int_0^1 int_0^1 f(u, v(1-u)) (1-u) dv du
    xj, wj = roots_jacobi(k, 1.0, 0.0)
    xl, wl = roots_legendre(k)
    u = 0.5 * (xj + 1.0)
    wu = wj / 4.0
    v = 0.5 * (xl + 1.0)
    wv = wl / 2.0
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    xy = np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()])
    return _bary(xy), W.ravel()


@lru_cache(maxsize=None)
def rule(degree: int) -> QuadratureRule:
    """Positive-weight rule integrating all polynomials of total degree <= ``degree``."""
    if degree < 0 or degree > MAX_DEGREE:
        raise ValueError(f"quadrature degree must be in [0, {MAX_DEGREE}], got {degree}")
    if degree <= 1:
        pts, w = np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([0.5])
    elif degree == 2:
        pts, w = np.array(_perm3(1 / 6, 2 / 3)), np.full(3, 1 / 6)
    elif degree <= 5:
        pts, w = _radon7()
    else:
        pts, w = _conical(degree)
    pts.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(degree if degree > 1 else 1, pts, w)


def map_to_physical(qr: QuadratureRule, triangle) -> tuple[np.ndarray, np.ndarray]:
    """Physical points and weights for one triangle given as a (3, 2) vertex array."""
    P = np.asarray(triangle, dtype=float)
    J = np.column_stack([P[1] - P[0], P[2] - P[0]])
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if abs(det) / 2 < 1e-14:
        raise ValueError("degenerate triangle")
    return P[0] + qr.xy @ J.T, qr.weights * abs(det)


def gauss_legendre_01(k: int) -> tuple[np.ndarray, np.ndarray]:
    """k-point Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = roots_legendre(k)
    return 0.5 * (x + 1.0), 0.5 * w
