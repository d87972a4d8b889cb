"""Test problems on the unit square with kappa = 1 and drift F(x, y) = (x, y).

The manufactured problems have exact solutions

    u(x, y, t) = sum_{m,n=0}^{M} c_mn sin(l_m x) sin(l_n y) E_{a,1}(-(l_m^2 + l_n^2) t^a),

with l_m = (2m + 1) pi. Each mode solves the homogeneous fractional heat
equation, so the Caputo-form source reduces to the drift term
div(F u) = 2u + x u_x + y u_y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from fracflow import kernels
from fracflow.fe_space import DofMap, project_scalar, quadrature_points, reference_scalar
from fracflow.mittag_leffler import ml
from fracflow.quadrature import rule

CONVENTIONS = ("separable", "product")  # sign exponent: sum or product of mode indices
DEFAULT_TERMS = 64
LOAD_DEGREE = 8


def drift(x, y):
    return x, y


def eigenvalues(M: int) -> np.ndarray:
    return (2 * np.arange(M + 1) + 1) * np.pi


@dataclass(frozen=True, eq=False)
class ModalSeries:
    alpha: float
    coeffs: np.ndarray  # (M + 1, M + 1)
    convention: str = "separable"

    @property
    def M(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def lam(self) -> np.ndarray:
        return eigenvalues(self.M)

    @property
    def decay_rates(self) -> np.ndarray:
        lam = self.lam
        return lam[:, None] ** 2 + lam[None, :] ** 2

    def time_factor(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("time must be nonnegative")
        if t == 0:
            return np.ones_like(self.coeffs)
        rates, inverse = self._unique_rates
        return ml(self.alpha, 1.0, -rates * t**self.alpha)[inverse]

    @cached_property
    def _unique_rates(self):
        rates, inverse = np.unique(self.decay_rates, return_inverse=True)
        return rates, inverse.reshape(self.coeffs.shape)

    def modal_coefficients(self, t: float) -> np.ndarray:
        return self.coeffs * self.time_factor(t)

    def evaluator(self, x, y) -> "SeriesEvaluator":
        return SeriesEvaluator(self, x, y)


class SeriesEvaluator:
    """Evaluates the series and its derivatives at a fixed point cloud.

    Sine/cosine tables are built once per distinct coordinate, so every later
    evaluation costs two (points x modes) contractions.
    """

    def __init__(self, series: ModalSeries, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        self.series = series
        self.shape = x.shape
        ux, ix = np.unique(x.ravel(), return_inverse=True)
        uy, iy = np.unique(y.ravel(), return_inverse=True)
        self._ix = ix.astype(np.int64)
        self._iy = iy.astype(np.int64)
        lam = series.lam
        self._sx = np.sin(np.outer(ux, lam))  # (distinct x, modes)
        self._sy = np.sin(np.outer(uy, lam))
        self._dx = lam * np.cos(np.outer(ux, lam))
        self._dy = lam * np.cos(np.outer(uy, lam))
        self._ux = ux
        self._uy = uy
        self._ax = ux[:, None] * self._dx + 2.0 * self._sx
        self._by = uy[:, None] * self._dy

    def _contract(self, fx, fy, C) -> np.ndarray:
        # sum_mn C[m, n] fx[x, m] fy[y, n]
        Y = np.ascontiguousarray(fy @ C.T)
        out = np.empty(len(self._ix))
        kernels.gather_rowdot(fx, self._ix, Y, self._iy, out)
        return out.reshape(self.shape)

    def u(self, t: float) -> np.ndarray:
        return self._contract(self._sx, self._sy, self.series.modal_coefficients(t))

    def grad(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        C = self.series.modal_coefficients(t)
        return self._contract(self._dx, self._sy, C), self._contract(self._sx, self._dy, C)

    def flux(self, t: float) -> np.ndarray:
        """sigma = -grad u + F u with F = (x, y); shape (..., 2)."""
        C = self.series.modal_coefficients(t)
        u = self._contract(self._sx, self._sy, C)
        ux = self._contract(self._dx, self._sy, C)
        uy = self._contract(self._sx, self._dy, C)
        x = self._ux[self._ix].reshape(self.shape)
        y = self._uy[self._iy].reshape(self.shape)
        return np.stack([-ux + x * u, -uy + y * u], axis=-1)

    def source(self, t: float) -> np.ndarray:
        """div(F u) = sum c_mn E_mn(t) [(l_m x cos + 2 sin)(x) sin(y) + sin(x) (l_n y cos)(y)]."""
        C = self.series.modal_coefficients(t)
        return self._contract(self._ax, self._sy, C) + self._contract(self._sx, self._by, C)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    alpha: float
    u0: Callable
    u0_degree: int | None = None  # polynomial degree of u0, None if not polynomial
    series: ModalSeries | None = None
    T: float = 0.5
    kappa: float = 1.0
    F: Callable = field(default=drift)

    @property
    def has_exact(self) -> bool:
        return self.series is not None

    @property
    def has_source(self) -> bool:
        return self.series is not None

    def initial_coefficients(self, dofmap: DofMap) -> np.ndarray:
        if self.u0_degree is not None:
            return project_scalar(dofmap.mesh, dofmap.pair, self.u0, degree=8, polynomial_degree=self.u0_degree)
        return project_scalar(dofmap.mesh, dofmap.pair, self.u0, degree=LOAD_DEGREE)

    def load_assembler(self, dofmap: DofMap) -> "LoadAssembler | None":
        return LoadAssembler(self, dofmap) if self.has_source else None


class LoadAssembler:
    """Scalar-space load vectors (f(t), v_i) by a degree-8 rule, reusing one point cloud."""

    def __init__(self, problem: ProblemSpec, dofmap: DofMap, degree: int = LOAD_DEGREE):
        if problem.series is None:
            raise ValueError(f"problem {problem.name!r} has no source term")
        qr = rule(degree)
        mesh = dofmap.mesh
        pts = quadrature_points(mesh, qr)
        self.dofmap = dofmap
        self._eval = problem.series.evaluator(pts[..., 0], pts[..., 1])
        self._w = qr.weights[None, :] * np.abs(mesh.dets)[:, None]
        self._v = reference_scalar(dofmap.pair, qr.xy)

    def __call__(self, t: float) -> np.ndarray:
        f = self._eval.source(t)
        out = np.zeros(self.dofmap.n_scalar)
        out[self.dofmap.scalar_dofs] = (f * self._w) @ self._v
        return out


def _require_series(p: ProblemSpec) -> ModalSeries:
    if p.series is None:
        raise ValueError(f"problem {p.name!r} has no exact solution")
    return p.series


def eval_exact_u(p: ProblemSpec, x, y, t: float):
    return _require_series(p).evaluator(x, y).u(t)


def eval_exact_flux(p: ProblemSpec, x, y, t: float):
    return _require_series(p).evaluator(x, y).flux(t)


def eval_source_f(p: ProblemSpec, x, y, t: float):
    return _require_series(p).evaluator(x, y).source(t)


def _check(M: int, convention: str) -> None:
    if M < 1:
        raise ValueError(f"series truncation must be >= 1, got {M}")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown sign convention {convention!r}; expected one of {CONVENTIONS}")


def _series_initial(series: ModalSeries) -> Callable:
    def u0(x, y):
        return series.evaluator(x, y).u(0.0)

    return u0


def example1(alpha: float = 0.5) -> ProblemSpec:
    """Smooth polynomial data, no source, no closed-form solution."""
    return ProblemSpec("example1", alpha, lambda x, y: x * (1 - x) * y * (1 - y), u0_degree=4)


def hat(x):
    return np.minimum(x, 1.0 - x)


def example2(alpha: float = 0.5, M: int = DEFAULT_TERMS, convention: str = "separable") -> ProblemSpec:
    _check(M, convention)
    lam = eigenvalues(M)
    m = np.arange(M + 1)
    mag = 16.0 / np.outer(lam, lam) ** 2
    if convention == "separable":
        sign = (-1.0) ** np.add.outer(m, m)
    else:
        sign = (-1.0) ** np.multiply.outer(m, m)
    series = ModalSeries(alpha, sign * mag, convention)
    if convention == "separable":
        return ProblemSpec("example2", alpha, lambda x, y: hat(x) * hat(y), series=series)
    return ProblemSpec("example2", alpha, _series_initial(series), series=series)


def indicator(x, y):
    x, y = np.asarray(x), np.asarray(y)
    inside = (x >= 0.25) & (x <= 0.75) & (y >= 0.25) & (y <= 0.75)
    return inside.astype(float)


def example3(alpha: float = 0.5, M: int = DEFAULT_TERMS, convention: str = "separable") -> ProblemSpec:
    _check(M, convention)
    lam = eigenvalues(M)
    half = (np.arange(M + 1) + 1) // 2  # ceil(m / 2)
    mag = 8.0 / np.outer(lam, lam)
    if convention == "separable":
        sign = (-1.0) ** np.add.outer(half, half)
    else:
        sign = (-1.0) ** np.multiply.outer(half, half)
    series = ModalSeries(alpha, sign * mag, convention)
    if convention == "separable":
        return ProblemSpec("example3", alpha, indicator, series=series)
    return ProblemSpec("example3", alpha, _series_initial(series), series=series)


def get_problem(example: int, alpha: float, M: int = DEFAULT_TERMS, convention: str = "separable") -> ProblemSpec:
    if example == 1:
        return example1(alpha)
    if example == 2:
        return example2(alpha, M, convention)
    if example == 3:
        return example3(alpha, M, convention)
    raise ValueError(f"unknown example {example}")
