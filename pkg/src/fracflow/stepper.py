"""Fully implicit mixed scheme with backward-Euler convolution quadrature in time.

Unknowns per step are ordered (flux; scalar). With c0 = tau^-alpha every step solves

    [ A   -(B^T + G) ] [sigma^n]   [          0            ]
    [ B      c0 M    ] [  u^n  ] = [ c0 M (u^0 - h^n) + f^n ]

where h^n = sum_{k=1}^{n} a_k (u^{n-k} - u^0) is the history of the shifted
scalar sequence, so the matrix is factored once per run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from fracflow import kernels
from fracflow.assembly import SystemMatrices, assemble
from fracflow.fe_space import DofMap, ElementPair, build_dofmap
from fracflow.fracops import CqWeights, cq_weights
from fracflow.sparse import Factorization, SingularMatrixError

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    alpha: float
    T: float
    N: int
    pair: ElementPair = ElementPair.RT1_P1dc
    tol: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.N < 1:
            raise ValueError(f"need at least one time step, got N={self.N}")
        if self.T <= 0:
            raise ValueError("final time must be positive")
        object.__setattr__(self, "pair", ElementPair.parse(self.pair))

    @property
    def tau(self) -> float:
        return self.T / self.N


def block_matrix(mats: SystemMatrices, alpha: float, tau: float) -> sp.csc_matrix:
    c0 = tau ** (-alpha)
    return sp.bmat(
        [[mats.A, -(mats.B.T + mats.G)], [mats.B, c0 * mats.M]], format="csc"
    )


def build_system(mats: SystemMatrices, alpha: float, tau: float) -> Factorization:
    try:
        return Factorization(block_matrix(mats, alpha, tau))
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"block system singular (alpha={alpha}, tau={tau}): {exc}") from exc


@dataclass(eq=False)
class StepperState:
    config: SchemeConfig
    mats: SystemMatrices
    weights: CqWeights
    factorization: Factorization
    u0: np.ndarray
    shifted: np.ndarray  # (N + 1, n_scalar): u^j - u^0
    n: int = 0
    flux: np.ndarray | None = None
    residuals: list = field(default_factory=list)
    dofmap: DofMap | None = None
    _mass_u0: np.ndarray | None = None

    @property
    def history(self) -> np.ndarray:
        """Scalar coefficient vectors u^0..u^n, shape (n + 1, n_scalar)."""
        return self.shifted[: self.n + 1] + self.u0

    @property
    def u(self) -> np.ndarray:
        return self.shifted[self.n] + self.u0


def init_state(mats: SystemMatrices, u0, config: SchemeConfig, factorization: Factorization | None = None) -> StepperState:
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (mats.n_scalar,):
        raise ValueError(f"initial vector has shape {u0.shape}, expected ({mats.n_scalar},)")
    w = cq_weights(config.alpha, config.N + 1, config.tau)
    fac = factorization or build_system(mats, config.alpha, config.tau)
    shifted = np.zeros((config.N + 1, mats.n_scalar))
    return StepperState(config, mats, w, fac, u0.copy(), shifted, _mass_u0=mats.M @ u0)


def step(state: StepperState, n: int, f_n=None, factorization: Factorization | None = None):
    """Advance from step n - 1 to n. Returns (u^n, sigma^n)."""
    if n != state.n + 1:
        raise ValueError(f"expected step {state.n + 1}, got {n}")
    if n > state.config.N:
        raise ValueError(f"step {n} beyond the configured N={state.config.N}")
    mats = state.mats
    hist = np.empty(mats.n_scalar)
    kernels.history_sum(state.weights.weights, state.shifted, n, hist)
    c0 = state.weights.scale
    rhs_u = c0 * (state._mass_u0 - mats.M @ hist)
    if f_n is not None:
        rhs_u += f_n
    rhs = np.concatenate([np.zeros(mats.n_flux), rhs_u])
    fac = factorization or state.factorization
    sol = fac.solve(rhs)
    res = fac.residual(sol, rhs)
    state.residuals.append(res)
    if not np.isfinite(res) or res > state.config.tol:
        raise SolverError(
            f"step {n}: residual {res:.3e} above tolerance {state.config.tol:.1e} "
            f"(alpha={state.config.alpha}, tau={state.config.tau})"
        )
    flux, u = sol[: mats.n_flux], sol[mats.n_flux :]
    state.shifted[n] = u - state.u0
    state.flux = flux
    state.n = n
    return u, flux


def run(problem, mesh, pair, config: SchemeConfig, refactor_each_step: bool = False) -> StepperState:
    """Project the initial data, then take N steps; the returned state keeps the full history."""
    pair = ElementPair.parse(pair)
    dofmap = build_dofmap(mesh, pair)
    mats = assemble(mesh, dofmap, pair, kappa=problem.kappa, F=problem.F)
    u0 = problem.initial_coefficients(dofmap)
    state = init_state(mats, u0, config)
    state.dofmap = dofmap
    load = problem.load_assembler(dofmap)
    for n in range(1, config.N + 1):
        f_n = load(n * config.tau) if load is not None else None
        fac = build_system(mats, config.alpha, config.tau) if refactor_each_step else None
        step(state, n, f_n, fac)
    log.debug("%s: %d steps, max residual %.2e", problem.name, config.N, max(state.residuals))
    return state

