"""Backward-Euler convolution quadrature for fractional derivatives and integrals.

The weights of order ``q`` are the Taylor coefficients of ``(1 - xi)**q``.
Order ``alpha`` gives the discrete derivative, order ``-alpha`` the discrete
fractional integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fracflow import kernels


def binomial_weights(order: float, count: int) -> np.ndarray:
    """First ``count`` coefficients of ``(1 - xi)**order`` via a_j = a_{j-1} (j-1-order)/j."""
    if count < 1:
        raise ValueError(f"need at least one weight, got count={count}")
    # extended-precision recurrence keeps ~1e-15 relative accuracy out to j ~ 1e5
    j = np.arange(1, count, dtype=np.longdouble)
    w = np.empty(count, dtype=np.longdouble)
    w[0] = 1
    w[1:] = np.cumprod((j - 1 - np.longdouble(order)) / j)
    return w.astype(np.float64)


@dataclass(frozen=True, eq=False)
class CqWeights:
    alpha: float
    weights: np.ndarray
    tau: float = 1.0

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def scale(self) -> float:
        """tau**-alpha, the factor in front of the convolution."""
        return self.tau ** (-self.alpha)


def cq_weights(alpha: float, count: int, tau: float = 1.0) -> CqWeights:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    w = binomial_weights(alpha, count)
    w.setflags(write=False)
    return CqWeights(float(alpha), w, float(tau))


def _convolve(weights: np.ndarray, values, n: int):
    values = np.asarray(values, dtype=float)
    if not 0 <= n < len(values):
        raise IndexError(f"step index {n} outside history of length {len(values)}")
    if n >= len(weights):
        raise IndexError(f"step index {n} needs {n + 1} weights, have {len(weights)}")
    return np.tensordot(weights[n::-1], values[: n + 1], axes=1)


def apply_frac_derivative(w: CqWeights, values, n: int):
    """tau^-alpha * sum_{j=0}^{n} a_{n-j} values[j]."""
    return w.scale * _convolve(w.weights, values, n)


def apply_frac_integral(alpha: float, values, n: int, tau: float):
    """tau^alpha * sum_{j=0}^{n} b_{n-j} values[j] with b the weights of order -alpha."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    b = binomial_weights(-alpha, n + 1)
    return tau**alpha * _convolve(b, values, n)


def scalar_relaxation(alpha: float, lam: float, N: int, T: float) -> np.ndarray:
    """CQ solution of the Caputo problem D^alpha y = -lam y, y(0) = 1, on N steps of [0, T].

    Exact solution: E_{alpha,1}(-lam t^alpha).
    """
    if lam <= 0:
        raise ValueError(f"relaxation rate must be positive, got {lam}")
    if N < 1:
        raise ValueError("need at least one step")
    tau = T / N
    w = cq_weights(alpha, N + 1, tau)
    # sum_k a_k (y_{n-k} - y_0) = sum_k a_k y_{n-k} - S_n y_0 with S_n = a_n^(alpha-1);
    # keeping y unshifted preserves relative accuracy once y is small
    partial = binomial_weights(alpha - 1.0, N + 1)
    y = np.zeros((N + 1, 1))
    y[0, 0] = 1.0
    s = np.empty(1)
    denom = 1.0 + lam * tau**alpha
    for n in range(1, N + 1):
        kernels.history_sum(w.weights, y, n, s)
        y[n, 0] = (partial[n] - s[0]) / denom
    return y[:, 0]
