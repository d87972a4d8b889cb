"""Two-parameter Mittag-Leffler function E_{a,b}(z) on the negative real axis.

Three evaluators are combined:

* the power series with compensated summation, for |z| <= z_switch as long
  as no term exceeds _SERIES_PEAK;
* the large-argument expansion -sum_k z^-k / Gamma(b - a k), used only where
  its smallest term certifies the requested accuracy;
* otherwise the inverse Laplace transform of s^(a-b) / (s^a - z) at t = 1,
  by the trapezoidal rule on a parabolic contour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn, rgamma

_SERIES_TERMS = 400
_ASYM_TERMS = 40
_CONTOUR_NODES = 20
_SERIES_PEAK = 1e3  # largest admissible series term; cancellation costs log10 of it in digits


@dataclass(frozen=True)
class MlParams:
    alpha: float
    beta: float
    tol: float = 1e-10
    z_switch: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.z_switch < 1.0:
            raise ValueError("series/expansion crossover must be >= 1")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")


def _ml_series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    s = np.zeros_like(z)
    comp = np.zeros_like(z)
    zp = np.ones_like(z)
    for p in range(_SERIES_TERMS):
        term = zp * rgamma(alpha * p + beta)
        # Kahan summation
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        if p > 2 and np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
        zp = zp * z
    return s


def _series_peak(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Largest term magnitude max_p x^p / |Gamma(alpha p + beta)| of the series at -x."""
    p = np.arange(_SERIES_TERMS, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(np.asarray(x, dtype=float))
        logs = np.where(p[None, :] == 0, 0.0, p[None, :] * logx[:, None]) - gammaln(alpha * p + beta)[None, :]
    with np.errstate(over="ignore"):
        return np.exp(np.max(logs, axis=1))


def _ml_asymptotic(alpha: float, beta: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimally truncated expansion for z < 0 and the size of its smallest term.

    Truncation is decided on the envelope |1/Gamma(a)| <= Gamma(1 - a) / pi (a < 1)
    rather than on the terms themselves, which can be spuriously small next
    to a pole of Gamma. The second array is the smallest envelope term
    relative to the sum (inf where the expansion gives no information).
    """
    x = -np.asarray(z, dtype=float)
    k = np.arange(1, _ASYM_TERMS + 1, dtype=float)
    arg = beta - alpha * k
    pole = (np.round(arg) <= 0) & np.isclose(arg, np.round(arg), rtol=0.0, atol=1e-12)
    log_rg = np.where(pole, -np.inf, -gammaln(np.where(pole, 0.5, arg)))
    log_env = np.where(arg >= 1, log_rg, gammaln(np.maximum(1.0 - arg, 1e-300)) - np.log(np.pi))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logx = np.log(x)[:, None] * k[None, :]
        env = log_env[None, :] - logx
        stop = np.argmin(env, axis=1)
        include = k[None, :] <= (stop + 1)[:, None]
        # term_k = -(-x)^-k / Gamma(arg) = (-1)^(k+1) x^-k / Gamma(arg)
        signs = np.where(k % 2 == 1, 1.0, -1.0) * gammasgn(arg)
        terms = np.where(include & ~pole[None, :], signs[None, :] * np.exp(log_rg[None, :] - logx), 0.0)
        total = terms.sum(axis=1)
        smallest = np.exp(env[np.arange(len(x)), stop])
        rel = np.where(total != 0, smallest / np.abs(total), np.inf)
    return total, rel


def _ml_contour(alpha: float, beta: float, z: np.ndarray, nodes: int = _CONTOUR_NODES) -> np.ndarray:
    x = -np.asarray(z, dtype=float)
    h = 3.0 / nodes
    mu = np.pi * nodes / 12.0
    u = h * np.arange(nodes + 1)
    s = mu * (1.0 + 1j * u) ** 2
    w = np.full(u.shape, 2.0)
    w[0] = 1.0
    g = (np.exp(s) * s ** (alpha - beta) * (1.0 + 1j * u))[None, :] / (
        (s**alpha)[None, :] + x[:, None]
    )
    return (mu * h / np.pi) * np.real(g @ w)


def ml_eval(params: MlParams, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z > 0) or not np.all(np.isfinite(z)):
        raise ValueError("argument must be finite and <= 0")
    a, b = params.alpha, params.beta
    if a == 1.0 and b == 1.0:
        out = np.exp(z)
        return out[0] if scalar else out
    out = np.empty_like(z)
    near = np.abs(z) <= params.z_switch
    if near.any():
        near[near] = _series_peak(a, b, -z[near]) <= _SERIES_PEAK
    if near.any():
        out[near] = _ml_series(a, b, z[near])
    far = ~near
    if far.any():
        zf = z[far]
        asym, rel = _ml_asymptotic(a, b, zf)
        ok = rel <= 1e-6 * params.tol
        vals = asym
        if not ok.all():
            vals = vals.copy()
            vals[~ok] = _ml_contour(a, b, zf[~ok])
        out[far] = vals
    return out[0] if scalar else out


def ml(alpha: float, beta: float, z, tol: float = 1e-10):
    """E_{alpha,beta}(z) for real z <= 0 (scalar or array)."""
    return ml_eval(MlParams(float(alpha), float(beta), tol), z)
