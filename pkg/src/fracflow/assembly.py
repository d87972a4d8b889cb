"""Global matrices of the mixed weak form.

With flux basis w and scalar basis v:

    A[i, j] = (kappa^-1 w_j, w_i)      flux mass
    B[i, j] = (div w_j, v_i)           divergence coupling
    G[i, j] = (beta v_j, w_i)          drift coupling, beta = F / kappa
    M[i, j] = (v_j, v_i)               scalar mass
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from fracflow.fe_space import (
    DofMap,
    ElementPair,
    quadrature_points,
    reference_flux,
    reference_scalar,
    reference_scalar_mass,
)
from fracflow.mesh import Mesh
from fracflow.quadrature import rule
from fracflow.sparse import TripletBuffer, compress

DEFAULT_DEGREE = {ElementPair.RT0_P0: 3, ElementPair.RT1_P1dc: 5}


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    A: sp.csr_matrix
    B: sp.csr_matrix
    G: sp.csr_matrix
    M: sp.csr_matrix

    @property
    def n_flux(self) -> int:
        return self.A.shape[0]

    @property
    def n_scalar(self) -> int:
        return self.M.shape[0]


def _field(f, x, y, ncomp: int) -> np.ndarray:
    if callable(f):
        val = f(x, y)
    else:
        val = f
    if ncomp == 1:
        return np.broadcast_to(np.asarray(val, dtype=float), x.shape)
    fx, fy = val
    return np.stack(
        [np.broadcast_to(np.asarray(fx, dtype=float), x.shape),
         np.broadcast_to(np.asarray(fy, dtype=float), x.shape)],
        axis=-1,
    )


def assemble(mesh: Mesh, dofmap: DofMap, pair=None, kappa=1.0, F=(0.0, 0.0), degree=None) -> SystemMatrices:
    """Assemble A, B, G, M. ``kappa(x, y)`` and ``F(x, y) -> (Fx, Fy)`` may be callables or constants."""
    pair = dofmap.pair if pair is None else ElementPair.parse(pair)
    if pair is not dofmap.pair:
        raise ValueError("element pair does not match the dof map")
    qr = rule(DEFAULT_DEGREE[pair] if degree is None else degree)
    pts = quadrature_points(mesh, qr)
    x, y = pts[..., 0], pts[..., 1]
    k = _field(kappa, x, y, 1)
    if np.any(k <= 0) or not np.all(np.isfinite(k)):
        raise ValueError("diffusion coefficient must be positive at every quadrature point")
    drift = _field(F, x, y, 2) / k[..., None]

    det = mesh.dets
    wq = qr.weights[None, :] * np.abs(det)[:, None]  # (T, Q)
    vals, div = reference_flux(pair, qr.xy)
    sg = dofmap.flux_signs
    # physical flux basis (T, Q, nloc, 2) and divergence (T, Q, nloc), signs included
    W = np.einsum("tab,qjb->tqja", mesh.jacobians, vals) / det[:, None, None, None]
    W *= sg[:, None, :, None]
    D = div[None, :, :] / det[:, None, None] * sg[:, None, :]
    v = reference_scalar(pair, qr.xy)  # (Q, nloc_s)

    A_loc = np.einsum("tq,tqia,tqja->tij", wq / k, W, W)
    A_loc = 0.5 * (A_loc + A_loc.transpose(0, 2, 1))
    B_loc = np.einsum("tq,qi,tqj->tij", wq, v, D)
    bw = np.einsum("tqia,tqa->tqi", W, drift)
    G_loc = np.einsum("tq,tqi,qj->tij", wq, bw, v)
    M_loc = np.abs(det)[:, None, None] * reference_scalar_mass(pair)[None]

    fd, sd = dofmap.flux_dofs, dofmap.scalar_dofs
    nf, ns = dofmap.n_flux, dofmap.n_scalar
    mats = []
    for rows, cols, loc, shape in (
        (fd, fd, A_loc, (nf, nf)),
        (sd, fd, B_loc, (ns, nf)),
        (fd, sd, G_loc, (nf, ns)),
        (sd, sd, M_loc, (ns, ns)),
    ):
        buf = TripletBuffer(shape)
        buf.add_blocks(rows, cols, loc)
        mats.append(compress(buf))
    if not callable(F) and not np.any(np.asarray(F, dtype=float)):
        mats[2] = sp.csr_matrix((nf, ns))
    return SystemMatrices(*mats)
