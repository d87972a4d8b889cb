"""Raviart-Thomas / discontinuous-Lagrange element pairs on triangle meshes.

Flux bases live on the reference triangle and are carried to physical
triangles by the contravariant Piola map ``w(x) = J w_ref(x_ref) / det J``,
which preserves edge-normal moments. The local dofs of edge ``k`` (opposite
vertex ``k``) are normal moments against 1 and ``2s - 1``, where ``s`` runs
along the counter-clockwise traversal of the edge. RT1 adds the two interior
moments against (1, 0) and (0, 1).

Global flux dofs use the edge direction low -> high vertex index with the
normal obtained by a clockwise quarter turn of that direction. Switching the
traversal flips both the normal and ``2s - 1``, so only the zeroth moment
picks up the edge sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from fracflow.mesh import Mesh
from fracflow.quadrature import gauss_legendre_01, rule


class ElementPair(enum.Enum):
    RT0_P0 = "rt0"
    RT1_P1dc = "rt1"

    @property
    def order(self) -> int:
        return 0 if self is ElementPair.RT0_P0 else 1

    @property
    def flux_dofs_per_edge(self) -> int:
        return self.order + 1

    @property
    def flux_dofs_per_triangle_interior(self) -> int:
        return 2 * self.order

    @property
    def scalar_dofs_per_triangle(self) -> int:
        return 1 if self.order == 0 else 3

    @property
    def local_flux_dim(self) -> int:
        return 3 * self.flux_dofs_per_edge + self.flux_dofs_per_triangle_interior

    @classmethod
    def parse(cls, name) -> "ElementPair":
        if isinstance(name, cls):
            return name
        key = str(name).lower()
        for p in cls:
            if key in (p.value, p.name.lower()):
                return p
        raise ValueError(f"unknown element pair {name!r}")


_REF_VERTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def _ref_edge(k: int):
    a = _REF_VERTS[(k + 1) % 3]
    b = _REF_VERTS[(k + 2) % 3]
    t = b - a
    return a, t, np.array([t[1], -t[0]])  # start, tangent, |e|-scaled outward normal


def _rt1_monomials(xy: np.ndarray):
    x, y = xy[:, 0], xy[:, 1]
    one, zero = np.ones_like(x), np.zeros_like(x)
    vx = np.stack([one, x, y, zero, zero, zero, x * x, x * y], axis=1)
    vy = np.stack([zero, zero, zero, one, x, y, x * y, y * y], axis=1)
    div = np.stack([zero, one, zero, zero, zero, one, 3 * x, 3 * y], axis=1)
    return np.stack([vx, vy], axis=2), div


def _rt1_functionals(basis_fn) -> np.ndarray:
    """Apply the eight RT1 dof functionals to each function of ``basis_fn``."""
    s, ws = gauss_legendre_01(4)
    rows = []
    for k in range(3):
        a, t, nrm = _ref_edge(k)
        vals, _ = basis_fn(a + s[:, None] * t)
        flux = vals @ nrm  # (Q, nb)
        rows.append(ws @ flux)
        rows.append(ws @ (flux * (2 * s - 1)[:, None]))
    qr = rule(2)
    vals, _ = basis_fn(qr.xy)
    rows.append(qr.weights @ vals[:, :, 0])
    rows.append(qr.weights @ vals[:, :, 1])
    return np.array(rows)


@lru_cache(maxsize=None)
def _rt1_coefficients() -> np.ndarray:
    C = np.linalg.inv(_rt1_functionals(_rt1_monomials))
    C.setflags(write=False)
    return C


def reference_flux(pair: ElementPair, xy) -> tuple[np.ndarray, np.ndarray]:
    """Reference flux basis values (Q, nloc, 2) and divergences (Q, nloc)."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    if pair is ElementPair.RT0_P0:
        vals = xy[:, None, :] - _REF_VERTS[None, :, :]
        div = np.full((len(xy), 3), 2.0)
        return vals, div
    mono, mdiv = _rt1_monomials(xy)
    C = _rt1_coefficients()
    return np.einsum("qkd,kj->qjd", mono, C), mdiv @ C


def reference_scalar(pair: ElementPair, xy) -> np.ndarray:
    """Reference scalar basis values (Q, nloc): 1 for P0, barycentrics for P1dc."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    if pair is ElementPair.RT0_P0:
        return np.ones((len(xy), 1))
    return np.column_stack([1.0 - xy[:, 0] - xy[:, 1], xy[:, 0], xy[:, 1]])


@lru_cache(maxsize=None)
def reference_scalar_mass(pair: ElementPair) -> np.ndarray:
    qr = rule(2)
    v = reference_scalar(pair, qr.xy)
    M = np.einsum("q,qi,qj->ij", qr.weights, v, v)
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class DofMap:
    mesh: Mesh
    pair: ElementPair
    n_flux: int
    n_scalar: int
    flux_dofs: np.ndarray  # (T, nloc) global indices
    flux_signs: np.ndarray  # (T, nloc) +-1
    scalar_dofs: np.ndarray  # (T, nloc_s)

    @property
    def size(self) -> int:
        return self.n_flux + self.n_scalar


def build_dofmap(mesh: Mesh, pair: ElementPair) -> DofMap:
    pair = ElementPair.parse(pair)
    T, E = mesh.num_triangles, mesh.num_edges
    te, sg = mesh.triangle_edges, mesh.edge_signs
    if pair is ElementPair.RT0_P0:
        flux = te.copy()
        signs = sg.copy()
        n_flux, n_scalar = E, T
        scalar = np.arange(T)[:, None]
    else:
        edge_part = np.stack([2 * te, 2 * te + 1], axis=2).reshape(T, 6)
        sign_part = np.stack([sg, np.ones_like(sg)], axis=2).reshape(T, 6)
        interior = 2 * E + 2 * np.arange(T)[:, None] + np.arange(2)[None, :]
        flux = np.hstack([edge_part, interior])
        signs = np.hstack([sign_part, np.ones((T, 2))])
        n_flux, n_scalar = 2 * E + 2 * T, 3 * T
        scalar = np.arange(3 * T).reshape(T, 3)
    for a in (flux, signs, scalar):
        a.setflags(write=False)
    return DofMap(mesh, pair, n_flux, n_scalar, flux, signs, scalar)


def _check_local(pair: ElementPair, local: int, dim: int) -> None:
    if not 0 <= local < dim:
        raise IndexError(f"local index {local} out of range for {pair.name} (dim {dim})")


def flux_basis(pair, triangle, local: int, point) -> tuple[np.ndarray, float]:
    """Value and divergence of local flux basis ``local`` on a physical triangle.

    ``triangle`` is a (3, 2) counter-clockwise vertex array. No global sign is applied.
    """
    pair = ElementPair.parse(pair)
    _check_local(pair, local, pair.local_flux_dim)
    P = np.asarray(triangle, dtype=float)
    J = np.column_stack([P[1] - P[0], P[2] - P[0]])
    det = np.linalg.det(J)
    xref = np.linalg.solve(J, np.asarray(point, dtype=float) - P[0])
    vals, div = reference_flux(pair, xref[None])
    return J @ vals[0, local] / det, float(div[0, local] / det)


def scalar_basis(pair, triangle, local: int, point) -> float:
    pair = ElementPair.parse(pair)
    _check_local(pair, local, pair.scalar_dofs_per_triangle)
    P = np.asarray(triangle, dtype=float)
    J = np.column_stack([P[1] - P[0], P[2] - P[0]])
    xref = np.linalg.solve(J, np.asarray(point, dtype=float) - P[0])
    return float(reference_scalar(pair, xref[None])[0, local])


def quadrature_points(mesh: Mesh, qr) -> np.ndarray:
    """Physical coordinates (T, Q, 2) of a reference rule on every triangle."""
    P0 = mesh.vertices[mesh.triangles[:, 0]]
    return P0[:, None, :] + np.einsum("tij,qj->tqi", mesh.jacobians, qr.xy)


def project_scalar(
    mesh: Mesh, pair, f, degree: int = 8, polynomial_degree: int | None = None
) -> np.ndarray:
    """Element-wise L2 projection of ``f(x, y)`` onto the discontinuous scalar space.

    ``polynomial_degree`` declares ``f`` polynomial of that degree; when it is
    None the rule must have degree >= 8.
    """
    pair = ElementPair.parse(pair)
    if polynomial_degree is None:
        if degree < 8:
            raise ValueError(f"non-polynomial data needs quadrature degree >= 8, got {degree}")
    elif degree < polynomial_degree + pair.order:
        raise ValueError("quadrature degree too low for the declared polynomial degree")
    qr = rule(degree)
    pts = quadrature_points(mesh, qr)
    fv = np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float)
    fv = np.broadcast_to(fv, pts.shape[:2])
    v = reference_scalar(pair, qr.xy)
    rhs = np.einsum("q,tq,ql->tl", qr.weights, fv, v)
    return np.linalg.solve(reference_scalar_mass(pair), rhs.T).T.ravel()


def eval_scalar(dofmap: DofMap, coeffs, tri, xy_ref) -> np.ndarray:
    """Scalar field at reference points ``xy_ref`` of triangles ``tri`` (paired)."""
    v = reference_scalar(dofmap.pair, xy_ref)
    c = np.asarray(coeffs)[dofmap.scalar_dofs[tri]]
    return np.einsum("pl,pl->p", c, v)


def eval_flux(dofmap: DofMap, coeffs, tri, xy_ref) -> np.ndarray:
    """Flux field (P, 2) at reference points ``xy_ref`` of triangles ``tri`` (paired)."""
    vals, _ = reference_flux(dofmap.pair, xy_ref)
    c = np.asarray(coeffs)[dofmap.flux_dofs[tri]] * dofmap.flux_signs[tri]
    ref = np.einsum("pj,pjd->pd", c, vals)
    J = dofmap.mesh.jacobians[tri]
    return np.einsum("pij,pj->pi", J, ref) / dofmap.mesh.dets[tri][:, None]


def scalar_at_rule(dofmap: DofMap, coeffs, qr) -> np.ndarray:
    """Scalar field at every triangle's copy of rule ``qr``: shape (T, Q)."""
    v = reference_scalar(dofmap.pair, qr.xy)
    return np.asarray(coeffs)[dofmap.scalar_dofs] @ v.T


def flux_at_rule(dofmap: DofMap, coeffs, qr) -> np.ndarray:
    """Flux field at every triangle's copy of rule ``qr``: shape (T, Q, 2)."""
    vals, _ = reference_flux(dofmap.pair, qr.xy)
    c = np.asarray(coeffs)[dofmap.flux_dofs] * dofmap.flux_signs
    ref = np.einsum("tj,qjd->tqd", c, vals)
    return np.einsum("tij,tqj->tqi", dofmap.mesh.jacobians, ref) / dofmap.mesh.dets[:, None, None]


def divergence_at_rule(dofmap: DofMap, coeffs, qr) -> np.ndarray:
    """Pointwise divergence of a flux field at rule ``qr``: shape (T, Q)."""
    _, div = reference_flux(dofmap.pair, qr.xy)
    c = np.asarray(coeffs)[dofmap.flux_dofs] * dofmap.flux_signs
    return (c @ div.T) / dofmap.mesh.dets[:, None]
