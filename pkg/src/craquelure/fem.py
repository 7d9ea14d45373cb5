"""P1 assembly of the two quadratic sub-problems and the energy quadrature.

Both sub-problems of the alternate-minimization scheme are convex
quadratics, so each reduces to one SPD system:

* displacement (v frozen):  [K(v) + 2 beta M] u = 2 beta M g(t)
  with K(v) the elasticity stiffness weighted pointwise by (v^2 + eta);
* phase field (u frozen):   [M_W + (Gc/eps) M + Gc eps K] v = (Gc/eps) M 1
  with M_W the mass matrix weighted by the elastic density W(strain(u)).

Quadrature is a fixed degree-2 rule: 3 interior points per triangle,
2 Gauss points per segment. For P1 fields every term except the damage
weight is integrated exactly, so the assembled quadratic forms reproduce
``quadrature_energy`` identically; the staggered solver relies on that.

On 1D meshes the elastic density is the bar convention W = mu (u')^2,
matching the Euler-Lagrange equation -mu u'' + 2 beta u = 2 beta g.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .core import EnergyBreakdown, LoadProgram, MaterialParams
from .errors import ParameterError
from .mesh import Field, Mesh, require_phase_field


class BoundaryCondition(str, Enum):
    NEUMANN = "neumann"
    DIRICHLET_G = "dirichlet_g"


@dataclass
class SparseSPD:
    """Symmetric positive-definite system A x = b in CSR storage."""

    matrix: sp.csr_matrix
    rhs: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def symmetry_error(self) -> float:
        """Relative sup-norm of A - A^T."""
        d = abs(self.matrix - self.matrix.T)
        scale = abs(self.matrix).max() or 1.0
        return d.max() / scale if d.nnz else 0.0


# degree-2 quadrature in barycentric coordinates
_QP_TRI = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
_QW_TRI = np.array([1 / 3, 1 / 3, 1 / 3])
_G = 0.5 / np.sqrt(3.0)
_QP_SEG = np.array([[0.5 + _G, 0.5 - _G], [0.5 - _G, 0.5 + _G]])
_QW_SEG = np.array([0.5, 0.5])


class _Fold:
    """Precomputed COO -> CSR accumulation map for a fixed sparsity pattern."""

    def __init__(self, rows: np.ndarray, cols: np.ndarray, n: int):
        order = np.lexsort((cols, rows))
        r, c = rows[order], cols[order]
        new = np.empty(r.size, dtype=bool)
        new[0] = True
        new[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        slot = np.cumsum(new) - 1
        self.order = order
        self.slot = slot
        self.nnz = int(slot[-1]) + 1
        self.indices = c[new]
        counts = np.bincount(r[new], minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.n = n

    def csr(self, entry_data: np.ndarray) -> sp.csr_matrix:
        vals = np.bincount(self.slot, weights=entry_data.ravel()[self.order], minlength=self.nnz)
        return sp.csr_matrix((vals, self.indices, self.indptr), shape=(self.n, self.n))


class _MeshOps:
    """Per-mesh geometry, quadrature, and assembly scaffolding (cached)."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        elems = mesh.elements
        coords = mesh.nodes[elems]  # (e, k, dim)
        k = elems.shape[1]
        if mesh.dim == 2:
            v1 = coords[:, 1] - coords[:, 0]
            v2 = coords[:, 2] - coords[:, 0]
            det = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
            if np.any(det <= 0):
                raise ParameterError("mesh has non-counterclockwise or degenerate triangles")
            self.measure = 0.5 * det
            x, y = coords[..., 0], coords[..., 1]
            b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
            c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
            self.grads = np.stack([b, c], axis=2) / det[:, None, None]  # (e, 3, 2)
            self.qp, self.qw = _QP_TRI, _QW_TRI
        else:
            h = coords[:, 1, 0] - coords[:, 0, 0]
            if np.any(h <= 0):
                raise ParameterError("mesh has non-positive segment lengths")
            self.measure = h
            self.grads = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]  # (e, 2, 1)
            self.qp, self.qw = _QP_SEG, _QW_SEG

        # local scalar mass pattern (exact for P1 under the degree-2 rule)
        self.mass_local = np.einsum("q,qi,qj->ij", self.qw, self.qp, self.qp)

        n = mesh.n_nodes
        dim = mesh.dim
        rows_s = np.repeat(elems, k, axis=1).ravel()
        cols_s = np.tile(elems, (1, k)).ravel()
        self.fold_s = _Fold(rows_s, cols_s, n)
        if dim == 2:
            vdofs = (2 * elems[:, :, None] + np.arange(2)).reshape(elems.shape[0], 2 * k)
            rows_v = np.repeat(vdofs, 2 * k, axis=1).ravel()
            cols_v = np.tile(vdofs, (1, 2 * k)).ravel()
            self.fold_v = _Fold(rows_v, cols_v, 2 * n)
        else:
            self.fold_v = self.fold_s

        mloc = self.measure[:, None, None] * self.mass_local
        self.mass_scalar = self.fold_s.csr(mloc)
        kloc = self.measure[:, None, None] * np.einsum("eid,ejd->eij", self.grads, self.grads)
        self.stiff_scalar = self.fold_s.csr(kloc)
        if dim == 2:
            eye = np.eye(2)
            self.mass_vector = self.fold_v.csr(np.einsum("eij,ab->eiajb", mloc, eye).reshape(-1, 6, 6))
            lap_v = np.einsum("eij,ab->eiajb", kloc, eye).reshape(-1, 6, 6)
            self.h1_vector = self.mass_vector + self.fold_v.csr(lap_v)
        else:
            self.mass_vector = self.mass_scalar
            self.h1_vector = self.mass_scalar + self.stiff_scalar
        self._elastic_units: dict[tuple[float, float], np.ndarray] = {}

    def elastic_unit(self, lam: float, mu: float) -> np.ndarray:
        """Per-element stiffness blocks of the unit-coefficient elastic form."""
        key = (lam, mu)
        cached = self._elastic_units.get(key)
        if cached is not None:
            return cached
        if self.mesh.dim == 2:
            e = self.mesh.n_elements
            gx, gy = self.grads[:, :, 0], self.grads[:, :, 1]
            B = np.zeros((e, 3, 6))
            B[:, 0, 0::2] = gx
            B[:, 1, 1::2] = gy
            B[:, 2, 0::2] = gy
            B[:, 2, 1::2] = gx
            D = np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])
            K0 = np.einsum("e,eri,rs,esj->eij", self.measure, B, D, B)
        else:
            K0 = mu * self.measure[:, None, None] * np.einsum(
                "eid,ejd->eij", self.grads, self.grads
            )
        self._elastic_units[key] = K0
        return K0

    def at_quadrature(self, nodal: np.ndarray) -> np.ndarray:
        """Interpolate a nodal scalar to the quadrature points, (e, q)."""
        return nodal[self.mesh.elements] @ self.qp.T

    def strains(self, u: np.ndarray) -> np.ndarray:
        """Element-constant symmetric gradient of a displacement field."""
        if self.mesh.dim == 2:
            um = u.reshape(-1, 2)[self.mesh.elements]  # (e, 3, 2)
            J = np.einsum("eka,ekd->ead", um, self.grads)  # du_a/dx_d
            return 0.5 * (J + J.transpose(0, 2, 1))
        du = np.einsum("ek,ekd->ed", u[self.mesh.elements], self.grads)
        return du[:, :, None]  # (e, 1, 1)

    def elastic_densities(self, u: np.ndarray, lam: float, mu: float) -> np.ndarray:
        """Per-element W(strain(u)); see the module docstring for conventions."""
        e = self.strains(u)
        if self.mesh.dim == 2:
            tr = e[:, 0, 0] + e[:, 1, 1]
            return lam * tr * tr + 2.0 * mu * np.einsum("eab,eab->e", e, e)
        return mu * e[:, 0, 0] ** 2


_OPS_CACHE: "weakref.WeakKeyDictionary[Mesh, _MeshOps]" = weakref.WeakKeyDictionary()


def mesh_ops(mesh: Mesh) -> _MeshOps:
    ops = _OPS_CACHE.get(mesh)
    if ops is None:
        ops = _MeshOps(mesh)
        _OPS_CACHE[mesh] = ops
    return ops


def _check_field(f: Field, mesh: Mesh, components: int, name: str) -> None:
    if f.mesh is not mesh:
        raise ParameterError(f"{name} lives on a different mesh")
    if f.components != components:
        raise ParameterError(f"{name} must have {components} component(s), got {f.components}")


def _damage_coefficient(ops: _MeshOps, v: np.ndarray, eta: float) -> np.ndarray:
    """Quadrature average of (v^2 + eta) per element (exact for P1 v)."""
    vq = ops.at_quadrature(v)
    return (vq * vq) @ ops.qw + eta


def assemble_u_system(
    mesh: Mesh,
    v: Field,
    t: float,
    params: MaterialParams,
    load: LoadProgram,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
) -> SparseSPD:
    """Assemble the displacement sub-problem at fixed damage.

    For ``dirichlet_g`` the boundary nodes are constrained to u = g(t) by
    symmetric elimination, which keeps the matrix SPD.
    """
    ops = mesh_ops(mesh)
    _check_field(v, mesh, 1, "v")
    require_phase_field(v)
    bc = BoundaryCondition(bc)

    coef = _damage_coefficient(ops, v.values, params.eta_eps)
    K0 = ops.elastic_unit(params.lame_lambda, params.lame_mu)
    A = ops.fold_v.csr(coef[:, None, None] * K0) + 2.0 * params.adhesion_beta * ops.mass_vector
    g = load.displacement(t, mesh.nodes).ravel()
    b = 2.0 * params.adhesion_beta * (ops.mass_vector @ g)

    if bc is BoundaryCondition.DIRICHLET_G:
        bnodes = mesh.boundary_nodes()
        if mesh.dim == 2:
            dofs = np.concatenate([2 * bnodes, 2 * bnodes + 1])
        else:
            dofs = bnodes
        A, b = _eliminate(A, b, np.sort(dofs), g[np.sort(dofs)])
    return SparseSPD(A, b)


def _eliminate(A: sp.csr_matrix, b: np.ndarray, dofs: np.ndarray, values: np.ndarray):
    """Symmetric elimination of prescribed dofs: zero rows/cols, unit diagonal."""
    n = A.shape[0]
    uc = np.zeros(n)
    uc[dofs] = values
    b = b - A @ uc
    keep = np.ones(n)
    keep[dofs] = 0.0
    P = sp.diags(keep)
    A = (P @ A @ P + sp.diags(1.0 - keep)).tocsr()
    b *= keep
    b[dofs] = values
    return A, b


def assemble_v_system(mesh: Mesh, u: Field, params: MaterialParams) -> SparseSPD:
    """Assemble the phase-field sub-problem at fixed displacement."""
    ops = mesh_ops(mesh)
    _check_field(u, mesh, mesh.dim, "u")
    W = ops.elastic_densities(u.values, params.lame_lambda, params.lame_mu)
    mloc = ops.measure[:, None, None] * ops.mass_local
    Gc, eps = params.toughness_Gc, params.eps
    A = ops.fold_s.csr(W[:, None, None] * mloc) + (Gc / eps) * ops.mass_scalar + (
        Gc * eps
    ) * ops.stiff_scalar
    b = (Gc / eps) * (ops.mass_scalar @ np.ones(mesh.n_nodes))
    return SparseSPD(A.tocsr(), b)


def quadrature_energy(
    mesh: Mesh, t: float, u: Field, v: Field, params: MaterialParams, load: LoadProgram
) -> EnergyBreakdown:
    """Evaluate the three energy terms with the fixed degree-2 rule.

    Components are summed in element order; total = elastic + fracture +
    adhesion in that order.
    """
    ops = mesh_ops(mesh)
    _check_field(u, mesh, mesh.dim, "u")
    _check_field(v, mesh, 1, "v")
    require_phase_field(v)

    coef = _damage_coefficient(ops, v.values, params.eta_eps)
    W = ops.elastic_densities(u.values, params.lame_lambda, params.lame_mu)
    elastic = 0.5 * float(np.sum(coef * ops.measure * W))

    # interpolate v - 1 (not v) so the sound state yields exact zeros
    dq = ops.at_quadrature(v.values - 1.0)
    bulk = (dq * dq @ ops.qw) * ops.measure
    gradv = np.einsum("ek,ekd->ed", v.values[mesh.elements], ops.grads)
    grad = np.einsum("ed,ed->e", gradv, gradv) * ops.measure
    Gc, eps = params.toughness_Gc, params.eps
    fracture = 0.5 * Gc * (float(np.sum(bulk)) / eps + eps * float(np.sum(grad)))

    g = load.displacement(t, mesh.nodes)
    diff = u.as_matrix() - g
    # |u - g|^2 is quadratic per element, so the rule integrates it exactly
    dq = np.stack([ops.at_quadrature(diff[:, c]) for c in range(mesh.dim)], axis=2)
    adh = np.einsum("eqc,eqc,q->e", dq, dq, ops.qw) * ops.measure
    adhesion = params.adhesion_beta * float(np.sum(adh))

    return EnergyBreakdown.of(elastic, fracture, adhesion)


def time_derivative_energy(
    mesh: Mesh, t: float, u: Field, params: MaterialParams, load: LoadProgram
) -> float:
    """d/dt of the energy at frozen (u, v): -2 beta integral (u - g(t)) . (A x)."""
    ops = mesh_ops(mesh)
    _check_field(u, mesh, mesh.dim, "u")
    diff = u.as_matrix() - load.displacement(t, mesh.nodes)
    rate = load.rate(mesh.nodes)
    dq = np.stack([ops.at_quadrature(diff[:, c]) for c in range(mesh.dim)], axis=2)
    rq = np.stack([ops.at_quadrature(rate[:, c]) for c in range(mesh.dim)], axis=2)
    val = np.einsum("eqc,eqc,q->e", dq, rq, ops.qw) * ops.measure
    return -2.0 * params.adhesion_beta * float(np.sum(val))


def strain_energy_nodal(mesh: Mesh, u: Field, params: MaterialParams) -> np.ndarray:
    """Project the element-constant density W to nodes by measure-weighted averaging."""
    ops = mesh_ops(mesh)
    _check_field(u, mesh, mesh.dim, "u")
    W = ops.elastic_densities(u.values, params.lame_lambda, params.lame_mu)
    k = mesh.elements.shape[1]
    flat = mesh.elements.ravel()
    wsum = np.bincount(flat, weights=np.repeat(W * ops.measure, k), minlength=mesh.n_nodes)
    msum = np.bincount(flat, weights=np.repeat(ops.measure, k), minlength=mesh.n_nodes)
    return wsum / msum


def h1_vector_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Discrete H1 inner product (mass + stiffness) for displacement fields."""
    return mesh_ops(mesh).h1_vector
