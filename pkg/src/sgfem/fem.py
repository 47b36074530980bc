"""Uniform bilinear (Q1) finite elements on the unit square.

The mesh keeps every node of the (n+1) x (n+1) grid in the algebraic system,
boundary nodes included.  Homogeneous Dirichlet conditions are imposed by
zeroing boundary rows and columns; the matrix for the mean coefficient gets
unit diagonal entries at boundary nodes so it stays positive definite, while
fluctuation matrices keep zero diagonals there and never couple boundary
degrees of freedom.  This keeps each spatial block the full node count, so
block dimensions are (n+1)^2.

Weighted stiffness entries are integrals of k grad(phi_l) . grad(phi_m) with
the coefficient k interpolated bilinearly inside each element and a 2x2 Gauss
rule (exact for the integrand's polynomial degree).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_GAUSS = 1.0 / np.sqrt(3.0)
_CORNERS = ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))


@dataclass(frozen=True)
class Mesh:
    """Uniform n x n grid of square Q1 elements on [0, 1]^2.

    Nodes are ordered row-major with x fastest: node (ix, iy) has id
    iy*(n+1) + ix and coordinates (ix*h, iy*h).
    """

    n_cells: int

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_nodes(self) -> int:
        return (self.n_cells + 1) ** 2

    @property
    def node_coords(self) -> np.ndarray:
        n1 = self.n_cells + 1
        g = np.linspace(0.0, 1.0, n1)
        xx, yy = np.meshgrid(g, g, indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])

    @property
    def boundary_mask(self) -> np.ndarray:
        n, n1 = self.n_cells, self.n_cells + 1
        ids = np.arange(n1 * n1)
        ix, iy = ids % n1, ids // n1
        return (ix == 0) | (ix == n) | (iy == 0) | (iy == n)

    @property
    def connectivity(self) -> np.ndarray:
        """(n_elements, 4) node ids, corner order SW, SE, NE, NW."""
        n, n1 = self.n_cells, self.n_cells + 1
        ex, ey = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
        sw = ey.ravel() * n1 + ex.ravel()
        return np.column_stack([sw, sw + 1, sw + n1 + 1, sw + n1])


def build_mesh(h: float) -> Mesh:
    """Mesh with element size h; 1/h must be a positive integer."""
    if h <= 0:
        raise ValueError(f"element size must be positive, got {h}")
    n = 1.0 / h
    if abs(n - round(n)) > 1e-9 * n:
        raise ValueError(f"1/h must be an integer, got 1/h = {n}")
    return Mesh(int(round(n)))


def assemble_weighted_stiffness(mesh: Mesh, field: np.ndarray,
                                unit_boundary_diag: bool = False) -> sp.csr_matrix:
    """Stiffness matrix of the coefficient field given by nodal samples.

    Boundary rows and columns are zeroed; with unit_boundary_diag the
    boundary diagonal is set to one (use this for the mean coefficient).
    """
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_nodes,):
        raise ValueError(f"field has {field.shape}, expected ({mesh.n_nodes},)")
    conn = mesh.connectivity
    coeff = field[conn]                                  # (ne, 4)
    ke = np.zeros((conn.shape[0], 4, 4))
    for gx in (-_GAUSS, _GAUSS):
        for gy in (-_GAUSS, _GAUSS):
            shape = np.array([0.25 * (1 + cx * gx) * (1 + cy * gy)
                              for cx, cy in _CORNERS])
            dxi = np.array([0.25 * cx * (1 + cy * gy) for cx, cy in _CORNERS])
            deta = np.array([0.25 * cy * (1 + cx * gx) for cx, cy in _CORNERS])
            # (2/h)^2 from the gradients cancels detJ = h^2/4
            grad = np.outer(dxi, dxi) + np.outer(deta, deta)
            ke += (coeff @ shape)[:, None, None] * grad[None, :, :]
    rows = np.repeat(conn, 4, axis=1).ravel()
    cols = np.tile(conn, (1, 4)).ravel()
    K = sp.coo_matrix((ke.ravel(), (rows, cols)),
                      shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()
    return apply_dirichlet(K, mesh.boundary_mask, unit_boundary_diag)


def apply_dirichlet(K: sp.spmatrix, boundary: np.ndarray,
                    unit_diag: bool) -> sp.csr_matrix:
    """Zero boundary rows/columns; optionally set the boundary diagonal to 1."""
    keep = sp.diags((~boundary).astype(float))
    K = (keep @ K @ keep).tocsr()
    if unit_diag:
        K = K + sp.diags(boundary.astype(float))
    K.eliminate_zeros()
    return K.tocsr()


def assemble_load(mesh: Mesh, f=1.0) -> np.ndarray:
    """Load vector for a deterministic source, zero at boundary nodes.

    f may be a constant or a callable f(x, y); the source is interpolated
    bilinearly like the coefficient (2x2 Gauss, exact for bilinear data).
    The stochastic right-hand side blocks for k >= 1 vanish because the mean
    of every non-constant orthonormal basis polynomial is zero; callers build
    the global vector by placing this into block 0.
    """
    conn = mesh.connectivity
    if callable(f):
        coords = mesh.node_coords
        fvals = np.asarray(f(coords[:, 0], coords[:, 1]), dtype=float)
    else:
        fvals = np.full(mesh.n_nodes, float(f))
    fe = fvals[conn]                                      # (ne, 4)
    load = np.zeros(mesh.n_nodes)
    detj = mesh.h * mesh.h / 4.0
    for gx in (-_GAUSS, _GAUSS):
        for gy in (-_GAUSS, _GAUSS):
            shape = np.array([0.25 * (1 + cx * gx) * (1 + cy * gy)
                              for cx, cy in _CORNERS])
            np.add.at(load, conn.ravel(),
                      (detj * (fe @ shape)[:, None] * shape[None, :]).ravel())
    load[mesh.boundary_mask] = 0.0
    return load


def write_matrix_coo(K: sp.spmatrix, path) -> None:
    """Coordinate text export ``row col value`` (zero-based indices)."""
    coo = K.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
