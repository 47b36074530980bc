"""Matrix-free coupled Galerkin operator and its hierarchical block views.

The global system matrix consists of (M+1)^2 spatial blocks

    K^(j,k) = sum_i c_ijk K_i,

and is never formed: a product with a block vector U (rows = spatial blocks)
is computed as  V = sum_i (C_i @ U) @ K_i^T  where C_i is the i-th sparse
coupling matrix of the triple-product tensor.  The graded index ordering
induces a nested 2x2 partition

    A_l = [[A_{l-1}, B_l], [C_l, D_l]],    l = P, ..., 1,

where A_{l-1} spans the blocks of degree < l and D_l the blocks of degree
exactly l.  For the truncated linear (Karhunen-Loeve) coefficient case every
D_l is block diagonal with each diagonal block a scalar multiple of the mean
matrix K_0, so solving with D_l costs one multi-right-hand-side K_0 solve.
C_l coincides with the transpose action of B_l whenever all K_i are
symmetric; the masked product below computes the true sub-block action either
way, so non-symmetric K_i are supported by the same code path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import Mesh, assemble_weighted_stiffness
from .kle import KLExpansion
from .multi_index import MultiIndexSet, build_multi_index_set, hierarchy_dims
from .orthopoly import PolynomialFamily
from .triple_product import TripleProductTensor, build_triple_product_tensor


class InnerSolveError(RuntimeError):
    """An inner block solve failed to reach its tolerance."""

    def __init__(self, block: int, residual: float, where: str = ""):
        self.block = block
        self.residual = residual
        msg = f"inner solve for block {block} stalled at residual {residual:.3e}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


@dataclass(frozen=True)
class InnerSolver:
    """Policy for solves with a single spatial block.

    kind "exact" factorizes once (sparse LU); kind "cg" runs an inner
    conjugate gradient loop preconditioned by ``precond`` in
    {"none", "diagonal", "exact"}.  A tol of None means: use the tolerance
    of the surrounding outer iteration.
    """

    kind: str = "exact"
    precond: str = "exact"
    tol: float | None = None
    maxiter: int = 2000

    def resolve_tol(self, outer_tol: float) -> float:
        return outer_tol if self.tol is None else self.tol

    def make(self, matrix: sp.spmatrix, outer_tol: float = 1e-8):
        if self.kind == "exact":
            lu = spla.splu(matrix.tocsc())
            return lambda B: _solve_rows(lu, B)
        if self.kind != "cg":
            raise ValueError(f"unknown inner solver kind {self.kind!r}")
        tol = self.resolve_tol(outer_tol)
        if self.precond == "none":
            prec = None
        elif self.precond == "diagonal":
            dinv = 1.0 / matrix.diagonal()
            prec = lambda r: dinv * r
        elif self.precond == "exact":
            lu = spla.splu(matrix.tocsc())
            prec = lambda r: lu.solve(r)
        else:
            raise ValueError(f"unknown inner preconditioner {self.precond!r}")
        A = matrix.tocsr()

        def solve(B):
            B = np.atleast_2d(B)
            X = np.empty_like(B)
            for row in range(B.shape[0]):
                X[row] = _inner_cg(A, B[row], prec, tol, self.maxiter, row)
            return X

        return solve


def _solve_rows(lu, B):
    B = np.atleast_2d(B)
    return lu.solve(B.T).T


def _inner_cg(A, b, prec, tol, maxiter, block):
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    x = np.zeros_like(b)
    r = b.copy()
    z = prec(r) if prec else r.copy()
    p = z.copy()
    rz = r @ z
    for _ in range(maxiter):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        z = prec(r) if prec else r.copy()
        rz_new = r @ z
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    raise InnerSolveError(block, np.linalg.norm(r) / bnorm, "inner cg")


DENSE_ASSEMBLY_LIMIT = 2000


class GalerkinOperator:
    """The coupled block operator with its hierarchy views.

    matrices[i] is the spatial matrix of the i-th coefficient field; tensor
    holds the coupling matrices C_i over the same coefficient index range.
    Block vectors are ndarrays of shape (n_blocks, ndof); ``matvec`` works on
    the flat concatenation.  Immutable after construction (solver caches are
    populated lazily but never change semantics), so concurrent applies are
    safe.
    """

    def __init__(self, matrices, tensor: TripleProductTensor):
        if len(matrices) != tensor.n_coeff:
            raise ValueError(
                f"{len(matrices)} spatial matrices vs {tensor.n_coeff} coefficient indices")
        self.matrices = tuple(sp.csr_matrix(K) for K in matrices)
        self.tensor = tensor
        self.basis = tensor.basis
        self.ndof = self.matrices[0].shape[0]
        self.n_blocks = tensor.n_basis
        self.hierarchy = hierarchy_dims(self.basis.dims, self.basis.degree)
        self._solver_cache: dict = {}
        # c_0kk values scale the diagonal blocks in the scalar-multiple case
        self.diag_weights = self.tensor.coupling[0].diagonal()

    # -- shapes ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        n = self.n_blocks * self.ndof
        return (n, n)

    def as_blocks(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if u.ndim == 1:
            return u.reshape(self.n_blocks, self.ndof)
        return u

    def level_slices(self, level: int) -> tuple[slice, slice]:
        """(head, tail) block ranges of the level-l partition."""
        if not 1 <= level <= self.basis.degree:
            raise ValueError(f"level must be in 1..{self.basis.degree}, got {level}")
        head = self.hierarchy[level - 1]
        tail = self.hierarchy[level]
        return slice(0, head), slice(head, tail)

    # -- products -------------------------------------------------------
    def apply(self, u: np.ndarray) -> np.ndarray:
        """Product with a block vector; accepts flat or (n_blocks, ndof)."""
        flat = np.asarray(u).ndim == 1
        U = self.as_blocks(u)
        if U.shape != (self.n_blocks, self.ndof):
            raise ValueError(f"block vector has {U.shape}, "
                             f"expected {(self.n_blocks, self.ndof)}")
        V = np.zeros_like(U)
        for Ci, Ki in zip(self.tensor.coupling, self.matrices):
            if Ci.nnz:
                V += (Ci @ U) @ Ki.T
        return V.ravel() if flat else V

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(u).ravel())

    def masked_apply(self, rows, cols, X: np.ndarray) -> np.ndarray:
        """Product restricted to the sub-block (rows) x (cols) of the grid.

        X has one row per column block; the result has one row per row block.
        """
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        V = np.zeros((len(rows), self.ndof))
        for Ci, Ki in zip(self.tensor.coupling, self.matrices):
            sub = Ci[rows][:, cols]
            if sub.nnz:
                V += (sub @ X) @ Ki.T
        return V

    def apply_submatrix(self, level: int, part: str, X: np.ndarray) -> np.ndarray:
        """Action of the A/B/C/D sub-block of the level-l partition."""
        head, tail = self.level_slices(level)
        ranges = {
            "A": (np.arange(head.stop), np.arange(head.stop)),
            "B": (np.arange(head.stop), np.arange(tail.start, tail.stop)),
            "C": (np.arange(tail.start, tail.stop), np.arange(head.stop)),
            "D": (np.arange(tail.start, tail.stop), np.arange(tail.start, tail.stop)),
        }
        try:
            rows, cols = ranges[part]
        except KeyError:
            raise ValueError(f"part must be one of A, B, C, D, got {part!r}")
        X = np.atleast_2d(X)
        if X.shape[0] != len(cols):
            raise ValueError(f"{part}-part at level {level} expects {len(cols)} "
                             f"column blocks, got {X.shape[0]}")
        return self.masked_apply(rows, cols, X)

    # -- diagonal-block solves -------------------------------------------
    def level_is_scalar_diagonal(self, level: int) -> bool:
        """True when D_l is diagonal with blocks c_0kk * K_0.

        Couplings whose spatial matrix is structurally zero (e.g. vanished
        fluctuation fields) cannot contribute and are ignored.
        """
        _, tail = self.level_slices(level)
        rows = np.arange(tail.start, tail.stop)
        for i, (Ci, Ki) in enumerate(zip(self.tensor.coupling, self.matrices)):
            if Ki.nnz == 0:
                continue
            sub = Ci[rows][:, rows].toarray()
            if i == 0:
                if np.any(sub - np.diag(np.diag(sub))):
                    return False
            elif np.any(sub):
                return False
        return True

    def mean_solver(self, inner: InnerSolver, outer_tol: float = 1e-8):
        """Cached solver for the mean matrix K_0 under the given policy."""
        key = (inner, outer_tol)
        if key not in self._solver_cache:
            self._solver_cache[key] = inner.make(self.matrices[0], outer_tol)
        return self._solver_cache[key]

    def d_block_solve(self, level: int, rhs: np.ndarray, inner: InnerSolver,
                      outer_tol: float = 1e-8) -> np.ndarray:
        """Solve D_l X = rhs, one row of rhs per degree-l block.

        The scalar-multiple shortcut solves K_0 once (multi right-hand side)
        and rescales by 1/c_0kk; it applies whenever the level is diagonal
        with pure-K_0 blocks, which covers the linear coefficient case.
        Coupled levels (chaos coefficient expansions) assemble the level
        system; see lognormal.dense_d_block_solve for the policy choices.
        """
        _, tail = self.level_slices(level)
        rhs = np.atleast_2d(rhs)
        if rhs.shape[0] != tail.stop - tail.start:
            raise ValueError(f"level {level} has {tail.stop - tail.start} blocks, "
                             f"rhs has {rhs.shape[0]} rows")
        if self.level_is_scalar_diagonal(level):
            X = self.mean_solver(inner, outer_tol)(rhs)
            return X / self.diag_weights[tail][:, None]
        from .lognormal import dense_d_block_solve
        return dense_d_block_solve(self, level, rhs,
                                   policy="auto", inner=inner, outer_tol=outer_tol)

    # -- assembly helpers (oracle/diagnostic scale only) -------------------
    def assemble_range(self, rows, cols) -> sp.csr_matrix:
        """Explicitly assemble the sub-matrix spanning the given block ranges."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        acc = None
        for Ci, Ki in zip(self.tensor.coupling, self.matrices):
            sub = Ci[rows][:, cols]
            if sub.nnz:
                term = sp.kron(sub, Ki, format="csr")
                acc = term if acc is None else acc + term
        if acc is None:
            acc = sp.csr_matrix((len(rows) * self.ndof, len(cols) * self.ndof))
        return acc

    def dense(self, limit: int = DENSE_ASSEMBLY_LIMIT) -> np.ndarray:
        """Dense global matrix, guarded by a size limit (oracle tests only)."""
        n = self.shape[0]
        if n > limit:
            raise ValueError(f"dense assembly of a {n}-dim operator exceeds the "
                             f"limit {limit}")
        blocks = np.arange(self.n_blocks)
        return self.assemble_range(blocks, blocks).toarray()

    def rhs(self, load: np.ndarray) -> np.ndarray:
        """Global right-hand side: the load in block 0, zero elsewhere."""
        b = np.zeros((self.n_blocks, self.ndof))
        b[0] = load
        return b


def build_uniform_operator(mesh: Mesh, kl: KLExpansion, basis: MultiIndexSet,
                           family: PolynomialFamily) -> GalerkinOperator:
    """Operator for the linear coefficient expansion over the given basis.

    The i-th expansion variable appears in the coefficient as k_i(x) * xi_i;
    expressed in the orthonormal basis this contributes the field
    family.variable_coeff * k_i as the coefficient of the first-order basis
    polynomial, which is where the uniform-on-[-1,1] convention (coefficient
    1/sqrt(3)) enters the discrete system.
    """
    if kl.n_terms != basis.dims:
        raise ValueError(f"expansion has {kl.n_terms} terms, basis {basis.dims} variables")
    coeff_set = build_multi_index_set(basis.dims, 1)
    tensor = build_triple_product_tensor(basis, coeff_set, family)
    mats = [assemble_weighted_stiffness(mesh, np.full(mesh.n_nodes, kl.mean),
                                        unit_boundary_diag=True)]
    for i in range(kl.n_terms):
        field = family.variable_coeff * kl.fields[i]
        mats.append(assemble_weighted_stiffness(mesh, field))
    return GalerkinOperator(mats, tensor)
