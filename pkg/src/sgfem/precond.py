"""Block preconditioners for the coupled Galerkin system.

Three preconditioners are provided, all operating block-wise and matrix-free:

* mean-based: every spatial block of the residual is solved independently
  with the (scaled) mean matrix, one block solve per block.
* block symmetric Gauss-Seidel: one forward and one backward block sweep over
  the natural block order, starting from a zero guess; symmetric whenever the
  operator is.
* hierarchical Schur complement: walks the nested 2x2 partition downward
  computing pre-corrections g_{l-1} = r_l^head - B_l D_l^{-1} r_l^tail,
  solves the mean-value problem at the bottom, and walks back up with
  post-corrections u_l^tail = D_l^{-1} (r_l^tail - C_l u_l^head).  Replacing
  each Schur complement by the next-lower hierarchy matrix is the only
  approximation; with exact block solves on a decoupled system it is the
  exact inverse.

Each preconditioner tallies block-level work: one counter unit is one
diagonal-block solve or one off-diagonal block product.  For one application
of the hierarchical preconditioner on a block-diagonal-level operator the
tallies are exactly n_m = n_b - n_db products and n_ds = 2(n_db - 1) + 1
solves, matching the tabulated work counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import krylov
from .multi_index import build_multi_index_set
from .operator import GalerkinOperator, InnerSolver
from .orthopoly import PolynomialFamily, legendre_family
from .triple_product import build_triple_product_tensor


@dataclass
class WorkCount:
    """Block-operation counts per preconditioner application."""

    n_b: int       # nonzero blocks in the global matrix
    n_db: int      # diagonal blocks
    n_m: int       # block matvecs per hierarchical application
    n_ds: int      # block diagonal solves per hierarchical application

    def as_dict(self) -> dict:
        return {"n_b": self.n_b, "n_db": self.n_db, "n_m": self.n_m, "n_ds": self.n_ds}


def work_count(dims: int, degree: int,
               family: PolynomialFamily | None = None) -> WorkCount:
    """Work counts for the linear-coefficient block structure.

    n_b and n_db come from the block sparsity pattern; the per-application
    counts follow from the two sweeps of the hierarchical preconditioner:
    n_m = n_b - n_db and n_ds = 2(n_db - 1) + 1.
    """
    family = family or legendre_family()
    basis = build_multi_index_set(dims, degree)
    coeff = build_multi_index_set(dims, 1)
    tensor = build_triple_product_tensor(basis, coeff, family)
    n_b = tensor.n_blocks
    n_db = tensor.n_diag_blocks
    return WorkCount(n_b, n_db, n_b - n_db, 2 * (n_db - 1) + 1)


@dataclass
class Counters:
    """Mutable tallies of block-level operations."""

    block_matvecs: int = 0
    block_solves: int = 0
    applications: int = 0

    def reset(self) -> None:
        self.block_matvecs = 0
        self.block_solves = 0
        self.applications = 0


class _BlockPreconditioner:
    """Shared plumbing: flat-vector call interface and counters."""

    def __init__(self, op: GalerkinOperator):
        self.op = op
        self.counters = Counters()

    def reset_counters(self) -> None:
        self.counters.reset()

    def apply_blocks(self, R: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r: np.ndarray) -> np.ndarray:
        flat = np.asarray(r).ndim == 1
        Z = self.apply_blocks(self.op.as_blocks(r))
        self.counters.applications += 1
        return Z.ravel() if flat else Z


class MeanBased(_BlockPreconditioner):
    """Independent solves of every spatial block with the scaled mean matrix."""

    def __init__(self, op: GalerkinOperator, inner: InnerSolver = InnerSolver(),
                 outer_tol: float = 1e-8):
        super().__init__(op)
        self._solve = op.mean_solver(inner, outer_tol)
        self._weights = op.diag_weights

    def apply_blocks(self, R: np.ndarray) -> np.ndarray:
        Z = self._solve(R) / self._weights[:, None]
        self.counters.block_solves += self.op.n_blocks
        return Z


class BlockSGS(_BlockPreconditioner):
    """Symmetric block Gauss-Seidel sweep pair with zero initial guess.

    The forward sweep solves (L + D) y = r block-row by block-row; the
    backward sweep forms z = (D + U)^{-1} D y reusing the forward residual,
    which makes the induced mapping symmetric for symmetric operators.
    """

    def __init__(self, op: GalerkinOperator, inner: InnerSolver = InnerSolver(),
                 outer_tol: float = 1e-8):
        super().__init__(op)
        self._diag_solvers = _diagonal_block_solvers(op, inner, outer_tol)
        # per-column adjacency: which (i, target row) pairs receive K_i @ y_col
        self._cols = [Ci.tocsc() for Ci in op.tensor.coupling]
        struct = op.tensor.structure.tocsc()
        self._fwd_blocks = []
        self._bwd_blocks = []
        for j in range(op.n_blocks):
            rows = struct.indices[struct.indptr[j]:struct.indptr[j + 1]]
            self._fwd_blocks.append(int(np.count_nonzero(rows > j)))
            self._bwd_blocks.append(int(np.count_nonzero(rows < j)))

    def _scatter(self, j: int, y: np.ndarray, acc: np.ndarray, direction: int) -> None:
        """acc[t] += A_tj y for targets t beyond j in the sweep direction."""
        for Ci, Ki in zip(self._cols, self.op.matrices):
            start, stop = Ci.indptr[j], Ci.indptr[j + 1]
            if start == stop:
                continue
            rows = Ci.indices[start:stop]
            vals = Ci.data[start:stop]
            mask = rows > j if direction > 0 else rows < j
            if not np.any(mask):
                continue
            t = Ki @ y
            for row, v in zip(rows[mask], vals[mask]):
                acc[row] += v * t

    def apply_blocks(self, R: np.ndarray) -> np.ndarray:
        m = self.op.n_blocks
        Y = np.zeros_like(R)
        acc = np.zeros_like(R)
        for j in range(m):
            Y[j] = self._diag_solvers[j](R[j] - acc[j])
            self.counters.block_solves += 1
            if j + 1 < m:
                self._scatter(j, Y[j], acc, +1)
                self.counters.block_matvecs += self._fwd_blocks[j]
        Z = np.zeros_like(R)
        acc2 = np.zeros_like(R)
        for j in range(m - 1, -1, -1):
            Z[j] = Y[j] - self._diag_solvers[j](acc2[j])
            self.counters.block_solves += 1
            if j > 0:
                self._scatter(j, Z[j], acc2, -1)
                self.counters.block_matvecs += self._bwd_blocks[j]
        return Z


def _diagonal_block_solvers(op: GalerkinOperator, inner: InnerSolver,
                            outer_tol: float):
    """One solve callable per diagonal block A_jj = sum_i c_ijj K_i."""
    scalar = all(np.all(Ci.diagonal() == 0.0) for Ci in op.tensor.coupling[1:])
    if scalar:
        mean = op.mean_solver(inner, outer_tol)
        weights = op.diag_weights

        def make(j):
            return lambda r: mean(r[None, :])[0] / weights[j]

        return [make(j) for j in range(op.n_blocks)]
    solvers = []
    for j in range(op.n_blocks):
        Ajj = None
        for Ci, Ki in zip(op.tensor.coupling, op.matrices):
            v = Ci[j, j]
            if v != 0.0:
                Ajj = v * Ki if Ajj is None else Ajj + v * Ki
        solve = inner.make(Ajj.tocsc(), outer_tol)
        solvers.append(lambda r, s=solve: s(r[None, :])[0])
    return solvers


class HierarchicalSchur(_BlockPreconditioner):
    """Recursive Schur-complement preconditioner over the degree hierarchy.

    Descending over levels l = P..1: split the running residual into its
    head (degree < l) and tail (degree l) parts, solve the tail with D_l,
    and subtract B_l times that solution from the head (pre-correction).
    At the bottom solve the mean-value block.  Ascending, each level gets its
    tail from D_l^{-1} (r_l^tail - C_l u_head) (post-correction) and the
    parts are concatenated.  d_policy selects how coupled (non-block-diagonal)
    levels are solved; "auto" uses the scalar shortcut when available and a
    direct level factorization otherwise.
    """

    def __init__(self, op: GalerkinOperator, inner: InnerSolver = InnerSolver(),
                 outer_tol: float = 1e-8, d_policy: str = "auto"):
        super().__init__(op)
        self.inner = inner
        self.outer_tol = outer_tol
        self.degree = op.basis.degree
        if d_policy not in ("auto", "direct", "iterative"):
            raise ValueError(f"unknown d_policy {d_policy!r}")
        self.d_policy = d_policy
        A00 = None
        for Ci, Ki in zip(op.tensor.coupling, op.matrices):
            v = Ci[0, 0]
            if v != 0.0:
                A00 = v * Ki if A00 is None else A00 + v * Ki
        self._bottom = inner.make(A00.tocsc(), outer_tol)
        struct = op.tensor.structure
        self._b_nnz = {}
        self._c_nnz = {}
        for l in range(1, self.degree + 1):
            head, tail = op.level_slices(l)
            self._b_nnz[l] = struct[head, tail].nnz
            self._c_nnz[l] = struct[tail, head].nnz
        self._scalar_level = {l: op.level_is_scalar_diagonal(l)
                              for l in range(1, self.degree + 1)}

    def _d_solve(self, level: int, rhs: np.ndarray) -> np.ndarray:
        head, tail = self.op.level_slices(level)
        n_l = tail.stop - tail.start
        if self._scalar_level[level]:
            # scalar-multiple shortcut; inner-iteration variants live in the
            # InnerSolver policy, not in the level policy
            X = self.op.d_block_solve(level, rhs, self.inner, self.outer_tol)
        else:
            from .lognormal import dense_d_block_solve
            X = dense_d_block_solve(self.op, level, rhs, policy=self.d_policy,
                                    inner=self.inner, outer_tol=self.outer_tol)
        self.counters.block_solves += n_l
        return X

    def apply_blocks(self, R: np.ndarray) -> np.ndarray:
        op = self.op
        if self.degree == 0:
            self.counters.block_solves += 1
            return self._bottom(R)
        residuals: list[np.ndarray] = [None] * (self.degree + 1)
        cur = np.asarray(R, dtype=float)
        for l in range(self.degree, 0, -1):
            residuals[l] = cur
            head, tail = op.level_slices(l)
            t = self._d_solve(l, cur[tail])
            pre = op.apply_submatrix(l, "B", t)
            self.counters.block_matvecs += self._b_nnz[l]
            cur = cur[head] - pre
        u = self._bottom(cur[0][None, :])
        self.counters.block_solves += 1
        for l in range(1, self.degree + 1):
            head, tail = op.level_slices(l)
            ct = op.apply_submatrix(l, "C", u)
            self.counters.block_matvecs += self._c_nnz[l]
            ut = self._d_solve(l, residuals[l][tail] - ct)
            u = np.vstack([u, ut])
        return u


def generalized_apply(op: GalerkinOperator, r: np.ndarray, m_d1, m_d2, m_d3, m_s):
    """One application of the three-factor block-inverse form at the top level.

    m_d1, m_d2, m_d3 approximate the inverse of the trailing block D and m_s
    the inverse of the Schur complement; all take and return block arrays.
    With exact policies this is the exact inverse of the 2x2 block matrix.
    The hierarchical preconditioner is the special case m_d* = D^{-1} and
    m_s = the recursive approximation of the leading block.
    """
    level = op.basis.degree
    R = op.as_blocks(r)
    head, tail = op.level_slices(level)
    r_head, r_tail = R[head], R[tail]
    g = r_head - op.apply_submatrix(level, "B", m_d1(r_tail))
    u_head = m_s(g)
    u_tail = m_d2(r_tail) - m_d3(op.apply_submatrix(level, "C", u_head))
    out = np.vstack([u_head, u_tail])
    return out.ravel() if np.asarray(r).ndim == 1 else out


def reduced_system_solve(op: GalerkinOperator, b: np.ndarray, tol: float = 1e-8,
                         max_iter: int | None = None, method: str = "cg",
                         precondition: bool = True):
    """Eliminate the top-level trailing blocks and iterate on the Schur system.

    Requires exact solves with D_P (the reduction is only justified then).
    Returns the full-system solution together with the report of the reduced
    iteration; the reduced operator is applied matrix-free as
    S x = A_{P-1} x - B_P D_P^{-1} C_P x.
    """
    level = op.basis.degree
    if level == 0:
        raise ValueError("nothing to reduce for a constant-only basis")
    exact = InnerSolver(kind="exact")
    head, tail = op.level_slices(level)
    B = op.as_blocks(b)
    n_head = head.stop

    def d_solve(X):
        return op.d_block_solve(level, X, exact, tol)

    g = B[head] - op.apply_submatrix(level, "B", d_solve(B[tail]))

    def schur_apply(x):
        X = x.reshape(n_head, op.ndof)
        AX = op.masked_apply(np.arange(n_head), np.arange(n_head), X)
        CX = op.apply_submatrix(level, "C", X)
        AX -= op.apply_submatrix(level, "B", d_solve(CX))
        return AX.ravel()

    apply_m = None
    if precondition:
        sub = truncate_operator(op, level - 1)
        apply_m = HierarchicalSchur(sub, exact, tol)
    solver = krylov.cg if method == "cg" else krylov.fcg
    x_head, report = solver(schur_apply, g.ravel(), apply_m=apply_m,
                            tol=tol, max_iter=max_iter)
    X_head = x_head.reshape(n_head, op.ndof)
    u_tail = d_solve(B[tail] - op.apply_submatrix(level, "C", X_head))
    x = np.vstack([X_head, u_tail])
    return x, report


def truncate_operator(op: GalerkinOperator, degree: int) -> GalerkinOperator:
    """The leading-hierarchy operator over the order-``degree`` sub-basis."""
    from .triple_product import TripleProductTensor
    sub_basis = op.basis.truncated(degree)
    m = len(sub_basis)
    coupling = tuple(Ci[:m, :m].tocsr() for Ci in op.tensor.coupling)
    pattern = op.tensor.block_pattern[:m, :m]
    tensor = TripleProductTensor(op.tensor.coeff_set, sub_basis,
                                 op.tensor.family_kind, coupling, pattern)
    return GalerkinOperator(op.matrices, tensor)


def make_preconditioner(op: GalerkinOperator, kind: str,
                        inner: InnerSolver = InnerSolver(),
                        outer_tol: float = 1e-8, d_policy: str = "auto"):
    """Factory over the preconditioner names used by the experiments."""
    if kind in (None, "none"):
        return None
    if kind in ("mean", "mean_based", "mm"):
        return MeanBased(op, inner, outer_tol)
    if kind in ("bsgs", "block_sgs", "bgs"):
        return BlockSGS(op, inner, outer_tol)
    if kind in ("hs", "hierarchical_schur", "schur"):
        return HierarchicalSchur(op, inner, outer_tol, d_policy)
    raise ValueError(f"unknown preconditioner kind {kind!r}")
