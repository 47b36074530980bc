import numpy as np
import pytest

from sgfem.fem import assemble_load, build_mesh
from sgfem.kle import CovarianceSpec, KLExpansion, build_kl_expansion
from sgfem.krylov import cg
from sgfem.multi_index import build_multi_index_set
from sgfem.operator import InnerSolver, build_uniform_operator
from sgfem.orthopoly import legendre_family
from sgfem.precond import (BlockSGS, HierarchicalSchur, MeanBased,
                           generalized_apply, make_preconditioner,
                           reduced_system_solve, truncate_operator, work_count)

EXACT = InnerSolver(kind="exact")


def make_operator(dims=2, degree=2, n_cells=4, sigma=0.5):
    mesh = build_mesh(1.0 / n_cells)
    if sigma == 0.0:
        kl = KLExpansion(np.zeros(dims), np.zeros((dims, mesh.n_nodes)), 1.0)
    else:
        spec = CovarianceSpec(sigma=sigma, corr_length=0.5)
        kl = build_kl_expansion(spec, dims, 1.0, mesh.node_coords)
    basis = build_multi_index_set(dims, degree)
    op = build_uniform_operator(mesh, kl, basis, legendre_family())
    b = op.rhs(assemble_load(mesh, 1.0)).ravel()
    return op, b


# ---------------------------------------------------------------------------
# work counts
# ---------------------------------------------------------------------------

def test_work_count_reference_rows():
    # both sweep orientations give the same counts
    assert work_count(4, 4).as_dict() == \
        {"n_b": 350, "n_db": 70, "n_m": 280, "n_ds": 139}
    assert work_count(1, 4).as_dict() == \
        {"n_b": 13, "n_db": 5, "n_m": 8, "n_ds": 9}
    assert work_count(4, 1).as_dict() == work_count(1, 4).as_dict()


def test_work_count_degenerate():
    wc = work_count(3, 0)
    assert (wc.n_b, wc.n_db, wc.n_m, wc.n_ds) == (1, 1, 0, 1)


# ---------------------------------------------------------------------------
# mean-based
# ---------------------------------------------------------------------------

def test_mean_based_exact_for_constant_chaos():
    op, b = make_operator(degree=0)
    prec = MeanBased(op, EXACT)
    x, report = cg(op.matvec, b, apply_m=prec, tol=1e-10)
    assert report.iterations == 1
    assert np.linalg.norm(op.matvec(x) - b) <= 1e-9 * np.linalg.norm(b)


def test_mean_based_exact_for_zero_fluctuations():
    op, b = make_operator(2, 3, sigma=0.0)
    prec = MeanBased(op, EXACT)
    _, report = cg(op.matvec, b, apply_m=prec, tol=1e-10)
    assert report.iterations == 1


def test_mean_based_counts_block_solves():
    op, b = make_operator(2, 2)
    prec = MeanBased(op, EXACT)
    prec(b)
    assert prec.counters.block_solves == op.n_blocks
    assert prec.counters.applications == 1


# ---------------------------------------------------------------------------
# block symmetric Gauss-Seidel
# ---------------------------------------------------------------------------

def test_bsgs_exact_for_block_diagonal_operator():
    op, b = make_operator(2, 2, sigma=0.0)
    prec = BlockSGS(op, EXACT)
    _, report = cg(op.matvec, b, apply_m=prec, tol=1e-10)
    assert report.iterations == 1


def test_bsgs_symmetric_mapping():
    op, _ = make_operator(2, 2)
    prec = BlockSGS(op, EXACT)
    rng = np.random.default_rng(0)
    r = rng.standard_normal(op.shape[0])
    s = rng.standard_normal(op.shape[0])
    assert np.dot(prec(r), s) == pytest.approx(np.dot(prec(s), r), rel=1e-10)


def test_bsgs_matches_dense_sweep_oracle():
    op, _ = make_operator(2, 2)
    A = op.dense()
    n_blocks, nd = op.n_blocks, op.ndof
    r = np.random.default_rng(1).standard_normal(op.shape[0])
    # oracle: explicit block triangular solves on the dense matrix
    L = np.tril(A, -nd * 0 - 1) * 0  # placeholder, built blockwise below
    D = np.zeros_like(A)
    Lo = np.zeros_like(A)
    Up = np.zeros_like(A)
    for j in range(n_blocks):
        for k in range(n_blocks):
            blk = A[j * nd:(j + 1) * nd, k * nd:(k + 1) * nd]
            if j == k:
                D[j * nd:(j + 1) * nd, k * nd:(k + 1) * nd] = blk
            elif j > k:
                Lo[j * nd:(j + 1) * nd, k * nd:(k + 1) * nd] = blk
            else:
                Up[j * nd:(j + 1) * nd, k * nd:(k + 1) * nd] = blk
    y = np.linalg.solve(D + Lo, r)
    z = np.linalg.solve(D + Up, D @ y)
    prec = BlockSGS(op, EXACT)
    assert np.allclose(prec(r), z, atol=1e-9)


def test_bsgs_counts():
    op, b = make_operator(2, 2)
    prec = BlockSGS(op, EXACT)
    prec.reset_counters()
    prec(b)
    wc = work_count(2, 2)
    assert prec.counters.block_solves == 2 * wc.n_db
    assert prec.counters.block_matvecs == wc.n_b - wc.n_db


# ---------------------------------------------------------------------------
# hierarchical Schur complement
# ---------------------------------------------------------------------------

def test_hs_constant_chaos_is_single_solve():
    op, b = make_operator(degree=0)
    prec = HierarchicalSchur(op, EXACT)
    z = prec(b)
    x_ref = np.linalg.solve(op.dense(), b)
    assert np.allclose(z, x_ref, atol=1e-10)
    assert prec.counters.block_solves == 1


def test_hs_exact_inverse_without_coupling():
    op, _ = make_operator(2, 2, sigma=0.0)
    prec = HierarchicalSchur(op, EXACT)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(op.shape[0])
    y = prec(op.matvec(x))
    assert np.linalg.norm(y - x) <= 1e-12 * np.linalg.norm(x)


def test_hs_counter_tallies_match_work_count():
    for dims, degree in [(1, 4), (2, 2), (3, 3), (4, 4)]:
        op, b = make_operator(dims, degree, n_cells=2)
        prec = HierarchicalSchur(op, EXACT)
        prec.reset_counters()
        prec(b)
        wc = work_count(dims, degree)
        assert prec.counters.block_matvecs == wc.n_m
        assert prec.counters.block_solves == wc.n_ds


def test_hs_symmetric_and_positive_definite_mapping():
    op, _ = make_operator(2, 3)
    prec = HierarchicalSchur(op, EXACT)
    rng = np.random.default_rng(3)
    for _ in range(4):
        r = rng.standard_normal(op.shape[0])
        s = rng.standard_normal(op.shape[0])
        assert np.dot(prec(r), s) == pytest.approx(np.dot(prec(s), r), rel=1e-9)
        assert np.dot(prec(r), r) > 0.0


def test_hs_preconditioned_spectrum_positive():
    op, _ = make_operator(2, 2)
    prec = HierarchicalSchur(op, EXACT)
    A = op.dense()
    n = op.shape[0]
    M = np.column_stack([prec(e) for e in np.eye(n)])
    ev = np.linalg.eigvals(M @ A)
    assert np.all(np.real(ev) > 0.0)
    assert np.max(np.abs(np.imag(ev))) < 1e-8


def test_hs_with_inner_cg_close_to_exact():
    op, b = make_operator(2, 2)
    hs_exact = HierarchicalSchur(op, EXACT)
    hs_cg = HierarchicalSchur(op, InnerSolver(kind="cg", precond="none", tol=1e-10))
    z1 = hs_exact(b)
    z2 = hs_cg(b)
    assert np.linalg.norm(z1 - z2) <= 1e-8 * np.linalg.norm(z1)


# ---------------------------------------------------------------------------
# generalized three-factor form
# ---------------------------------------------------------------------------

def test_generalized_all_exact_is_exact_inverse():
    op, _ = make_operator(2, 2)
    level = op.basis.degree
    head, tail = op.level_slices(level)
    A = op.dense()
    nb = head.stop * op.ndof
    Ahead = A[:nb, :nb]

    def d_exact(X):
        return op.d_block_solve(level, X, EXACT)

    def s_exact(G):
        return np.linalg.solve(A[:nb, :nb] - A[:nb, nb:] @ np.linalg.solve(
            A[nb:, nb:], A[nb:, :nb]), G.ravel()).reshape(head.stop, op.ndof)

    rng = np.random.default_rng(4)
    r = rng.standard_normal(op.shape[0])
    z = generalized_apply(op, r, d_exact, d_exact, d_exact, s_exact)
    assert np.allclose(A @ z, r, atol=1e-8)


def test_generalized_with_hierarchy_head_matches_hs_at_degree_one():
    op, b = make_operator(2, 1)

    def d_exact(X):
        return op.d_block_solve(1, X, EXACT)

    import scipy.sparse.linalg as spla
    lu0 = spla.splu(op.matrices[0].tocsc())

    def s_mean(G):
        return lu0.solve(G.ravel()).reshape(1, op.ndof)

    prec_gen = lambda r: generalized_apply(op, r, d_exact, d_exact, d_exact, s_mean)
    prec_hs = HierarchicalSchur(op, EXACT)
    _, rep_gen = cg(op.matvec, b, apply_m=prec_gen, tol=1e-8)
    _, rep_hs = cg(op.matvec, b, apply_m=prec_hs, tol=1e-8)
    assert rep_gen.iterations == rep_hs.iterations
    z1, z2 = prec_gen(b), prec_hs(b)
    assert np.allclose(z1, z2, atol=1e-10)


def test_generalized_single_mean_application_converges_slower():
    # coupled diagonal blocks (lognormal) so one mean application per block is
    # only an approximation of the D solve
    from sgfem.lognormal import LognormalFieldSpec, build_lognormal_operator
    mesh = build_mesh(0.25)
    op = build_lognormal_operator(LognormalFieldSpec(cov=1.0), mesh, 2, 1)
    b = op.rhs(assemble_load(mesh, 1.0)).ravel()
    level = 1
    mean = op.mean_solver(EXACT)

    def d_exact(X):
        return op.d_block_solve(level, X, EXACT)

    def d_mean(X):
        return mean(X)

    import scipy.sparse.linalg as spla
    lu0 = spla.splu(op.assemble_range([0], [0]).tocsc())

    def s_exact(G):
        return lu0.solve(G.ravel()).reshape(1, op.ndof)

    _, rep_exact = cg(op.matvec, b,
                      apply_m=lambda r: generalized_apply(op, r, d_exact, d_exact,
                                                          d_exact, s_exact),
                      tol=1e-8)
    _, rep_mean = cg(op.matvec, b,
                     apply_m=lambda r: generalized_apply(op, r, d_mean, d_mean,
                                                         d_mean, s_exact),
                     tol=1e-8)
    assert rep_mean.converged
    assert rep_mean.iterations >= rep_exact.iterations


# ---------------------------------------------------------------------------
# reduction to the top-level Schur system
# ---------------------------------------------------------------------------

def test_reduction_without_coupling_matches_independent_solves():
    op, b = make_operator(2, 2, sigma=0.0)
    x, report = reduced_system_solve(op, b, tol=1e-10)
    x_ref = np.linalg.solve(op.dense(), b).reshape(op.n_blocks, op.ndof)
    assert np.allclose(x, x_ref, atol=1e-8)


def test_reduction_matches_full_solve():
    op, b = make_operator(2, 2)
    x_red, rep_red = reduced_system_solve(op, b, tol=1e-8)
    prec = HierarchicalSchur(op, EXACT)
    x_full, rep_full = cg(op.matvec, b, apply_m=prec, tol=1e-8)
    x_full = x_full.reshape(op.n_blocks, op.ndof)
    denom = np.linalg.norm(x_full)
    assert np.linalg.norm(x_red - x_full) <= 1e-6 * denom
    assert abs(rep_red.iterations - rep_full.iterations) <= 1
    # full-system residual of the assembled reduced solution
    res = np.linalg.norm(op.matvec(x_red.ravel()) - b) / np.linalg.norm(b)
    assert res <= 1e-8 * 10


def test_reduction_with_flexible_variant():
    op, b = make_operator(2, 2)
    x_cg, rep_cg = reduced_system_solve(op, b, tol=1e-8, method="cg")
    x_fcg, rep_fcg = reduced_system_solve(op, b, tol=1e-8, method="fcg")
    assert abs(rep_cg.iterations - rep_fcg.iterations) <= 1
    assert np.allclose(x_cg, x_fcg, atol=1e-7)


def test_reduction_rejects_constant_basis():
    op, b = make_operator(2, 0)
    with pytest.raises(ValueError):
        reduced_system_solve(op, b)


def test_truncate_operator_prefix_consistency():
    op3, _ = make_operator(2, 3)
    sub = truncate_operator(op3, 2)
    X = np.random.default_rng(5).standard_normal((sub.n_blocks, sub.ndof))
    assert np.allclose(sub.apply(X), op3.apply_submatrix(3, "A", X), atol=1e-13)


def test_factory_names():
    op, _ = make_operator(2, 1)
    assert make_preconditioner(op, "none") is None
    assert isinstance(make_preconditioner(op, "mean"), MeanBased)
    assert isinstance(make_preconditioner(op, "bsgs"), BlockSGS)
    assert isinstance(make_preconditioner(op, "hs"), HierarchicalSchur)
    with pytest.raises(ValueError):
        make_preconditioner(op, "kronecker")
