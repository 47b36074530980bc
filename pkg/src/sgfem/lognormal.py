"""Hermite chaos representation of a lognormal diffusion coefficient.

The coefficient k = exp(g) is driven by a Gaussian field g whose spatial
covariance is the same exponential kernel as the uniform model, with pointwise
variance chosen by moment matching:

    sigma_g^2 = ln(1 + cov^2),     mu_g = ln(mean) - sigma_g^2 / 2,

so the lognormal field has the requested mean and coefficient of variation.
With g = mu_g + sum_i g_i(x) xi_i (xi_i standard normal, g_i the truncated
Karhunen-Loeve fields) the chaos coefficients of k have the closed form

    k_alpha(x) = k_0(x) * prod_i g_i(x)^alpha_i / sqrt(alpha_i!),
    k_0(x) = exp(mu_g + (1/2) sum_i g_i(x)^2),

where k_0 is the pointwise mean of the (truncated) lognormal field.  The
coefficient expansion is carried to twice the solution order, which keeps the
discrete problem well posed; the resulting coupling tensor makes every block
of the global matrix nonzero, so the same-degree matrices D_l are coupled
systems rather than block diagonals and are solved here either by a direct
factorization of the assembled level system or by an inner Krylov loop
preconditioned blockwise with the mean matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import krylov
from .fem import Mesh, assemble_weighted_stiffness
from .kle import CovarianceSpec, KLExpansion, build_kl_expansion
from .multi_index import MultiIndexSet, build_multi_index_set
from .operator import GalerkinOperator, InnerSolveError, InnerSolver
from .orthopoly import hermite_family
from .triple_product import build_triple_product_tensor

DIRECT_LEVEL_LIMIT = 20_000


@dataclass(frozen=True)
class LognormalFieldSpec:
    """Lognormal coefficient with given mean and coefficient of variation."""

    mean: float = 1.0
    cov: float = 1.0
    corr_length: float = 0.5

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError(f"lognormal mean must be positive, got {self.mean}")
        if self.cov <= 0:
            raise ValueError(f"coefficient of variation must be positive, got {self.cov}")

    @property
    def sigma_g2(self) -> float:
        return math.log(1.0 + self.cov * self.cov)

    @property
    def mu_g(self) -> float:
        return math.log(self.mean) - 0.5 * self.sigma_g2


def gaussian_kl(spec: LognormalFieldSpec, mesh: Mesh, n_terms: int,
                n_quad: int = 1000) -> KLExpansion:
    """Truncated expansion of the underlying Gaussian field on the mesh nodes."""
    cov = CovarianceSpec(sigma=math.sqrt(spec.sigma_g2), corr_length=spec.corr_length)
    return build_kl_expansion(cov, n_terms, spec.mu_g, mesh.node_coords, n_quad)


def lognormal_gpc_coefficients(gauss: KLExpansion,
                               coeff_set: MultiIndexSet) -> np.ndarray:
    """Chaos coefficient fields of exp(gaussian), one row per multi-index.

    Row 0 is the pointwise mean of the truncated lognormal field.
    """
    if coeff_set.dims != gauss.n_terms:
        raise ValueError(f"coefficient set has {coeff_set.dims} variables, "
                         f"Gaussian expansion {gauss.n_terms} terms")
    G = gauss.fields
    k0 = np.exp(gauss.mean + 0.5 * np.sum(G * G, axis=0))
    fields = np.empty((len(coeff_set), G.shape[1]))
    for row, alpha in enumerate(coeff_set.indices):
        f = k0.copy()
        for d, a in enumerate(alpha):
            if a:
                f = f * G[d] ** a / math.sqrt(math.factorial(a))
        fields[row] = f
    return fields


def build_lognormal_operator(spec: LognormalFieldSpec, mesh: Mesh, dims: int,
                             degree: int, n_quad: int = 1000) -> GalerkinOperator:
    """Coupled operator for the lognormal coefficient.

    The solution basis is the order-``degree`` Hermite set in ``dims``
    variables; the coefficient is expanded to order 2*degree over the same
    variables.  The resulting block pattern is fully dense.
    """
    family = hermite_family()
    basis = build_multi_index_set(dims, degree)
    coeff_set = build_multi_index_set(dims, 2 * degree)
    gauss = gaussian_kl(spec, mesh, dims, n_quad)
    fields = lognormal_gpc_coefficients(gauss, coeff_set)
    tensor = build_triple_product_tensor(basis, coeff_set, family)
    mats = [assemble_weighted_stiffness(mesh, fields[0], unit_boundary_diag=True)]
    for i in range(1, len(coeff_set)):
        mats.append(assemble_weighted_stiffness(mesh, fields[i]))
    return GalerkinOperator(mats, tensor)


def dense_d_block_solve(op: GalerkinOperator, level: int, rhs: np.ndarray,
                        policy: str = "auto", inner: InnerSolver = InnerSolver(),
                        outer_tol: float = 1e-8) -> np.ndarray:
    """Solve the coupled level system D_l X = rhs.

    policy "direct" assembles and factorizes the level matrix (guarded by a
    size limit), "iterative" runs conjugate gradients on the level system
    applied matrix-free and preconditioned blockwise with the mean matrix,
    and "auto" picks direct when the level fits under the guard.
    """
    head, tail = op.level_slices(level)
    blocks = np.arange(tail.start, tail.stop)
    n_l = len(blocks)
    dim = n_l * op.ndof
    rhs = np.atleast_2d(rhs)
    if policy == "auto":
        policy = "direct" if dim <= DIRECT_LEVEL_LIMIT else "iterative"
    if policy == "direct":
        if dim > DIRECT_LEVEL_LIMIT:
            raise ValueError(f"level {level} system of dimension {dim} exceeds "
                             f"the direct-assembly guard {DIRECT_LEVEL_LIMIT}")
        key = ("level_lu", level)
        if key not in op._solver_cache:
            import scipy.sparse.linalg as spla
            mat = op.assemble_range(blocks, blocks).tocsc()
            op._solver_cache[key] = spla.splu(mat)
        lu = op._solver_cache[key]
        return lu.solve(rhs.ravel()).reshape(n_l, op.ndof)
    if policy != "iterative":
        raise ValueError(f"unknown level-solve policy {policy!r}")
    tol = inner.resolve_tol(outer_tol)
    mean_solve = op.mean_solver(InnerSolver(kind="exact"), outer_tol)

    def apply_level(x):
        return op.masked_apply(blocks, blocks, x.reshape(n_l, op.ndof)).ravel()

    def block_mean_prec(r):
        R = r.reshape(n_l, op.ndof)
        return (mean_solve(R) / op.diag_weights[tail][:, None]).ravel()

    x, report = krylov.cg(apply_level, rhs.ravel(), apply_m=block_mean_prec,
                          tol=tol, max_iter=inner.maxiter)
    if not report.converged:
        raise InnerSolveError(level, report.relative_residuals[-1],
                              f"level {level} system")
    return x.reshape(n_l, op.ndof)
