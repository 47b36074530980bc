"""Conjugate gradients, its flexible variant, and condition estimates.

Both solvers stop on the unpreconditioned relative residual
||b - A x|| / ||b|| <= tol, so iteration counts are comparable across
preconditioners.  The scalar recurrences of CG define a symmetric tridiagonal
(Lanczos) matrix whose extreme eigenvalues estimate the spectrum of the
preconditioned operator; the reported condition estimate is their ratio.  By
interlacing the estimate never exceeds the true condition number and is
non-decreasing in the iteration count.

The flexible variant re-orthogonalizes each new search direction against a
window of previous directions (full history by default), which keeps it
convergent when the preconditioner changes between iterations, e.g. with
inner iterative block solves.  With a fixed preconditioner it reproduces the
standard CG iterates.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal


@dataclass
class SolveReport:
    """Outcome of one Krylov solve."""

    iterations: int = 0
    relative_residuals: list = field(default_factory=list)
    kappa_estimate: float = 1.0
    converged: bool = False
    spd_suspect: bool = False
    work: dict | None = None
    wall_time: float = 0.0
    method: str = "cg"

    def write_residual_history(self, path) -> None:
        """CSV export ``iter,relres`` of the residual history."""
        with open(path, "w") as fh:
            fh.write("iter,relres\n")
            for it, res in enumerate(self.relative_residuals):
                fh.write(f"{it},{res:.17g}\n")


def default_max_iter(n: int) -> int:
    return int(10 * np.sqrt(n)) + 5000


def lanczos_condition_estimate(alphas, betas) -> float:
    """Condition estimate from the CG coefficient sequences.

    Builds the k x k symmetric tridiagonal with diagonal
    1/alpha_j + beta_{j-1}/alpha_{j-1} and off-diagonal sqrt(beta_j)/alpha_j
    and returns the ratio of its extreme eigenvalues.
    """
    k = len(alphas)
    if k == 0:
        raise ValueError("need at least one CG step for a condition estimate")
    if len(betas) < k - 1:
        raise ValueError(f"{k} alphas need at least {k - 1} betas")
    if k == 1:
        return 1.0
    diag = np.empty(k)
    off = np.empty(k - 1)
    diag[0] = 1.0 / alphas[0]
    for j in range(1, k):
        diag[j] = 1.0 / alphas[j] + betas[j - 1] / alphas[j - 1]
    for j in range(k - 1):
        off[j] = np.sqrt(max(betas[j], 0.0)) / alphas[j]
    ev = eigh_tridiagonal(diag, off, eigvals_only=True)
    return float(ev[-1] / ev[0])


def cg(apply_a, b, apply_m=None, tol: float = 1e-8, max_iter: int | None = None):
    """Preconditioned conjugate gradients with a fixed preconditioner.

    apply_a and apply_m are callables on flat vectors; apply_m defaults to
    the identity.  Returns (solution, SolveReport).  Exceeding max_iter is
    reported, not raised; an indefiniteness signal (negative <p, Ap> or
    negative <r, z>) sets spd_suspect and stops the iteration.
    """
    start = time.perf_counter()
    b = np.asarray(b, dtype=float).ravel()
    n = b.size
    if max_iter is None:
        max_iter = default_max_iter(n)
    report = SolveReport(method="cg")
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        report.converged = True
        report.wall_time = time.perf_counter() - start
        return x, report
    r = b.copy()
    z = apply_m(r) if apply_m else r.copy()
    p = z.copy()
    rz = float(r @ z)
    alphas: list[float] = []
    betas: list[float] = []
    report.relative_residuals.append(1.0)
    if rz < 0.0:
        report.spd_suspect = True
    while report.iterations < max_iter and not report.spd_suspect:
        Ap = apply_a(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            report.spd_suspect = True
            break
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        report.iterations += 1
        alphas.append(alpha)
        relres = np.linalg.norm(r) / bnorm
        report.relative_residuals.append(float(relres))
        if relres <= tol:
            report.converged = True
            break
        z = apply_m(r) if apply_m else r.copy()
        rz_new = float(r @ z)
        if rz_new < 0.0:
            report.spd_suspect = True
            break
        beta = rz_new / rz
        betas.append(beta)
        rz = rz_new
        p = z + beta * p
    if alphas:
        report.kappa_estimate = lanczos_condition_estimate(alphas, betas[:len(alphas) - 1])
    report.wall_time = time.perf_counter() - start
    return x, report


def fcg(apply_a, b, apply_m=None, tol: float = 1e-8, max_iter: int | None = None,
        truncation: int | None = None):
    """Flexible CG with truncated direction re-orthogonalization.

    The preconditioner may change between iterations.  Each new direction is
    made A-orthogonal to the last ``truncation`` directions (all of them when
    None).  Reporting matches cg(); the condition estimate uses the same
    scalar recurrences and is exact in the fixed-preconditioner limit.
    """
    start = time.perf_counter()
    b = np.asarray(b, dtype=float).ravel()
    n = b.size
    if max_iter is None:
        max_iter = default_max_iter(n)
    report = SolveReport(method="fcg")
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        report.converged = True
        report.wall_time = time.perf_counter() - start
        return x, report
    r = b.copy()
    dirs: list[np.ndarray] = []
    adirs: list[np.ndarray] = []
    pap: list[float] = []
    alphas: list[float] = []
    betas: list[float] = []
    rz_prev = None
    report.relative_residuals.append(1.0)
    while report.iterations < max_iter:
        z = apply_m(r) if apply_m else r.copy()
        rz = float(r @ z)
        if rz < 0.0:
            report.spd_suspect = True
            break
        if rz_prev is not None:
            betas.append(rz / rz_prev)
        rz_prev = rz
        p = z.copy()
        lo = 0 if truncation is None else max(0, len(dirs) - truncation)
        for i in range(lo, len(dirs)):
            p -= (float(z @ adirs[i]) / pap[i]) * dirs[i]
        Ap = apply_a(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            report.spd_suspect = True
            break
        alpha = float(p @ r) / pAp
        x += alpha * p
        r -= alpha * Ap
        report.iterations += 1
        alphas.append(alpha)
        dirs.append(p)
        adirs.append(Ap)
        pap.append(pAp)
        relres = np.linalg.norm(r) / bnorm
        report.relative_residuals.append(float(relres))
        if relres <= tol:
            report.converged = True
            break
    if alphas:
        report.kappa_estimate = lanczos_condition_estimate(alphas, betas[:len(alphas) - 1])
    report.wall_time = time.perf_counter() - start
    return x, report
