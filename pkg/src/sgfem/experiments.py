"""Configuration-driven experiment runner for the convergence sweeps.

A single experiment builds the discretized problem from an ExperimentConfig,
runs the selected Krylov solver and preconditioner, and reports iterations,
condition estimate and block work counts.  Table sweeps rebuild the operator
once per row and run all four solver columns on it, writing CSV and Markdown
artifacts side by side; where reference data is embedded a diff column is
appended, and iteration diffs on the rows covered by the acceptance suite are
enforced (see reference module for which ones).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from . import krylov, reference
from .fem import assemble_load, build_mesh
from .kle import (CovarianceSpec, KLExpansion, build_kl_expansion,
                  eig_2d_separable)
from .lognormal import LognormalFieldSpec, build_lognormal_operator
from .multi_index import build_multi_index_set
from .operator import GalerkinOperator, InnerSolver
from .orthopoly import legendre_family
from .precond import HierarchicalSchur, make_preconditioner, work_count
from .operator import build_uniform_operator

INNER_POLICIES = {
    "exact": InnerSolver(kind="exact"),
    "cg-none": InnerSolver(kind="cg", precond="none"),
    "cg-diagonal": InnerSolver(kind="cg", precond="diagonal"),
    "cg-exact": InnerSolver(kind="cg", precond="exact"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One solver run; field names double as config-file keys and CLI flags."""

    distribution: str = "uniform"        # uniform | lognormal
    N: int = 4                           # stochastic dimensions
    P: int = 4                           # polynomial degree
    h: float = 0.1                       # element size, 1/h integer
    k0: float = 1.0                      # coefficient mean
    sigma: float | None = None           # uniform case std; default cov*k0
    cov: float = 0.5                     # coefficient of variation
    L: float = 0.5                       # correlation length
    preconditioner: str = "hs"           # none | mean | bsgs | hs
    inner: str = "exact"                 # see INNER_POLICIES
    krylov: str = "cg"                   # cg | fcg
    tol: float = 1e-8
    max_iter: int | None = None
    seed: int = 0
    rhs: str = "load"                    # load | random
    n_quad: int = 1000

    def validate(self) -> None:
        if self.distribution not in ("uniform", "lognormal"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.N < 1 or self.P < 0:
            raise ValueError(f"need N >= 1, P >= 0, got N={self.N}, P={self.P}")
        if self.inner not in INNER_POLICIES:
            raise ValueError(f"unknown inner policy {self.inner!r}; "
                             f"choose from {sorted(INNER_POLICIES)}")
        if self.krylov not in ("cg", "fcg"):
            raise ValueError(f"unknown krylov variant {self.krylov!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.rhs not in ("load", "random"):
            raise ValueError(f"unknown rhs kind {self.rhs!r}")
        build_mesh(self.h)  # validates 1/h

    @property
    def sigma_value(self) -> float:
        return self.k0 * self.cov if self.sigma is None else self.sigma


@dataclass
class TableRow:
    """One sweep row: (iterations, kappa) per preconditioner column."""

    sweep: float
    ndof: int
    results: dict = field(default_factory=dict)   # kind -> (iter, kappa)
    work: dict | None = None
    flags: list = field(default_factory=list)


def build_operator(config: ExperimentConfig) -> GalerkinOperator:
    config.validate()
    mesh = build_mesh(config.h)
    if config.distribution == "uniform":
        if config.sigma_value == 0.0:
            # deterministic limit: mean only, zero fluctuation fields
            kl = KLExpansion(np.zeros(config.N),
                             np.zeros((config.N, mesh.n_nodes)), config.k0)
        else:
            spec = CovarianceSpec(sigma=config.sigma_value, corr_length=config.L)
            kl = build_kl_expansion(spec, config.N, config.k0, mesh.node_coords,
                                    config.n_quad)
        basis = build_multi_index_set(config.N, config.P)
        return build_uniform_operator(mesh, kl, basis, legendre_family())
    spec = LognormalFieldSpec(mean=config.k0, cov=config.cov,
                              corr_length=config.L)
    return build_lognormal_operator(spec, mesh, config.N, config.P, config.n_quad)


def _rhs_for(config: ExperimentConfig, op: GalerkinOperator) -> np.ndarray:
    mesh = build_mesh(config.h)
    if config.rhs == "load":
        return op.rhs(assemble_load(mesh, 1.0)).ravel()
    rng = np.random.default_rng(config.seed)
    b = rng.standard_normal(op.shape[0])
    b.reshape(op.n_blocks, op.ndof)[:, mesh.boundary_mask] = 0.0
    return b


def run_experiment(config: ExperimentConfig,
                   op: GalerkinOperator | None = None):
    """Run one configuration; returns (TableRow, SolveReport)."""
    if op is None:
        op = build_operator(config)
    b = _rhs_for(config, op)
    prec = make_preconditioner(op, config.preconditioner,
                               INNER_POLICIES[config.inner], config.tol)
    solver = krylov.cg if config.krylov == "cg" else krylov.fcg
    x, report = solver(op.matvec, b, apply_m=prec, tol=config.tol,
                       max_iter=config.max_iter)
    row = TableRow(sweep=config.N, ndof=op.shape[0])
    row.results[config.preconditioner] = (report.iterations, report.kappa_estimate)
    if prec is not None:
        report.work = prec.counters.__dict__.copy()
        if config.distribution == "uniform":
            report.work.update(work_count(config.N, config.P).as_dict())
    if report.spd_suspect:
        row.flags.append("not guaranteed: indefiniteness detected")
    if not report.converged and not report.spd_suspect:
        row.flags.append("max_iter reached")
    return row, report


# ---------------------------------------------------------------------------
# table sweeps
# ---------------------------------------------------------------------------

_BASE_UNIFORM = ExperimentConfig(distribution="uniform", N=4, P=4, h=0.1, cov=0.5)
_BASE_LOGNORMAL = ExperimentConfig(distribution="lognormal", N=4, P=4, h=0.1, cov=1.0)

TABLE_SWEEPS = {
    "T1": (_BASE_UNIFORM, "N", [1, 2, 3, 4, 5, 6, 7, 8]),
    "T2": (_BASE_UNIFORM, "P", [1, 2, 3, 4, 5, 6, 7, 8]),
    "T3": (_BASE_UNIFORM, "cov", [0.05, 0.15, 0.25, 0.35, 0.45, 0.55]),
    "T4": (_BASE_UNIFORM, "h", [5, 10, 15, 20, 25, 30]),
    "T5": (_BASE_LOGNORMAL, "N", [1, 2, 3, 4]),
    "T6": (_BASE_LOGNORMAL, "P", [1, 2, 3, 4]),
    "T7": (_BASE_LOGNORMAL, "cov", [0.25, 0.5, 0.75, 1.0, 1.25, 1.5]),
    "T8": (_BASE_LOGNORMAL, "h", [5, 10, 15, 20, 25, 30]),
}

# rows on which preconditioned iteration diffs are enforced, with the allowed
# absolute deviation and the columns covered; everything else is informational
# (the lognormal construction is under-specified upstream, so only the
# hierarchical column is held to the reference there)
ENFORCED_ITER_TOL = {
    "T1": ({1, 2, 3, 4}, 2, ("mean", "bsgs", "hs")),
    "T2": ({1, 2, 3, 4}, 2, ("mean", "bsgs", "hs")),
    "T5": ({1, 2}, 3, ("hs",)),
}
# sweep rows where the hierarchical preconditioner must take 6 or 7 iterations
ENFORCED_HS_RANGE = {"T4": {5, 10, 15}}


def _sweep_config(base: ExperimentConfig, variable: str, value) -> ExperimentConfig:
    if variable == "h":
        return replace(base, h=1.0 / value)
    return replace(base, **{variable: value})


def run_row(config: ExperimentConfig, kinds=reference.PRECONDITIONER_ORDER,
            sweep_value=None) -> TableRow:
    """Build the operator once and solve with each preconditioner column."""
    op = build_operator(config)
    row = TableRow(sweep=sweep_value, ndof=op.shape[0])
    for kind in kinds:
        cfg = replace(config, preconditioner=kind)
        _, report = run_experiment(cfg, op=op)
        row.results[kind] = (report.iterations, report.kappa_estimate)
        if report.spd_suspect:
            row.flags.append(f"{kind}: not guaranteed (indefiniteness detected)")
    if config.distribution == "uniform":
        row.work = work_count(config.N, config.P).as_dict()
    return row


def run_table(name: str, out_dir: str | None = None):
    """Run one sweep table; returns (rows, violations, artifact paths)."""
    if name == "work_counts":
        return _work_count_table(out_dir)
    if name == "eigs":
        return _eigs_table(out_dir)
    if name not in TABLE_SWEEPS:
        raise ValueError(f"unknown table {name!r}; choose from "
                         f"{sorted(TABLE_SWEEPS) + ['work_counts', 'eigs']}")
    base, variable, values = TABLE_SWEEPS[name]
    rows = []
    violations = []
    for value in values:
        cfg = _sweep_config(base, variable, value)
        sweep_key = value if variable != "cov" else int(round(100 * value))
        row = run_row(cfg, sweep_value=sweep_key)
        rows.append(row)
        violations.extend(_check_row(name, sweep_key, row))
    paths = _write_table(name, variable, rows, out_dir) if out_dir else []
    return rows, violations, paths


def _check_row(name: str, sweep_key, row: TableRow) -> list[str]:
    out = []
    ref = reference.reference_row(name, sweep_key)
    if ref is None:
        return out
    if row.ndof != ref["ndof"]:
        out.append(f"{name}[{sweep_key}]: ndof {row.ndof} != reference {ref['ndof']}")
    enforced = ENFORCED_ITER_TOL.get(name)
    if enforced and sweep_key in enforced[0]:
        _, tol, kinds = enforced
        for kind in kinds:
            got = row.results[kind][0]
            want = ref[kind][0]
            if abs(got - want) > tol:
                out.append(f"{name}[{sweep_key}] {kind}: {got} iterations vs "
                           f"reference {want} (allowed +-{tol})")
    hs_rows = ENFORCED_HS_RANGE.get(name)
    if hs_rows and sweep_key in hs_rows:
        got = row.results["hs"][0]
        if got not in (6, 7):
            out.append(f"{name}[{sweep_key}] hs: {got} iterations, expected 6 or 7")
    if name in ("T5", "T6", "T7", "T8"):
        it_hs = row.results["hs"][0]
        it_bsgs = row.results["bsgs"][0]
        it_mean = row.results["mean"][0]
        if not (it_hs <= it_bsgs <= it_mean):
            out.append(f"{name}[{sweep_key}]: ordering hs <= bsgs <= mean "
                       f"violated ({it_hs}/{it_bsgs}/{it_mean})")
    return out


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _write_table(name: str, variable: str, rows: list[TableRow], out_dir):
    os.makedirs(out_dir, exist_ok=True)
    has_ref = name in reference.TABLES
    header = [variable, "ndof"]
    for kind in reference.PRECONDITIONER_ORDER:
        header += [f"iter_{kind}", f"kappa_{kind}"]
        if has_ref:
            header += [f"ref_iter_{kind}", f"diff_iter_{kind}"]
    lines_csv = [",".join(header)]
    lines_md = ["| " + " | ".join(header) + " |",
                "|" + "---|" * len(header)]
    for row in rows:
        cells = [str(row.sweep), str(row.ndof)]
        ref = reference.reference_row(name, row.sweep) if has_ref else None
        for kind in reference.PRECONDITIONER_ORDER:
            it, kappa = row.results[kind]
            cells += [str(it), _fmt(kappa)]
            if has_ref:
                if ref is not None:
                    cells += [str(ref[kind][0]), str(it - ref[kind][0])]
                else:
                    cells += ["", ""]
        lines_csv.append(",".join(cells))
        lines_md.append("| " + " | ".join(cells) + " |")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    md_path = os.path.join(out_dir, f"{name}.md")
    with open(csv_path, "w") as fh:
        fh.write("\n".join(lines_csv) + "\n")
    with open(md_path, "w") as fh:
        fh.write("\n".join(lines_md) + "\n")
    return [csv_path, md_path]


def _work_count_table(out_dir):
    rows = []
    violations = []
    for r in range(1, 9):
        wc = work_count(r, 4)
        other = work_count(4, r)
        if wc.as_dict() != other.as_dict():
            violations.append(f"work_counts[{r}]: N-sweep and P-sweep disagree")
        ref = reference.WORK_COUNTS[r]
        got = (wc.n_b, wc.n_db, wc.n_m, wc.n_ds)
        if got != ref:
            violations.append(f"work_counts[{r}]: {got} != reference {ref}")
        rows.append(got)
    paths = []
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "work_counts.csv")
        md_path = os.path.join(out_dir, "work_counts.md")
        header = "N_or_P,n_b,n_db,n_m,n_ds"
        with open(csv_path, "w") as fh:
            fh.write(header + "\n")
            for r, row in enumerate(rows, start=1):
                fh.write(f"{r},{row[0]},{row[1]},{row[2]},{row[3]}\n")
        with open(md_path, "w") as fh:
            fh.write("| " + header.replace(",", " | ") + " |\n")
            fh.write("|" + "---|" * 5 + "\n")
            for r, row in enumerate(rows, start=1):
                fh.write(f"| {r} | {row[0]} | {row[1]} | {row[2]} | {row[3]} |\n")
        paths = [csv_path, md_path]
    return rows, violations, paths


def _eigs_table(out_dir, n_modes: int = 15):
    spec = CovarianceSpec(sigma=1.0, corr_length=0.5)
    modes = eig_2d_separable(spec, n_modes)
    lams = [m[0] for m in modes]
    violations = []
    if any(lams[i] < lams[i + 1] for i in range(len(lams) - 1)):
        violations.append("eigs: eigenvalues not monotone decreasing")
    paths = []
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "eigs.csv")
        with open(path, "w") as fh:
            fh.write("index,lambda\n")
            for i, lam in enumerate(lams, start=1):
                fh.write(f"{i},{lam:.17g}\n")
        paths = [path]
    return lams, violations, paths


# ---------------------------------------------------------------------------
# spectral-equivalence diagnostic
# ---------------------------------------------------------------------------

@dataclass
class SpectralDiagnostic:
    """Per-level equivalence constants and the product condition bound."""

    levels: list                 # (level, c1, c2) for level = 0..P-1
    bound: float
    kappa: float

    @property
    def satisfied(self) -> bool:
        return self.kappa <= self.bound * (1.0 + 1e-6)


def spectral_diagnostic(config: ExperimentConfig, size_limit: int = 2000,
                        op: GalerkinOperator | None = None) -> SpectralDiagnostic:
    """Dense check that the measured condition number obeys the product bound.

    Assembles the hierarchy matrices densely, computes the extreme
    generalized eigenvalues of (S_l, A_l) per level, their ratio product, and
    the condition number of the exactly-solved hierarchical preconditioner
    applied to the full matrix.
    """
    if op is None:
        op = build_operator(config)
    n = op.shape[0]
    if n > size_limit:
        raise ValueError(f"spectral diagnostic needs dense assembly; dimension "
                         f"{n} exceeds the limit {size_limit}")
    A = op.dense(limit=size_limit)
    sizes = [m * op.ndof for m in op.hierarchy]
    levels = []
    bound = 1.0
    for l in range(op.basis.degree - 1, -1, -1):
        nl, nl1 = sizes[l], sizes[l + 1]
        Al = A[:nl, :nl]
        B = A[:nl, nl:nl1]
        C = A[nl:nl1, :nl]
        D = A[nl:nl1, nl:nl1]
        Sl = Al - B @ np.linalg.solve(D, C)
        mu = sla.eigh(Sl, Al, eigvals_only=True)
        levels.append((l, float(mu[0]), float(mu[-1])))
        bound *= mu[-1] / mu[0]
    prec = HierarchicalSchur(op, InnerSolver(kind="exact"))
    M = np.column_stack([prec(e) for e in np.eye(n)])
    ev = np.sort(np.real(np.linalg.eigvals(M @ A)))
    kappa = float(ev[-1] / ev[0])
    levels.sort()
    return SpectralDiagnostic(levels, float(bound), kappa)
