"""Convergence of preconditioned CG on the uniform random-coefficient problem.

Builds the coupled system for CoV = 50%, degree 4 chaos on a 10x10 mesh and
compares iteration counts and Lanczos condition estimates of the mean-based,
block symmetric Gauss-Seidel, and hierarchical Schur preconditioners against
the bundled reference values.  (The full sweeps are available through the
command line: ``sgfem run --table T1 --out results/``.)
"""
from sgfem import ExperimentConfig, run_row
from sgfem.reference import reference_row

print("uniform coefficient, P=4, CoV=50%, h=1/10, tol 1e-8")
print(f"{'N':>2} {'ndof':>6}  column      iter  kappa      reference")
for n in (1, 2, 3, 4):
    row = run_row(ExperimentConfig(N=n, P=4, h=0.1, cov=0.5), sweep_value=n)
    ref = reference_row("T1", n)
    for kind in ("none", "mean", "bsgs", "hs"):
        it, kappa = row.results[kind]
        ref_it, ref_kappa = ref[kind]
        note = "" if kind != "none" else "  (informational column, see README)"
        print(f"{n:>2} {row.ndof:>6}  {kind:<10} {it:5d}  {kappa:9.4f}  "
              f"{ref_it:4d} / {ref_kappa:<9.4f}{note}")
