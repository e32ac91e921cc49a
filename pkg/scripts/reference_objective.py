#!/usr/bin/env python3
"""One-time oracle: solve the small reference instances with generic convex
solvers (cvxpy) and print the optimal objective values that are frozen into
tests/test_acceptance.py.

Not part of the package; cvxpy is required only to re-run this script.
"""

import sys
from pathlib import Path

import cvxpy as cp
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from instances import M_SMALL, N_SMALL, make_reference_instance  # noqa: E402

from irsdoa import build_problem, default_beta  # noqa: E402

RHO = 1000.0


def reference_objective(problem, solver="CLARABEL", **kwargs):
    m, n = M_SMALL, N_SMALL
    beta = default_beta(n)
    tau = beta**2 / (RHO * n)
    c, r = problem.c, problem.r
    wr, vr = np.linalg.eigh(r)
    r_half = (vr * np.sqrt(wr)) @ vr.conj().T

    w = cp.Variable((m, m), hermitian=True)
    g = cp.Variable((m, n), complex=True)
    bordered = cp.bmat([[w, g], [cp.conj(g).T, RHO * np.eye(n)]])
    constraints = [bordered >> 0, cp.real(cp.trace(w)) == tau]
    for v in range(1, m):
        constraints.append(cp.sum(cp.diag(w, v)) == 0)
    prob = cp.Problem(cp.Minimize(cp.sum_squares((c - g) @ r_half)), constraints)
    prob.solve(solver=solver, **kwargs)
    if prob.status not in (cp.OPTIMAL, "optimal_inaccurate"):
        raise RuntimeError(f"{solver} returned status {prob.status}")
    return prob.value, prob.status


def main():
    print("index kind scs clarabel rel_gap")
    values = []
    for i in range(5):
        echo, d = make_reference_instance(i)
        problem = build_problem(echo, d)
        scs, _ = reference_objective(problem, "SCS", eps=1e-10, max_iters=500000)
        clarabel, status = reference_objective(problem, "CLARABEL")
        gap = abs(clarabel - scs) / scs
        if gap > 1e-7:
            raise RuntimeError(f"instance {i}: cross-solver gap {gap:.2e}")
        values.append(scs)
        print(f"{i} {d.kind} {scs!r} {clarabel!r} ({status}) {gap:.2e}")
    print("\nREFERENCE_OBJECTIVES = (")
    for v in values:
        print(f"    {v!r},")
    print(")")


if __name__ == "__main__":
    main()
