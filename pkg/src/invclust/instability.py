"""Worst-case distance between an observation and an argmin set.

The argmin set of min{c'x | Ax >= b} is modeled as the near-optimal slice
{x feasible, c'x <= z* + eps} with eps relative to |z*|, which is numerically
robust against the face being defined by an exact equality. Maximizing a
convex norm over that polytope attains at a vertex, so the max-norm case
reduces to 2n LPs (coordinate ranges over the slice) and the sum-norm case
to one MIP with per-coordinate sign-selection binaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from invclust.lp import (
    GE, LE, OPTIMAL, LpError, LpModel, Tolerances, DEFAULT_TOL, solve_lp,
)
from invclust.mip import BnbConfig, MipModel, solve_mip
from invclust.model import ClusterSolution, Dataset, Dmp, forward_solve, preflight
from invclust.validation import L1, LINF, check_cost_vector, check_norm


@dataclass
class InstabilityReport:
    """Worst-case distances per observation, per cluster and overall."""

    per_k: np.ndarray
    per_cluster: dict
    overall: float

    def to_json_dict(self) -> dict:
        return {
            "per_k": self.per_k.tolist(),
            "per_cluster": {str(k): v for k, v in sorted(self.per_cluster.items())},
            "overall": self.overall,
        }


def _face_rows(dmp: Dmp, c: np.ndarray, z_star: float, tol: Tolerances):
    eps = tol.tol_opt_face * (1.0 + abs(z_star))
    A = np.vstack([dmp.A, c[None, :]])
    senses = (GE,) * dmp.m + (LE,)
    rhs = np.concatenate([dmp.b, [z_star + eps]])
    return A, senses, rhs


def worst_case_distance(dmp: Dmp, x_hat: np.ndarray, c: np.ndarray, norm: str,
                        tol: Tolerances | None = None) -> float:
    """max{ d(x_hat, x) : x optimal for the program under c }."""
    tol = tol or DEFAULT_TOL
    check_norm(norm)
    c = check_cost_vector(c)
    x_hat = np.asarray(x_hat, dtype=float)
    _, z_star = forward_solve(dmp, c, tol)
    A, senses, rhs = _face_rows(dmp, c, z_star, tol)
    n = dmp.n
    if norm == LINF:
        worst = 0.0
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            for sign in (1.0, -1.0):
                # maximize sign*(x_hat_j - x_j) == minimize sign*x_j - const
                sol = solve_lp(LpModel(objective=sign * e, A=A, senses=senses,
                                       rhs=rhs), tol)
                if sol.status != OPTIMAL:
                    raise LpError(f"face LP ended with status {sol.status}")
                worst = max(worst, sign * (x_hat[j] - sol.x[j]))
        return float(worst)
    # sum norm: one MIP, envelope variables e_j >= |x_hat_j - x_j| with the
    # upper caps selected by sign binaries
    report = preflight(dmp, tol)
    span = report.coord_max - report.coord_min
    outside = np.maximum(report.coord_min - x_hat, 0.0) + \
        np.maximum(x_hat - report.coord_max, 0.0)
    bigm = 2.0 * (span + outside) + 1.0
    ncols = 3 * n  # x | e | s
    obj = np.concatenate([np.zeros(n), -np.ones(n), np.zeros(n)])
    rows, senses2, rhs2 = [], [], []
    for i in range(A.shape[0]):
        rows.append(np.concatenate([A[i], np.zeros(2 * n)]))
        senses2.append(senses[i])
        rhs2.append(rhs[i])
    for j in range(n):
        x_col = np.zeros(n)
        e_col = np.zeros(n)
        s_col = np.zeros(n)
        x_col[j] = e_col[j] = s_col[j] = 1.0
        # e_j <= (x_hat_j - x_j) + M_j s_j
        rows.append(np.concatenate([x_col, e_col, -bigm[j] * s_col]))
        senses2.append(LE)
        rhs2.append(x_hat[j])
        # e_j <= (x_j - x_hat_j) + M_j (1 - s_j)
        rows.append(np.concatenate([-x_col, e_col, bigm[j] * s_col]))
        senses2.append(LE)
        rhs2.append(-x_hat[j] + bigm[j])
        # e_j >= +-(x_hat_j - x_j)
        rows.append(np.concatenate([x_col, e_col, np.zeros(n)]))
        senses2.append(GE)
        rhs2.append(x_hat[j])
        rows.append(np.concatenate([-x_col, e_col, np.zeros(n)]))
        senses2.append(GE)
        rhs2.append(-x_hat[j])
    lower = np.concatenate([np.full(n, -np.inf), np.zeros(n), np.zeros(n)])
    upper = np.concatenate([np.full(n, np.inf), np.full(n, np.inf), np.ones(n)])
    base = LpModel(objective=obj, A=np.vstack(rows), senses=tuple(senses2),
                   rhs=np.asarray(rhs2), lower=lower, upper=upper)
    mip = MipModel(base=base, binaries=frozenset(range(2 * n, 3 * n)))
    sol = solve_mip(mip, BnbConfig(), tol=tol)
    if sol.status not in ("optimal", "feasible"):
        raise LpError(f"envelope MIP ended with status {sol.status}")
    return float(-sol.objective)


def evaluate(dataset: Dataset, sol: ClusterSolution, norm: str,
             tol: Tolerances | None = None) -> InstabilityReport:
    """Score a clustering: worst-case distance of every observation under its
    cluster's cost vector, aggregated per cluster and overall."""
    tol = tol or DEFAULT_TOL
    if sol.K != dataset.K:
        raise ValueError("solution and dataset sizes differ")
    per_k = np.empty(dataset.K)
    for k, (dmp, x_hat) in enumerate(dataset.items()):
        c = sol.cost_vectors[sol.assignment[k]]
        per_k[k] = worst_case_distance(dmp, x_hat, c, norm, tol)
    per_cluster = {}
    for lab in range(sol.L):
        members = sol.members(lab)
        if members:
            per_cluster[lab] = float(per_k[members].max())
    return InstabilityReport(per_k=per_k, per_cluster=per_cluster,
                             overall=float(per_k.max()))
