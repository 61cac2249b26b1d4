"""Exact brute-force references for tiny instances.

These routines recompute, by exhaustive enumeration, the quantities the
MIP formulations and the face solvers produce: all vertices of a region
(with every nonsingular active set, so degenerate vertices contribute one
entry per set), the worst-case distance to an argmin set, and the full
min-max clustering problem over all partitions, per-member vertex choices
and cost-vector sign patterns. They exist to catch bugs in the fast path
and are guarded against combinatorial blowup.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from invclust.lp import EQ, OPTIMAL, LpModel, Tolerances, DEFAULT_TOL, solve_lp
from invclust.model import Dataset, Dmp, distance
from invclust.validation import check_alpha, check_norm

MAX_N = 6
MAX_M = 25
MAX_K = 8
MAX_L = 3


class SizeGuard(ValueError):
    """Instance exceeds the brute-force size limits."""


def _guard_dmp(dmp: Dmp):
    if dmp.n > MAX_N or dmp.m > MAX_M:
        raise SizeGuard(f"dmp size ({dmp.m}x{dmp.n}) exceeds the brute-force guard")


@dataclass
class VertexSet:
    """All basic feasible points of a region; `active_sets[i]` lists every
    nonsingular n-row subset tight at `vertices[i]`."""

    vertices: list
    active_sets: list

    def __len__(self) -> int:
        return len(self.vertices)


def enum_vertices(dmp: Dmp, tol: Tolerances | None = None) -> VertexSet:
    """Enumerate vertices as feasible solutions of nonsingular n-row systems."""
    _guard_dmp(dmp)
    tol = tol or DEFAULT_TOL
    n, m = dmp.n, dmp.m
    vertices: list = []
    active_sets: list = []
    for subset in itertools.combinations(range(m), n):
        sub = dmp.A[list(subset)]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv[-1] <= 1e-9 * max(sv[0], 1.0):
            continue
        x = np.linalg.solve(sub, dmp.b[list(subset)])
        if not np.all(np.isfinite(x)):
            continue
        if np.min(dmp.A @ x - dmp.b) < -tol.tol_feas:
            continue
        for idx, v in enumerate(vertices):
            if np.max(np.abs(v - x)) <= 1e-7:
                active_sets[idx].append(subset)
                break
        else:
            vertices.append(x)
            active_sets.append([subset])
    return VertexSet(vertices=vertices, active_sets=active_sets)


def bf_instability(dmp: Dmp, x_hat: np.ndarray, c: np.ndarray, norm: str,
                   tol: Tolerances | None = None) -> float:
    """Worst-case distance between x_hat and the argmin set of the program
    under c, by scanning vertices on the near-optimal face."""
    tol = tol or DEFAULT_TOL
    check_norm(norm)
    vs = enum_vertices(dmp, tol)
    if not vs.vertices:
        raise ValueError("region has no vertices; is it empty?")
    values = [float(np.dot(c, v)) for v in vs.vertices]
    z_star = min(values)
    cut = z_star + tol.tol_opt_face * (1.0 + abs(z_star))
    return max(distance(x_hat, v, norm)
               for v, z in zip(vs.vertices, values) if z <= cut)


def nearest_vertex_distance(dmp: Dmp, x_hat: np.ndarray, norm: str,
                            tol: Tolerances | None = None) -> float:
    """Distance from x_hat to the closest vertex of the region."""
    vs = enum_vertices(dmp, tol)
    return min(distance(x_hat, v, norm) for v in vs.vertices)


@dataclass
class BfScResult:
    objective: float
    assignment: np.ndarray | None
    cost_vectors: np.ndarray | None
    feasible: bool


class _SubsetSolver:
    """Min-max vertex selection with a common cost vector for one member set.

    Members of a candidate cluster each pick a (vertex, active set) choice;
    a choice combination is admissible when one cost vector lies in every
    member's selected cone (strictly when alpha is set) on some sign-pattern
    slice of the unit L1 sphere. Feasibility of pick sets is cached globally
    since the same prefixes recur across clusters and partitions.
    """

    def __init__(self, dataset: Dataset, norm: str, alpha: float | None,
                 tol: Tolerances):
        self.dataset = dataset
        self.norm = norm
        self.alpha = alpha
        self.tol = tol
        self.n = dataset.n
        self.patterns = list(itertools.product((1.0, -1.0), repeat=self.n))
        self.choices = []
        for dmp, x_hat in dataset.items():
            vs = enum_vertices(dmp, tol)
            entries = []
            for v, sets in zip(vs.vertices, vs.active_sets):
                d = distance(x_hat, v, norm)
                for subset in sets:
                    entries.append((d, subset, v))
            entries.sort(key=lambda e: (e[0], e[1]))
            self.choices.append(entries)
        self._memo: dict = {}
        self._feas_cache: dict = {}

    def _feasible_c(self, picks: tuple, pattern: tuple):
        """Common cost vector for the given (member, active set) picks on a
        sign-pattern slice, or None."""
        key = (picks, pattern)
        if key in self._feas_cache:
            return self._feas_cache[key]
        n = self.n
        lam_lo = self.alpha if self.alpha is not None else 0.0
        ncols = n + n * len(picks)
        rows = []
        for idx, (k, subset) in enumerate(picks):
            block = np.zeros((n, ncols))
            block[:, :n] = -np.eye(n)
            block[:, n + idx * n: n + (idx + 1) * n] = self.dataset.dmps[k].A[list(subset)].T
            rows.append(block)
        norm_row = np.zeros((1, ncols))
        norm_row[0, :n] = pattern
        rows.append(norm_row)
        pat = np.asarray(pattern)
        lower = np.concatenate([np.where(pat > 0, 0.0, -np.inf),
                                np.full(n * len(picks), lam_lo)])
        upper = np.concatenate([np.where(pat > 0, np.inf, 0.0),
                                np.full(n * len(picks), np.inf)])
        model = LpModel(objective=np.zeros(ncols), A=np.vstack(rows),
                        senses=(EQ,) * (n * len(picks) + 1),
                        rhs=np.concatenate([np.zeros(n * len(picks)), [1.0]]),
                        lower=lower, upper=upper)
        sol = solve_lp(model, self.tol)
        c = sol.x[:n].copy() if sol.status == OPTIMAL else None
        self._feas_cache[key] = c
        return c

    def value(self, members: tuple):
        """Return (objective, picks, c) for a member set, or (inf, None, None)."""
        members = tuple(sorted(members))
        if members in self._memo:
            return self._memo[members]
        # put the member with the largest unavoidable distance first
        order = sorted(members, key=lambda k: (-self.choices[k][0][0], k))
        tail_lb = [0.0] * (len(order) + 1)
        for i in range(len(order) - 1, -1, -1):
            tail_lb[i] = max(tail_lb[i + 1], self.choices[order[i]][0][0])
        best = {"val": np.inf, "picks": None, "c": None}

        def recurse(i: int, curmax: float, picks: tuple, alive: list):
            if max(curmax, tail_lb[i]) >= best["val"] - 1e-12:
                return
            if i == len(order):
                best["val"] = curmax
                best["picks"] = picks
                best["c"] = alive[0][1]
                return
            k = order[i]
            for dist_k, subset, _vertex in self.choices[k]:
                newmax = max(curmax, dist_k)
                if max(newmax, tail_lb[i + 1]) >= best["val"] - 1e-12:
                    break
                new_picks = tuple(sorted(picks + ((k, subset),)))
                surviving = []
                for pattern, _c in alive:
                    c = self._feasible_c(new_picks, pattern)
                    if c is not None:
                        surviving.append((pattern, c))
                if surviving:
                    recurse(i + 1, newmax, new_picks, surviving)

        recurse(0, 0.0, (), [(p, None) for p in self.patterns])
        result = (best["val"], best["picks"], best["c"])
        self._memo[members] = result
        return result


def _canonical_labelings(K: int, L: int):
    """All assignments of K items to at most L interchangeable labels, with
    item 0 forced to label 0 and labels introduced in increasing order."""
    labels = [0] * K

    def rec(i: int, used: int):
        if i == K:
            yield tuple(labels)
            return
        for lab in range(min(used + 1, L)):
            labels[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    yield from rec(1, 1)


def bf_sc(dataset: Dataset, L: int, norm: str, alpha: float | None = None,
          tol: Tolerances | None = None) -> BfScResult:
    """Exhaustive min-max clustering over partitions, vertex choices and
    cost-vector sign patterns.

    With alpha=None the multipliers on selected rows may vanish (lower-bound
    semantics); with alpha set they must be at least alpha on every selected
    row (strict-cone semantics). Reports the lexicographically smallest
    optimal assignment.
    """
    tol = tol or DEFAULT_TOL
    check_norm(norm)
    if alpha is not None:
        alpha = check_alpha(alpha)
    if L < 1:
        raise ValueError("L must be at least 1")
    if dataset.K > MAX_K or L > MAX_L:
        raise SizeGuard(f"K={dataset.K}, L={L} exceeds the brute-force guard")
    for dmp in dataset.dmps:
        _guard_dmp(dmp)
    solver = _SubsetSolver(dataset, norm, alpha, tol)
    best_val = np.inf
    best_labels = None
    best_cs = None
    for labels in _canonical_labelings(dataset.K, L):
        used = max(labels) + 1
        val = 0.0
        cs = {}
        dominated = False
        for lab in range(used):
            members = tuple(k for k in range(dataset.K) if labels[k] == lab)
            sub_val, _picks, c = solver.value(members)
            val = max(val, sub_val)
            cs[lab] = c
            if val >= best_val - 1e-12:
                dominated = True
                break
        if dominated or not np.isfinite(val):
            continue
        best_val = val
        best_labels = labels
        best_cs = cs
    if best_labels is None:
        return BfScResult(objective=np.inf, assignment=None, cost_vectors=None,
                          feasible=False)
    cost_vectors = np.zeros((L, dataset.n))
    cost_vectors[:, 0] = 1.0
    for lab, c in best_cs.items():
        cost_vectors[lab] = c
    return BfScResult(objective=float(best_val), assignment=np.asarray(best_labels),
                      cost_vectors=cost_vectors, feasible=True)
