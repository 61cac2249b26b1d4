"""Branch-and-bound for LPs with designated binary variables.

Best-first search keyed on the node LP bound; node LPs reoptimize dual-simplex
warm from the parent basis. Branching picks the most fractional binary, with
priority given to set-partitioning rows (sum of binaries equal to one): when
such a row has a fractional member the dichotomy fixes that member to one or
to zero, which settles the whole group in the one-branch. A feasible warm
start becomes the initial incumbent after an explicit feasibility check; when
none is supplied, a rounding dive from the root relaxation tries to produce
one. Deterministic for fixed inputs (heap ties broken by insertion order).
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from invclust.lp import (
    EQ, GE, LE, OPTIMAL, INFEASIBLE, UNBOUNDED,
    Basis, LpError, LpModel, Tolerances, DEFAULT_TOL, solve_lp,
)


class WarmStartInfeasible(LpError):
    """The supplied incumbent violates the model."""

    def __init__(self, kind: str, index: int, name: str, violation: float):
        self.kind = kind
        self.index = index
        self.name = name
        self.violation = violation
        super().__init__(f"warm start violates {kind} '{name}' by {violation:.3e}")


@dataclass
class MipModel:
    """An LpModel plus the set of variable indices restricted to {0,1}."""

    base: LpModel
    binaries: frozenset

    def __post_init__(self):
        self.binaries = frozenset(int(j) for j in self.binaries)
        n = self.base.n_vars
        for j in self.binaries:
            if not 0 <= j < n:
                raise ValueError(f"binary index {j} out of range")
            if self.base.lower[j] != 0.0 or self.base.upper[j] != 1.0:
                raise ValueError(f"binary variable {self.base.col_name(j)} must have bounds [0, 1]")


@dataclass(frozen=True)
class BnbConfig:
    time_limit_s: float = 600.0
    node_limit: int = 10_000_000
    rel_gap: float = 1e-6
    branching: str = "most-fractional"
    node_order: str = "best-first"

    def __post_init__(self):
        if self.time_limit_s <= 0 or self.node_limit <= 0 or self.rel_gap <= 0:
            raise ValueError("limits must be positive")
        if self.branching != "most-fractional":
            raise ValueError("only most-fractional branching is implemented")
        if self.node_order != "best-first":
            raise ValueError("only best-first node order is implemented")


@dataclass
class MipSolution:
    status: str  # optimal | feasible | infeasible | time_limit
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int = 0
    wall_s: float = 0.0
    incumbent_trace: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        if self.x is None or not np.isfinite(self.objective):
            return np.inf
        return max(0.0, self.objective - self.bound)


@dataclass(frozen=True)
class BigMEntry:
    """One big-M gated constraint: `row` should be slack whenever the gate
    binary sits at `relax_value`."""

    row: int
    name: str
    value: float
    gate_col: int
    relax_value: int


def check_point(model: MipModel, x: np.ndarray, tol: Tolerances | None = None):
    """Return None if x is feasible, else (kind, index, name, violation)."""
    tol = tol or DEFAULT_TOL
    base = model.base
    x = np.asarray(x, dtype=float)
    if x.shape != (base.n_vars,):
        return ("shape", -1, "assignment", float("inf"))
    for j in range(base.n_vars):
        viol = max(base.lower[j] - x[j], x[j] - base.upper[j])
        if viol > tol.tol_feas:
            return ("bound", j, base.col_name(j), float(viol))
    activities = base.A @ x if base.n_rows else np.zeros(0)
    for i, sense in enumerate(base.senses):
        resid = activities[i] - base.rhs[i]
        viol = (-resid if sense == GE else resid if sense == LE else abs(resid))
        if viol > tol.tol_feas:
            return ("row", i, base.row_name(i), float(viol))
    for j in sorted(model.binaries):
        viol = abs(x[j] - round(x[j]))
        if viol > tol.tol_int:
            return ("integrality", j, base.col_name(j), float(viol))
    return None


def _detect_gub_groups(model: MipModel) -> list:
    groups = []
    base = model.base
    for i, sense in enumerate(base.senses):
        if sense != EQ or base.rhs[i] != 1.0:
            continue
        cols = np.nonzero(base.A[i])[0]
        if len(cols) < 2:
            continue
        if np.all(base.A[i, cols] == 1.0) and all(int(j) in model.binaries for j in cols):
            groups.append(tuple(int(j) for j in cols))
    return groups


def _select_branch(x: np.ndarray, binaries: list, gub_groups: list, tol_int: float):
    """Most fractional binary; partitioning groups take priority."""
    def frac(j):
        return abs(x[j] - round(x[j]))

    best_gub, best_gub_frac = None, tol_int
    for group in gub_groups:
        for j in group:
            f = frac(j)
            if f > best_gub_frac:
                best_gub, best_gub_frac = j, f
    if best_gub is not None:
        return best_gub
    best, best_frac = None, tol_int
    for j in binaries:
        f = frac(j)
        if f > best_frac:
            best, best_frac = j, f
    return best


def _dive(model: MipModel, lb, ub, sol, binaries, gub_groups, tol, deadline):
    """Greedy rounding dive from a relaxation solution; returns a feasible
    point or None."""
    lb = lb.copy()
    ub = ub.copy()
    for _ in range(len(binaries) + 1):
        if time.monotonic() > deadline:
            return None
        j = _select_branch(sol.x, binaries, gub_groups, tol.tol_int)
        if j is None:
            if check_point(model, sol.x, tol) is None:
                return sol.x.copy()
            return None
        for val in (round(sol.x[j]), 1 - round(sol.x[j])):
            trial_lb, trial_ub = lb.copy(), ub.copy()
            trial_lb[j] = trial_ub[j] = float(val)
            nxt = solve_lp(model.base, tol, lower=trial_lb, upper=trial_ub,
                           warm=sol.basis)
            if nxt.status == OPTIMAL:
                lb, ub, sol = trial_lb, trial_ub, nxt
                break
        else:
            return None
    return None


def solve_mip(model: MipModel, config: BnbConfig | None = None,
              warm_start: np.ndarray | None = None,
              tol: Tolerances | None = None) -> MipSolution:
    """Minimize over the mixed-binary feasible set.

    A warm start must be feasible within the tolerances (checked; rejected
    with the violated constraint otherwise) and bounds the search from the
    first node. Status `optimal` means the incumbent is within rel_gap of
    the global optimum; hitting a limit returns the best incumbent with the
    proven bound.
    """
    config = config or BnbConfig()
    tol = tol or DEFAULT_TOL
    start = time.monotonic()
    deadline = start + config.time_limit_s
    base = model.base
    binaries = sorted(model.binaries)
    gub_groups = _detect_gub_groups(model)

    incumbent_x = None
    incumbent_obj = np.inf
    trace: list = []
    if warm_start is not None:
        viol = check_point(model, warm_start, tol)
        if viol is not None:
            raise WarmStartInfeasible(*viol)
        incumbent_x = np.asarray(warm_start, dtype=float).copy()
        incumbent_obj = float(base.objective @ incumbent_x)
        trace.append(incumbent_obj)

    lb0 = base.lower.copy()
    ub0 = base.upper.copy()
    root = solve_lp(base, tol, lower=lb0, upper=ub0)
    nodes = 1
    if root.status == UNBOUNDED:
        raise LpError("root relaxation is unbounded; the model is ill-posed")
    if root.status == INFEASIBLE:
        status = "infeasible" if incumbent_x is None else "optimal"
        return MipSolution(status=status, x=incumbent_x, objective=incumbent_obj,
                           bound=incumbent_obj if incumbent_x is not None else np.inf,
                           nodes=0, wall_s=time.monotonic() - start,
                           incumbent_trace=trace)
    if incumbent_x is None:
        dived = _dive(model, lb0, ub0, root, binaries, gub_groups, tol, deadline)
        if dived is not None:
            incumbent_x = dived
            incumbent_obj = float(base.objective @ dived)
            trace.append(incumbent_obj)

    def gap_slack():
        if not np.isfinite(incumbent_obj):
            return 0.0
        return config.rel_gap * (1.0 + abs(incumbent_obj))

    seq = 0
    heap = [(root.objective, seq, lb0, ub0, None, root)]
    best_bound = root.objective
    hit_limit = None
    while heap:
        bound, _, lb, ub, warm_basis, presolved = heapq.heappop(heap)
        best_bound = bound
        if np.isfinite(incumbent_obj) and bound >= incumbent_obj - gap_slack():
            best_bound = incumbent_obj
            heap.clear()
            break
        if time.monotonic() > deadline:
            hit_limit = "time_limit"
            break
        if nodes >= config.node_limit:
            hit_limit = "feasible"
            break
        if presolved is not None:
            sol = presolved
        else:
            nodes += 1
            sol = solve_lp(base, tol, lower=lb, upper=ub, warm=warm_basis)
        if sol.status == INFEASIBLE:
            continue
        if sol.status == UNBOUNDED:
            raise LpError("node relaxation is unbounded; the model is ill-posed")
        if np.isfinite(incumbent_obj) and sol.objective >= incumbent_obj - gap_slack():
            continue
        j = _select_branch(sol.x, binaries, gub_groups, tol.tol_int)
        if j is None:
            if sol.objective < incumbent_obj - 1e-12:
                incumbent_obj = float(sol.objective)
                incumbent_x = sol.x.copy()
                trace.append(incumbent_obj)
            continue
        for val in (1.0, 0.0):
            child_lb, child_ub = lb.copy(), ub.copy()
            child_lb[j] = child_ub[j] = val
            seq += 1
            heapq.heappush(heap, (sol.objective, seq, child_lb, child_ub,
                                  sol.basis, None))
    else:
        best_bound = incumbent_obj if np.isfinite(incumbent_obj) else np.inf

    wall = time.monotonic() - start
    if hit_limit is not None:
        status = hit_limit if incumbent_x is not None else "time_limit"
        return MipSolution(status=status, x=incumbent_x, objective=incumbent_obj,
                           bound=float(best_bound), nodes=nodes, wall_s=wall,
                           incumbent_trace=trace)
    if incumbent_x is None:
        return MipSolution(status="infeasible", x=None, objective=np.inf,
                           bound=np.inf, nodes=nodes, wall_s=wall,
                           incumbent_trace=trace)
    return MipSolution(status="optimal", x=incumbent_x, objective=incumbent_obj,
                       bound=float(min(best_bound, incumbent_obj)), nodes=nodes,
                       wall_s=wall, incumbent_trace=trace)


# -- LP-file export -------------------------------------------------------


def _lp_name(raw: str) -> str:
    out = raw.replace("[", "_").replace("]", "").replace(",", "_").replace(" ", "")
    return out or "unnamed"


def _lp_terms(coeffs: np.ndarray, names: list) -> str:
    parts = []
    for c, name in zip(coeffs, names):
        if c == 0.0:
            continue
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c):.17g} {name}")
    if not parts:
        return f"+ 0 {names[0]}"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_lp_file(model: MipModel) -> str:
    """Serialize to the human-readable LP file format (objective, subject-to,
    bounds and binaries sections). Models containing an all-zero constraint
    row are rejected."""
    base = model.base
    if base.n_vars == 0:
        raise ValueError("cannot export a model without variables")
    for i in range(base.n_rows):
        if not np.any(base.A[i]):
            raise ValueError(f"cannot export all-zero constraint row {i}")
    names = [_lp_name(base.col_name(j)) for j in range(base.n_vars)]
    lines = ["\\ invclust model export", "Minimize",
             f" obj: {_lp_terms(base.objective, names)}", "Subject To"]
    rel = {GE: ">=", LE: "<=", EQ: "="}
    for i in range(base.n_rows):
        row_name = _lp_name(base.row_name(i))
        lines.append(f" {row_name}: {_lp_terms(base.A[i], names)} "
                     f"{rel[base.senses[i]]} {base.rhs[i]:.17g}")
    lines.append("Bounds")
    for j in range(base.n_vars):
        lo, hi = base.lower[j], base.upper[j]
        if not np.isfinite(lo) and not np.isfinite(hi):
            lines.append(f" {names[j]} free")
        else:
            left = "-infinity" if not np.isfinite(lo) else f"{lo:.17g}"
            right = "+infinity" if not np.isfinite(hi) else f"{hi:.17g}"
            lines.append(f" {left} <= {names[j]} <= {right}")
    if model.binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[j] for j in sorted(model.binaries)))
    lines.append("End")
    return "\n".join(lines) + "\n"


def validate_bigM(model: MipModel, sol: MipSolution, registry: list,
                  tol: Tolerances | None = None) -> list:
    """Warn for every gated constraint that is nearly binding while its gate
    binary sits at the relaxing value, i.e. where the big-M itself may be
    truncating the model."""
    tol = tol or DEFAULT_TOL
    if sol.x is None:
        raise ValueError("solution carries no point to validate")
    base = model.base
    warnings = []
    activities = base.A @ sol.x
    for entry in registry:
        gate = sol.x[entry.gate_col]
        if abs(gate - entry.relax_value) > tol.tol_int:
            continue
        resid = activities[entry.row] - base.rhs[entry.row]
        slack = -resid if base.senses[entry.row] == LE else resid
        if slack <= 1e-6 * entry.value:
            warnings.append(
                f"{entry.name}: constraint '{base.row_name(entry.row)}' is "
                f"within {slack:.3e} of its big-M cap (M={entry.value:g}); "
                f"the constant may be truncating the feasible set")
    return warnings
