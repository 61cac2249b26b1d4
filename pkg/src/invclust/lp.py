"""Dense linear-program representation and a two-phase simplex solver.

Models are minimization problems over free or bounded variables with
GE/LE/EQ constraint rows. The solver is a bounded-variable revised simplex
with an explicit basis inverse: phase 1 drives artificial variables out,
phase 2 uses Dantzig pricing and falls back to Bland's rule after a stall
counter, which guarantees termination. A solved basis can be handed back in
(warm start) and reoptimized with the dual simplex after bound changes,
which is what the branch-and-bound layer relies on.

Everything is deterministic: identical inputs reproduce the same pivot
sequence, basis and objective. Models are treated as immutable once built,
so independent solves may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GE = "GE"
LE = "LE"
EQ = "EQ"
_SENSES = (GE, LE, EQ)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# column status codes
_BASIC = 0
_AT_LB = 1
_AT_UB = 2
_FREE = 3


class LpError(Exception):
    """Base class for solver errors."""


class NumericalFailure(LpError):
    """Pivoting did not terminate within the iteration cap or the basis
    became numerically singular."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across the solver stack.

    tol_pivot guards pivot eligibility, tol_feas is the primal feasibility
    and duality check tolerance, tol_int the binary integrality tolerance,
    and tol_opt_face the relative width of the near-optimal face used when
    maximizing a distance over an argmin set.
    """

    tol_pivot: float = 1e-9
    tol_feas: float = 1e-7
    tol_int: float = 1e-6
    tol_opt_face: float = 1e-6

    def __post_init__(self):
        for name in ("tol_pivot", "tol_feas", "tol_int", "tol_opt_face"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.tol_pivot >= self.tol_feas:
            raise ValueError("tol_pivot must be smaller than tol_feas")


DEFAULT_TOL = Tolerances()


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass
class LpModel:
    """min objective'x subject to A x {>=,<=,==} rhs and lower <= x <= upper.

    Rows with an all-zero coefficient vector and a nonzero right-hand side
    under GE/EQ are rejected at construction (they encode 0 >= rhs).
    """

    objective: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    row_names: tuple | None = None
    col_names: tuple | None = None

    def __post_init__(self):
        self.objective = _readonly(np.asarray(self.objective, dtype=float).copy())
        self.rhs = _readonly(np.asarray(self.rhs, dtype=float).copy())
        self.senses = tuple(self.senses)
        n = self.objective.shape[0]
        m = len(self.senses)
        A = np.asarray(self.A, dtype=float).reshape(m, n).copy()
        self.A = _readonly(A)
        if self.rhs.shape != (m,):
            raise ValueError("senses/rhs length must match the row count")
        for s in self.senses:
            if s not in _SENSES:
                raise ValueError(f"unknown sense {s!r}")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.rhs))
                and np.all(np.isfinite(self.objective))):
            raise ValueError("objective, A and rhs must be finite")
        lo = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float).copy()
        hi = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).copy()
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        self.lower = _readonly(lo)
        self.upper = _readonly(hi)
        if self.row_names is not None:
            self.row_names = tuple(self.row_names)
            if len(self.row_names) != m:
                raise ValueError("row_names length mismatch")
        if self.col_names is not None:
            self.col_names = tuple(self.col_names)
            if len(self.col_names) != n:
                raise ValueError("col_names length mismatch")
        for i in range(m):
            if self.senses[i] in (GE, EQ) and self.rhs[i] != 0.0 and not np.any(self.A[i]):
                raise ValueError(f"row {i} is all-zero with nonzero rhs ({self.senses[i]})")

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def row_name(self, i: int) -> str:
        return self.row_names[i] if self.row_names else f"row[{i}]"

    def col_name(self, j: int) -> str:
        return self.col_names[j] if self.col_names else f"x[{j}]"


@dataclass
class Basis:
    """Snapshot of a solved basis, reusable as a dual-simplex warm start.

    `art_spec` records any artificial columns kept frozen at zero as
    (row, sign) pairs so the column structure can be rebuilt.
    """

    basic: np.ndarray
    status: np.ndarray
    art_spec: tuple = ()


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float = np.nan
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_objective: float = np.nan
    basis: Basis | None = None
    iterations: int = 0


class _Simplex:
    """Bounded-variable revised simplex over the equality form
    [A | I_slack] w = rhs with per-column bounds."""

    REFACTOR_EVERY = 64

    def __init__(self, model: LpModel, tol: Tolerances,
                 lower: np.ndarray | None, upper: np.ndarray | None):
        m, n = model.n_rows, model.n_vars
        self.m, self.n = m, n
        self.tol = tol
        self.A = np.hstack([model.A, np.eye(m)]) if m else np.zeros((0, n))
        self.b = model.rhs.astype(float).copy()
        lo = (model.lower if lower is None else np.asarray(lower, dtype=float)).copy()
        hi = (model.upper if upper is None else np.asarray(upper, dtype=float)).copy()
        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        for i, s in enumerate(model.senses):
            if s == LE:
                slack_hi[i] = np.inf
            elif s == GE:
                slack_lo[i] = -np.inf
                slack_hi[i] = 0.0
        self.lb = np.concatenate([lo, slack_lo])
        self.ub = np.concatenate([hi, slack_hi])
        self.cost = np.concatenate([model.objective, np.zeros(m)])
        self.N = n + m
        self.art_spec: list = []
        self.basic = np.arange(n, n + m)
        self.status = np.empty(self.N, dtype=np.int8)
        for j in range(self.N):
            if np.isfinite(self.lb[j]):
                self.status[j] = _AT_LB
            elif np.isfinite(self.ub[j]):
                self.status[j] = _AT_UB
            else:
                self.status[j] = _FREE
        self.status[self.basic] = _BASIC
        self.Binv = np.eye(m)
        self.xb = np.zeros(m)
        self.iterations = 0
        self.cap_per_phase = max(200, 50 * (m + n))
        self.stall_limit = max(50, 10 * (m + n))

    # -- values ----------------------------------------------------------

    def _nonbasic_values(self) -> np.ndarray:
        v = np.zeros(self.N)
        at_lb = self.status == _AT_LB
        at_ub = self.status == _AT_UB
        v[at_lb] = self.lb[at_lb]
        v[at_ub] = self.ub[at_ub]
        return v

    def _recompute_xb(self):
        v = self._nonbasic_values()
        v[self.basic] = 0.0
        self.xb = self.Binv @ (self.b - self.A @ v)

    def _refactor(self):
        B = self.A[:, self.basic]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis during refactorization") from exc
        if not np.all(np.isfinite(self.Binv)):
            raise NumericalFailure("non-finite basis inverse")
        self._recompute_xb()

    def full_x(self) -> np.ndarray:
        v = self._nonbasic_values()
        v[self.basic] = self.xb
        return v

    # -- pivoting --------------------------------------------------------

    def _pivot_update(self, pos: int, w: np.ndarray):
        piv = w[pos]
        if abs(piv) < 1e-11:
            raise NumericalFailure("pivot element vanished")
        row = self.Binv[pos] / piv
        self.Binv -= np.outer(w, row)
        self.Binv[pos] = row

    def _primal(self, cost: np.ndarray, phase_label: str, bland: bool = False) -> str:
        tol = self.tol
        self._recompute_xb()
        stall = 0
        last_obj = np.inf
        movable = self.ub - self.lb > 0.0
        for it in range(self.cap_per_phase):
            self.iterations += 1
            if it % self.REFACTOR_EVERY == self.REFACTOR_EVERY - 1:
                self._refactor()
            y = self.Binv.T @ cost[self.basic]
            rc = cost - self.A.T @ y
            score = np.zeros(self.N)
            at_lb = (self.status == _AT_LB) & movable
            at_ub = (self.status == _AT_UB) & movable
            free = self.status == _FREE
            score[at_lb] = np.minimum(rc[at_lb], 0.0)
            score[at_ub] = -np.maximum(rc[at_ub], 0.0)
            score[free] = -np.abs(rc[free])
            eligible = score < -1e-8
            if not np.any(eligible):
                return OPTIMAL
            if bland:
                q = int(np.nonzero(eligible)[0][0])
            else:
                q = int(np.argmin(score))
            direction = 1.0 if (self.status[q] == _AT_LB or
                                (self.status[q] == _FREE and rc[q] < 0.0)) else -1.0
            w = self.Binv @ self.A[:, q]
            # basicvar change per unit step is -direction*w
            rate = -direction * w
            lbb = self.lb[self.basic]
            ubb = self.ub[self.basic]
            limits = np.full(self.m, np.inf)
            up = rate > tol.tol_pivot
            dn = rate < -tol.tol_pivot
            limits[up] = (ubb[up] - self.xb[up]) / rate[up]
            limits[dn] = (lbb[dn] - self.xb[dn]) / rate[dn]
            limits = np.maximum(limits, 0.0)
            flip_limit = self.ub[q] - self.lb[q] if self.status[q] != _FREE else np.inf
            t_basic = limits.min() if self.m else np.inf
            step = min(t_basic, flip_limit)
            if not np.isfinite(step):
                if phase_label == "phase1":
                    raise NumericalFailure("unbounded direction in phase 1")
                return UNBOUNDED
            if flip_limit < t_basic:
                self.status[q] = _AT_UB if self.status[q] == _AT_LB else _AT_LB
                self.xb = self.xb - direction * step * w
            else:
                cands = np.nonzero(limits <= step + 1e-12)[0]
                r = int(cands[np.argmin(self.basic[cands])])
                leaving = self.basic[r]
                self.xb = self.xb - direction * step * w
                if not np.isfinite(self.lb[leaving]) and not np.isfinite(self.ub[leaving]):
                    self.status[leaving] = _FREE
                else:
                    self.status[leaving] = _AT_UB if rate[r] > 0 else _AT_LB
                if self.status[q] == _FREE:
                    entering_from = 0.0
                elif self.status[q] == _AT_LB:
                    entering_from = self.lb[q]
                else:
                    entering_from = self.ub[q]
                self.basic[r] = q
                self.status[q] = _BASIC
                self._pivot_update(r, w)
                self.xb[r] = entering_from + direction * step
            improvement = -rc[q] * direction * step
            if improvement > 1e-12 * (1.0 + abs(last_obj)):
                stall = 0
                last_obj = last_obj - improvement if np.isfinite(last_obj) else 0.0
            else:
                stall += 1
                if stall > self.stall_limit:
                    bland = True
        raise NumericalFailure(f"iteration cap exceeded in {phase_label}")

    def _dual(self) -> str:
        tol = self.tol
        cost = self.cost
        self._recompute_xb()
        movable = self.ub - self.lb > 0.0
        bland = False
        stall = 0
        for it in range(self.cap_per_phase):
            self.iterations += 1
            if it % self.REFACTOR_EVERY == self.REFACTOR_EVERY - 1:
                self._refactor()
            lbb = self.lb[self.basic]
            ubb = self.ub[self.basic]
            viol_lo = lbb - self.xb
            viol_hi = self.xb - ubb
            viol = np.maximum(viol_lo, viol_hi)
            worst = viol.max(initial=-np.inf)
            if worst <= tol.tol_feas:
                return OPTIMAL
            if bland:
                r = int(np.nonzero(viol > tol.tol_feas)[0][0])
            else:
                r = int(np.argmax(viol))
            below = viol_lo[r] >= viol_hi[r]
            alpha = self.Binv[r] @ self.A
            y = self.Binv.T @ cost[self.basic]
            rc = cost - self.A.T @ y
            # entering must push the leaving variable back toward its bound
            sign = 1.0 if below else -1.0
            cand = (((self.status == _AT_LB) & movable & (sign * alpha < -tol.tol_pivot))
                    | ((self.status == _AT_UB) & movable & (sign * alpha > tol.tol_pivot))
                    | ((self.status == _FREE) & (np.abs(alpha) > tol.tol_pivot)))
            if not np.any(cand):
                return INFEASIBLE
            ratios = np.full(self.N, np.inf)
            ratios[cand] = np.abs(rc[cand]) / np.abs(alpha[cand])
            if bland:
                best = ratios.min()
                q = int(np.nonzero(cand & (ratios <= best + 1e-12))[0][0])
            else:
                q = int(np.argmin(ratios))
            w = self.Binv @ self.A[:, q]
            leaving = self.basic[r]
            self.status[leaving] = _AT_LB if below else _AT_UB
            self.basic[r] = q
            self.status[q] = _BASIC
            self._pivot_update(r, w)
            self._recompute_xb()
            stall += 1
            if stall > self.stall_limit:
                bland = True
        raise NumericalFailure("iteration cap exceeded in dual simplex")

    # -- phases ----------------------------------------------------------

    def _append_artificials(self, specs: list):
        k = len(specs)
        cols = np.zeros((self.m, k))
        for idx, (pos, sign) in enumerate(specs):
            cols[pos, idx] = sign
        self.A = np.hstack([self.A, cols])
        self.lb = np.concatenate([self.lb, np.zeros(k)])
        self.ub = np.concatenate([self.ub, np.full(k, np.inf)])
        self.cost = np.concatenate([self.cost, np.zeros(k)])
        self.status = np.concatenate([self.status, np.full(k, _AT_LB, dtype=np.int8)])
        self.N += k
        self.art_spec.extend(specs)

    def ensure_feasible_basis(self) -> str:
        """Phase 1: clamp out-of-bound basic slacks, add artificials carrying
        the residual, and minimize their sum."""
        tol = self.tol
        self._recompute_xb()
        bad = [pos for pos in range(self.m)
               if self.xb[pos] < self.lb[self.basic[pos]] - tol.tol_feas
               or self.xb[pos] > self.ub[self.basic[pos]] + tol.tol_feas]
        if not bad:
            return OPTIMAL
        specs = []
        first_art = self.N
        for pos in bad:
            j = self.basic[pos]
            clamped = float(np.clip(self.xb[pos], self.lb[j], self.ub[j]))
            sign = 1.0 if self.xb[pos] > clamped else -1.0
            specs.append((pos, sign))
            self.status[j] = _AT_LB if clamped == self.lb[j] else _AT_UB
        self._append_artificials(specs)
        for idx, pos in enumerate(bad):
            self.basic[pos] = first_art + idx
            self.status[first_art + idx] = _BASIC
        phase1_cost = np.zeros(self.N)
        phase1_cost[first_art:] = 1.0
        self._refactor()
        status = self._primal(phase1_cost, "phase1")
        if status != OPTIMAL:
            raise NumericalFailure("phase 1 did not terminate at an optimum")
        infeas = float(phase1_cost @ self.full_x())
        if infeas > tol.tol_feas:
            return INFEASIBLE
        # freeze artificials at zero, drive basic ones out where possible
        self.lb[first_art:] = 0.0
        self.ub[first_art:] = 0.0
        self.status[(np.arange(self.N) >= first_art) & (self.status != _BASIC)] = _AT_LB
        movable = (self.ub - self.lb > 0.0)
        for pos in range(self.m):
            j = self.basic[pos]
            if j >= first_art:
                row = self.Binv[pos] @ self.A
                elig = np.nonzero((np.abs(row) > 1e-9) & movable
                                  & (self.status != _BASIC)
                                  & (np.arange(self.N) < first_art))[0]
                if elig.size:
                    q = int(elig[0])
                    w = self.Binv @ self.A[:, q]
                    self.status[j] = _AT_LB
                    self.basic[pos] = q
                    self.status[q] = _BASIC
                    self._pivot_update(pos, w)
        self._recompute_xb()
        return OPTIMAL

    def optimize(self, bland: bool = False) -> str:
        status = self.ensure_feasible_basis()
        if status == INFEASIBLE:
            return INFEASIBLE
        return self._primal(self.cost, "phase2", bland=bland)

    # -- warm start ------------------------------------------------------

    def adopt(self, basis: Basis):
        """Install a basis snapshot from a previous solve of the same system."""
        if basis.art_spec:
            self._append_artificials(list(basis.art_spec))
            self.lb[self.N - len(basis.art_spec):] = 0.0
            self.ub[self.N - len(basis.art_spec):] = 0.0
        if basis.status.shape[0] != self.N:
            raise NumericalFailure("warm basis does not match the model shape")
        self.basic = basis.basic.copy()
        self.status = basis.status.copy()
        self._refactor()

    def reoptimize(self) -> str:
        """Dual-simplex reoptimization after bound changes, then a primal
        cleanup pass (a no-op when the basis is already optimal)."""
        status = self._dual()
        if status != OPTIMAL:
            return status
        return self._primal(self.cost, "phase2")

    # -- extraction ------------------------------------------------------

    def extract(self, model: LpModel) -> LpSolution:
        self._refactor()
        x_full = self.full_x()
        x = x_full[: self.n].copy()
        y = self.Binv.T @ self.cost[self.basic]
        rc = self.cost[: self.n] - (model.A.T @ y if self.m else 0.0)
        obj = float(model.objective @ x)
        dual_obj = float(self.b @ y)
        for j in range(self.n):
            if self.status[j] == _AT_LB and np.isfinite(self.lb[j]):
                dual_obj += rc[j] * self.lb[j]
            elif self.status[j] == _AT_UB and np.isfinite(self.ub[j]):
                dual_obj += rc[j] * self.ub[j]
        snap = Basis(basic=self.basic.copy(), status=self.status.copy(),
                     art_spec=tuple(self.art_spec))
        return LpSolution(status=OPTIMAL, x=x, objective=obj, duals=y,
                          reduced_costs=np.asarray(rc, dtype=float),
                          dual_objective=dual_obj, basis=snap,
                          iterations=self.iterations)


def solve_lp(model: LpModel, tol: Tolerances | None = None, *,
             lower: np.ndarray | None = None, upper: np.ndarray | None = None,
             warm: Basis | None = None) -> LpSolution:
    """Solve a linear program.

    `lower`/`upper` override the model's variable bounds without mutating it
    (used by branch and bound). A `warm` basis from a previous solve of the
    same model (possibly under different bounds) triggers a dual-simplex
    reoptimization; on numerical trouble the solve falls back to a fresh
    two-phase run.
    """
    tol = tol or DEFAULT_TOL
    if warm is not None:
        try:
            eng = _Simplex(model, tol, lower, upper)
            eng.adopt(warm)
            status = eng.reoptimize()
            if status == OPTIMAL:
                return eng.extract(model)
            if status == INFEASIBLE:
                return LpSolution(status=INFEASIBLE, iterations=eng.iterations)
            if status == UNBOUNDED:
                return LpSolution(status=UNBOUNDED, iterations=eng.iterations)
        except NumericalFailure:
            pass
    eng = _Simplex(model, tol, lower, upper)
    try:
        status = eng.optimize()
    except NumericalFailure:
        eng = _Simplex(model, tol, lower, upper)
        status = eng.optimize(bland=True)
    if status == INFEASIBLE:
        return LpSolution(status=INFEASIBLE, iterations=eng.iterations)
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED, iterations=eng.iterations)
    return eng.extract(model)


def row_max(model: LpModel, row_index: int, tol: Tolerances | None = None) -> float:
    """Maximum activity of one constraint row over the feasible region.

    Feeds the per-row big-M computation. Raises LpError when the region is
    infeasible or the activity is unbounded above.
    """
    if not 0 <= row_index < model.n_rows:
        raise IndexError(f"row index {row_index} out of range")
    flipped = LpModel(objective=-model.A[row_index], A=model.A, senses=model.senses,
                      rhs=model.rhs, lower=model.lower, upper=model.upper)
    sol = solve_lp(flipped, tol)
    if sol.status == INFEASIBLE:
        raise LpError("region is infeasible")
    if sol.status == UNBOUNDED:
        raise LpError(f"row {row_index} activity is unbounded above")
    return float(model.A[row_index] @ sol.x)
