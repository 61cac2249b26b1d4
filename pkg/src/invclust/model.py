"""Problem-domain layer: decision-makers' programs, observations, datasets.

A decision-maker's program (Dmp) is min{c'x | A x >= b} over free variables;
the rows of A are kept L1-normalized so inferred cost vectors from different
rows live on a common scale. Observations are noisy decisions and need not
be feasible for their own program. All types are immutable after
construction and safe to share across concurrent solves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from invclust.lp import (
    GE, OPTIMAL, INFEASIBLE, UNBOUNDED,
    LpError, LpModel, Tolerances, DEFAULT_TOL, solve_lp,
)
from invclust.validation import L1, LINF, as_float_vector, check_norm

PROVENANCES = ("sc-ub", "sc-lb", "ci", "ic")


class ZeroRow(ValueError):
    """A constraint row has a zero coefficient vector and cannot be normalized."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} is all-zero")


class InfeasibleDmp(LpError):
    """The feasible region of a decision-maker's program is empty."""


class UnboundedRegion(LpError):
    """The feasible region is unbounded along a coordinate direction."""

    def __init__(self, coordinate: int, sign: int):
        self.coordinate = coordinate
        self.sign = sign
        arrow = "+" if sign > 0 else "-"
        super().__init__(f"region unbounded in direction {arrow}x[{coordinate}]")


class UnboundedDmp(LpError):
    """A forward solve diverged; the bounded-region assumption is violated."""


def distance(u: np.ndarray, v: np.ndarray, norm: str) -> float:
    """d(u, v) under the configured norm (sum-abs or max-abs)."""
    check_norm(norm)
    diff = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))
    return float(diff.sum()) if norm == L1 else float(diff.max())


@dataclass
class Dmp:
    """One decision-maker's feasible region A x >= b with optional row labels."""

    A: np.ndarray
    b: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float)).copy()
        b = np.asarray(self.b, dtype=float).ravel().copy()
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b row counts differ")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        A.setflags(write=False)
        b.setflags(write=False)
        self.A = A
        self.b = b
        if self.labels is not None:
            self.labels = tuple(self.labels)
            if len(self.labels) != A.shape[0]:
                raise ValueError("labels length mismatch")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(np.abs(self.A).sum(axis=1) - 1.0) <= tol))

    def lp(self, objective: np.ndarray, row_names: tuple | None = None) -> LpModel:
        """The forward program min objective'x over this region (x free)."""
        return LpModel(objective=objective, A=self.A, senses=(GE,) * self.m,
                       rhs=self.b, row_names=row_names or self.labels)


@dataclass(frozen=True)
class Observation:
    """An observed decision; may lie outside its decision-maker's region."""

    x_hat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_hat", as_float_vector(self.x_hat, "x_hat"))
        self.x_hat.setflags(write=False)


@dataclass
class Dataset:
    """K (Dmp, observation) pairs over a shared variable count."""

    dmps: list
    x_hats: np.ndarray

    def __post_init__(self):
        if len(self.dmps) == 0:
            raise ValueError("dataset must contain at least one item")
        n = self.dmps[0].n
        for idx, d in enumerate(self.dmps):
            if not isinstance(d, Dmp):
                raise TypeError(f"item {idx} is not a Dmp")
            if d.n != n:
                raise ValueError("all decision problems must share the variable count")
        X = np.atleast_2d(np.asarray(self.x_hats, dtype=float)).copy()
        if X.shape != (len(self.dmps), n):
            raise ValueError(f"x_hats must be ({len(self.dmps)}, {n}), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("observations must be finite")
        X.setflags(write=False)
        self.x_hats = X

    @property
    def K(self) -> int:
        return len(self.dmps)

    @property
    def n(self) -> int:
        return self.dmps[0].n

    def items(self):
        for dmp, x_hat in zip(self.dmps, self.x_hats):
            yield dmp, x_hat

    def subset(self, indices) -> "Dataset":
        indices = list(indices)
        return Dataset(dmps=[self.dmps[k] for k in indices],
                       x_hats=self.x_hats[indices])

    # -- JSON schema: {"n": int, "items": [{"A","b","labels","x_hat"}]} ----

    def to_json_dict(self) -> dict:
        items = []
        for dmp, x_hat in self.items():
            items.append({
                "A": dmp.A.tolist(),
                "b": dmp.b.tolist(),
                "labels": list(dmp.labels) if dmp.labels else None,
                "x_hat": x_hat.tolist(),
            })
        return {"n": self.n, "items": items}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "Dataset":
        items = payload["items"]
        dmps = [Dmp(A=item["A"], b=item["b"], labels=item.get("labels")) for item in items]
        x_hats = np.array([item["x_hat"] for item in items], dtype=float)
        ds = cls(dmps=dmps, x_hats=x_hats)
        if ds.n != payload["n"]:
            raise ValueError("declared variable count does not match items")
        return ds

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class Certificate:
    """Optimality certificate for one observation: the chosen point, the
    multipliers reconstructing the cluster's cost vector, and the rows
    selected as active."""

    x: np.ndarray
    lam: np.ndarray
    active: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))


@dataclass
class ClusterSolution:
    """A clustering with one inferred cost vector per cluster.

    `cost_vectors` are exactly unit-L1; `cost_vectors_raw` keep the solver
    values so warm starts can be reassembled without drift. `objective` is
    the max distance between observations and their certificate points under
    the producing method's norm.
    """

    assignment: np.ndarray
    cost_vectors: np.ndarray
    cost_vectors_raw: np.ndarray
    objective: float
    provenance: str
    certificates: list | None = None
    lb_variant: "ClusterSolution | None" = None

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=int)
        self.cost_vectors = np.atleast_2d(np.asarray(self.cost_vectors, dtype=float))
        self.cost_vectors_raw = np.atleast_2d(np.asarray(self.cost_vectors_raw, dtype=float))
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        L = self.cost_vectors.shape[0]
        if np.any(self.assignment < 0) or np.any(self.assignment >= L):
            raise ValueError("assignment references a cluster out of range")

    @property
    def K(self) -> int:
        return self.assignment.shape[0]

    @property
    def L(self) -> int:
        return self.cost_vectors.shape[0]

    def members(self, label: int) -> list:
        return [int(k) for k in np.nonzero(self.assignment == label)[0]]

    def to_json_dict(self) -> dict:
        payload = {
            "assignment": self.assignment.tolist(),
            "cost_vectors": self.cost_vectors.tolist(),
            "objective": self.objective,
            "provenance": self.provenance,
        }
        if self.certificates is not None:
            payload["certificates"] = [
                {"x": c.x.tolist(), "lam": c.lam.tolist(), "active": list(c.active)}
                for c in self.certificates
            ]
        return payload


@dataclass(frozen=True)
class PreflightReport:
    """Boundedness and full-dimensionality screen for one region."""

    coord_min: np.ndarray
    coord_max: np.ndarray
    interior_slack: float
    full_dimensional: bool


def normalize_rows(dmp: Dmp, tol: float = 1e-12) -> Dmp:
    """Scale every row (and its rhs) to unit L1 norm; the region is unchanged."""
    norms = np.abs(dmp.A).sum(axis=1)
    zero = np.nonzero(norms <= tol)[0]
    if zero.size:
        raise ZeroRow(int(zero[0]))
    return Dmp(A=dmp.A / norms[:, None], b=dmp.b / norms, labels=dmp.labels)


def forward_solve(dmp: Dmp, c: np.ndarray, tol: Tolerances | None = None):
    """Solve the decision-maker's program under cost vector c.

    Returns (x, z_star). Infeasibility signals a broken generator; an
    unbounded objective violates the bounded-region assumption.
    """
    sol = solve_lp(dmp.lp(np.asarray(c, dtype=float)), tol or DEFAULT_TOL)
    if sol.status == INFEASIBLE:
        raise InfeasibleDmp("forward program is infeasible")
    if sol.status == UNBOUNDED:
        raise UnboundedDmp("forward objective is unbounded below")
    return sol.x, float(sol.objective)


def preflight(dmp: Dmp, tol: Tolerances | None = None) -> PreflightReport:
    """Verify the region is nonempty and bounded; flag thin regions.

    Solves max/min of each coordinate (raising UnboundedRegion on the first
    unbounded direction) and a Chebyshev-style slack LP whose value is
    reported as a full-dimensionality proxy: slack 0 means no interior point.
    """
    tol = tol or DEFAULT_TOL
    n = dmp.n
    coord_min = np.empty(n)
    coord_max = np.empty(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        for sign, target in ((1, coord_max), (-1, coord_min)):
            sol = solve_lp(dmp.lp(-sign * e), tol)
            if sol.status == INFEASIBLE:
                raise InfeasibleDmp("feasible region is empty")
            if sol.status == UNBOUNDED:
                raise UnboundedRegion(j, sign)
            target[j] = sign * (-sol.objective)
    # max r subject to A x - r e >= b
    slack_model = LpModel(
        objective=np.concatenate([np.zeros(n), [-1.0]]),
        A=np.hstack([dmp.A, -np.ones((dmp.m, 1))]),
        senses=(GE,) * dmp.m,
        rhs=dmp.b,
        lower=np.concatenate([coord_min, [0.0]]),
        upper=np.concatenate([coord_max, [np.inf]]),
    )
    sol = solve_lp(slack_model, tol)
    if sol.status != OPTIMAL:
        raise InfeasibleDmp("interior slack LP failed")
    slack = float(-sol.objective)
    return PreflightReport(coord_min=coord_min, coord_max=coord_max,
                           interior_slack=slack,
                           full_dimensional=slack > tol.tol_feas)
