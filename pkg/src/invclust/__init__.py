"""Clustering of observed decisions by inferred linear-program objectives.

Each observation is assumed to come from a decision-maker who approximately
solves min{c'x | A x >= b}. The package groups observations into clusters
sharing one inferred cost vector per cluster so that the worst-case distance
between any observation and the optimal-solution set of its decision-maker's
program is minimized, and ships exact brute-force oracles, two-stage
heuristics, MIP bound formulations, generators, estimators and a CLI.
"""

from invclust.lp import (
    GE, LE, EQ, OPTIMAL, INFEASIBLE, UNBOUNDED,
    LpModel, LpSolution, Tolerances, LpError, NumericalFailure,
    solve_lp, row_max,
)

__version__ = "0.1.0"

__all__ = [
    "GE", "LE", "EQ", "OPTIMAL", "INFEASIBLE", "UNBOUNDED",
    "LpModel", "LpSolution", "Tolerances", "LpError", "NumericalFailure",
    "solve_lp", "row_max",
    "__version__",
]
