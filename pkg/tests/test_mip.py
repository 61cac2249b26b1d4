import itertools
import re

import numpy as np
import pytest

from invclust.lp import EQ, GE, LE, OPTIMAL, INFEASIBLE, LpModel, solve_lp
from invclust.mip import (
    BigMEntry, BnbConfig, MipModel, MipSolution, WarmStartInfeasible,
    check_point, export_lp_file, solve_mip, validate_bigM,
)


def exhaustive_fixing_optimum(model: MipModel):
    """Oracle: enumerate all 2^|binaries| fixings, solve each LP, take the min."""
    binaries = sorted(model.binaries)
    best = np.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        lb = model.base.lower.copy()
        ub = model.base.upper.copy()
        for j, v in zip(binaries, bits):
            lb[j] = ub[j] = v
        sol = solve_lp(model.base, lower=lb, upper=ub)
        if sol.status == OPTIMAL:
            best = min(best, sol.objective)
    return best


def random_mip(rng, n_bin, n_cont=2, m=6):
    n = n_bin + n_cont
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, size=n)
    b = A @ x0 - rng.uniform(0.0, 1.0, size=m)
    lower = np.concatenate([np.zeros(n_bin), np.full(n_cont, -3.0)])
    upper = np.concatenate([np.ones(n_bin), np.full(n_cont, 3.0)])
    base = LpModel(objective=rng.normal(size=n), A=A, senses=(GE,) * m, rhs=b,
                   lower=lower, upper=upper)
    return MipModel(base=base, binaries=frozenset(range(n_bin)))


def test_single_binary():
    base = LpModel(objective=[-1.0], A=np.zeros((0, 1)), senses=(), rhs=[],
                   lower=[0.0], upper=[1.0])
    sol = solve_mip(MipModel(base=base, binaries=frozenset({0})))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-1.0, abs=1e-9)
    assert sol.x[0] == pytest.approx(1.0, abs=1e-9)


def test_assignment_toy():
    base = LpModel(objective=[1.0, 2.0], A=[[1.0, 1.0]], senses=(GE,), rhs=[1.0],
                   lower=[0.0, 0.0], upper=[1.0, 1.0])
    sol = solve_mip(MipModel(base=base, binaries=frozenset({0, 1})))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(sol.x, [1.0, 0.0], atol=1e-9)


def test_matches_exhaustive_fixing_on_random_mips():
    rng = np.random.default_rng(7)
    for trial in range(25):
        model = random_mip(rng, n_bin=int(rng.integers(2, 8)))
        sol = solve_mip(model)
        oracle = exhaustive_fixing_optimum(model)
        if sol.status == "infeasible":
            assert not np.isfinite(oracle)
        else:
            assert sol.status == "optimal"
            assert sol.objective == pytest.approx(oracle, abs=1e-6)
            assert sol.bound <= sol.objective + 1e-6
            assert all(abs(sol.x[j] - round(sol.x[j])) <= 1e-6 for j in model.binaries)


def test_monotone_incumbent_trace():
    rng = np.random.default_rng(21)
    model = random_mip(rng, n_bin=7)
    sol = solve_mip(model)
    trace = sol.incumbent_trace
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_warm_start_accepted_and_dominated():
    base = LpModel(objective=[1.0, 2.0], A=[[1.0, 1.0]], senses=(GE,), rhs=[1.0],
                   lower=[0.0, 0.0], upper=[1.0, 1.0])
    model = MipModel(base=base, binaries=frozenset({0, 1}))
    warm = np.array([1.0, 1.0])  # feasible, objective 3
    sol = solve_mip(model, warm_start=warm)
    assert sol.status == "optimal"
    assert sol.objective <= 3.0 + 1e-12
    assert sol.incumbent_trace[0] == pytest.approx(3.0)


def test_warm_start_rejected_with_constraint():
    base = LpModel(objective=[1.0, 2.0], A=[[1.0, 1.0]], senses=(GE,), rhs=[1.0],
                   lower=[0.0, 0.0], upper=[1.0, 1.0],
                   row_names=("cover",))
    model = MipModel(base=base, binaries=frozenset({0, 1}))
    with pytest.raises(WarmStartInfeasible) as err:
        solve_mip(model, warm_start=np.array([0.0, 0.0]))
    assert err.value.name == "cover"
    assert err.value.kind == "row"


def test_gub_row_detected_and_solved():
    # pick exactly one of three modes, plus a continuous consumption variable
    base = LpModel(
        objective=[3.0, 1.0, 2.0, 1.0],
        A=[[1.0, 1.0, 1.0, 0.0], [0.0, -2.0, 0.0, 1.0]],
        senses=(EQ, GE), rhs=[1.0, 0.0],
        lower=[0.0, 0.0, 0.0, 0.0], upper=[1.0, 1.0, 1.0, 5.0])
    model = MipModel(base=base, binaries=frozenset({0, 1, 2}))
    sol = solve_mip(model)
    assert sol.status == "optimal"
    # mode 1 costs 1 + consumption 2*1 = 3 total, mode 2 costs 2, mode 0 costs 3
    assert sol.objective == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(sol.x[:3], [0.0, 0.0, 1.0], atol=1e-9)


def test_binary_bounds_validated():
    base = LpModel(objective=[1.0], A=np.zeros((0, 1)), senses=(), rhs=[],
                   lower=[0.0], upper=[2.0])
    with pytest.raises(ValueError):
        MipModel(base=base, binaries=frozenset({0}))


# -- LP file export --------------------------------------------------------


def parse_lp_file(text: str):
    """Minimal reader for the exported LP format, for round-trip testing."""
    sections = {"minimize": [], "subject to": [], "bounds": [], "binaries": []}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "binaries", "end"):
            current = None if low == "end" else low
            continue
        sections[current].append(line)

    term_re = re.compile(
        r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)\s+([A-Za-z]\w*)")

    def parse_terms(expr, var_index):
        coeffs = np.zeros(len(var_index))
        for sign, mag, name in term_re.findall(expr):
            coeffs[var_index[name]] += (-1 if sign == "-" else 1) * float(mag)
        return coeffs

    var_index = {}
    for line in sections["bounds"]:
        tokens = line.split()
        name = tokens[2] if "<=" in line else tokens[0]
        var_index.setdefault(name, len(var_index))
    nvars = len(var_index)
    obj_expr = sections["minimize"][0].split(":", 1)[1]
    objective = parse_terms(obj_expr, var_index)
    A, senses, rhs = [], [], []
    for line in sections["subject to"]:
        body = line.split(":", 1)[1]
        for token, sense in ((">=", GE), ("<=", LE), ("=", EQ)):
            if token in body:
                lhs, right = body.split(token, 1)
                A.append(parse_terms(lhs, var_index))
                senses.append(sense)
                rhs.append(float(right))
                break
    lower = np.full(nvars, -np.inf)
    upper = np.full(nvars, np.inf)
    for line in sections["bounds"]:
        if line.endswith(" free"):
            continue
        left, _, rest = line.partition("<=")
        name, _, right = rest.partition("<=")
        j = var_index[name.strip()]
        lower[j] = -np.inf if "infinity" in left else float(left)
        upper[j] = np.inf if "infinity" in right else float(right)
    binaries = set()
    for line in sections["binaries"]:
        for name in line.split():
            binaries.add(var_index[name])
    base = LpModel(objective=objective, A=np.array(A).reshape(len(senses), nvars),
                   senses=tuple(senses), rhs=np.array(rhs), lower=lower, upper=upper)
    return MipModel(base=base, binaries=frozenset(binaries))


def test_export_minimal_model_sections():
    base = LpModel(objective=[-1.0], A=np.zeros((0, 1)), senses=(), rhs=[],
                   lower=[0.0], upper=[1.0])
    text = export_lp_file(MipModel(base=base, binaries=frozenset({0})))
    assert "Minimize" in text and "obj:" in text
    lines = text.splitlines()
    bounds_at = lines.index("Bounds")
    binaries_at = lines.index("Binaries")
    assert binaries_at - bounds_at == 2  # exactly one bounds line
    assert lines[binaries_at + 1].split() == ["x_0"]


def test_export_rejects_zero_row():
    base = LpModel(objective=[1.0, 1.0], A=[[0.0, 0.0]], senses=(LE,), rhs=[1.0])
    with pytest.raises(ValueError):
        export_lp_file(MipModel(base=base, binaries=frozenset()))


def test_export_roundtrip_random():
    rng = np.random.default_rng(3)
    model = random_mip(rng, n_bin=4, n_cont=2, m=5)
    text = export_lp_file(model)
    back = parse_lp_file(text)
    a = solve_mip(model)
    b = solve_mip(back)
    assert a.status == b.status == "optimal"
    assert a.objective == pytest.approx(b.objective, abs=1e-8)


# -- big-M validation ------------------------------------------------------


def test_validate_bigM_warns_at_cap():
    M2 = 10.0
    # lam <= M2 * v ; with v = 1 and lam at the cap the warning must fire
    base = LpModel(objective=[-1.0, 0.0], A=[[1.0, -M2]], senses=(LE,), rhs=[0.0],
                   lower=[0.0, 0.0], upper=[np.inf, 1.0],
                   row_names=("lam_cap",), col_names=("lam", "v"))
    model = MipModel(base=base, binaries=frozenset({1}))
    sol = MipSolution(status="optimal", x=np.array([M2, 1.0]), objective=-M2,
                      bound=-M2)
    registry = [BigMEntry(row=0, name="M2", value=M2, gate_col=1, relax_value=1)]
    warnings = validate_bigM(model, sol, registry)
    assert len(warnings) == 1 and "M2" in warnings[0]


def test_validate_bigM_quiet_away_from_cap():
    M2 = 10.0
    base = LpModel(objective=[0.0, 0.0], A=[[1.0, -M2]], senses=(LE,), rhs=[0.0],
                   lower=[0.0, 0.0], upper=[np.inf, 1.0])
    model = MipModel(base=base, binaries=frozenset({1}))
    sol = MipSolution(status="optimal", x=np.array([0.5 * M2, 1.0]), objective=0.0,
                      bound=0.0)
    registry = [BigMEntry(row=0, name="M2", value=M2, gate_col=1, relax_value=1)]
    assert validate_bigM(model, sol, registry) == []
