"""LP/MILP layer: both backends on problems with known optima."""

import math

import pytest

from sortrep import mathprog
from sortrep.mathprog import (
    BINARY,
    BruteForceBackend,
    HighsBackend,
    Program,
    solve,
)

BACKENDS = [HighsBackend(), BruteForceBackend()]


def lp_example():
    # max x + 2y s.t. x + y <= 4, y <= 3; optimum (1, 3), objective 7
    prog = Program()
    prog.add_variable("x")
    prog.add_variable("y", upper=3.0)
    prog.add_constraint({"x": 1.0, "y": 1.0}, "<=", 4.0)
    prog.set_objective("max", {"x": 1.0, "y": 2.0})
    return prog


def knapsack_example():
    # values 6, 5, 4; weights 5, 4, 3; capacity 8 -> pick items 1 and 3
    prog = Program()
    for i, _ in enumerate((6, 5, 4), start=1):
        prog.add_variable(f"z{i}", kind=BINARY)
    prog.add_constraint({"z1": 5.0, "z2": 4.0, "z3": 3.0}, "<=", 8.0)
    prog.set_objective("max", {"z1": 6.0, "z2": 5.0, "z3": 4.0})
    return prog


@pytest.mark.parametrize("backend", BACKENDS, ids=["highs", "bruteforce"])
def test_lp_optimum(backend):
    sol = solve(lp_example(), backend)
    assert sol.optimal
    assert sol.objective == pytest.approx(7.0)
    assert sol["x"] == pytest.approx(1.0)
    assert sol["y"] == pytest.approx(3.0)


@pytest.mark.parametrize("backend", BACKENDS, ids=["highs", "bruteforce"])
def test_milp_optimum(backend):
    sol = solve(knapsack_example(), backend)
    assert sol.optimal
    assert sol.objective == pytest.approx(10.0)
    assert (sol["z1"], sol["z2"], sol["z3"]) == pytest.approx((1.0, 0.0, 1.0))


@pytest.mark.parametrize("backend", BACKENDS, ids=["highs", "bruteforce"])
def test_infeasible_detected(backend):
    prog = Program()
    prog.add_variable("x", upper=1.0)
    prog.add_constraint({"x": 1.0}, ">=", 2.0)
    prog.set_objective("min", {"x": 1.0})
    assert solve(prog, backend).status == "infeasible"


def test_unbounded_detected():
    prog = Program()
    prog.add_variable("x")
    prog.set_objective("max", {"x": 1.0})
    assert solve(prog, HighsBackend()).status == "unbounded"


def test_equality_constraint():
    prog = Program()
    prog.add_variable("x")
    prog.add_variable("y")
    prog.add_constraint({"x": 1.0, "y": 1.0}, "=", 2.0)
    prog.set_objective("min", {"x": 1.0})
    sol = solve(prog)
    assert sol.optimal
    assert sol["x"] == pytest.approx(0.0)
    assert sol["y"] == pytest.approx(2.0)


def test_program_validation():
    prog = Program()
    prog.add_variable("x")
    with pytest.raises(ValueError):
        prog.add_variable("x")
    with pytest.raises(ValueError):
        prog.add_constraint({"nope": 1.0}, "<=", 1.0)
    with pytest.raises(ValueError):
        prog.add_constraint({"x": 1.0}, "<", 1.0)
    with pytest.raises(ValueError):
        prog.set_objective("maximize", {"x": 1.0})


def test_violation():
    prog = lp_example()
    assert prog.violation({"x": 1.0, "y": 3.0}) == pytest.approx(0.0)
    assert prog.violation({"x": 5.0, "y": 3.0}) == pytest.approx(4.0)
    assert prog.violation({"x": -1.0, "y": 0.0}) == pytest.approx(1.0)


def test_dumps_loads_round_trip():
    prog = knapsack_example()
    prog.add_variable("w", lower=0.5, upper=math.inf)
    prog.add_constraint({"w": 2.0, "z1": -1.0}, ">=", 0.0, name="link")
    text = prog.dumps()
    back = Program.loads(text)
    assert back.dumps() == text
    sol_a = solve(prog)
    sol_b = solve(back)
    assert sol_a.objective == pytest.approx(sol_b.objective, abs=1e-9)


def test_bruteforce_binary_limit():
    prog = Program()
    for i in range(25):
        prog.add_variable(f"z{i}", kind=BINARY)
    prog.set_objective("max", {f"z{i}": 1.0 for i in range(25)})
    with pytest.raises(mathprog.SolverError):
        solve(prog, BruteForceBackend(max_binaries=20))
