import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import entropy_plain, triangle_loops
from uppertail.constructions import clique_construction, hub_construction
from uppertail.errors import DomainError, InfeasibleError, ResourceError
from uppertail.graphs import WeightedGraph, cherry_density
from uppertail.patterns import pattern_catalog
from uppertail.solver import (
    SolverOptions,
    VariationalInstance,
    cherry_diagnostic,
    grid_oracle,
    merit_function,
    solve_phi,
    verify_feasibility,
    write_trace_csv,
)

FAST = SolverOptions(random_starts=2)


def symmetric_n3_value(p, delta):
    # for n = 3 the labeled density is 6 w12 w13 w23 / 27; by convexity the optimum is symmetric
    w = (27 * (1 + delta) * p ** 3 / 6) ** (1 / 3)
    return 3 * entropy_plain(w, p), w


def test_instance_validation():
    with pytest.raises(DomainError):
        VariationalInstance(1, 0.5, 1.0)
    with pytest.raises(DomainError):
        VariationalInstance(5, 1.0, 1.0)
    with pytest.raises(DomainError):
        VariationalInstance(5, 0.5, -0.1)
    with pytest.raises(InfeasibleError):
        VariationalInstance(2, 0.5, 1.0)
    with pytest.raises(InfeasibleError):
        VariationalInstance(5, 0.5, 8.0)


def test_complete_graph_too_sparse():
    # labeled density of K_3 is 6/27 < threshold 0.2 * 1.2
    inst = VariationalInstance(3, 0.6, 0.1)
    with pytest.raises(InfeasibleError):
        solve_phi(inst, FAST)


def test_n3_closed_form():
    inst = VariationalInstance(3, 0.5, 0.2)
    value, w = symmetric_n3_value(0.5, 0.2)
    assert w == pytest.approx(0.675 ** (1 / 3), rel=1e-14)
    r = solve_phi(inst, FAST)
    assert r.objective == pytest.approx(value, rel=1e-6)
    assert r.objective >= value * (1 - 1e-9)
    assert np.allclose(r.minimizer.weights[np.triu_indices(3, 1)], w, atol=1e-4)


@pytest.mark.parametrize("n,p,delta,h", [(3, 0.5, 0.2, 0.01), (3, 0.3, 1.0, 0.01), (4, 0.5, 0.5, 0.05),
                                         (4, 0.4, 1.0, 0.05)])
def test_grid_oracle_sandwich(n, p, delta, h):
    inst = VariationalInstance(n, p, delta)
    g = grid_oracle(inst, h)
    r = solve_phi(inst, FAST)
    assert g.value - g.error_band - 1e-9 <= r.objective <= g.value + 1e-9
    # the oracle's own argmin is feasible
    G = WeightedGraph.from_upper(n, g.argmin)
    assert verify_feasibility(G, inst)[0]


def test_grid_oracle_limits():
    with pytest.raises(DomainError):
        grid_oracle(VariationalInstance(5, 0.5, 0.5), 0.1)
    with pytest.raises(DomainError):
        grid_oracle(VariationalInstance(3, 0.5, 0.5), 0.5)
    with pytest.raises(ResourceError):
        grid_oracle(VariationalInstance(4, 0.1, 0.5), 0.01)


def test_deterministic():
    inst = VariationalInstance(12, 0.3, 1.0)
    a = solve_phi(inst, FAST)
    b = solve_phi(inst, FAST)
    assert np.array_equal(a.minimizer.weights, b.minimizer.weights)
    assert a.objective == b.objective and a.best_start == b.best_start


def test_report_fields_and_feasibility():
    inst = VariationalInstance(20, 0.25, 1.0)
    r = solve_phi(inst)
    ok, viol = verify_feasibility(r.minimizer, inst)
    assert ok and viol <= 0 and r.violation <= 0
    assert r.constraint_value == pytest.approx(triangle_loops(r.minimizer.weights), rel=1e-12)
    assert r.starts == 2 + 1 + 8
    assert r.normalized_rate == pytest.approx(r.objective / inst.scale, rel=1e-9)
    assert cherry_diagnostic(r, inst) == pytest.approx(cherry_density(r.minimizer) / 0.25 ** 2)
    # never worse than a feasible construction
    assert r.objective <= clique_construction(20, 0.25, 1.0).objective + 1e-9
    assert r.objective <= hub_construction(20, 0.25, 1.0).objective + 1e-9
    d = r.to_dict(include_graph=False)
    assert "minimizer" not in d and d["starts"] == r.starts


def test_trace_csv():
    r = solve_phi(VariationalInstance(8, 0.4, 0.5), FAST)
    buf = io.StringIO()
    write_trace_csv(r, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "stage,iteration,objective,violation,mu"
    assert len(lines) == len(r.trace) + 1


def test_verify_feasibility_examples():
    inst = VariationalInstance(4, 0.5, 1.0)
    ok, viol = verify_feasibility(WeightedGraph(np.ones((4, 4)) - np.eye(4)), inst)
    assert ok and viol == pytest.approx(0.25 - 24 / 64)
    ok, viol = verify_feasibility(WeightedGraph(0.5 * (np.ones((4, 4)) - np.eye(4))), inst)
    assert not ok and viol == pytest.approx(0.25 - 3 / 64)
    with pytest.raises(DomainError):
        verify_feasibility(WeightedGraph(np.zeros((3, 3))), inst)


@given(seed=st.integers(0, 10 ** 6), mu=st.sampled_from([10.0, 1e3, 1e5]))
@settings(max_examples=30, deadline=None)
def test_merit_gradient_finite_difference(seed, mu):
    inst = VariationalInstance(6, 0.3, 2.0)
    f, grad = merit_function(inst, mu)
    x = np.random.default_rng(seed).uniform(0.35, 0.95, 15)
    g = grad(x)
    h = 1e-6
    fd = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(15)])
    assert np.allclose(fd, g, rtol=1e-5, atol=1e-6 * max(1.0, np.abs(g).max()))


def test_other_patterns():
    inst = VariationalInstance(6, 0.5, 0.5, pattern_catalog("cycle", 4))
    r = solve_phi(inst, FAST)
    assert verify_feasibility(r.minimizer, inst)[0]
    inj = VariationalInstance(6, 0.5, 0.5, injective=True)
    assert inj.density(WeightedGraph(0.5 * (np.ones((6, 6)) - np.eye(6)))) == pytest.approx(0.125, rel=1e-12)
    r = solve_phi(inj, FAST)
    assert verify_feasibility(r.minimizer, inj)[0]


def test_uniform_candidate_is_matched():
    # the near-uniform graph at q = p (1+delta)^{1/3}/(1-1/n)^{...} is feasible; the solver must not do worse
    n, p, delta = 30, 0.3, 1.0
    inst = VariationalInstance(n, p, delta)
    r = solve_phi(inst, FAST)
    q = ((1 + delta) * p ** 3 * n ** 2 / ((n - 1) * (n - 2))) ** (1 / 3)
    uniform = math.comb(n, 2) * entropy_plain(q, p)
    assert r.objective <= uniform * (1 + 1e-9)


def test_grid_levels_stay_in_unit_interval():
    # arange(0.7, 1, 0.05) ends at 1 + 2e-16
    g = grid_oracle(VariationalInstance(4, 0.7, 0.05), 0.05)
    assert max(g.argmin) <= 1.0
