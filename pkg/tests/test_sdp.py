import dataclasses

import numpy as np
import pytest

import sdp_battery as bat
from vlpc import sdp
from vlpc.sdp import LinearFunctional as LF


@pytest.mark.parametrize("case", bat.OPTIMAL_CASES, ids=lambda f: f.__name__)
def test_analytic_optimum(case):
    prob, want = case()
    sol = sdp.solve(prob)
    assert sol.status == sdp.OPTIMAL
    assert sol.objective == pytest.approx(want, abs=1e-6)
    rep = sdp.verify_solution(prob, sol)
    assert rep.ok, str(rep)


def test_fixed_entry_solution_shape():
    prob, _ = bat.trace_fixed_entry()
    x = sdp.solve(prob).blocks[0]
    want = np.zeros((3, 3))
    want[0, 0] = 5.0
    np.testing.assert_allclose(x, want, atol=1e-6)


def test_infeasible_certified():
    prob = bat.infeasible_trace()
    sol = sdp.solve(prob)
    assert sol.status == sdp.INFEASIBLE
    assert sdp.verify_solution(prob, sol).ok


def test_verify_flags_corrupted_primal():
    prob, _ = bat.x_ge_one()
    sol = sdp.solve(prob)
    bad = [b.copy() for b in sol.blocks]
    bad[0][0, 0] += 1.0
    rep = sdp.verify_solution(prob, dataclasses.replace(sol, blocks=bad))
    assert "equality" in rep.failures()


def test_verify_gap_catches_suboptimal():
    prob, _ = bat.x_ge_one()
    sol = sdp.solve(prob)
    x2 = [np.array([[2.0, 1.0], [1.0, 2.0]])]
    rep = sdp.verify_solution(prob, dataclasses.replace(sol, blocks=x2))
    assert rep.checks["equality"].passed
    assert rep.failures() == ["gap"]
    assert rep.checks["gap"].value == pytest.approx(1.0, abs=1e-6)


def test_unbounded():
    # min -x11 with only X psd
    prob = sdp.SdpProblem([2])
    prob.objective = LF({0: -sdp.entry(2, 0, 0)})
    prob.add_eq(LF({0: sdp.entry(2, 1, 1)}), 1.0)
    assert sdp.solve(prob).status == sdp.UNBOUNDED


def test_validate_rejects_bad_shapes():
    prob = sdp.SdpProblem([2])
    prob.objective = LF({0: np.eye(3)})
    with pytest.raises(ValueError, match="shape"):
        prob.validate()


def test_svec_round_trip():
    a = np.random.default_rng(0).standard_normal((4, 4))
    a = a + a.T
    np.testing.assert_allclose(sdp.smat(sdp.svec(a), 4), a)
    assert sdp.svec(a) @ sdp.svec(a) == pytest.approx(np.sum(a * a))


def test_dump_round_trip():
    prob, want = bat.schur_norm()
    again = sdp.loads(sdp.dumps(prob))
    assert sdp.solve(again).objective == pytest.approx(want, abs=1e-6)


@pytest.mark.parametrize("case", bat.OPTIMAL_CASES, ids=lambda f: f.__name__)
def test_matches_external_solver(case):
    pytest.importorskip("cvxpy")
    from vlpc.sdp.external import solve_external

    prob, _ = case()
    ours, ref = sdp.solve(prob), solve_external(prob)
    assert ref.status == sdp.OPTIMAL
    assert ours.objective == pytest.approx(ref.objective, rel=1e-4, abs=1e-5)
