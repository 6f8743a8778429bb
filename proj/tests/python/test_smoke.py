
import numpy as np
import pytest

import avgq

def test_cycle2_oracle():
    sol = avgq.solve_average(avgq.generate("cycle2"))
    assert sol["gain"] == pytest.approx(0.5, abs=1e-9)
    assert sol["span"] == pytest.approx(0.5, abs=1e-9)

def test_arrays_round_trip():
    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = P[1, 0, 0] = 1.0
    r = np.array([[1.0], [0.0]])
    mdp = avgq.Amdp(P, r)
    assert (mdp.S, mdp.A) == (2, 1)
    np.testing.assert_array_equal(mdp.P, P)
    np.testing.assert_array_equal(mdp.r, r)
    assert avgq.parse(mdp.to_json()).S == 2

def test_bad_rows_raise():
    P = np.full((2, 1, 2), 0.4)
    with pytest.raises(avgq.ValidationError):
        avgq.Amdp(P, np.zeros((2, 1)))

def test_discounted_single_state():
    P = np.ones((1, 1, 1))
    out = avgq.solve_discounted(avgq.Amdp(P, np.array([[0.7]])), 0.9, tol=1e-14)
    assert out["q"][0, 0] == pytest.approx(0.7, abs=1e-12)

def test_single_run_is_deterministic():
    mdp = avgq.generate("ring:4,0.1")
    q1, rows1 = avgq.run_single(mdp, "sg2", K=8, seed=3)
    q2, rows2 = avgq.run_single(mdp, "sg2", K=8, seed=3)
    np.testing.assert_array_equal(q1, q2)
    assert rows1 == rows2
    assert rows1[0]["err_inf"] == pytest.approx(0.25, abs=1e-9)
    assert rows1[-1]["err_inf"] < rows1[0]["err_inf"]

def test_fed_m1_matches_single():
    mdp = avgq.generate("dirichlet:4,2,1.0,3")
    q, _ = avgq.run_single(mdp, "sg2", K=4, seed=9)
    fed = avgq.run_fed(mdp, "fg2", K=4, M=1, seed=9)
    np.testing.assert_array_equal(q, fed["q"])

def test_infeasible_epoch():
    with pytest.raises(avgq.InfeasibleEpoch):
        avgq.epoch_plan(avgq.generate("cycle2"), "sg1", 1, c_N=1.0)

def test_policy_evaluation():
    gains = avgq.evaluate_policy(avgq.generate("ring:4,0"), [0, 0, 0, 0])
    assert np.allclose(gains, 0.25)
    assert np.allclose(avgq.evaluate_policy(avgq.generate("ring:4,0"), [1, 1, 1, 1]), 0.0)

def test_verify_small_battery():
    results = avgq.verify(battery_size=5)
    assert all(passed for _, passed, _ in results)
