import json
import math

import numpy as np
import pytest

import projsd


def test_geometry_round_trip():
    g = projsd.SpaceGeometry.preset("l3", 4)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=4)
        back = projsd.inverse_duality_map(g, projsd.duality_map(g, x))
        assert np.allclose(back, x, atol=1e-12)
    h = projsd.SpaceGeometry.hilbert(2)
    assert projsd.norm(h, np.array([3.0, 4.0])) == pytest.approx(5.0)
    assert projsd.bregman_distance(h, np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(12.5)


def test_projection_and_errors():
    g = projsd.SpaceGeometry.hilbert(3)
    box = projsd.ConvexSet.box(np.full(3, -1.0), np.full(3, 1.0))
    y = projsd.bregman_project(g, box, np.array([2.0, 0.5, -3.0]))
    assert np.allclose(y, [1.0, 0.5, -1.0])
    assert projsd.contains(g, box, y)
    with pytest.raises(projsd.Error):
        projsd.norm(g, np.zeros(2))


def test_single_run_matches_classical_descent():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    a = q @ np.diag(np.linspace(1, 3, 5)) @ q.T
    ydelta = rng.normal(size=5)
    g = projsd.SpaceGeometry.hilbert(5)
    rep = projsd.run(g, projsd.ConvexSet.whole_space(), projsd.LinearModel(a), ydelta,
                     np.zeros(5), eta=0.0, eta_hat=1e-300, lhat=3.0, lip=0.0,
                     stability=1 / math.sqrt(2), max_iterations=10)
    assert rep["stop_reason"] == "MaxIterations"
    x = np.zeros(5)
    for xk in rep["iterates"]:
        assert np.allclose(xk, x, rtol=0, atol=1e-12)
        res = a @ x - ydelta
        grad = a.T @ res
        x = x - (res @ res) / (grad @ grad) * grad


def test_quadratic_run_is_monotone():
    a = np.diag([2.0, 1.5, 1.0])
    z = np.array([0.5, -0.3, 0.2])
    model = projsd.QuadraticModel(a, 0.01, np.zeros(3), 5.0)
    g = projsd.SpaceGeometry.hilbert(3)
    ball = projsd.ConvexSet.ball(np.zeros(3), 5.0)
    lhat, lip = model.lipschitz(g)
    c = model.stability_constant(g, ball)
    rep = projsd.run(g, ball, model, model.evaluate(z), np.ones(3), eta=0.0, eta_hat=1e-9,
                     lhat=lhat, lip=lip, stability=c, reference=z)
    assert rep["stop_reason"] == "DiscrepancyMet"
    d = rep["bregman_to_ref"]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert rep["monotonicity_violations"] == 0


def test_example_schedule():
    g = projsd.SpaceGeometry.hilbert(1)
    lam = 0.1
    tau = 0.5 * projsd.example_tau_bound(g, lam)
    s = projsd.example_schedule(lam, tau, g, 1e-3)
    assert s["valid"]
    assert s["levels"][0]["eta"] == lam / 2
    assert s["final_level"] == len(s["levels"]) - 1


def test_run_config(tmp_path):
    cfg = {
        "mode": "single",
        "space": {"dim": 2, "r": 2, "p": 2},
        "model": {"kind": "linear", "matrix": [[1, 0], [0, 2]]},
        "data": {"ydelta": [1, 1]},
        "solver": {"eta": 0, "etaHat": 1e-8},
    }
    trace = tmp_path / "t.csv"
    summary = tmp_path / "s.json"
    code = projsd.run_config(json.dumps(cfg), trace=str(trace), summary=str(summary))
    assert code == 0
    assert trace.read_text().startswith("level,k,r_k,")
    assert json.loads(summary.read_text())["stopReason"] == "DiscrepancyMet"
    with pytest.raises(projsd.Error):
        projsd.run_config(json.dumps({"mode": "single"}))
