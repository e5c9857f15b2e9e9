"""Numbered acceptance criteria, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""
import json
import math
import os
import time

import numpy as np
import pytest

from absim._layout import INDEX
from absim._util import wrap_angle
from absim.actuators import rudder_servo
from absim.cli import OUTPUT_FILES, write_outputs
from absim.colav import ColavDecision, SbmpcParams, evaluate_grid, run_sbmpc
from absim.config import load_scenario
from absim.control import (ControlState, MpcParams, PidParams, mpc_cost, mpc_solve, nomoto_predict,
                           pid_step)
from absim.guidance import LOSParams, TrackState, compute_LOSRef
from absim.kernels import kern
from absim.metrics import cumulative_heading_error, cxte, nominal_distance
from absim.sim_engine import run_scenario
from absim.vessel_model import VesselState
from absim.waterway_graph import NoRoute, point_in_polygon, shortest_path

from conftest import random_param_vector, scenario_path
from oracles import (brute_force_path, dist_to_ring, kinematic_los_run, random_graph, random_star_polygon,
                     winding_inside)
from test_colav import headon


@pytest.mark.acceptance(1, "hull forces at zero drift and yaw reduce to resistance")
def test_c01_hull_origin_identity(backend, ship):
    rng = np.random.default_rng(101)
    for _ in range(1000):
        P = random_param_vector(rng, ship)
        u = rng.uniform(0.1, 6.0)
        X, Y, N = backend.hull_forces(u, 0.0, 0.0, P)
        q = 0.5 * P[INDEX["rho"]] * P[INDEX["L"]] * P[INDEX["T_d"]] * u * u
        assert abs(X / q + P[INDEX["R0_prime"]]) <= 1e-12 * abs(P[INDEX["R0_prime"]])
        assert Y == 0.0 and N == 0.0


@pytest.mark.acceptance(2, "rigid-body accelerations reproduce the applied forces")
def test_c02_back_substitution(backend, ship):
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100000):
        P = random_param_vector(rng, ship)
        F = rng.choice([-1.0, 1.0], 3) * 10.0 ** rng.uniform(2, 7, 3)
        u, v, r = rng.normal(0, [3, 0.5, 0.02])
        du, dv, dr = backend.accelerations(F[0], F[1], F[2], u, v, r, P)
        m, mx, my, Iz, Jz, xG = P[:6]
        back = np.array([(m + mx) * du - (m + my) * v * r - xG * m * r * r,
                         (m + my) * dv - (m + mx) * u * r + xG * m * dr,
                         (Iz + xG * xG * m + Jz) * dr + xG * m * (dv + u * r)])
        worst = max(worst, float(np.max(np.abs(back - F) / np.abs(F))))
    assert worst < 1e-9, worst


def _step_run(ship, dt, T=60.0):
    n = ship_rps(ship)
    s = (0.0, 0.0, 0.0, 3.0, 0.0, 0.0)
    for _ in range(int(round(T / dt))):
        s = kern.rk4_step(s, math.radians(20.0), n, dt, ship.vector)
    return np.array(s)


def ship_rps(ship):
    from absim.ship import SpeedMap
    return SpeedMap(ship, 5.0).rps(3.0)


@pytest.mark.acceptance(3, "RK4 error ratio between dt and dt/2 is near 16")
def test_c03_rk4_order(ship):
    t0 = time.perf_counter()
    dt = 2.0
    ref = _step_run(ship, dt / 64)
    e1 = np.linalg.norm(_step_run(ship, dt) - ref)
    e2 = np.linalg.norm(_step_run(ship, dt / 2) - ref)
    ratio = e1 / e2
    assert 12.0 <= ratio <= 20.0, ratio
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.acceptance(4, "port/starboard mirror symmetry of the full model")
def test_c04_mirror_symmetry(ship):
    rng = np.random.default_rng(404)
    n = ship_rps(ship)
    for _ in range(20):
        a = (0.0, 0.0, rng.uniform(-0.5, 0.5), rng.uniform(1, 4), rng.uniform(-0.3, 0.3), rng.uniform(-0.01, 0.01))
        b = (a[0], -a[1], -a[2], a[3], -a[4], -a[5])
        da = db = 0.0
        cmds = rng.uniform(-0.6, 0.6, 100)
        for c in cmds:
            da = rudder_servo(da, c, 1.0, ship.rudder)
            db = rudder_servo(db, -c, 1.0, ship.rudder)
            a = kern.rk4_step(a, da, n, 1.0, ship.vector)
            b = kern.rk4_step(b, db, n, 1.0, ship.vector)
        assert abs(a[0] - b[0]) < 1e-9 and abs(a[1] + b[1]) < 1e-9
        assert abs(wrap_angle(a[2] + b[2])) < 1e-9


@pytest.mark.acceptance(5, "depth-constrained Dijkstra equals brute-force enumeration")
def test_c05_planner_oracle():
    rng = np.random.default_rng(505)
    for _ in range(1000):
        g = random_graph(rng)
        md = float(rng.choice([0.0, 1.5, 2.5, 4.0]))
        dst = len(g.nodes) - 1
        oracle = brute_force_path(g, 0, dst, md)
        if oracle is None:
            with pytest.raises(NoRoute):
                shortest_path(g, 0, dst, md)
            continue
        cost, nodes, _ = shortest_path(g, 0, dst, md)
        assert cost == oracle[0] and nodes == oracle[1]


@pytest.mark.acceptance(6, "point-in-polygon agrees with an independent oracle")
def test_c06_geometry_oracle():
    rng = np.random.default_rng(606)
    n = 0
    while n < 10000:
        ring = random_star_polygon(rng)
        p = tuple(rng.uniform(-15, 15, 2))
        if dist_to_ring(p, ring) < 1e-6:
            continue
        assert point_in_polygon(p, [ring]) == winding_inside(p, ring)
        n += 1
    # boundary cases: every vertex and edge midpoint counts as inside
    for _ in range(200):
        ring = random_star_polygon(rng)
        for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
            assert point_in_polygon((x1, y1), [ring])
            assert point_in_polygon(((x1 + x2) / 2, (y1 + y2) / 2), [ring])


@pytest.mark.acceptance(7, "LOS hand values and kinematic convergence")
def test_c07_los():
    wps = [(0.0, 0.0), (100.0, 0.0)]
    p = LOSParams(D_los=20.0)
    for y, sign in ((10.0, -1), (-10.0, 1)):
        chi, _ = compute_LOSRef(VesselState(x=50.0, y=y), wps, None, TrackState(1), p)
        assert abs(chi - sign * math.atan(0.5)) < 1e-12
    errs = kinematic_los_run(50.0, steps=500)
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1.0


@pytest.mark.acceptance(8, "PID literal three-step sequences and angle wrapping")
def test_c08_pid():
    p = PidParams(K_p=1.0, inv_T_i=0.1)
    seq = []
    for _ in range(3):
        d, p = pid_step(0.1, 0.0, p)
        seq.append(d)
    assert max(abs(a - b) for a, b in zip(seq, (0.11, 0.12, 0.13))) < 1e-12
    p = PidParams(K_p=1.0, T_d=2.0, inv_T_i=0.5, delta_max=10.0)
    seq = []
    for e in (0.1, 0.3, -0.2):
        d, p = pid_step(e, 0.0, p)
        seq.append(d)
    # hand iteration: acc = 0.1, 0.4, 0.2
    hand = (0.1 + 2 * 0.1 + 0.5 * 0.1, 0.3 + 2 * 0.2 + 0.5 * 0.4, -0.2 + 2 * -0.5 + 0.5 * 0.2)
    assert max(abs(a - b) for a, b in zip(seq, hand)) < 1e-12
    d, _ = pid_step(3.1, -3.1, PidParams(K_p=1.0, delta_max=10.0))
    assert abs(d - (6.2 - 2 * math.pi)) < 1e-12
    d, _ = pid_step(-3.1, 3.1, PidParams(K_p=1.0, delta_max=10.0))
    assert abs(d + (6.2 - 2 * math.pi)) < 1e-12


def _mpc_problem(rng, N):
    p = MpcParams(N=N, headingGain=rng.uniform(0.1, 2), rateGain=rng.uniform(0, 50),
                  rudderGain=rng.uniform(0.001, 0.1), nomoto_K=rng.uniform(0.01, 0.1),
                  nomoto_T=rng.uniform(5, 30), r_max=rng.uniform(0.01, 0.1), w_pen=rng.uniform(0, 200))
    return p, ControlState(rng.uniform(-0.05, 0.05), rng.uniform(-1, 1)), (rng.uniform(-0.02, 0.02), rng.uniform(-1, 1))


@pytest.mark.acceptance(9, "MPC adjoint gradient, grid optimality and bounds")
def test_c09_mpc(backend):
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    h = 1e-6
    for _ in range(100):
        p, s, ref = _mpc_problem(rng, int(rng.integers(3, 30)))
        d = rng.uniform(-0.5, 0.5, p.N)
        args = (p.T_s, p.nomoto_K, p.nomoto_T, p.rateGain, p.headingGain, p.rudderGain, p.r_max, p.w_pen)
        _, g = backend.nomoto_cost_grad(s.r, s.psi, ref[0], ref[1], d, *args, True)
        fd = np.empty(p.N)
        for i in range(p.N):
            e = np.zeros(p.N)
            e[i] = h
            fd[i] = (backend.nomoto_cost_grad(s.r, s.psi, ref[0], ref[1], d + e, *args, False)[0]
                     - backend.nomoto_cost_grad(s.r, s.psi, ref[0], ref[1], d - e, *args, False)[0]) / (2 * h)
        assert np.max(np.abs(np.asarray(g) - fd)) / max(np.max(np.abs(fd)), 1e-8) < 1e-5
    grid = np.linspace(-MpcParams().deltaMAX, MpcParams().deltaMAX, 41)
    for _ in range(100):
        p, s, ref = _mpc_problem(rng, 5)
        res = mpc_solve(s, ref, np.zeros(5), p)
        best = min(mpc_cost(nomoto_predict(s, [c] * 5, p), ref, [c] * 5, p) for c in grid)
        assert res.cost <= best + 1e-6
        assert np.all(np.abs(res.sequence) <= p.deltaMAX)
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.acceptance(10, "SBMPC decisions: idle, starboard head-on, minimal, deterministic")
def test_c10_sbmpc():
    p = SbmpcParams()
    s, obs = headon()
    assert run_sbmpc(s, 0.0, 3.0, ColavDecision(), [], p) == ColavDecision(0.0, 1.0)
    res = run_sbmpc(s, 0.0, 3.0, ColavDecision(), obs, p, detail=True)
    assert res.decision.chi_m < 0.0  # negative course offset is a starboard turn
    full = evaluate_grid(s, 0.0, 3.0, ColavDecision(), obs, p)
    i = full.candidates.index(res.decision)
    assert full.costs[i] == min(full.costs)
    again = run_sbmpc(s, 0.0, 3.0, ColavDecision(), obs, p, detail=True)
    assert again.decision == res.decision and again.costs.tobytes() == res.costs.tobytes()


@pytest.mark.acceptance(11, "metrics hand values")
def test_c11_metrics():
    assert abs(nominal_distance([(0, 0), (3, 4)]) - 5.0) < 1e-9
    signed, absolute = cumulative_heading_error([0.1] * 10, [0.0] * 10, 1.0)
    assert abs(signed - 1.0) < 1e-9 and abs(absolute - 1.0) < 1e-9
    assert abs(cxte([(float(i), 2.0) for i in range(10)], [(0, 0), (20, 0)], 1.0) - 20.0) < 1e-9


@pytest.mark.acceptance(12, "synthetic chart end to end")
def test_c12_end_to_end(tmp_path):
    t0 = time.perf_counter()
    cfg = load_scenario(scenario_path("ghent_synthetic.json"))
    first = run_scenario(cfg)
    assert first.log.outcome == "reached"
    paths = write_outputs(first, str(tmp_path))
    assert sorted(paths) == sorted(OUTPUT_FILES)
    assert all(os.path.getsize(p) > 0 for p in paths.values())
    assert json.loads(open(paths["metrics.json"]).read())["outcome"] == "reached"
    second = run_scenario(cfg)
    assert second.log.identical(first.log)
    assert second.log.array().tobytes() == first.log.array().tobytes()
    colav = run_scenario(cfg.with_overrides(colav_enabled=True))
    assert colav.log.identical(first.log)
    assert time.perf_counter() - t0 < 30.0
