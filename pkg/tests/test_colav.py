import math

import numpy as np
import pytest

from absim._layout import (ENC_CROSSING_GIVE_WAY, ENC_CROSSING_STAND_ON, ENC_HEAD_ON, ENC_NONE,
                           ENC_OVERTAKING)
from absim.colav import (ColavDecision, ObstacleState, SbmpcParams, SbmpcTuning, classify_encounter,
                         evaluate_grid, ownship_course_speed, predict_obstacle, predict_ownship, run_sbmpc,
                         scenario_cost)
from absim.vessel_model import VesselState

DEG = math.pi / 180


def headon():
    return VesselState(u=3.0), [ObstacleState(1500.0, 0.0, math.pi, 3.0)]


def test_ownship_course_speed():
    chi, U = ownship_course_speed(VesselState(psi=0.2, u=3.0, v=-3.0))
    assert chi == pytest.approx(0.2 - math.pi / 4) and U == pytest.approx(3 * math.sqrt(2))


def test_predict_straight():
    p = SbmpcParams()
    traj = predict_ownship(VesselState(u=2.0, psi=0.5), 0.5, 2.0, p)
    assert len(traj) == p.nsamp == 61
    x, y, chi, U = traj[-1]
    assert (x, y) == pytest.approx((2 * 300 * math.cos(0.5), 2 * 300 * math.sin(0.5)))
    assert chi == 0.5 and U == 2.0


def test_predict_speed_decay():
    p = SbmpcParams(T=30, dt=0.01, T_U=10)
    U = predict_ownship(VesselState(u=2.0), 0.0, 0.0, p)[-1][3]
    assert U == pytest.approx(2.0 * math.exp(-3), rel=1e-2)


def test_predict_course_step():
    p = SbmpcParams(T=300, dt=1, T_chi=5)
    chi = predict_ownship(VesselState(u=2.0), math.pi / 2, 2.0, p)[-1][2]
    assert abs(chi - math.pi / 2) < DEG


def test_predict_obstacle():
    p = SbmpcParams(T=10, dt=1)
    assert {t[:2] for t in predict_obstacle(ObstacleState(5, 6, 1.0, 0.0), p)} == {(5, 6)}
    tr = predict_obstacle(ObstacleState(0, 0, 0.0, 2.0), p)
    assert [t[0] for t in tr] == [2.0 * k for k in range(11)]
    tr = predict_obstacle(ObstacleState(0, 0, math.pi / 2, 1.0), p)
    assert all(abs(t[0]) < 1e-12 and t[1] == pytest.approx(k) for k, t in enumerate(tr))
    with pytest.raises(ValueError):
        ObstacleState(0, 0, 0, -1)


def test_scenario_cost_maneuver_terms():
    p = SbmpcParams()
    tu = p.tuning
    assert scenario_cost([], [], ColavDecision(), ColavDecision(), p) == 0.0
    c = scenario_cost([], [], ColavDecision(-30 * DEG, 1.0), ColavDecision(), p)
    assert c == tu.k_chi_s * (30 * DEG) ** 2 + tu.k_dchi * 30 * DEG
    c = scenario_cost([], [], ColavDecision(30 * DEG, 0.5), ColavDecision(), p)
    assert c == pytest.approx(tu.k_chi_p * (30 * DEG) ** 2 + tu.k_dchi * 30 * DEG + tu.k_du * 0.5)


def test_params_validation():
    with pytest.raises(ValueError):
        SbmpcParams(T=5, dt=5)
    with pytest.raises(ValueError):
        SbmpcParams(chi_offsets=(0.1,))
    with pytest.raises(ValueError):
        SbmpcParams(U_mults=(0.5,))
    with pytest.raises(ValueError):
        SbmpcParams(tuning=SbmpcTuning(d_safe=500))


def test_order_starboard_first():
    offs = SbmpcParams().ordered_offsets()
    assert offs[0] == 0.0 and offs[1] < 0 < offs[2] and offs[1] == -offs[2]


def test_classify():
    p = SbmpcParams()
    own = (0.0, 0.0, 0.0, 3.0)
    assert classify_encounter(own, ObstacleState(1500, 0, math.pi, 3), p) == ENC_HEAD_ON
    assert classify_encounter(own, ObstacleState(300, 0, 0.0, 1.0), p) == ENC_OVERTAKING
    # from starboard, crossing to port: give way
    assert classify_encounter(own, ObstacleState(600, -600, math.pi / 2, 3), p) == ENC_CROSSING_GIVE_WAY
    assert classify_encounter(own, ObstacleState(600, 600, -math.pi / 2, 3), p) == ENC_CROSSING_STAND_ON
    assert classify_encounter(own, ObstacleState(-1500, 0, math.pi, 3), p) == ENC_NONE
    assert classify_encounter(own, ObstacleState(1500, 5000, math.pi, 3), p) == ENC_NONE


def test_no_obstacles():
    assert run_sbmpc(VesselState(u=3.0), 0.3, 3.0, ColavDecision(0.4, 0.5), [], SbmpcParams()) == ColavDecision(0.0, 1.0)


def test_far_obstacle():
    o = ObstacleState(1e5, 1e5, 0.0, 1.0)
    assert run_sbmpc(VesselState(u=3.0), 0.0, 3.0, ColavDecision(), [o], SbmpcParams()) == ColavDecision(0.0, 1.0)


def test_headon_turns_starboard():
    s, obs = headon()
    res = run_sbmpc(s, 0.0, 3.0, ColavDecision(), obs, SbmpcParams(), detail=True)
    d = res.decision
    assert d.chi_m < 0
    assert res.codes == [ENC_HEAD_ON]
    i = res.candidates.index(d)
    assert all(c >= res.costs[i] for c in res.costs)
    assert all(c > res.costs[i] for c in res.costs[:i])


def test_headon_deterministic():
    s, obs = headon()
    a = run_sbmpc(s, 0.0, 3.0, ColavDecision(), obs, SbmpcParams(), detail=True)
    b = run_sbmpc(s, 0.0, 3.0, ColavDecision(), obs, SbmpcParams(), detail=True)
    assert a.decision == b.decision and a.costs.tobytes() == b.costs.tobytes()


def test_kernel_matches_python_oracle(backend, monkeypatch):
    import absim.colav as colav_mod
    monkeypatch.setattr(colav_mod, "kern", backend)
    rng = np.random.default_rng(4)
    p = SbmpcParams(T=120, dt=5)
    for _ in range(20):
        s = VesselState(x=rng.uniform(-100, 100), y=rng.uniform(-100, 100), psi=rng.uniform(-3, 3),
                        u=rng.uniform(1, 4), v=rng.uniform(-0.3, 0.3))
        obs = [ObstacleState(*rng.uniform(-600, 600, 2), rng.uniform(-3, 3), rng.uniform(0, 4))
               for _ in range(int(rng.integers(1, 4)))]
        prev = ColavDecision(float(rng.choice(p.ordered_offsets())), 1.0)
        chi_d, U_d = rng.uniform(-3, 3), rng.uniform(1, 4)
        res = evaluate_grid(s, chi_d, U_d, prev, obs, p)
        trajs = [predict_obstacle(o, p) for o in obs]
        for cand, cost in zip(res.candidates, res.costs):
            own = predict_ownship(s, chi_d + cand.chi_m, U_d * cand.U_m, p)
            ref = scenario_cost(own, trajs, cand, prev, p, res.codes)
            assert cost == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_dead_ahead_prefers_turn():
    s, obs = headon()
    p = SbmpcParams()
    res = evaluate_grid(s, 0.0, 3.0, ColavDecision(), obs, p)
    cost = dict(zip(res.candidates, res.costs))
    assert cost[ColavDecision(0.0, 1.0)] > cost[ColavDecision(-45 * DEG, 1.0)]


def test_cost_monotone_as_obstacle_closes_in():
    rng = np.random.default_rng(12)
    p = SbmpcParams(T=100, dt=5)
    cand = ColavDecision()
    for _ in range(100):
        s = VesselState(u=rng.uniform(1, 4), psi=rng.uniform(-3, 3))
        own = predict_ownship(s, s.psi, s.u, p)
        o = ObstacleState(*rng.uniform(-500, 500, 2), rng.uniform(-3, 3), rng.uniform(0, 4))
        base = predict_obstacle(o, p)
        prev_cost = -1.0
        for f in (1.0, 0.8, 0.6, 0.4, 0.2):
            traj = [(x + f * (ox - x), y + f * (oy - y), oc, osp)
                    for (x, y, _, _), (ox, oy, oc, osp) in zip(own, base)]
            c = scenario_cost(own, [traj], cand, cand, p, [ENC_HEAD_ON])
            assert c >= prev_cost
            prev_cost = c
