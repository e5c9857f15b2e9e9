"""Scenario-based MPC collision avoidance.

A fixed grid of course offsets and speed multipliers is scored by simulating
the own ship's kinematic response and straight-line obstacle motion over the
horizon. Angles follow the simulator frame (counter-clockwise positive), so a
negative course offset is a turn to starboard.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from absim._layout import (D_FLOOR, ENC_CROSSING_GIVE_WAY, ENC_CROSSING_STAND_ON, ENC_HEAD_ON,
                           ENC_NONE, ENC_OVERTAKING)
from absim._util import wrap_angle
from absim.kernels import kern

_DEG = math.pi / 180.0
DEFAULT_OFFSETS = tuple(s * d * _DEG for d in (0, 15, 30, 45, 60, 75, 90) for s in ((1,) if d == 0 else (-1, 1)))


@dataclass(frozen=True)
class SbmpcTuning:
    q_col: float = 10.0
    d_safe: float = 100.0
    d_close: float = 400.0
    kappa_colregs: float = 5.0
    k_chi_p: float = 2.0
    k_chi_s: float = 1.0
    k_du: float = 2.0
    k_dchi: float = 0.1
    u_ref: float = 3.0


@dataclass(frozen=True)
class SbmpcParams:
    T: float = 300.0
    dt: float = 5.0
    T_chi: float = 15.0
    T_U: float = 30.0
    chi_offsets: tuple = DEFAULT_OFFSETS
    U_mults: tuple = (1.0, 0.5, 0.0)
    tuning: SbmpcTuning = field(default_factory=SbmpcTuning)

    def __post_init__(self):
        if not self.T > self.dt > 0:
            raise ValueError("need T > dt > 0")
        if not (self.T_chi > 0 and self.T_U > 0):
            raise ValueError("T_chi and T_U must be > 0")
        if 0.0 not in self.chi_offsets:
            raise ValueError("chi_offsets must contain 0")
        if 1.0 not in self.U_mults:
            raise ValueError("U_mults must contain 1.0")
        if not self.tuning.d_safe < self.tuning.d_close:
            raise ValueError("d_safe must be < d_close")
        if not self.tuning.u_ref > 0:
            raise ValueError("u_ref must be > 0")

    @property
    def nsamp(self):
        return int(math.floor(self.T / self.dt + 1e-9)) + 1

    def ordered_offsets(self):
        """Ascending |offset|, starboard (negative) first at equal magnitude."""
        return tuple(sorted(set(float(o) for o in self.chi_offsets), key=lambda o: (abs(o), o > 0)))

    def ordered_mults(self):
        return tuple(sorted(set(float(m) for m in self.U_mults), reverse=True))


@dataclass(frozen=True)
class ObstacleState:
    x: float
    y: float
    course: float
    speed: float
    length: float = 80.0

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("obstacle speed must be >= 0")

    @property
    def velocity(self):
        return self.speed * math.cos(self.course), self.speed * math.sin(self.course)


@dataclass(frozen=True)
class ColavDecision:
    chi_m: float = 0.0
    U_m: float = 1.0


def ownship_course_speed(s):
    """Course over water and speed from heading, surge and sway."""
    return wrap_angle(s.psi + math.atan2(s.v, s.u)), math.hypot(s.u, s.v)


def predict_ownship(s, chi_cmd, U_cmd, p):
    x, y = s.x, s.y
    chi, U = ownship_course_speed(s)
    out = [(x, y, chi, U)]
    for _ in range(p.nsamp - 1):
        vx, vy = U * math.cos(chi), U * math.sin(chi)
        dchi = wrap_angle(chi_cmd - chi) / p.T_chi
        dU = (U_cmd - U) / p.T_U
        x += p.dt * vx
        y += p.dt * vy
        chi += p.dt * dchi
        U += p.dt * dU
        out.append((x, y, chi, U))
    return out


def predict_obstacle(o, p):
    vx, vy = o.velocity
    return [(o.x + k * p.dt * vx, o.y + k * p.dt * vy, o.course, o.speed) for k in range(p.nsamp)]


def _cpa(px, py, vx, vy):
    """(tcpa, dcpa) for relative position/velocity."""
    vv = vx * vx + vy * vy
    t = 0.0 if vv < 1e-12 else -(px * vx + py * vy) / vv
    return t, math.hypot(px + t * vx, py + t * vy)


def classify_encounter(own, o, p):
    """COLREGS situation code for one obstacle, or ENC_NONE when no close
    approach is predicted within the horizon.

    ``own`` is (x, y, course, speed). Callers pass the nominal (unmodified)
    course and speed, so an evasive turn in progress does not change the
    situation it is responding to.
    """
    x, y, chi, U = own
    ovx, ovy = o.velocity
    px, py = o.x - x, o.y - y
    rvx, rvy = ovx - U * math.cos(chi), ovy - U * math.sin(chi)
    tcpa, _ = _cpa(px, py, rvx, rvy)
    t = min(tcpa, p.T)
    if tcpa < 0.0 or math.hypot(px + t * rvx, py + t * rvy) >= p.tuning.d_close:
        return ENC_NONE
    bearing = wrap_angle(math.atan2(py, px) - chi)  # obstacle seen from own ship
    back = wrap_angle(math.atan2(-py, -px) - o.course)  # own ship seen from obstacle
    if abs(bearing) <= 22.5 * _DEG and abs(back) <= 22.5 * _DEG:
        return ENC_HEAD_ON
    if abs(wrap_angle(back - math.pi)) < 67.5 * _DEG and U > o.speed:
        return ENC_OVERTAKING
    if -112.5 * _DEG <= bearing < -22.5 * _DEG:
        return ENC_CROSSING_GIVE_WAY
    if 22.5 * _DEG < bearing <= 112.5 * _DEG:
        return ENC_CROSSING_STAND_ON
    return ENC_NONE


def scenario_cost(own_traj, obstacle_trajs, cand, prev, p, codes=None):
    """Cost of one candidate given the predicted trajectories.

    ``codes`` holds the encounter code per obstacle (all ENC_NONE if omitted).
    """
    tu = p.tuning
    codes = codes or [ENC_NONE] * len(obstacle_trajs)
    worst = 0.0
    for traj, code in zip(obstacle_trajs, codes):
        risk = 0.0
        for (x, y, chi, U), (ox, oy, oc, osp) in zip(own_traj, traj):
            d = math.hypot(x - ox, y - oy)
            if d < tu.d_close:
                d = max(d, D_FLOOR)
                rel = math.hypot(U * math.cos(chi) - osp * math.cos(oc), U * math.sin(chi) - osp * math.sin(oc))
                risk = max(risk, (1.0 + rel / tu.u_ref) * tu.q_col * (tu.d_safe / d) ** 2)
        if cand.chi_m > 0 and code in (ENC_HEAD_ON, ENC_CROSSING_GIVE_WAY):
            risk += tu.kappa_colregs
        worst = max(worst, risk)
    k_chi = tu.k_chi_p if cand.chi_m > 0 else tu.k_chi_s
    return worst + k_chi * cand.chi_m ** 2 + tu.k_du * (1.0 - cand.U_m) + tu.k_dchi * abs(cand.chi_m - prev.chi_m)


@dataclass
class SbmpcResult:
    decision: ColavDecision
    costs: np.ndarray
    candidates: list
    codes: list


def evaluate_grid(s, chi_d, U_d, prev, obstacles, p):
    offs = p.ordered_offsets()
    mults = p.ordered_mults()
    x0, y0 = s.x, s.y
    chi0, U0 = ownship_course_speed(s)
    codes = [classify_encounter((x0, y0, chi_d, U_d), o, p) for o in obstacles]
    n = p.nsamp
    obs = np.empty(4 * n * len(obstacles))
    for i, o in enumerate(obstacles):
        vx, vy = o.velocity
        for k, (ox, oy, _, _) in enumerate(predict_obstacle(o, p)):
            j = 4 * (i * n + k)
            obs[j:j + 4] = (ox, oy, vx, vy)
    tu = p.tuning
    prm = np.array([p.dt, p.T_chi, p.T_U, tu.q_col, tu.d_safe, tu.d_close, tu.kappa_colregs,
                    tu.k_chi_p, tu.k_chi_s, tu.k_du, tu.k_dchi, tu.u_ref, prev.chi_m])
    costs = kern.sbmpc_grid_costs(x0, y0, chi0, U0, float(chi_d), float(U_d),
                                  np.array(offs), np.array(mults), obs,
                                  np.array(codes, dtype=np.int64), n, prm)
    cands = [ColavDecision(o, m) for o in offs for m in mults]
    return SbmpcResult(None, np.asarray(costs, dtype=float), cands, codes)


def run_sbmpc(s, chi_d, U_d, prev, obstacles, p, detail=False):
    """Best (chi_m, U_m). With no obstacles the zero-deviation candidate is
    returned directly. Ties keep the earliest candidate in evaluation order."""
    if not obstacles:
        res = SbmpcResult(ColavDecision(0.0, 1.0), np.zeros(0), [], [])
        return res if detail else res.decision
    res = evaluate_grid(s, chi_d, U_d, prev, list(obstacles), p)
    best = 0
    for i in range(1, len(res.costs)):
        if res.costs[i] < res.costs[best]:
            best = i
    res = replace(res, decision=res.candidates[best])
    return res if detail else res.decision
