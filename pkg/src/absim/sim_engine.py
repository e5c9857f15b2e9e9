"""The per-step loop: guidance, collision avoidance, heading reference,
controller, rudder servo, MMG integration and target motion."""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from absim import chart_io, metrics, waterway_graph
from absim.actuators import rudder_servo
from absim.colav import ColavDecision, ObstacleState, run_sbmpc
from absim.control import MpcController, NonFiniteCost, fit_nomoto_from_ship, pid_step
from absim.guidance import HeadingReference, TrackState, compute_LOSRef, update_active_waypoint
from absim.kernels import kern
from absim.ship import SpeedMap
from absim.vessel_model import NonFiniteState, VesselState, integrate_step
from absim._util import wrap_angle

log = logging.getLogger(__name__)

LOG_COLUMNS = ("t", "x", "y", "psi", "u", "v", "r", "chi_d", "chi_m", "U_m", "psi_d", "r_d",
               "delta_c", "delta", "X_H", "Y_H", "N_H", "X_P", "X_R", "Y_R", "N_R")
TARGET_FIELDS = ("x", "y", "course", "speed")


@dataclass
class SimLog:
    columns: tuple = LOG_COLUMNS
    rows: list = field(default_factory=list)
    targets: list = field(default_factory=list)  # per record: tuple of (x, y, course, speed)
    outcome: str = "running"
    final_state: VesselState = None
    n_targets: int = 0

    def __len__(self):
        return len(self.rows)

    def array(self):
        return np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def csv_header(self):
        cols = list(self.columns)
        for i in range(self.n_targets):
            cols += [f"tgt{i}_{f}" for f in TARGET_FIELDS]
        return cols

    def csv_rows(self):
        for row, tg in zip(self.rows, self.targets):
            yield tuple(row) + tuple(v for t in tg for v in t)

    def identical(self, other):
        return (self.outcome == other.outcome and self.rows == other.rows
                and self.targets == other.targets and self.final_state == other.final_state)


@dataclass(frozen=True)
class Target:
    obstacle: ObstacleState
    mode: str = "constant_velocity"
    waypoints: tuple = ()
    D_los: float = 100.0
    R_a: float = 30.0
    track: TrackState = TrackState(1)


def step_targets(targets, dt):
    """Advance every target one step: straight line, or kinematic LOS along
    its own waypoints (course set instantly to the LOS course)."""
    from absim.guidance import LOSParams

    out = []
    for tg in targets:
        o = tg.obstacle
        if tg.mode == "waypoints" and len(tg.waypoints) >= 2 and o.speed > 0:
            p = LOSParams(D_los=tg.D_los, R_a=tg.R_a, nominal_speeds=(o.speed,))
            pos = (o.x, o.y)
            track = update_active_waypoint(pos, tg.waypoints, tg.track, p)
            chi, _ = compute_LOSRef(VesselState(o.x, o.y), tg.waypoints, None, track, p)
            o = replace(o, course=chi)
            tg = replace(tg, track=track)
        vx, vy = o.velocity
        out.append(replace(tg, obstacle=replace(o, x=o.x + dt * vx, y=o.y + dt * vy)))
    return out


@dataclass
class RunResult:
    log: SimLog
    metrics: object
    route: waterway_graph.PlannedRoute
    chart: object = None
    graph: object = None

    def __iter__(self):
        return iter((self.log, self.metrics, self.route))


def prepare_route(cfg):
    """(route, chart, graph) for the scenario; chart may be None."""
    chart = chart_io.load_chart(cfg.chart_path) if cfg.chart_path else None
    if cfg.waypoints is not None:
        pts = tuple(cfg.waypoints)
        return waterway_graph.PlannedRoute(pts, tuple(0.0 for _ in pts),
                                           waterway_graph.polyline_length(pts)), chart, None
    proj = chart.projection
    start = proj.forward(*cfg.start)
    goal = proj.forward(*cfg.goal)
    route, g = waterway_graph.plan_route(chart, start, goal, cfg.min_depth, **cfg.planner)
    if len(route.path_points) < 2:
        raise waterway_graph.NoRoute("start and goal snap to the same graph node")
    return route, chart, g


def _initial_state(cfg, wps, U0):
    init = dict(cfg.initial_state or {})
    a, b = wps[0], wps[1]
    return VesselState(init.get("x", a[0]), init.get("y", a[1]),
                       init.get("psi", math.atan2(b[1] - a[1], b[0] - a[0])),
                       init.get("u", U0), init.get("v", 0.0), init.get("r", 0.0))


def run_scenario(cfg, route=None):
    """Run one scenario to completion; returns a RunResult (iterable as
    ``(log, metrics, route)``).

    Planning and chart errors propagate. A non-finite state or diverged MPC
    ends the run with outcome ``fault`` and the partial log.
    """
    chart = graph = None
    if route is None:
        route, chart, graph = prepare_route(cfg)
    wps = route.path_points
    ship = cfg.ship
    P = ship.vector
    dt = cfg.dt
    los = cfg.los
    u_top = max(los.nominal_speeds) * 1.5 + 0.5
    speed_map = SpeedMap(ship, u_top)

    ts = TrackState(1)
    _, U0 = compute_LOSRef(VesselState(*wps[0]), wps, None, ts, los)
    s = _initial_state(cfg, wps, U0)
    href = HeadingReference(dt, cfg.r_d_tau)
    pid = cfg.pid
    mpc = None
    if cfg.controller == "mpc":
        mp = cfg.mpc
        if any(cfg.mpc_auto):
            K, T = fit_nomoto_from_ship(ship, U0, speed_map.rps(U0))
            mp = replace(mp, nomoto_K=K if cfg.mpc_auto[0] else mp.nomoto_K,
                         nomoto_T=T if cfg.mpc_auto[1] else mp.nomoto_T)
        mpc = MpcController(mp)
    targets = [Target(t.obstacle, t.mode, t.waypoints, t.D_los, t.R_a) for t in cfg.targets]
    prev_dec = ColavDecision()
    delta = 0.0
    simlog = SimLog(n_targets=len(targets))
    goal = wps[-1]

    outcome = "max_steps"
    for k in range(cfg.max_steps):
        if math.hypot(s.x - goal[0], s.y - goal[1]) < los.R_a:
            outcome = "reached"
            break
        ts = update_active_waypoint((s.x, s.y), wps, ts, los)
        chi_d, U_d = compute_LOSRef(s, wps, None, ts, los)
        if cfg.colav_enabled:
            dec = run_sbmpc(s, chi_d, U_d, prev_dec, [t.obstacle for t in targets], cfg.sbmpc)
        else:
            dec = ColavDecision()
        prev_dec = dec
        chi_cmd = wrap_angle(chi_d + dec.chi_m)
        U_cmd = U_d * dec.U_m
        psi_d, r_d = href.step(chi_cmd)
        try:
            if mpc is None:
                raw, pid = pid_step(s.psi, psi_d, pid)
                delta_c = cfg.pid_output_sign * raw
            else:
                delta_c = mpc.step(s.r, s.psi, r_d, psi_d)
        except NonFiniteCost as exc:
            log.error("controller fault at step %d: %s", k, exc)
            outcome = "fault"
            break
        delta = rudder_servo(delta, delta_c, dt, ship.rudder)
        n_P = speed_map.rps(U_cmd)
        XH, YH, NH = kern.hull_forces(s.u, s.v, s.r, P)
        XP = kern.propeller_thrust(s.u, n_P, P)
        XR, YR, NR = kern.rudder_forces(s.u, s.v, s.r, delta, n_P, P)
        simlog.rows.append((k * dt, s.x, s.y, s.psi, s.u, s.v, s.r, chi_d, dec.chi_m, dec.U_m,
                            psi_d, r_d, delta_c, delta, XH, YH, NH, XP, XR, YR, NR))
        simlog.targets.append(tuple((t.obstacle.x, t.obstacle.y, t.obstacle.course, t.obstacle.speed)
                                    for t in targets))
        try:
            s = integrate_step(s, ship, delta, n_P, dt)
        except NonFiniteState as exc:
            log.error("model fault at step %d: %s", k, exc)
            outcome = "fault"
            break
        targets = step_targets(targets, dt)
    else:
        if math.hypot(s.x - goal[0], s.y - goal[1]) < los.R_a:
            outcome = "reached"
    simlog.outcome = outcome
    simlog.final_state = s
    log.info("%s: outcome %s after %d steps", cfg.name, outcome, len(simlog))

    report = None
    if simlog.rows:
        report = report_from_log(simlog, wps, dt, cfg.v_ref)
    return RunResult(simlog, report, route, chart, graph)


def report_from_log(simlog, wps, dt, v_ref):
    """Metrics for a finished run. Heading and cross-track integrals sum over
    the records; the sailed distance also includes the final pose."""
    xy = [(r[1], r[2]) for r in simlog.rows]
    path_xy = xy + [(simlog.final_state.x, simlog.final_state.y)] if simlog.outcome != "fault" else xy
    signed, absolute = metrics.cumulative_heading_error(simlog.column("psi"), simlog.column("psi_d"), dt)
    D_nom = metrics.nominal_distance(wps)
    return metrics.MetricsReport(
        D_nominal=D_nom,
        T_nominal=metrics.nominal_time(D_nom, v_ref),
        D_actual=metrics.actual_distance(path_xy) if len(path_xy) >= 2 else 0.0,
        T_actual=metrics.actual_time(len(simlog), dt),
        psi_e_c_signed=signed,
        psi_e_c_abs=absolute,
        CXTE=metrics.cxte(xy, wps, dt),
        outcome=simlog.outcome,
    )
