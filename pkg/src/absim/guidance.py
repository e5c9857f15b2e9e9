"""Waypoint bookkeeping and line-of-sight course references."""
import math
from dataclasses import dataclass

from absim._util import wrap_angle


@dataclass(frozen=True)
class LOSParams:
    D_los: float = 100.0
    R_a: float = 30.0
    pass_angle_threshold: float = math.pi / 2
    nominal_speeds: tuple = (3.0,)

    def __post_init__(self):
        if not self.D_los > 0:
            raise ValueError("D_los must be > 0")
        if not self.R_a > 0:
            raise ValueError("R_a must be > 0")
        if not 0 < self.pass_angle_threshold <= math.pi:
            raise ValueError("pass_angle_threshold must lie in (0, pi]")
        object.__setattr__(self, "nominal_speeds", tuple(float(s) for s in self.nominal_speeds))

    @property
    def K_p(self):
        return 1.0 / self.D_los

    def speed_for(self, idx):
        sp = self.nominal_speeds
        return sp[min(idx, len(sp) - 1)]


@dataclass(frozen=True)
class TrackState:
    active_idx: int = 1


def _passed(pos, a, b, p):
    if math.hypot(pos[0] - b[0], pos[1] - b[1]) < p.R_a:
        return True
    sx, sy = b[0] - a[0], b[1] - a[1]
    vx, vy = pos[0] - b[0], pos[1] - b[1]
    ns, nv = math.hypot(sx, sy), math.hypot(vx, vy)
    if ns == 0.0 or nv == 0.0:
        return True
    cosang = max(-1.0, min(1.0, (sx * vx + sy * vy) / (ns * nv)))
    return math.acos(cosang) < p.pass_angle_threshold


def update_active_waypoint(pos, wps, ts, p):
    if len(wps) < 2:
        raise ValueError("need at least two waypoints")
    k = max(1, ts.active_idx)
    last = len(wps) - 1
    while k < last and _passed(pos, wps[k - 1], wps[k], p):
        k += 1
    return ts if k == ts.active_idx else TrackState(k)


def cross_track_error(pos, a, b):
    """Signed distance from segment a->b, positive to port (left of travel)."""
    pi_p = math.atan2(b[1] - a[1], b[0] - a[0])
    return -(pos[0] - a[0]) * math.sin(pi_p) + (pos[1] - a[1]) * math.cos(pi_p)


def compute_LOSRef(s, wps, speeds, ts, p):
    """(chi_d, U_d) on the active segment. ``speeds`` overrides the nominal
    speed list when given (one value per waypoint, or a single value)."""
    a, b = wps[ts.active_idx - 1], wps[ts.active_idx]
    pi_p = math.atan2(b[1] - a[1], b[0] - a[0])
    e = -(s.x - a[0]) * math.sin(pi_p) + (s.y - a[1]) * math.cos(pi_p)
    chi_d = wrap_angle(pi_p + math.atan(-e / p.D_los))
    if speeds:
        U_d = float(speeds[min(ts.active_idx, len(speeds) - 1)])
    else:
        U_d = p.speed_for(ts.active_idx)
    return chi_d, U_d


class HeadingReference:
    """psi_d = chi_d; r_d is the wrapped difference quotient through a
    first-order low-pass with time constant ``tau`` (0 disables it)."""

    def __init__(self, dt, tau=2.0):
        if not dt > 0:
            raise ValueError("dt must be > 0")
        self.dt = dt
        self.tau = tau
        self.alpha = dt / (tau + dt)
        self.psi_prev = None
        self.r_d = 0.0

    def step(self, chi_d):
        psi_d = chi_d
        if self.psi_prev is None:
            raw = 0.0
        else:
            raw = wrap_angle(psi_d - self.psi_prev) / self.dt
        self.r_d = self.r_d + self.alpha * (raw - self.r_d)
        self.psi_prev = psi_d
        return psi_d, self.r_d


def heading_reference_from_course(chi_d, ref):
    """Functional wrapper around :class:`HeadingReference`."""
    return ref.step(chi_d)
