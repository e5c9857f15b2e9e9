"""Rudder control: discrete PID on heading error and a Nomoto-model MPC solved
by projected gradient descent."""
import math
from dataclasses import dataclass, replace

import numpy as np

from absim._util import wrap_angle
from absim.actuators import DeltaOutOfRange
from absim.kernels import kern


class NonFiniteCost(ArithmeticError):
    pass


@dataclass(frozen=True)
class PidParams:
    """Gains plus the controller's running memory.

    ``inv_T_i`` is 1/T_i so that 0 switches the integral off. The integral
    accumulator is a plain per-step sum of heading errors.
    """
    K_p: float = 1.0
    inv_T_i: float = 0.0
    T_d: float = 0.0
    delta_max: float = math.radians(35.0)
    integral_limit: float = math.inf
    psi_d_old: float = 0.0
    error_old: float = 0.0
    integral_acc: float = 0.0

    def __post_init__(self):
        if not self.K_p > 0:
            raise ValueError("K_p must be > 0")
        if self.inv_T_i < 0 or self.T_d < 0:
            raise ValueError("inv_T_i and T_d must be >= 0")
        if not self.integral_limit >= 0:
            raise ValueError("integral_limit must be >= 0")

    def reset(self):
        return replace(self, psi_d_old=0.0, error_old=0.0, integral_acc=0.0)


def pid_step(psi, psi_d, p):
    """delta_c = K_p e + T_d (e - e_prev) + (1/T_i) sum(e), e = wrap(psi - psi_d).

    ``error_old`` starts at 0, so a nonzero first error gives a derivative kick.
    """
    e = wrap_angle(psi - psi_d)
    prev = p.error_old
    acc = p.integral_acc + e
    acc = min(max(acc, -p.integral_limit), p.integral_limit)
    delta = p.K_p * e + p.T_d * (e - prev) + p.inv_T_i * acc
    delta = min(max(delta, -p.delta_max), p.delta_max)
    return delta, replace(p, psi_d_old=psi_d, error_old=e, integral_acc=acc)


@dataclass(frozen=True)
class MpcParams:
    T_s: float = 1.0
    N: int = 20
    headingGain: float = 1.0
    rateGain: float = 0.0
    rudderGain: float = 0.01
    max_iter: int = 200
    deltaMAX: float = math.radians(35.0)
    nomoto_K: float = 0.033
    nomoto_T: float = 20.0
    r_max: float = math.radians(3.0)
    w_pen: float = 100.0

    def __post_init__(self):
        if not self.T_s > 0:
            raise ValueError("T_s must be > 0")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if min(self.headingGain, self.rateGain, self.rudderGain, self.w_pen) < 0:
            raise ValueError("gains must be >= 0")
        if not self.deltaMAX > 0:
            raise ValueError("deltaMAX must be > 0")
        if not self.nomoto_T > 0:
            raise ValueError("nomoto_T must be > 0")


@dataclass(frozen=True)
class ControlState:
    r: float = 0.0
    psi: float = 0.0


def nomoto_predict(s, delta_seq, p):
    """Forward-Euler Nomoto rollout; returns N+1 ControlStates from ``s``."""
    out = [s]
    r, psi = s.r, s.psi
    a = p.T_s / p.nomoto_T
    for d in delta_seq:
        if abs(d) > p.deltaMAX * (1 + 1e-12):
            raise DeltaOutOfRange(f"|delta|={abs(d):.6g} exceeds deltaMAX")
        r, psi = r + a * (p.nomoto_K * d - r), psi + p.T_s * r
        out.append(ControlState(r, psi))
    return out


def mpc_cost(pred_seq, s_ref, delta_seq, p):
    """Quadratic tracking cost over predicted states 1..N plus the soft
    yaw-rate box penalty. ``s_ref`` is a (r_d, psi_d) pair."""
    r_d, psi_d = s_ref
    J = 0.0
    for s, d in zip(pred_seq[1:], delta_seq):
        er = s.r - r_d
        ep = wrap_angle(s.psi - psi_d)
        J += p.rateGain * er * er + p.headingGain * ep * ep + p.rudderGain * d * d
        exc = abs(s.r) - p.r_max
        if exc > 0:
            J += p.w_pen * exc * exc
    return J


def cost_and_grad(s, s_ref, delta_seq, p, want_grad=True):
    J, g = kern.nomoto_cost_grad(float(s.r), float(s.psi), float(s_ref[0]), float(s_ref[1]),
                                 np.ascontiguousarray(delta_seq, dtype=float), p.T_s, p.nomoto_K,
                                 p.nomoto_T, p.rateGain, p.headingGain, p.rudderGain, p.r_max,
                                 p.w_pen, want_grad)
    return J, (np.asarray(g) if want_grad else None)


def shift_warm_start(prev, N):
    if prev is None or len(prev) == 0:
        return np.zeros(N)
    prev = np.asarray(prev, dtype=float)
    out = np.empty(N)
    m = min(N, len(prev) - 1)
    out[:m] = prev[1:1 + m]
    out[m:] = prev[-1]
    return out


@dataclass
class MpcResult:
    delta_c: float
    sequence: np.ndarray
    cost: float
    iterations: int
    trace: list


def mpc_solve(s, s_ref, warm_start, p):
    """Projected gradient with Barzilai-Borwein trial steps and a monotone
    Armijo backtrack. ``warm_start`` is used as given (see shift_warm_start).

    The zero sequence is also tried as a starting point, so the result never
    costs more than either.
    """
    lo, hi = -p.deltaMAX, p.deltaMAX
    x = np.clip(np.zeros(p.N) if warm_start is None or len(warm_start) == 0
                else np.asarray(warm_start, dtype=float), lo, hi)
    if len(x) != p.N:
        raise ValueError(f"warm start has length {len(x)}, expected {p.N}")
    J, g = cost_and_grad(s, s_ref, x, p)
    J0, g0 = cost_and_grad(s, s_ref, np.zeros(p.N), p)
    if J0 < J:
        x, J, g = np.zeros(p.N), J0, g0
    if not math.isfinite(J):
        raise NonFiniteCost(f"initial MPC cost is {J}")
    trace = [J]
    step = 1.0 / max(1e-12, float(np.max(np.abs(g))) + 1.0)
    x_prev = g_prev = None
    it = 0
    for it in range(1, p.max_iter + 1):
        pg = x - np.clip(x - g, lo, hi)
        if float(np.linalg.norm(pg)) < 1e-8:
            break
        if x_prev is not None:
            sx, sg = x - x_prev, g - g_prev
            sy = float(sx @ sg)
            if sy > 1e-300:
                step = float(sx @ sx) / sy
        t = step
        accepted = False
        for _ in range(60):
            xn = np.clip(x - t * g, lo, hi)
            Jn, _ = cost_and_grad(s, s_ref, xn, p, want_grad=False)
            if not math.isfinite(Jn):
                raise NonFiniteCost(f"MPC cost diverged to {Jn}")
            if Jn <= J - 1e-4 / t * float((xn - x) @ (xn - x)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        x_prev, g_prev = x, g
        x = xn
        J, g = cost_and_grad(s, s_ref, x, p)
        trace.append(J)
    return MpcResult(float(x[0]), x, J, it, trace)


class MpcController:
    """Receding-horizon wrapper holding the previous solution for warm starts."""

    def __init__(self, p):
        self.p = p
        self.prev = None

    def step(self, r, psi, r_d, psi_d):
        res = mpc_solve(ControlState(r, psi), (r_d, psi_d), shift_warm_start(self.prev, self.p.N), self.p)
        self.prev = res.sequence
        return res.delta_c


def fit_nomoto(t, r, delta):
    """Least-squares (K, T) for r' = (K delta - r)/T from a sampled record.

    Uses central differences for r'; rewrites as r' = a delta + b r with
    a = K/T, b = -1/T.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least three samples")
    rdot = np.gradient(r, t)
    A = np.column_stack([delta, r])
    (a, b), *_ = np.linalg.lstsq(A, rdot, rcond=None)
    if not b < 0:
        raise ValueError("fitted yaw dynamics are not stable")
    T = -1.0 / b
    return a * T, T


def fit_nomoto_from_ship(ship, u0, n_P, delta=math.radians(10.0), duration=200.0, dt=0.5):
    """Run an MMG rudder-step test and fit Nomoto (K, T) to it."""
    from absim.vessel_model import VesselState, integrate_step

    s = VesselState(u=u0)
    ts, rs, ds = [0.0], [0.0], [delta]
    for k in range(int(round(duration / dt))):
        s = integrate_step(s, ship, delta, n_P, dt)
        ts.append((k + 1) * dt)
        rs.append(s.r)
        ds.append(delta)
    return fit_nomoto(ts, rs, ds)
