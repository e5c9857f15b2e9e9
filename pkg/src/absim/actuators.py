"""Ducted propeller thrust, twin-rudder forces and a rate-limited rudder servo.

Both rudders sit in the same centerline slipstream, so they share inflow
speed and angle and the pair delivers twice the single-rudder normal force.
"""
import math
from dataclasses import dataclass

from absim._layout import pack
from absim.kernels import kern


class DeltaOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class PropellerParams:
    D_P: float
    t_ded: float
    n_P: float
    w_P: float = 0.2
    kt_coeffs: tuple = (0.2931, -0.2753, -0.1359)

    def __post_init__(self):
        if not self.D_P > 0:
            raise ValueError("D_P must be > 0")
        if not 0 <= self.t_ded < 1:
            raise ValueError("t_ded must lie in [0, 1)")
        if not 0 <= self.w_P < 1:
            raise ValueError("w_P must lie in [0, 1)")
        if self.n_P < 0:
            raise ValueError("n_P must be >= 0 (reverse thrust is not modelled)")
        object.__setattr__(self, "kt_coeffs", tuple(float(k) for k in self.kt_coeffs))

    def kt(self, J):
        k0, k1, k2 = self.kt_coeffs
        return k0 + k1 * J + k2 * J * J


@dataclass(frozen=True)
class RudderParams:
    A_R: float
    Lambda: float
    x_R: float
    x_H: float
    t_R: float
    a_H: float
    gamma_R: float = 0.4
    l_R_prime: float = -0.7
    eps_ratio: float = 1.09
    kappa: float = 0.5
    delta_max: float = math.radians(35.0)
    delta_rate_max: float = math.radians(5.0)

    def __post_init__(self):
        for name in ("A_R", "Lambda", "delta_max", "delta_rate_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"RudderParams.{name} must be > 0")

    @property
    def lift_slope(self):
        return 6.13 * self.Lambda / (self.Lambda + 2.25)


def advance_ratio(u, p):
    if abs(p.n_P) < 1e-9:
        return 0.0
    return u * (1.0 - p.w_P) / (p.n_P * p.D_P)


def propeller_thrust(u, p, rho):
    """Surge thrust X_P in newtons; zero when the propeller is stopped."""
    vec = pack(p)
    vec[8] = rho
    return kern.propeller_thrust(float(u), float(p.n_P), vec)


def _rudder_vector(p, r_p, rho, L):
    vec = pack(p, r_p)
    vec[8] = rho
    vec[6] = L
    return vec


def rudder_inflow(s, delta, p, r_p, rho, L=1.0):
    """Inflow speed U_R and effective angle alpha_R at the rudders.

    ``L`` is the ship length used by the yaw-rate lever ``l_R' L r``.
    """
    return kern.rudder_inflow(s.u, s.v, s.r, float(delta), float(p.n_P), _rudder_vector(p, r_p, rho, L))


def rudder_forces(s, delta, p, r_p, rho, L=1.0):
    """(X_R, Y_R, N_R) for the twin-rudder pair."""
    if abs(delta) > r_p.delta_max * (1 + 1e-12):
        raise DeltaOutOfRange(f"|delta|={abs(delta):.6g} exceeds delta_max={r_p.delta_max:.6g}")
    return kern.rudder_forces(s.u, s.v, s.r, float(delta), float(p.n_P), _rudder_vector(p, r_p, rho, L))


def rudder_servo(delta_actual, delta_cmd, dt, r_p):
    if not dt > 0:
        raise ValueError("dt must be > 0")
    target = min(max(delta_cmd, -r_p.delta_max), r_p.delta_max)
    step = r_p.delta_rate_max * dt
    if target > delta_actual + step:
        return delta_actual + step
    if target < delta_actual - step:
        return delta_actual - step
    return target
