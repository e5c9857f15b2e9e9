"""3-DOF MMG rigid-body dynamics with nondimensional hull forces.

Frame: x east, y north, heading ``psi`` counter-clockwise from east. Body
velocities are surge ``u``, sway ``v`` (positive to port) and yaw rate ``r``.
The hull polynomials use the drift angle ``beta_m = atan2(-v, u)`` and the
nondimensional yaw rate ``r' = r L / U``.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from absim._layout import U_EPS, pack
from absim._util import wrap_angle
from absim.kernels import kern


class SingularMassMatrix(ValueError):
    pass


class NonFiniteState(ArithmeticError):
    pass


@dataclass(frozen=True)
class VesselState:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    u: float = 0.0
    v: float = 0.0
    r: float = 0.0

    def as_tuple(self):
        return (self.x, self.y, self.psi, self.u, self.v, self.r)

    @classmethod
    def from_seq(cls, seq):
        x, y, psi, u, v, r = (float(s) for s in seq)
        return cls(x, y, psi, u, v, r)

    def is_finite(self):
        return all(math.isfinite(s) for s in self.as_tuple())


@dataclass(frozen=True)
class ShipParams:
    m: float
    m_x: float
    m_y: float
    I_z: float
    J_z: float
    x_G: float
    L: float
    T_d: float
    rho: float = 1000.0
    R0_prime: float = 0.022

    def __post_init__(self):
        for name in ("m", "I_z", "L", "T_d", "rho"):
            if not getattr(self, name) > 0:
                raise ValueError(f"ShipParams.{name} must be > 0")
        for name in ("m_x", "m_y", "J_z"):
            if getattr(self, name) < 0:
                raise ValueError(f"ShipParams.{name} must be >= 0")


@dataclass(frozen=True)
class HullDerivatives:
    X_bb: float = 0.0
    X_br: float = 0.0
    X_rr: float = 0.0
    X_bbbb: float = 0.0
    Y_b: float = 0.0
    Y_r: float = 0.0
    Y_bbb: float = 0.0
    Y_bbr: float = 0.0
    Y_brr: float = 0.0
    Y_rrr: float = 0.0
    N_b: float = 0.0
    N_r: float = 0.0
    N_bbb: float = 0.0
    N_bbr: float = 0.0
    N_brr: float = 0.0
    N_rrr: float = 0.0

    def __post_init__(self):
        for k, val in self.__dict__.items():
            if not math.isfinite(val):
                raise ValueError(f"HullDerivatives.{k} is not finite")


@dataclass(frozen=True)
class DerivedKinematics:
    U: float
    beta_m: float
    r_prime: float


def derived_kinematics(s, p):
    U = math.sqrt(s.u * s.u + s.v * s.v)
    if U < U_EPS:
        return DerivedKinematics(U, 0.0, 0.0)
    return DerivedKinematics(U, math.atan2(-s.v, s.u), s.r * p.L / U)


def hull_forces(s, p, d):
    """Dimensional hull surge force, sway force and yaw moment (N, N, N*m)."""
    return kern.hull_forces(s.u, s.v, s.r, pack(p, d))


def rigid_body_accelerations(F, s, p):
    """Solve the surge row directly and the coupled sway/yaw rows jointly.

    ``F`` is the total (X, Y, N) acting on the vessel.
    """
    a11 = p.m + p.m_y
    a12 = p.x_G * p.m
    a22 = p.I_z + p.x_G ** 2 * p.m + p.J_z
    det = a11 * a22 - a12 * a12
    if not abs(det) > 1e-12 * abs(a11 * a22):
        raise SingularMassMatrix(f"sway/yaw mass matrix determinant {det!r}")
    X, Y, N = F
    return kern.accelerations(float(X), float(Y), float(N), s.u, s.v, s.r, pack(p))


def state_derivative(s, F, p, current=(0.0, 0.0)):
    """Six-vector (dx, dy, dpsi, du, dv, dr) for given total forces."""
    du, dv, dr = rigid_body_accelerations(F, s, p)
    c, sn = math.cos(s.psi), math.sin(s.psi)
    return np.array([s.u * c - s.v * sn + current[0], s.u * sn + s.v * c + current[1],
                     s.r, du, dv, dr])


def integrate_step(s, ship, delta, n_P, dt):
    """One RK4 step of the full hull + propeller + rudder model.

    ``ship`` is anything exposing the packed parameter vector as ``.vector``
    (see :class:`absim.ship.Ship`). Rudder angle and propeller speed are held
    over the step; forces are recomputed at every stage.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    out = VesselState.from_seq(kern.rk4_step(s.as_tuple(), float(delta), float(n_P), float(dt), ship.vector))
    if not out.is_finite():
        raise NonFiniteState(f"non-finite state after step: {out}")
    return out


def wrapped(s):
    return replace(s, psi=wrap_angle(s.psi))
