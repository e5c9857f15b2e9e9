"""Route-following performance indices computed from waypoints and a run log.

Time integrals are left-Riemann sums on the simulation step.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from absim._util import wrap_angle


class MetricsError(ValueError):
    pass


class TooFewWaypoints(MetricsError):
    pass


class TooFewSamples(MetricsError):
    pass


class ZeroSpeed(MetricsError):
    pass


class LengthMismatch(MetricsError):
    pass


class DegeneratePath(MetricsError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    D_nominal: float
    T_nominal: float
    D_actual: float
    T_actual: float
    psi_e_c_signed: float
    psi_e_c_abs: float
    CXTE: float
    outcome: str = "reached"

    @property
    def psi_e_c(self):
        return self.psi_e_c_signed

    def to_dict(self):
        return asdict(self)


def nominal_distance(wps):
    if len(wps) < 2:
        raise TooFewWaypoints("need at least two waypoints")
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(wps, wps[1:])))


def nominal_time(D_nominal, v_ref):
    if v_ref <= 0:
        raise ZeroSpeed("v_ref must be > 0")
    return D_nominal / v_ref


def actual_distance(xy):
    if len(xy) < 2:
        raise TooFewSamples("need at least two samples")
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(xy, xy[1:])))


def actual_time(iterations, dt):
    return dt * iterations


def cumulative_heading_error(psi, psi_d, dt):
    """(signed, absolute) sums of wrapped psi - psi_d times dt."""
    if len(psi) != len(psi_d):
        raise LengthMismatch(f"{len(psi)} headings vs {len(psi_d)} references")
    errs = [wrap_angle(a - b) for a, b in zip(psi, psi_d)]
    return sum(errs) * dt, sum(abs(e) for e in errs) * dt


def closest_point_distances(xy, path):
    """Distance from every sample to the path polyline (segment projection,
    clamped to segment ends)."""
    P = np.asarray(path, dtype=float)
    if len(P) < 2:
        raise DegeneratePath("path needs at least two points")
    A, B = P[:-1], P[1:]
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    if not np.any(L2 > 0):
        raise DegeneratePath("path has zero length")
    X = np.asarray(xy, dtype=float).reshape(-1, 2)
    out = np.empty(len(X))
    safe = np.where(L2 > 0, L2, 1.0)
    for n, q in enumerate(X):
        t = np.clip(((q - A) * AB).sum(axis=1) / safe, 0.0, 1.0)
        t = np.where(L2 > 0, t, 0.0)
        C = A + t[:, None] * AB
        d = np.hypot(q[0] - C[:, 0], q[1] - C[:, 1])
        out[n] = d[int(np.argmin(d))]  # argmin returns the earliest segment on ties
    return out


def cxte(xy, path, dt):
    return float(closest_point_distances(xy, path).sum() * dt)


