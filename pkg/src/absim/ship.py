"""Ship configuration: parameter groups, shallow-water resistance scaling and
the commanded-speed to propeller-speed table."""
import json
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources

import numpy as np

from absim._layout import pack
from absim.actuators import PropellerParams, RudderParams
from absim.vessel_model import HullDerivatives, ShipParams

DEFAULT_SHIP_FILE = "default_ship.json"


def load_default_ship_dict():
    text = resources.files("absim").joinpath("data", DEFAULT_SHIP_FILE).read_text(encoding="utf-8")
    return json.loads(text)


def shallow_water_multiplier(table, h_over_T):
    """Linear interpolation in the (h/T, multiplier) table, clamped at the ends."""
    if not table:
        return 1.0
    xs = [float(a) for a, _ in table]
    ys = [float(b) for _, b in table]
    return float(np.interp(h_over_T, xs, ys))


@dataclass(frozen=True)
class Ship:
    params: ShipParams
    hull: HullDerivatives
    prop: PropellerParams
    rudder: RudderParams
    shallow_water: tuple = ()
    water_depth: float = math.inf
    current: tuple = (0.0, 0.0)
    vector: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sw = tuple((float(a), float(b)) for a, b in self.shallow_water)
        object.__setattr__(self, "shallow_water", sw)
        object.__setattr__(self, "current", (float(self.current[0]), float(self.current[1])))
        eff = replace(self.params, R0_prime=self.effective_R0())
        vec = pack(eff, self.hull, self.prop, self.rudder, current=self.current)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    def effective_R0(self):
        if not math.isfinite(self.water_depth):
            return self.params.R0_prime
        mult = shallow_water_multiplier(self.shallow_water, self.water_depth / self.params.T_d)
        return self.params.R0_prime * mult

    def with_environment(self, water_depth=None, current=None):
        return Ship(self.params, self.hull, self.prop, self.rudder, self.shallow_water,
                    self.water_depth if water_depth is None else float(water_depth),
                    self.current if current is None else tuple(current))

    @classmethod
    def from_dict(cls, d, water_depth=math.inf, current=(0.0, 0.0)):
        prop = dict(d["propeller"])
        if "kt_coeffs" in prop:
            prop["kt_coeffs"] = tuple(prop["kt_coeffs"])
        return cls(
            params=ShipParams(**d["params"]),
            hull=HullDerivatives(**d["hull"]),
            prop=PropellerParams(**prop),
            rudder=RudderParams(**d["rudder"]),
            shallow_water=tuple(tuple(row) for row in d.get("shallow_water", ())),
            water_depth=water_depth,
            current=current,
        )

    @classmethod
    def default(cls, water_depth=math.inf, current=(0.0, 0.0)):
        return cls.from_dict(load_default_ship_dict(), water_depth, current)

    def to_dict(self):
        def dc(obj):
            return {f.name: getattr(obj, f.name) for f in fields(obj)}

        prop = dc(self.prop)
        prop["kt_coeffs"] = list(prop["kt_coeffs"])
        return {"params": dc(self.params), "hull": dc(self.hull), "propeller": prop,
                "rudder": dc(self.rudder), "shallow_water": [list(r) for r in self.shallow_water]}

    # --- speed <-> propeller revolutions -------------------------------

    def steady_rps(self, u):
        """Propeller rev/s holding surge speed ``u`` on a straight course.

        Thrust balances the straight-ahead hull resistance, which is a
        quadratic in n once K_T(J) is expanded.
        """
        if u <= 0.0:
            return 0.0
        p = self.prop
        k0, k1, k2 = p.kt_coeffs
        rho = self.params.rho
        D = p.D_P
        up = u * (1.0 - p.w_P)
        c0 = (1.0 - p.t_ded) * rho
        a = c0 * D ** 4 * k0
        b = c0 * D ** 3 * k1 * up
        resist = 0.5 * rho * self.params.L * self.params.T_d * u * u * self.effective_R0()
        c = c0 * D ** 2 * k2 * up * up - resist
        if abs(a) < 1e-300:
            return -c / b
        disc = b * b - 4 * a * c
        if disc < 0:
            raise ValueError(f"no propeller speed sustains u={u}")
        return (-b + math.sqrt(disc)) / (2 * a)

    def speed_table(self, u_max, n=201):
        us = np.linspace(0.0, u_max, n)
        return us, np.array([self.steady_rps(u) for u in us])


class SpeedMap:
    """Commanded speed to propeller rev/s via a table sampled once."""

    def __init__(self, ship, u_max, n=201):
        self.u, self.n = ship.speed_table(u_max, n)

    def rps(self, U_cmd):
        return float(np.interp(U_cmd, self.u, self.n))
