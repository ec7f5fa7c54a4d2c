"""Longitudinal truck model in the distance domain.

Four driving modes share the resistance force and engine-speed relation but
each has its own dynamics ``dv/ds`` and fuel use:

* cruising (gear y): constant velocity, engine delivers exactly the resistance torque
* eco-roll (neutral): clutch open, engine idles and burns idle fuel
* coasting (gear y): clutch closed, zero fuel, engine friction drags the truck
* engine-brake (gear y): coasting plus a constant retarder torque, zero fuel

Velocities are in m/s, engine speed in RPM, torque in N m and fuel in grams.
The road is assumed flat.

Note: the internal resistance torque in the coasting and engine-brake
dynamics is taken to be the engine friction torque ``gamma0 + gamma1 * omega``.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

RPM_PER_RAD_S = 30.0 / math.pi


class ModeKind(enum.IntEnum):
    CRUISING = 0
    ECO_ROLL = 1
    COASTING = 2
    ENGINE_BRAKE = 3


_SHORT = {ModeKind.CRUISING: "cr", ModeKind.ECO_ROLL: "ec",
          ModeKind.COASTING: "co", ModeKind.ENGINE_BRAKE: "eb"}
_FROM_SHORT = {v: k for k, v in _SHORT.items()}


@dataclass(frozen=True, order=True)
class DrivingMode:
    """A driving mode and its gear. Eco-roll always runs in neutral (gear 0)."""

    kind: ModeKind
    gear: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if self.kind == ModeKind.ECO_ROLL:
            if self.gear != 0:
                raise ValidationError("eco-roll must use gear 0")
        elif self.gear < 1:
            raise ValidationError(f"{self.kind.name.lower()} needs a driving gear >= 1")

    @classmethod
    def cruising(cls, gear):
        return cls(ModeKind.CRUISING, gear)

    @classmethod
    def eco_roll(cls):
        return cls(ModeKind.ECO_ROLL, 0)

    @classmethod
    def coasting(cls, gear):
        return cls(ModeKind.COASTING, gear)

    @classmethod
    def engine_brake(cls, gear):
        return cls(ModeKind.ENGINE_BRAKE, gear)

    @property
    def engaged(self):
        return self.kind != ModeKind.ECO_ROLL

    @classmethod
    def parse(cls, text):
        """Inverse of ``str(mode)``, e.g. ``"co8"`` or ``"ec"``."""
        text = text.strip()
        kind = _FROM_SHORT.get(text[:2])
        if kind is None:
            raise ValidationError(f"unknown driving mode {text!r}")
        gear = int(text[2:]) if len(text) > 2 else 0
        return cls(kind, gear)

    def __str__(self):
        if self.kind == ModeKind.ECO_ROLL:
            return "ec"
        return f"{_SHORT[self.kind]}{self.gear}"


@dataclass(frozen=True)
class EngineEnvelope:
    """Admissible engine operating region.

    Engine speed is confined to a constant band; the full-load torque is a
    piecewise-linear table over engine speed (held constant beyond its ends).
    The default table is a plausible heavy-duty shape only and should be
    replaced with measured data for quantitative work.
    """

    omega_min: float = 600.0
    omega_max: float = 2000.0
    torque_curve_rpm: tuple = (450.0, 600.0, 800.0, 1000.0, 1400.0, 1600.0, 1800.0, 2000.0)
    torque_curve_nm: tuple = (900.0, 1400.0, 2000.0, 2500.0, 2500.0, 2250.0, 1950.0, 1650.0)

    def __post_init__(self):
        object.__setattr__(self, "torque_curve_rpm", tuple(float(x) for x in self.torque_curve_rpm))
        object.__setattr__(self, "torque_curve_nm", tuple(float(x) for x in self.torque_curve_nm))
        if not self.omega_min < self.omega_max:
            raise ValidationError("omega_min must be below omega_max")
        if len(self.torque_curve_rpm) != len(self.torque_curve_nm) or len(self.torque_curve_rpm) < 2:
            raise ValidationError("torque curve needs at least two matching points")
        if np.any(np.diff(self.torque_curve_rpm) <= 0):
            raise ValidationError("torque curve speeds must be strictly increasing")
        if self.max_torque(np.linspace(self.omega_min, self.omega_max, 101)).min() <= 0:
            raise ValidationError("maximum torque must be positive inside the speed band")

    def max_torque(self, omega):
        return np.interp(omega, self.torque_curve_rpm, self.torque_curve_nm)

    def speed_ok(self, omega):
        return (omega >= self.omega_min) & (omega <= self.omega_max)


@dataclass(frozen=True)
class TruckConfig:
    """Physical and powertrain parameters. Defaults are the 25.2 t reference truck.

    ``gear_ratios[0]`` is neutral (0); ``powertrain_inertia[y - 1]`` belongs to gear ``y``.
    """

    mass: float = 25200.0
    c_r: float = 9.57e-3
    c_d: float = 0.41
    frontal_area: float = 10.2
    air_density: float = 1.204
    gravity: float = 9.81
    final_drive: float = 3.08
    wheel_radius: float = 0.496
    gear_ratios: tuple = (0.0, 14.12, 9.54, 6.52, 4.75, 3.09, 2.09, 1.43, 1.0)
    driveline_inertia: float = 83.77
    powertrain_inertia: tuple = (3983.74, 1864.56, 916.41, 526.28, 271.06, 169.60, 123.97, 103.42)
    omega_idle: float = 450.0
    mdot_idle: float = 0.09542
    brake_torque: float = 1278.0
    beta: tuple = (0.3615, -8.521e-4, 5.816e-4, 4.489e-7, 5.866e-6, -4.083e-7)
    gamma: tuple = (-16.87, 0.2899)
    envelope: EngineEnvelope = field(default_factory=EngineEnvelope)
    eco_roll_enabled: bool = True

    def __post_init__(self):
        for name in ("gear_ratios", "powertrain_inertia", "beta", "gamma"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if self.mass <= 0 or self.wheel_radius <= 0 or self.final_drive <= 0:
            raise ValidationError("mass, wheel_radius and final_drive must be positive")
        ratios = self.gear_ratios
        if len(ratios) < 2 or ratios[0] != 0.0:
            raise ValidationError("gear_ratios must start with neutral (0) and hold at least one gear")
        if any(r <= 0 for r in ratios[1:]) or any(b >= a for a, b in zip(ratios[1:], ratios[2:])):
            raise ValidationError("driving gear ratios must be positive and strictly decreasing")
        if len(self.powertrain_inertia) != self.n_gears:
            raise ValidationError("need one powertrain inertia per driving gear")
        if any(j <= 0 for j in self.powertrain_inertia) or self.driveline_inertia <= 0:
            raise ValidationError("inertias must be positive")
        if self.mdot_idle <= 0 or self.omega_idle <= 0:
            raise ValidationError("idle fuel rate and idle speed must be positive")
        if len(self.beta) != 6 or len(self.gamma) != 2:
            raise ValidationError("beta needs 6 and gamma 2 coefficients")

    @property
    def n_gears(self):
        return len(self.gear_ratios) - 1

    @property
    def drag_factor(self):
        """``a`` in ``F_res = a v^2 + b``."""
        return 0.5 * self.air_density * self.c_d * self.frontal_area

    @property
    def rolling_force(self):
        """``b`` in ``F_res = a v^2 + b`` (flat road)."""
        return self.mass * self.gravity * self.c_r

    def speed_factor(self, gear):
        """Engine RPM per m/s of vehicle speed in ``gear``."""
        return RPM_PER_RAD_S * self.gear_ratios[gear] * self.final_drive / self.wheel_radius

    def wheel_torque_factor(self, gear):
        """Wheel force per unit engine torque in ``gear`` [1/m]."""
        return self.final_drive * self.gear_ratios[gear] / self.wheel_radius

    def effective_inertia(self, mode):
        """``m r_w^2 + J`` for the mode [kg m^2]."""
        r2 = self.wheel_radius ** 2
        if mode.kind == ModeKind.ECO_ROLL:
            return self.mass * r2 + self.driveline_inertia
        return self.mass * r2 + self.powertrain_inertia[mode.gear - 1]

    def modes(self):
        """All ``3n + 1`` driving modes."""
        out = [DrivingMode.cruising(y) for y in range(1, self.n_gears + 1)]
        out.append(DrivingMode.eco_roll())
        out += [DrivingMode.coasting(y) for y in range(1, self.n_gears + 1)]
        out += [DrivingMode.engine_brake(y) for y in range(1, self.n_gears + 1)]
        return out

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def default(cls):
        return cls()

    @classmethod
    def from_file(cls, path):
        return loads_config(Path(path).read_text(), path=path)

    def to_file(self, path):
        Path(path).write_text(dumps_config(self))


def _check_v(v):
    if np.any(np.asarray(v) <= 0):
        raise ValueError("velocity must be positive")


def engine_speed(cfg, mode, v):
    """Engine speed [RPM]; idle speed when the clutch is open."""
    if mode.kind == ModeKind.ECO_ROLL:
        return np.full_like(np.asarray(v, dtype=float), cfg.omega_idle)[()]
    return cfg.speed_factor(mode.gear) * v


def resistance_force(cfg, v):
    """Aerodynamic drag plus rolling resistance [N]."""
    return cfg.drag_factor * v * v + cfg.rolling_force


def fuel_rate(cfg, torque, omega):
    """Fuel map polynomial [g/s]."""
    b0, b1, b2, b3, b4, b5 = cfg.beta
    return b0 + b1 * omega + b2 * torque + b3 * omega * omega + b4 * omega * torque + b5 * torque * torque


def internal_friction_torque(cfg, omega):
    g0, g1 = cfg.gamma
    return g0 + g1 * omega


def cruise_torque(cfg, gear, v):
    """Engine torque that holds ``v`` constant in ``gear``."""
    return resistance_force(cfg, v) / cfg.wheel_torque_factor(gear)


def mode_dvds(cfg, mode, v):
    """Velocity gradient ``dv/ds`` [1/s] of ``mode`` at ``v``."""
    _check_v(v)
    if mode.kind == ModeKind.CRUISING:
        return np.zeros_like(np.asarray(v, dtype=float))[()]
    r2 = cfg.wheel_radius ** 2
    num = resistance_force(cfg, v)
    if mode.kind != ModeKind.ECO_ROLL:
        torque = internal_friction_torque(cfg, engine_speed(cfg, mode, v))
        if mode.kind == ModeKind.ENGINE_BRAKE:
            torque = torque + cfg.brake_torque
        num = cfg.wheel_torque_factor(mode.gear) * torque + num
    return -r2 * num / (cfg.effective_inertia(mode) * v)


def mode_fuel_rate(cfg, mode, v):
    """Fuel mass rate [g/s] of ``mode`` at ``v``."""
    _check_v(v)
    if mode.kind == ModeKind.CRUISING:
        return fuel_rate(cfg, cruise_torque(cfg, mode.gear, v), engine_speed(cfg, mode, v))
    if mode.kind == ModeKind.ECO_ROLL:
        return np.full_like(np.asarray(v, dtype=float), cfg.mdot_idle)[()]
    return np.zeros_like(np.asarray(v, dtype=float))[()]


def mode_fuel_per_meter(cfg, mode, v):
    """Fuel use per distance [g/m]."""
    return mode_fuel_rate(cfg, mode, v) / v


def running_cost(cfg, mode, v, w_f, w_t):
    """Cost per metre ``(w_f * mdot + w_t) / v``."""
    return (w_f * mode_fuel_rate(cfg, mode, v) + w_t) / v


def mode_derivatives(cfg, mode, v, w_f=1.0, w_t=0.0):
    """Return ``(df/dv, dg/dv)`` for the mode dynamics ``f`` and running cost ``g``.

    The cruising derivative follows the torque and engine speed through their
    dependence on ``v``.
    """
    _check_v(v)
    v = np.asarray(v, dtype=float)
    a, b = cfg.drag_factor, cfg.rolling_force
    kind = mode.kind
    if kind == ModeKind.CRUISING:
        b0, b1, b2, b3, b4, b5 = cfg.beta
        c = cfg.speed_factor(mode.gear)
        kinv = 1.0 / cfg.wheel_torque_factor(mode.gear)
        omega = c * v
        torque = (a * v * v + b) * kinv
        mdot = fuel_rate(cfg, torque, omega)
        dmdot = (b1 + 2.0 * b3 * omega + b4 * torque) * c + (b2 + b4 * omega + 2.0 * b5 * torque) * (2.0 * a * v * kinv)
        dfdv = np.zeros_like(v)
        dgdv = (w_f * dmdot * v - (w_f * mdot + w_t)) / (v * v)
        return dfdv[()], dgdv[()]
    q = cfg.wheel_radius ** 2 / cfg.effective_inertia(mode)
    if kind == ModeKind.ECO_ROLL:
        dfdv = -q * (a * v * v - b) / (v * v)
        dgdv = -(w_f * cfg.mdot_idle + w_t) / (v * v)
        return dfdv[()], dgdv[()]
    k = cfg.wheel_torque_factor(mode.gear)
    c = cfg.speed_factor(mode.gear)
    g0, g1 = cfg.gamma
    extra = cfg.brake_torque if kind == ModeKind.ENGINE_BRAKE else 0.0
    num = k * (g0 + g1 * c * v + extra) + a * v * v + b
    dnum = k * g1 * c + 2.0 * a * v
    dfdv = -q * (dnum * v - num) / (v * v)
    dgdv = -w_t / (v * v)
    return dfdv[()], dgdv[()]


def mode_feasible(cfg, mode, v):
    """Whether ``mode`` respects the engine-speed band and full-load torque at ``v``."""
    if mode.kind == ModeKind.ECO_ROLL:
        return cfg.eco_roll_enabled
    omega = engine_speed(cfg, mode, v)
    ok = bool(cfg.envelope.speed_ok(omega))
    if ok and mode.kind == ModeKind.CRUISING:
        ok = bool(cruise_torque(cfg, mode.gear, v) <= cfg.envelope.max_torque(omega))
    return ok


# -- key/value configuration files -------------------------------------------

_SCALAR_KEYS = {
    "mass_kg": "mass",
    "roll_resistance": "c_r",
    "drag_coefficient": "c_d",
    "frontal_area_m2": "frontal_area",
    "air_density_kgm3": "air_density",
    "gravity_ms2": "gravity",
    "final_drive_ratio": "final_drive",
    "wheel_radius_m": "wheel_radius",
    "driveline_inertia_neutral_kgm2": "driveline_inertia",
    "idle_speed_rpm": "omega_idle",
    "idle_fuel_gs": "mdot_idle",
    "service_brake_torque_nm": "brake_torque",
}


def _fmt(x):
    return repr(float(x))


def dumps_config(cfg):
    lines = ["# truck parameters; units are part of each key"]
    inv = {v: k for k, v in _SCALAR_KEYS.items()}
    for f in ("mass", "c_r", "c_d", "frontal_area", "air_density", "gravity",
              "final_drive", "wheel_radius"):
        lines.append(f"{inv[f]} = {_fmt(getattr(cfg, f))}")
    for y, r in enumerate(cfg.gear_ratios):
        lines.append(f"gear_ratio_{y} = {_fmt(r)}")
    lines.append(f"driveline_inertia_neutral_kgm2 = {_fmt(cfg.driveline_inertia)}")
    for y, j in enumerate(cfg.powertrain_inertia, start=1):
        lines.append(f"powertrain_inertia_{y}_kgm2 = {_fmt(j)}")
    for f in ("omega_idle", "mdot_idle", "brake_torque"):
        lines.append(f"{inv[f]} = {_fmt(getattr(cfg, f))}")
    for i, b in enumerate(cfg.beta):
        lines.append(f"beta_{i} = {_fmt(b)}")
    for i, g in enumerate(cfg.gamma):
        lines.append(f"gamma_{i} = {_fmt(g)}")
    env = cfg.envelope
    lines.append(f"omega_min_rpm = {_fmt(env.omega_min)}")
    lines.append(f"omega_max_rpm = {_fmt(env.omega_max)}")
    lines.append("torque_curve_rpm = " + ", ".join(_fmt(x) for x in env.torque_curve_rpm))
    lines.append("torque_curve_nm = " + ", ".join(_fmt(x) for x in env.torque_curve_nm))
    lines.append(f"eco_roll_enabled = {'true' if cfg.eco_roll_enabled else 'false'}")
    return "\n".join(lines) + "\n"


def loads_config(text, path=None):
    """Parse a flat ``key = value`` truck file. Missing keys keep their defaults."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", path, lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", path, lineno)
        raw[key] = (value, lineno)

    def num(key):
        value, lineno = raw.pop(key)
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{key}: not a number: {value!r}", path, lineno) from None

    def numlist(key):
        value, lineno = raw.pop(key)
        try:
            return tuple(float(x) for x in value.split(","))
        except ValueError:
            raise ParseError(f"{key}: bad number list {value!r}", path, lineno) from None

    kw = {}
    for key, attr in _SCALAR_KEYS.items():
        if key in raw:
            kw[attr] = num(key)

    def indexed(prefix, suffix=""):
        found = {}
        for key in list(raw):
            if key.startswith(prefix) and key.endswith(suffix):
                idx = key[len(prefix):len(key) - len(suffix)]
                if idx.isdigit():
                    found[int(idx)] = num(key)
        return found

    ratios = indexed("gear_ratio_")
    if ratios:
        if sorted(ratios) != list(range(len(ratios))):
            raise ParseError("gear_ratio_<y> keys must run 0..n without gaps", path)
        kw["gear_ratios"] = tuple(ratios[i] for i in range(len(ratios)))
    inertia = indexed("powertrain_inertia_", "_kgm2")
    if inertia:
        if sorted(inertia) != list(range(1, len(inertia) + 1)):
            raise ParseError("powertrain_inertia_<y>_kgm2 keys must run 1..n without gaps", path)
        kw["powertrain_inertia"] = tuple(inertia[i] for i in range(1, len(inertia) + 1))
    beta = indexed("beta_")
    if beta:
        kw["beta"] = tuple(beta.get(i, 0.0) for i in range(6))
    gamma = indexed("gamma_")
    if gamma:
        kw["gamma"] = tuple(gamma.get(i, 0.0) for i in range(2))

    env_kw = {}
    if "omega_min_rpm" in raw:
        env_kw["omega_min"] = num("omega_min_rpm")
    if "omega_max_rpm" in raw:
        env_kw["omega_max"] = num("omega_max_rpm")
    if "torque_curve_rpm" in raw:
        env_kw["torque_curve_rpm"] = numlist("torque_curve_rpm")
    if "torque_curve_nm" in raw:
        env_kw["torque_curve_nm"] = numlist("torque_curve_nm")
    if "eco_roll_enabled" in raw:
        value, lineno = raw.pop("eco_roll_enabled")
        if value.lower() not in ("true", "false", "1", "0"):
            raise ParseError(f"eco_roll_enabled: expected true/false, got {value!r}", path, lineno)
        kw["eco_roll_enabled"] = value.lower() in ("true", "1")
    if raw:
        key, (_, lineno) = next(iter(raw.items()))
        raise ParseError(f"unknown key {key!r}", path, lineno)
    if env_kw:
        kw["envelope"] = EngineEnvelope(**env_kw)
    return TruckConfig(**kw)


def default_config_path():
    return resources.files("ecodrive") / "data" / "truck_default.cfg"


