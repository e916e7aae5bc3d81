"""Strict structured-text (YAML) run configuration.

Unknown keys are rejected; physical quantities are range-checked.  A parsed
RunConfig carries plain dataclass blocks mirroring the file sections.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field

import yaml

from .errors import ConfigError

_DEFAULTS = {
    "eos": {
        "gamma": 5.0 / 3.0,
        "A_const": 1.0,
        "c_light": 1.0,
        "upsilon_rho": [],
        "upsilon_P": "consistent",
        "series_radius": 1.0,
    },
    "star": {
        "u_O": 1e-3,
        "Omega_O": None,
        "b_rot": 1e-3,
        "G_grav": 1.0,
    },
    "grid": {
        "n_interior": 129,
        "n_exterior": 97,
    },
    "lane_emden": {
        "n_radial": 1025,
        "n_zeta": 48,
        "lmax": 12,
        "tol": 1e-11,
        "max_iter": 400,
        "damping": 0.8,
        "report_grid": 129,
    },
    "solver": {
        "tol_inner": 1e-10,
        "tol_outer": 1e-9,
        "max_inner": 40,
        "max_outer": 30,
        "damping": 1.0,
        "newtonian_tol": 1e-12,
        "beta0": 0.1,
        "delta0": 0.01,
        "alpha_holder": 0.25,
        "ball_M": 50.0,
    },
    "verify": {
        "fit_window": [5.0, 15.0],
        "residual_order_min": 1.2,
        "axis_strip_r1": 0.3,
    },
    "kerr": {
        "m_geom": 1.0,
        "a_spin": 0.5,
        "window": 12.0,
        "levels": [61, 121, 241],
        "margin": 2.6,
        "measure_margin": 4.5,
    },
    "tov": {
        "rtol": 1e-11,
    },
    "output": {
        "directory": "runs/out",
        "formats": ["binary"],
        "quiet": False,
    },
    "sweep": {
        "param": "u_O",
        "values": [1e-3, 5e-4, 2.5e-4],
        "workers": 2,
    },
}


def _merge_strict(section, defaults, given, path):
    out = dict(defaults)
    for key, val in (given or {}).items():
        if key not in defaults:
            raise ConfigError(f"unknown key {path}.{key}")
        out[key] = val
    return out


@dataclass
class RunConfig:
    eos: dict
    star: dict
    grid: dict
    lane_emden: dict
    solver: dict
    verify: dict
    kerr: dict
    tov: dict
    output: dict
    sweep: dict

    def to_dict(self):
        return asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _validate(cfg):
    e = cfg.eos
    if not (6.0 / 5.0 < e["gamma"] < 2.0):
        raise ConfigError(f"eos.gamma={e['gamma']} outside (6/5, 2)")
    for key in ("A_const", "c_light", "series_radius"):
        if not e[key] > 0:
            raise ConfigError(f"eos.{key} must be positive")
    s = cfg.star
    if not s["u_O"] > 0:
        raise ConfigError("star.u_O must be positive")
    if not s["G_grav"] > 0:
        raise ConfigError("star.G_grav must be positive")
    if (s["Omega_O"] is None) == (s["b_rot"] is None):
        raise ConfigError("star: specify exactly one of Omega_O and b_rot")
    g = cfg.grid
    if g["n_interior"] < 17 or g["n_exterior"] < 13:
        raise ConfigError("grid resolutions too small")
    k = cfg.kerr
    if k["m_geom"] <= 0:
        raise ConfigError("kerr.m_geom must be positive")
    if abs(k["a_spin"]) > k["m_geom"]:
        raise ConfigError("kerr.a_spin must satisfy |a| <= m_geom")
    if cfg.sweep["workers"] < 1:
        raise ConfigError("sweep.workers must be >= 1")
    return cfg


def load_config(path=None, overrides=None):
    """Parse, merge with defaults, and validate a YAML config file."""
    given = {}
    if path is not None:
        with open(path) as fh:
            given = yaml.safe_load(fh) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    for key in given:
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown section {key!r}")
    merged = {
        name: _merge_strict(name, defaults, given.get(name), name)
        for name, defaults in _DEFAULTS.items()
    }
    if overrides:
        for dotted, val in overrides.items():
            sec, key = dotted.split(".", 1)
            if sec not in merged or key not in merged[sec]:
                raise ConfigError(f"unknown override {dotted}")
            merged[sec][key] = val
    return _validate(RunConfig(**merged))


def build_eos(cfg):
    from .eos import EquationOfState, consistent_upsilon_P

    e = cfg.eos
    ups_P = e["upsilon_P"]
    if ups_P == "consistent":
        ups_P = consistent_upsilon_P(e["gamma"], tuple(e["upsilon_rho"]), 6)
    return EquationOfState(
        gamma=e["gamma"],
        A_const=e["A_const"],
        c_light=e["c_light"],
        upsilon_rho=tuple(e["upsilon_rho"]),
        upsilon_P=tuple(ups_P),
        series_radius=e["series_radius"],
    )


def build_params(cfg, classical=None):
    from .pn import StarParams

    s = cfg.star
    e = cfg.eos
    return StarParams.build(
        gamma=e["gamma"],
        A_const=e["A_const"],
        c_light=e["c_light"],
        G_grav=s["G_grav"],
        u_O=s["u_O"],
        Omega_O=s["Omega_O"],
        b_rot=s["b_rot"],
        classical=classical,
    )


def build_solver_options(cfg):
    from .pn import SolverOptions

    s = cfg.solver
    le = cfg.lane_emden
    return SolverOptions(
        n_interior=cfg.grid["n_interior"],
        n_exterior=cfg.grid["n_exterior"],
        tol_inner=s["tol_inner"],
        tol_outer=s["tol_outer"],
        max_inner=s["max_inner"],
        max_outer=s["max_outer"],
        damping=s["damping"],
        newtonian_tol=s["newtonian_tol"],
        le_radial=le["n_radial"],
        le_zeta=le["n_zeta"],
        le_lmax=le["lmax"],
        le_tol=le["tol"],
        beta0=s["beta0"],
        delta0=s["delta0"],
        alpha_holder=s["alpha_holder"],
        ball_M=s["ball_M"],
        fit_window=tuple(cfg.verify["fit_window"]),
    )
