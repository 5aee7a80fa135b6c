"""
Scenario configuration and its flat ``key = value`` file format.

Keys carry their unit (``height_bs_m``, ``static_power_bs_dbm``). dB and
dBm values are converted to linear units while parsing; the dataclass
holds linear quantities only.
"""

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

from .geometry import DeploymentParams

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Malformed or invalid configuration; carries the offending line/field."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


def db_to_lin(x):
    return 10.0 ** (x / 10.0)


def dbm_to_w(x):
    return 10.0 ** (x / 10.0) / 1000.0


def lin_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ScenarioConfig:
    # deployment
    lambda_B: float = 1e-4
    M: int = 1500
    R: float = 700.0
    H_B: float = 20.0
    H_R: float = 10.0
    N: int = 50
    alpha: float = 4.0
    # powers, W
    P: float = 20.0
    P_hat: float = 20.0
    p_BS: float = 10.0
    p_U: float = 0.01
    P_r_b: float = 0.078
    # link budget
    tau: float = 0.1
    tau_grid_db: tuple = tuple(float(x) for x in range(-20, 21, 2))
    noise_psd: float = 1e-10      # W/Hz
    bandwidth: float = 1.0        # Hz
    f_c: float = 3.0e8            # Hz
    # user mix
    mix_source: str = "intensity_ratio"
    blockage_eta: float = 0.0
    blockage_u: float = 0.0
    blockage_scaling: bool = False
    # analysis choices
    signal_model: str = "coherent"
    z_form: str = "matched"
    r_moment_variant: str = "published"
    ir_sign: str = "corrected"
    t_rule: str = "colocated"
    interferer_phases: str = "aligned"
    condition_fields: bool = True
    ir_bs_exclusion: bool = False
    ir_model: str = "gaussian"
    t0_rule: str = "midpoint"
    conditioning: str = "median"
    taylor_order: int = 20
    gp_abs_tol: float = 1e-5
    gp_rel_tol: float = 1e-6
    # simulation
    n_trials: int = 100_000
    seed: int = 20240601
    pair_tolerance: float = 1e-4

    def __post_init__(self):
        # canonical types keep the digest independent of how a value was given
        object.__setattr__(self, "tau_grid_db", tuple(float(x) for x in self.tau_grid_db))
        try:
            self.deployment
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.N < 1:
            raise ConfigError("N must be >= 1", key="elements")
        if not self.alpha > 2:
            raise ConfigError("alpha must exceed 2", key="path_loss_exp")
        for k in ("P", "P_hat", "noise_psd", "bandwidth", "f_c", "tau"):
            if not getattr(self, k) > 0:
                raise ConfigError(f"{k} must be positive", key=k)
        for k in ("p_BS", "p_U", "P_r_b", "blockage_eta", "blockage_u"):
            if getattr(self, k) < 0:
                raise ConfigError(f"{k} must be >= 0", key=k)
        choices = {
            "mix_source": ("intensity_ratio", "blockage"),
            "signal_model": ("coherent", "gg_sum"),
            "z_form": ("matched", "published"),
            "r_moment_variant": ("published", "disk"),
            "ir_sign": ("corrected", "published"),
            "t_rule": ("midpoint", "colocated"),
            "ir_model": ("gaussian", "kernel"),
            "interferer_phases": ("aligned", "random"),
            "t0_rule": ("midpoint", "rms"),
            "conditioning": ("median", "marginal"),
        }
        for k, allowed in choices.items():
            if getattr(self, k) not in allowed:
                raise ConfigError(f"{getattr(self, k)!r} not in {allowed}", key=k)

    @property
    def deployment(self):
        return DeploymentParams(self.lambda_B, self.M, self.R, self.H_B, self.H_R)

    @property
    def beta_gain(self):
        """Reference power gain (4 pi f_c / c)^-2."""
        return (4 * math.pi * self.f_c / SPEED_OF_LIGHT) ** -2

    @property
    def noise(self):
        return self.noise_psd * self.bandwidth

    @property
    def lambda_R(self):
        return self.deployment.lambda_R

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# file key -> (field, converter)
_KEYS = {
    "bs_density_per_m2": ("lambda_B", float),
    "irs_count": ("M", int),
    "radius_m": ("R", float),
    "height_bs_m": ("H_B", float),
    "height_irs_m": ("H_R", float),
    "elements": ("N", int),
    "path_loss_exp": ("alpha", float),
    "tx_power_indirect_w": ("P", float),
    "tx_power_direct_w": ("P_hat", float),
    "tx_power_indirect_dbm": ("P", lambda v: dbm_to_w(float(v))),
    "tx_power_direct_dbm": ("P_hat", lambda v: dbm_to_w(float(v))),
    "static_power_bs_dbm": ("p_BS", lambda v: dbm_to_w(float(v))),
    "static_power_user_dbm": ("p_U", lambda v: dbm_to_w(float(v))),
    "static_power_bs_w": ("p_BS", float),
    "static_power_user_w": ("p_U", float),
    "phase_resolution_power_w": ("P_r_b", float),
    "sinr_threshold_db": ("tau", lambda v: db_to_lin(float(v))),
    "sinr_grid_db": ("tau_grid_db", lambda v: tuple(float(x) for x in _split(v))),
    "noise_psd_w_per_hz": ("noise_psd", float),
    "bandwidth_hz": ("bandwidth", float),
    "carrier_frequency_hz": ("f_c", float),
    "mix_source": ("mix_source", str),
    "blockage_eta_per_m": ("blockage_eta", float),
    "blockage_u": ("blockage_u", float),
    "blockage_scaling": ("blockage_scaling", lambda v: _bool(v)),
    "signal_model": ("signal_model", str),
    "irs_field_moments": ("z_form", str),
    "irs_distance_weight": ("r_moment_variant", str),
    "irs_transform_sign": ("ir_sign", str),
    "irs_bs_distance_rule": ("t_rule", str),
    "irs_interference_model": ("ir_model", str),
    "interferer_phases": ("interferer_phases", str),
    "condition_fields": ("condition_fields", lambda v: _bool(v)),
    "irs_interference_bs_exclusion": ("ir_bs_exclusion", lambda v: _bool(v)),
    "serving_irs_bs_distance": ("t0_rule", str),
    "conditioning": ("conditioning", str),
    "taylor_order": ("taylor_order", int),
    "gp_abs_tol": ("gp_abs_tol", float),
    "gp_rel_tol": ("gp_rel_tol", float),
    "n_trials": ("n_trials", int),
    "seed": ("seed", int),
    "pair_tolerance": ("pair_tolerance", float),
}


def _split(v):
    return [x for x in v.replace(",", " ").split() if x]


def _bool(v):
    v = v.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def parse_config_text(text, base=None):
    """Parse ``key = value`` lines (``#`` comments) into a ScenarioConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        name, conv = _KEYS[key]
        try:
            values[name] = conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value {val!r} ({exc})", line=lineno, key=key) from None
    base = base or ScenarioConfig()
    return base.replace(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


_BOOL_KEYS = {"blockage_scaling": "blockage_scaling", "condition_fields": "condition_fields",
              "ir_bs_exclusion": "irs_interference_bs_exclusion"}


def dump_config(cfg):
    """Render a config in the file format (linear keys)."""
    inv = {}
    for key, (name, conv) in _KEYS.items():
        if conv in (float, int, str) or name in ("tau_grid_db",):
            inv.setdefault(name, key)
    lines = []
    for name, val in cfg.to_dict().items():
        if name == "tau":
            lines.append(f"sinr_threshold_db = {lin_to_db(val):.12g}")
        elif name == "tau_grid_db":
            lines.append(f"sinr_grid_db = {' '.join(f'{x:g}' for x in val)}")
        elif name in _BOOL_KEYS:
            lines.append(f"{_BOOL_KEYS[name]} = {'true' if val else 'false'}")
        elif name in inv:
            lines.append(f"{inv[name]} = {val}")
    return "\n".join(lines) + "\n"
