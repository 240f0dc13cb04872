"""JSON scenario configuration: parsing, validation, defaults, round-trip.

Config files are flat JSON objects with a ``scenario`` name, run controls
(``rng_seed``, ``n_trials``, ``output_path``), optional parameter blocks
(``memory``, ``cavity``, ``pulse``, ``ensemble``, ``schedule``, ``link``),
and a scenario-specific ``options`` block.  Every key is optional except the
scenario; unknown keys are rejected.  Keys carry unit suffixes (_s seconds,
_m meters, _hz hertz, _g gauss, _g_per_cm gauss per centimeter).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .cavity import CavityParams, PulseSpec
from .ensemble import K_SW_DEFAULT, ZEEMAN_COEFF_DEFAULT
from .model import MemoryParams
from .repeater import LinkParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


SCENARIOS = (
    "mode-sweep",
    "max-modes",
    "cavity-design",
    "pulse-enhancement",
    "echo",
    "protocol-run",
    "crosstalk",
    "storage-decay",
    "repeater-rate",
)


@dataclass(frozen=True)
class EnsembleConfig:
    n_atoms: int = 10000
    cloud_sigma: float = 1e-3
    temperature: float = 40e-6
    k_sw: float | None = None
    zeeman_coeff: float = ZEEMAN_COEFF_DEFAULT

    @property
    def k_sw_value(self) -> float:
        return K_SW_DEFAULT if self.k_sw is None else self.k_sw


@dataclass(frozen=True)
class ScheduleConfig:
    mode_spacing: float = 800e-9
    write_duration: float = 266e-9
    gradient: float = 2.0
    bias: float = 0.0
    drift_rate: float = 0.0
    policy: str = "immediate_after_last"
    freeze_time: float | None = None
    release_time: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    rng_seed: int = 1
    n_trials: int = 100000
    output_path: str = "."
    memory: MemoryParams = field(default_factory=lambda: MemoryParams(
        p=0.045, eta_w=0.3, eta_r=0.25, p_int0=0.4, beta_ratio=14.0,
        xi_eg=1.0, n_modes=10, tau_mem=72e-6, decay_shape="exponential"))
    cavity: CavityParams = field(default_factory=lambda: CavityParams(0.14, 0.11, 0.877))
    pulse: PulseSpec = field(default_factory=lambda: PulseSpec(266e-9))
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    link: LinkParams = field(default_factory=lambda: LinkParams(100e3))
    options: dict = field(default_factory=dict)


def _num(path, v, lo=None, hi=None, unit=""):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number{unit and f' ({unit})'}, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite{unit and f' ({unit})'}")
    if lo is not None and v < lo or hi is not None and v > hi:
        rng = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise ConfigError(f"{path}: must be {rng}{unit and f' ({unit})'}, got {v}")
    return v


def _int(path, v, lo=None, unit=""):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer{unit and f' ({unit})'}, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: must be >= {lo}{unit and f' ({unit})'}, got {v}")
    return v


def _choice(path, v, allowed):
    if v not in allowed:
        raise ConfigError(f"{path}: must be one of {allowed}, got {v!r}")
    return v


def _num_list(path, v, lo=None, unit=""):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a non-empty list of numbers{unit and f' ({unit})'}")
    return [_num(f"{path}[{i}]", x, lo=lo, unit=unit) for i, x in enumerate(v)]


def _int_list(path, v, lo=None):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a non-empty list of integers")
    return [_int(f"{path}[{i}]", x, lo=lo) for i, x in enumerate(v)]


def _block(raw, path, spec):
    """Validate a dict block against {json_key: parser}; reject unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in raw:
        if key not in spec:
            raise ConfigError(f"{path}.{key}: unknown key (allowed: {sorted(spec)})")
    return {key: parser(f"{path}.{key}", raw[key]) for key, parser in spec.items()
            if key in raw}


_MEMORY_SPEC = {
    "p": lambda p, v: _num(p, v, 0, 1, "probability"),
    "eta_w": lambda p, v: _num(p, v, 0, 1, "efficiency"),
    "eta_r": lambda p, v: _num(p, v, 0, 1, "efficiency"),
    "p_int0": lambda p, v: _num(p, v, 0, 1, "efficiency"),
    "beta_ratio": lambda p, v: _num(p, v, 1, None, "dimensionless"),
    "xi_eg": lambda p, v: _num(p, v, 0, 1, "dimensionless"),
    "n_modes": lambda p, v: _int(p, v, 1),
    "tau_mem_s": lambda p, v: _num(p, v, 1e-12, None, "seconds"),
    "decay_shape": lambda p, v: _choice(p, v, ("exponential", "gaussian")),
}

_CAVITY_SPEC = {
    "transmission": lambda p, v: _num(p, v, 1e-6, 0.999999, "fraction"),
    "loss": lambda p, v: _num(p, v, 1e-6, 0.999999, "fraction"),
    "roundtrip_length_m": lambda p, v: _num(p, v, 1e-6, None, "meters"),
}

_PULSE_SPEC = {
    "duration_fwhm_s": lambda p, v: _num(p, v, 1e-12, None, "seconds"),
}

_ENSEMBLE_SPEC = {
    "n_atoms": lambda p, v: _int(p, v, 1),
    "cloud_sigma_m": lambda p, v: _num(p, v, 0, None, "meters"),
    "temperature_k": lambda p, v: _num(p, v, 0, None, "kelvin"),
    "k_sw_rad_per_m": lambda p, v: None if v is None else _num(p, v, 0, None, "rad/m"),
    "zeeman_coeff_hz_per_g": lambda p, v: _num(p, v, 0, None, "Hz/gauss"),
}

_SCHEDULE_SPEC = {
    "mode_spacing_s": lambda p, v: _num(p, v, 1e-12, None, "seconds"),
    "write_duration_s": lambda p, v: _num(p, v, 1e-12, None, "seconds"),
    "gradient_g_per_cm": lambda p, v: _num(p, v, None, None, "gauss/cm"),
    "bias_g": lambda p, v: _num(p, v, None, None, "gauss"),
    "drift_rate_per_s": lambda p, v: _num(p, v, None, None, "1/s"),
    "policy": lambda p, v: _choice(p, v, ("immediate_after_last", "freeze_release")),
    "freeze_time_s": lambda p, v: None if v is None else _num(p, v, 0, None, "seconds"),
    "release_time_s": lambda p, v: None if v is None else _num(p, v, 0, None, "seconds"),
}

_LINK_SPEC = {
    "distance_m": lambda p, v: _num(p, v, 1e-3, None, "meters"),
    "signal_velocity_m_per_s": lambda p, v: _num(p, v, 1.0, 299792458.0, "m/s"),
    "n_modes": lambda p, v: _int(p, v, 1),
    "herald_time_s": lambda p, v: _num(p, v, 0, None, "seconds"),
    "decision_delay_s": lambda p, v: _num(p, v, 0, None, "seconds"),
}

# Scenario-specific options: {key: (default, parser)}.
OPTION_SPECS = {
    "mode-sweep": {
        "beta_values": ([1.0, 11.0, 21.0, 31.0, 41.0, 51.0, 61.0, 71.0, 81.0],
                        lambda p, v: _num_list(p, v, lo=1, unit="dimensionless")),
        "n_modes_max": (60, lambda p, v: _int(p, v, 1)),
    },
    "max-modes": {
        "beta_values": ([float(b) for b in range(1, 82, 2)],
                        lambda p, v: _num_list(p, v, lo=1, unit="dimensionless")),
        "p_int_values": ([0.4, 0.55, 0.7, 0.85, 1.0],
                         lambda p, v: _num_list(p, v, lo=0, unit="efficiency")),
        "threshold": (5.8, lambda p, v: _num(p, v, 1.000001, None, "dimensionless")),
    },
    "cavity-design": {
        "t_min": (0.005, lambda p, v: _num(p, v, 1e-6, 0.999, "fraction")),
        "t_max": (0.5, lambda p, v: _num(p, v, 1e-6, 0.999, "fraction")),
        "n_points": (100, lambda p, v: _int(p, v, 2)),
    },
    "pulse-enhancement": {
        "durations_s": ([25e-9, 133e-9, 266e-9, 532e-9, 1064e-9],
                        lambda p, v: _num_list(p, v, lo=1e-12, unit="seconds")),
        "detuning_span_hz": (40e6, lambda p, v: _num(p, v, 0, None, "Hz")),
        "n_points": (81, lambda p, v: _int(p, v, 2)),
    },
    "echo": {
        "durations_s": ([133e-9, 266e-9, 532e-9, 1064e-9],
                        lambda p, v: _num_list(p, v, lo=1e-12, unit="seconds")),
        "reverse_time_s": (2e-6, lambda p, v: _num(p, v, 1e-9, None, "seconds")),
        "time_start_s": (2.5e-6, lambda p, v: _num(p, v, 0, None, "seconds")),
        "time_stop_s": (5.5e-6, lambda p, v: _num(p, v, 1e-9, None, "seconds")),
        "n_points": (181, lambda p, v: _int(p, v, 2)),
    },
    "protocol-run": {
        "n_modes_values": (list(range(1, 11)), lambda p, v: _int_list(p, v, lo=1)),
    },
    "crosstalk": {},
    "storage-decay": {
        "time_stop_s": (120e-6, lambda p, v: _num(p, v, 1e-9, None, "seconds")),
        "n_points": (61, lambda p, v: _int(p, v, 2)),
        "beta_nocavity": (1.0, lambda p, v: _num(p, v, 1, None, "dimensionless")),
    },
    "repeater-rate": {
        "per_mode_success": (1e-3, lambda p, v: _num(p, v, 0, 1, "probability")),
        "n_modes_values": (list(range(1, 11)), lambda p, v: _int_list(p, v, lo=1)),
    },
}

_TOP_KEYS = ("scenario", "rng_seed", "n_trials", "output_path",
             "memory", "cavity", "pulse", "ensemble", "schedule", "link", "options")


def parse_config(text: str, scenario: str | None = None) -> ScenarioConfig:
    """Parse and validate a JSON config string into a :class:`ScenarioConfig`.

    ``scenario`` supplies or cross-checks the scenario named in the file.
    Missing keys take documented defaults; unknown keys, malformed JSON, and
    out-of-range values raise :class:`ConfigError` naming the field.
    """
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{key}: unknown key (allowed: {sorted(_TOP_KEYS)})")

    named = raw.get("scenario")
    if named is not None:
        _choice("scenario", named, SCENARIOS)
    if scenario is not None and named is not None and named != scenario:
        raise ConfigError(f"scenario: config names {named!r} but {scenario!r} was requested")
    chosen = scenario or named
    if chosen is None:
        raise ConfigError("scenario: missing (pass on the command line or in the config)")
    _choice("scenario", chosen, SCENARIOS)

    mem = _block(raw.get("memory", {}), "memory", _MEMORY_SPEC)
    cav = _block(raw.get("cavity", {}), "cavity", _CAVITY_SPEC)
    pul = _block(raw.get("pulse", {}), "pulse", _PULSE_SPEC)
    ens = _block(raw.get("ensemble", {}), "ensemble", _ENSEMBLE_SPEC)
    sch = _block(raw.get("schedule", {}), "schedule", _SCHEDULE_SPEC)
    lnk = _block(raw.get("link", {}), "link", _LINK_SPEC)

    opt_spec = OPTION_SPECS[chosen]
    raw_opt = raw.get("options", {})
    if not isinstance(raw_opt, dict):
        raise ConfigError("options: expected an object")
    for key in raw_opt:
        if key not in opt_spec:
            raise ConfigError(
                f"options.{key}: unknown key for scenario {chosen!r} "
                f"(allowed: {sorted(opt_spec)})"
            )
    options = {key: (parser(f"options.{key}", raw_opt[key]) if key in raw_opt else default)
               for key, (default, parser) in opt_spec.items()}

    defaults = ScenarioConfig(scenario=chosen)
    try:
        memory = MemoryParams(
            p=mem.get("p", defaults.memory.p),
            eta_w=mem.get("eta_w", defaults.memory.eta_w),
            eta_r=mem.get("eta_r", defaults.memory.eta_r),
            p_int0=mem.get("p_int0", defaults.memory.p_int0),
            beta_ratio=mem.get("beta_ratio", defaults.memory.beta_ratio),
            xi_eg=mem.get("xi_eg", defaults.memory.xi_eg),
            n_modes=mem.get("n_modes", defaults.memory.n_modes),
            tau_mem=mem.get("tau_mem_s", defaults.memory.tau_mem),
            decay_shape=mem.get("decay_shape", defaults.memory.decay_shape),
        )
        cavity = CavityParams(
            transmission=cav.get("transmission", defaults.cavity.transmission),
            loss=cav.get("loss", defaults.cavity.loss),
            roundtrip_length=cav.get("roundtrip_length_m", defaults.cavity.roundtrip_length),
        )
        pulse = PulseSpec(duration_fwhm=pul.get("duration_fwhm_s", defaults.pulse.duration_fwhm))
        link = LinkParams(
            distance=lnk.get("distance_m", defaults.link.distance),
            signal_velocity=lnk.get("signal_velocity_m_per_s", defaults.link.signal_velocity),
            n_modes=lnk.get("n_modes", defaults.link.n_modes),
            herald_time=lnk.get("herald_time_s", defaults.link.herald_time),
            decision_delay=lnk.get("decision_delay_s", defaults.link.decision_delay),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    ensemble = EnsembleConfig(
        n_atoms=ens.get("n_atoms", 10000),
        cloud_sigma=ens.get("cloud_sigma_m", 1e-3),
        temperature=ens.get("temperature_k", 40e-6),
        k_sw=ens.get("k_sw_rad_per_m", None),
        zeeman_coeff=ens.get("zeeman_coeff_hz_per_g", ZEEMAN_COEFF_DEFAULT),
    )
    schedule = ScheduleConfig(
        mode_spacing=sch.get("mode_spacing_s", 800e-9),
        write_duration=sch.get("write_duration_s", 266e-9),
        gradient=sch.get("gradient_g_per_cm", 2.0),
        bias=sch.get("bias_g", 0.0),
        drift_rate=sch.get("drift_rate_per_s", 0.0),
        policy=sch.get("policy", "immediate_after_last"),
        freeze_time=sch.get("freeze_time_s", None),
        release_time=sch.get("release_time_s", None),
    )
    if schedule.write_duration >= schedule.mode_spacing:
        raise ConfigError("schedule.write_duration_s: must be smaller than mode_spacing_s")
    if schedule.policy == "freeze_release":
        if schedule.freeze_time is None or schedule.release_time is None:
            raise ConfigError(
                "schedule.freeze_time_s / release_time_s: required for the "
                "freeze_release policy (seconds)"
            )
        if not schedule.freeze_time < schedule.release_time:
            raise ConfigError("schedule.freeze_time_s: must be before release_time_s")

    return ScenarioConfig(
        scenario=chosen,
        rng_seed=_int("rng_seed", raw.get("rng_seed", defaults.rng_seed), 0),
        n_trials=_int("n_trials", raw.get("n_trials", defaults.n_trials), 1),
        output_path=raw.get("output_path", defaults.output_path)
        if isinstance(raw.get("output_path", "."), str)
        else _fail_str("output_path"),
        memory=memory,
        cavity=cavity,
        pulse=pulse,
        ensemble=ensemble,
        schedule=schedule,
        link=link,
        options=options,
    )


def _fail_str(path):
    raise ConfigError(f"{path}: expected a string")


def serialize_config(cfg: ScenarioConfig) -> str:
    """Serialize with every default materialized; parse round-trips exactly."""
    doc = {
        "scenario": cfg.scenario,
        "rng_seed": cfg.rng_seed,
        "n_trials": cfg.n_trials,
        "output_path": cfg.output_path,
        "memory": {
            "p": cfg.memory.p,
            "eta_w": cfg.memory.eta_w,
            "eta_r": cfg.memory.eta_r,
            "p_int0": cfg.memory.p_int0,
            "beta_ratio": cfg.memory.beta_ratio,
            "xi_eg": cfg.memory.xi_eg,
            "n_modes": cfg.memory.n_modes,
            "tau_mem_s": cfg.memory.tau_mem,
            "decay_shape": cfg.memory.decay_shape,
        },
        "cavity": {
            "transmission": cfg.cavity.transmission,
            "loss": cfg.cavity.loss,
            "roundtrip_length_m": cfg.cavity.roundtrip_length,
        },
        "pulse": {"duration_fwhm_s": cfg.pulse.duration_fwhm},
        "ensemble": {
            "n_atoms": cfg.ensemble.n_atoms,
            "cloud_sigma_m": cfg.ensemble.cloud_sigma,
            "temperature_k": cfg.ensemble.temperature,
            "k_sw_rad_per_m": cfg.ensemble.k_sw,
            "zeeman_coeff_hz_per_g": cfg.ensemble.zeeman_coeff,
        },
        "schedule": {
            "mode_spacing_s": cfg.schedule.mode_spacing,
            "write_duration_s": cfg.schedule.write_duration,
            "gradient_g_per_cm": cfg.schedule.gradient,
            "bias_g": cfg.schedule.bias,
            "drift_rate_per_s": cfg.schedule.drift_rate,
            "policy": cfg.schedule.policy,
            "freeze_time_s": cfg.schedule.freeze_time,
            "release_time_s": cfg.schedule.release_time,
        },
        "link": {
            "distance_m": cfg.link.distance,
            "signal_velocity_m_per_s": cfg.link.signal_velocity,
            "n_modes": cfg.link.n_modes,
            "herald_time_s": cfg.link.herald_time,
            "decision_delay_s": cfg.link.decision_delay,
        },
        "options": cfg.options,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
