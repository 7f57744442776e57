"""JSON run configuration.

Schema (all sections are flat objects)::

    {
      "protocol": {eta_p, eta_s, eta_e1, eta_e2, eta_d, r, L_n, L_att, n, c, c0, p_d},
      "cavity":   {rho_n, L_a, lambda_s, Q, N_a?, g_c?, gamma_s?}
                  or {free_space_factor, Q, lambda_s?},            # optional
      "sim":      {trials, seed, memory_coherence_time?, time_model?, workers?},  # optional
      "output":   "csv" | "json" | "pretty",                        # optional
      "output_path": "<file>" | null                                # optional
    }

Every ``protocol`` field is required. Unknown keys are errors.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any

from .analytics import CavityParams, ProtocolParams
from .sim import TIME_MODELS, SimConfig

ENV_VAR = "PMEREPEATER_CONFIG"
OUTPUT_FORMATS = ("csv", "json", "pretty")
PRESETS = ("paper",)

_SIM_KEYS = {"trials", "seed", "memory_coherence_time", "time_model", "workers"}
_CAVITY_REQUIRED = ("rho_n", "L_a", "lambda_s")
_CAVITY_OPTIONAL = ("Q", "N_a", "g_c", "gamma_s")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolParams
    cavity: CavityParams | None = None
    sim: SimConfig | None = None
    output: str = "pretty"
    output_path: str | None = None


def _section(raw: Any, where: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    return raw


def _reject_unknown(raw: dict, allowed, where: str) -> None:
    extra = sorted(set(raw) - set(allowed))
    if extra:
        raise ConfigError(f"{where}.{extra[0]}: unknown key (allowed: {', '.join(sorted(allowed))})")


def _number(value: Any, where: str, integer: bool = False) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def parse_protocol(raw: Any) -> ProtocolParams:
    raw = _section(raw, "protocol")
    names = ProtocolParams.field_names()
    _reject_unknown(raw, names, "protocol")
    for name in names:
        if name not in raw:
            raise ConfigError(f"protocol.{name}: missing required field")
    values = {name: _number(raw[name], f"protocol.{name}", integer=(name == "n")) for name in names}
    try:
        return ProtocolParams(**values)
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from None


def parse_cavity(raw: Any) -> CavityParams:
    raw = _section(raw, "cavity")
    try:
        if "free_space_factor" in raw:
            _reject_unknown(raw, {"free_space_factor", "Q", "lambda_s"}, "cavity")
            kw = {k: _number(raw[k], f"cavity.{k}") for k in ("Q", "lambda_s") if k in raw}
            return CavityParams.from_free_space_factor(_number(raw["free_space_factor"], "cavity.free_space_factor"), **kw)
        _reject_unknown(raw, _CAVITY_REQUIRED + _CAVITY_OPTIONAL, "cavity")
        for name in _CAVITY_REQUIRED:
            if name not in raw:
                raise ConfigError(f"cavity.{name}: missing required field")
        values = {k: (None if raw[k] is None else _number(raw[k], f"cavity.{k}")) for k in raw}
        return CavityParams(**values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"cavity: {exc}") from None


def parse_sim(raw: Any, protocol: ProtocolParams) -> SimConfig:
    raw = _section(raw, "sim")
    _reject_unknown(raw, _SIM_KEYS, "sim")
    kw: dict[str, Any] = {}
    for key in ("trials", "seed", "workers"):
        if key in raw:
            kw[key] = _number(raw[key], f"sim.{key}", integer=True)
    if raw.get("memory_coherence_time") is not None:
        kw["memory_coherence_time"] = _number(raw["memory_coherence_time"], "sim.memory_coherence_time")
    if "time_model" in raw:
        if raw["time_model"] not in TIME_MODELS:
            raise ConfigError(f"sim.time_model: expected one of {TIME_MODELS}, got {raw['time_model']!r}")
        kw["time_model"] = raw["time_model"]
    try:
        return SimConfig(protocol, **kw)
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from None


def parse_config(raw: Any) -> RunConfig:
    raw = _section(raw, "config")
    _reject_unknown(raw, {"protocol", "cavity", "sim", "output", "output_path"}, "config")
    if "protocol" not in raw:
        raise ConfigError("config.protocol: missing required section")
    protocol = parse_protocol(raw["protocol"])
    cavity = parse_cavity(raw["cavity"]) if raw.get("cavity") is not None else None
    sim = parse_sim(raw["sim"], protocol) if raw.get("sim") is not None else None
    output = raw.get("output", "pretty")
    if output not in OUTPUT_FORMATS:
        raise ConfigError(f"config.output: expected one of {OUTPUT_FORMATS}, got {output!r}")
    path = raw.get("output_path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("config.output_path: expected a string or null")
    return RunConfig(protocol, cavity, sim, output, path)


def to_dict(cfg: RunConfig) -> dict:
    """Canonical JSON-ready form; ``parse_config(to_dict(c))`` reproduces ``c``."""
    out: dict[str, Any] = {"protocol": {f.name: getattr(cfg.protocol, f.name) for f in fields(ProtocolParams)}}
    if cfg.cavity is not None:
        out["cavity"] = {f.name: getattr(cfg.cavity, f.name) for f in fields(CavityParams)}
    if cfg.sim is not None:
        out["sim"] = {
            "trials": cfg.sim.trials,
            "seed": cfg.sim.seed,
            "memory_coherence_time": cfg.sim.memory_coherence_time,
            "time_model": cfg.sim.time_model,
            "workers": cfg.sim.workers,
        }
    out["output"] = cfg.output
    out["output_path"] = cfg.output_path
    return out


def dumps(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=False) + "\n"


def preset_text(name: str) -> str:
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return resources.files("pmerepeater.presets").joinpath(f"{stem}.json").read_text()


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load ``path``; fall back to ``$PMEREPEATER_CONFIG``, then the paper preset.

    A name that is not an existing file but matches a bundled preset
    ("paper" or "paper.json") loads that preset.
    """
    if path is None:
        path = os.environ.get(ENV_VAR) or "paper"
    p = Path(path)
    if p.is_file():
        text, source = p.read_text(), str(p)
    elif len(p.parts) == 1 and p.name.removesuffix(".json") in PRESETS:
        text, source = preset_text(p.name), f"preset:{p.name}"
    else:
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON ({exc})") from None
    return parse_config(raw)
