"""Experiment configuration: TOML file plus command-line overrides.

Precedence is ``defaults < config file < flags``.  Angles are given in
degrees everywhere in configuration and converted to radians once, here.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..channel import ChannelModel
from ..geometry import AnglePair, RisGeometry
from ..weights import SCHEMES, PhaseScheme

SWEEP_PARAMETERS = ("M", "snr_db", "q", "bits")

# default operating point: 8x8 half-wavelength URA, angle case 1
DEFAULT_MODEL = {
    "scheme": "cips",
    "mx": 8,
    "my": 8,
    "spacing_x": 0.5,
    "spacing_y": 0.5,
    "wavelength": 1.0,
    "angles": [30.0, 30.0, 150.0, 60.0],
    "direct_gain": [0.0, 0.0],
    "noise_var": 0.0,
    "allow_remainder": False,
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


@dataclass(frozen=True)
class Tolerances:
    var_rel: float = 0.03
    cov_sigmas: float = 5.0
    mean_sigmas: float = 5.0
    ks_alpha: float = 0.01
    ks_samples: int = 10_000
    mi_bits: float = 0.2
    mi_samples: int = 5_000
    mi_k: int = 5


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    model: ChannelModel
    trials: int = 100_000
    seed: int = 0
    shards: int = 1
    workers: int = 1
    out_dir: Path | None = None
    write_samples: bool = True
    write_observations: bool = False
    estimate_mi: bool = True
    skr_eq29_verbatim: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: Sweep | None = None

    def echo(self) -> dict:
        """Everything that determines the report's numbers.

        Shard and worker counts and output paths are left out: results are
        invariant to them, and keeping them out makes reports byte-identical
        across decompositions.
        """
        out = {
            "model": self.model.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "estimate_mi": self.estimate_mi,
            "skr_eq29_verbatim": self.skr_eq29_verbatim,
            "tolerances": asdict(self.tolerances),
        }
        if self.sweep is not None:
            out["sweep"] = {"parameter": self.sweep.parameter, "values": list(self.sweep.values)}
        return out


def load_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``None`` values in ``override`` are ignored."""
    out = dict(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def _number_list(value, n: int, name: str) -> list[float]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        out = [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be {n} numbers, got {value!r}") from exc
    if len(out) != n or not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{name} must be {n} finite numbers, got {value!r}")
    return out


def _int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if out != value and not isinstance(value, str):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and out < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {out}")
    return out


def _float(value, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number, got {value!r}") from exc


def build_model(raw: dict) -> ChannelModel:
    """Channel model from a ``[model]`` table.

    Raises :class:`ConfigError` for malformed fields and lets
    :class:`~ris_keygen.errors.ModelError` through for values that parse but
    describe an invalid model (e.g. ``q`` not dividing ``M``).
    """
    m = merge(DEFAULT_MODEL, raw)
    unknown = set(m) - set(DEFAULT_MODEL) - {"q", "bits", "spacing"}
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    scheme = m["scheme"]
    if scheme not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if "spacing" in m:
        m["spacing_x"] = m["spacing_y"] = m["spacing"]
    try:
        geom = RisGeometry(_int(m["mx"], "mx", 1), _int(m["my"], "my", 1),
                           _float(m["spacing_x"], "spacing_x"), _float(m["spacing_y"], "spacing_y"),
                           _float(m["wavelength"], "wavelength"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    angles = AnglePair.from_degrees(*_number_list(m["angles"], 4, "angles"))
    if scheme == "cgps":
        if m.get("q") is None:
            raise ConfigError("scheme cgps needs q")
        ps = PhaseScheme.cgps(_int(m["q"], "q", 1), bool(m["allow_remainder"]))
    elif scheme == "dips":
        if m.get("bits") is None:
            raise ConfigError("scheme dips needs bits")
        ps = PhaseScheme.dips(_int(m["bits"], "bits", 1))
    else:
        ps = PhaseScheme.cips()
    re, im = _number_list(m["direct_gain"], 2, "direct_gain")
    noise = _float(m["noise_var"], "noise_var")
    if not (math.isfinite(noise) and noise >= 0):
        raise ConfigError(f"noise_var must be >= 0, got {noise}")
    return ChannelModel(geom, angles, ps, complex(re, im), noise)


def build_config(raw: dict) -> ExperimentConfig:
    known = {"model", "trials", "seed", "shards", "workers", "outputs", "tolerances",
             "sweep", "estimate_mi", "skr_eq29_verbatim"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    model = build_model(raw.get("model", {}))
    outputs = raw.get("outputs", {})
    tol_raw = raw.get("tolerances", {})
    bad = set(tol_raw) - set(Tolerances.__dataclass_fields__)
    if bad:
        raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
    tol = replace(Tolerances(), **tol_raw)
    if tol.ks_alpha not in (0.05, 0.01):
        raise ConfigError("ks_alpha must be 0.05 or 0.01")
    cfg = ExperimentConfig(
        model=model,
        trials=_int(raw.get("trials", 100_000), "trials", 1),
        seed=_int(raw.get("seed", 0), "seed", 0),
        shards=_int(raw.get("shards", 1), "shards", 1),
        workers=_int(raw.get("workers", 1), "workers", 1),
        out_dir=Path(outputs["dir"]) if outputs.get("dir") else None,
        write_samples=bool(outputs.get("samples_csv", True)),
        write_observations=bool(outputs.get("observations_csv", False)),
        estimate_mi=bool(raw.get("estimate_mi", True)),
        skr_eq29_verbatim=bool(raw.get("skr_eq29_verbatim", False)),
        tolerances=tol,
        sweep=_build_sweep(raw.get("sweep")),
    )
    return cfg


def _build_sweep(raw: dict | None) -> Sweep | None:
    if not raw:
        return None
    param = raw.get("parameter")
    if param not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {param!r}")
    values = raw.get("values")
    if isinstance(values, str):
        values = parse_range(values)
    if not values:
        raise ConfigError("sweep values must be a non-empty list")
    if param == "snr_db":
        values = tuple(_float(v, "sweep value") for v in values)
    else:
        values = tuple(_int(v, f"sweep {param} value", 1) for v in values)
    return Sweep(param, values)


def parse_range(spec: str) -> list[float]:
    """``START:STEP:END`` inclusive, or a comma list."""
    if ":" not in spec:
        return _number_list(spec, len(spec.split(",")), "values")
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be START:STEP:END, got {spec!r}")
    start, step, end = (_float(p, "range") for p in parts)
    if step == 0 or (end - start) / step < 0:
        raise ConfigError(f"empty or infinite range {spec!r}")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]
