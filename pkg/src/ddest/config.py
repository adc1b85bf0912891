"""Experiment configuration and its flat ``section.key = value`` text format.

Example::

    # fig-4 style sweep
    otfs.M = 32
    grid.r_nu = 0.5, 0.8
    grid.r_tau = 0.5, 0.8
    snr_sweep_db = 0, 10, 20, 30
    estimators = sbl1d-offgrid, omp, impulse
    num_frames = 100

Lists are comma separated. ``grid.r_nu`` and ``grid.r_tau`` are paired
element-wise; a single value is broadcast against the other list.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .baselines import ImpulseOptions, OmpOptions
from .channel import ChannelGenConfig
from .frame import OtfsConfig
from .sbl1d import SblOptions

ESTIMATORS = ("sbl1d-offgrid", "sbl1d-ongrid", "sbl2d-offgrid", "sbl2d-ongrid", "omp", "impulse")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    otfs: OtfsConfig = field(default_factory=OtfsConfig)
    channel: ChannelGenConfig = field(default_factory=ChannelGenConfig)
    resolutions: list = field(default_factory=lambda: [(0.5, 0.5)])
    snr_sweep_db: list = field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    estimators: list = field(default_factory=lambda: list(ESTIMATORS))
    num_frames: int = 100
    base_seed: int = 0
    closed_grid: bool = False
    timing: bool = True
    sbl: SblOptions = field(default_factory=SblOptions)
    omp: OmpOptions = field(default_factory=OmpOptions)
    impulse: ImpulseOptions = field(default_factory=ImpulseOptions)

    def __post_init__(self):
        if not self.resolutions or not self.snr_sweep_db or not self.estimators:
            raise ConfigError("resolution, SNR and estimator lists must be nonempty")
        if self.num_frames < 1:
            raise ConfigError("num_frames must be >= 1")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigError(f"unknown estimators {unknown}; choose from {', '.join(ESTIMATORS)}")
        for r_nu, r_tau in self.resolutions:
            if not (0 < r_nu <= 1 and 0 < r_tau <= 1):
                raise ConfigError(f"resolution ({r_nu}, {r_tau}) outside (0, 1]")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")


def _scalar(text: str):
    t = text.strip()
    low = t.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    return t.strip("\"'")


def parse_text(text: str) -> dict:
    """``section.key = value`` lines to a flat dict; '#' starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        items = [_scalar(v) for v in value.split(",")] if "," in value else [_scalar(value)]
        out[key] = items
    return out


def _one(key, items):
    if len(items) != 1:
        raise ConfigError(f"{key} takes a single value")
    return items[0]


def _fill(cls, prefix, flat, used):
    kwargs = {}
    for f in fields(cls):
        key = f"{prefix}.{f.name}"
        if key in flat:
            kwargs[f.name] = _one(key, flat[key])
            used.add(key)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{prefix}] {exc}") from exc


def _floats(key, items):
    try:
        return [float(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected numbers") from exc


def from_dict(flat: dict) -> ExperimentConfig:
    used: set = set()
    kw = {
        "otfs": _fill(OtfsConfig, "otfs", flat, used),
        "channel": _fill(ChannelGenConfig, "channel", flat, used),
        "sbl": _fill(SblOptions, "sbl", flat, used),
        "omp": _fill(OmpOptions, "omp", flat, used),
        "impulse": _fill(ImpulseOptions, "impulse", flat, used),
    }
    r_nu = _floats("grid.r_nu", flat.get("grid.r_nu", [0.5]))
    r_tau = _floats("grid.r_tau", flat.get("grid.r_tau", [0.5]))
    used |= {"grid.r_nu", "grid.r_tau"}
    if len(r_nu) == 1:
        r_nu = r_nu * len(r_tau)
    if len(r_tau) == 1:
        r_tau = r_tau * len(r_nu)
    if len(r_nu) != len(r_tau):
        raise ConfigError("grid.r_nu and grid.r_tau lists must have equal length or length 1")
    kw["resolutions"] = list(zip(r_nu, r_tau))
    if "grid.closed" in flat:
        kw["closed_grid"] = bool(_one("grid.closed", flat["grid.closed"]))
        used.add("grid.closed")
    if "snr_sweep_db" in flat:
        kw["snr_sweep_db"] = _floats("snr_sweep_db", flat["snr_sweep_db"])
        used.add("snr_sweep_db")
    if "estimators" in flat:
        kw["estimators"] = [str(v) for v in flat["estimators"]]
        used.add("estimators")
    for key in ("num_frames", "base_seed"):
        if key in flat:
            v = _one(key, flat[key])
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{key} must be an integer")
            kw[key] = v
            used.add(key)
    if "timing" in flat:
        kw["timing"] = bool(_one("timing", flat["timing"]))
        used.add("timing")
    unknown = sorted(set(flat) - used)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return from_dict(parse_text(text))
