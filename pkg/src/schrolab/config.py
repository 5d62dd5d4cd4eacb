"""Experiment configuration.

A config is one JSON or YAML document. Every section maps onto a frozen
dataclass and unknown keys are rejected, so a typo fails validation instead
of silently falling back to a default.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, InputError
from .norms import NormSpec, region_from_dict
from .spectral import AnalyticSignal, SpectralGrid

KINDS = ("propagate", "norms", "maximal_ratio", "counterexample", "randomize", "tails", "convergence")


def _build(cls, data: Any, where: str):
    """Instantiate dataclass ``cls`` from a mapping, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        sub = names[key].metadata.get("section")
        if sub is not None:
            value = _build(sub, value, f"{where}.{key}")
        elif names[key].metadata.get("sections") is not None:
            inner = names[key].metadata["sections"]
            if not isinstance(value, list):
                raise ConfigError(f"{where}.{key}: expected a list")
            value = tuple(_build(inner, v, f"{where}.{key}[{i}]") for i, v in enumerate(value))
        elif isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (InputError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def section(cls, **kw):
    return field(default_factory=cls, metadata={"section": cls}, **kw)


def sections(cls, default=()):
    return field(default=default, metadata={"sections": cls})


def _positive(where, **values):
    for k, v in values.items():
        if not v > 0:
            raise ConfigError(f"{where}.{k} must be positive, got {v}")


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    extent: float = 40.0
    points: int = 1024

    def build(self) -> SpectralGrid:
        return SpectralGrid(self.dim, float(self.extent), self.points)


@dataclass(frozen=True)
class DatumConfig:
    """Closed-form signal or a seeded random family member.

    ``kind`` is one of the closed forms (``gaussian``, ``plane_wave``,
    ``dyadic_annulus``) or ``random_bandlimited``/``wave_packets``.
    """

    kind: str = "gaussian"
    center: Any = 0.0
    width: float = 1.0
    modulation: Any = 0.0
    mode: Any = None
    k: int | None = None
    amplitude_exponent: float | None = None
    bandwidth: float = 4.0
    smooth: bool = True
    count: int = 4
    max_freq: float = 4.0
    index: int = 0

    def __post_init__(self):
        kinds = ("gaussian", "plane_wave", "dyadic_annulus", "random_bandlimited", "wave_packets")
        if self.kind not in kinds:
            raise ConfigError(f"datum.kind must be one of {kinds}, got {self.kind!r}")
        if self.kind == "plane_wave" and self.mode is None:
            raise ConfigError("plane_wave datum needs a mode")
        if self.kind == "dyadic_annulus" and (self.k is None or self.amplitude_exponent is None):
            raise ConfigError("dyadic_annulus datum needs k and amplitude_exponent")

    def signal(self) -> AnalyticSignal | None:
        if self.kind == "gaussian":
            return AnalyticSignal.gaussian(self.center, self.width, self.modulation)
        if self.kind == "plane_wave":
            return AnalyticSignal.plane_wave(self.mode)
        if self.kind == "dyadic_annulus":
            return AnalyticSignal.dyadic_annulus(self.k, self.amplitude_exponent)
        return None


@dataclass(frozen=True)
class RegionConfig:
    kind: str = "full"
    center: Any = (0.0,)
    radius: float = 1.0
    lower: Any = None
    upper: Any = None

    def build(self):
        if self.kind == "ball":
            return region_from_dict({"kind": "ball", "center": self.center, "radius": self.radius})
        if self.kind == "box":
            return region_from_dict({"kind": "box", "lower": self.lower, "upper": self.upper})
        return region_from_dict({"kind": self.kind})


@dataclass(frozen=True)
class NormSpecConfig:
    s: float = 0.0
    r: float = 2.0

    def __post_init__(self):
        NormSpec(self.s, self.r)

    def build(self) -> NormSpec:
        return NormSpec(float(self.s), float(self.r))


@dataclass(frozen=True)
class LebesgueConfig:
    p: float = 2.0
    region: RegionConfig = section(RegionConfig)


@dataclass(frozen=True)
class TimeGridConfig:
    kind: str = "geometric"
    t_max: float = 1.0
    decades: float = 4.0
    per_decade: int = 64
    count: int = 33

    def __post_init__(self):
        if self.kind not in ("geometric", "linear"):
            raise ConfigError(f"time grid kind must be geometric or linear, got {self.kind!r}")
        _positive("time_grid", t_max=self.t_max)


@dataclass(frozen=True)
class PlanConfig:
    law: str = "gaussian"
    profile: str = "raised_cosine"


@dataclass(frozen=True)
class ProbeConfig:
    points: Any = None
    mode: str = "sup"
    count: int = 16
    radius: float | None = None


@dataclass(frozen=True)
class PropagateConfig:
    times: tuple = (0.1, 0.5, 1.0, 2.0)
    save: bool = False


@dataclass(frozen=True)
class NormsConfig:
    fourier_lebesgue: tuple = sections(NormSpecConfig, (NormSpecConfig(),))
    lebesgue: tuple = sections(LebesgueConfig, ())
    family: int = 1


@dataclass(frozen=True)
class MaximalRatioConfig:
    q: float = 4.0
    region: RegionConfig = section(RegionConfig)
    time_grid: TimeGridConfig = section(TimeGridConfig)
    rhs: NormSpecConfig = section(NormSpecConfig)
    family: int = 20


@dataclass(frozen=True)
class CounterexampleConfig:
    ks: tuple = (2, 3, 4, 5, 6)
    s: float = 0.0
    p: float = 4.0
    delta: float = 0.5
    lattice_per_band: int = 256
    points: int = 1 << 16
    time_count: int = 33
    with_oracle: bool = True


@dataclass(frozen=True)
class RandomizeConfig:
    plan: PlanConfig = section(PlanConfig)
    draws: tuple = (0, 1, 2)
    save: bool = False


@dataclass(frozen=True)
class TailsConfig:
    plan: PlanConfig = section(PlanConfig)
    times: tuple = (1e-2, 5e-3, 2.5e-3)
    alphas: tuple | None = None
    alpha: float | None = None
    num_draws: int = 10_000
    probe: ProbeConfig = section(ProbeConfig)
    eps: float | None = None
    split: NormSpecConfig = section(NormSpecConfig)

    def __post_init__(self):
        if self.num_draws < 1000:
            raise ConfigError(f"tails.num_draws must be >= 1000, got {self.num_draws}")


@dataclass(frozen=True)
class ConvergenceConfig:
    t_min: float = 1e-4
    t_max: float = 1e-2
    count: int = 9
    alphas: tuple = (1e-3, 1e-2, 1e-1)
    region: RegionConfig = section(RegionConfig)

    def __post_init__(self):
        _positive("convergence", t_min=self.t_min, t_max=self.t_max)
        if self.count < 2:
            raise ConfigError("convergence.count must be >= 2")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    format: str = "json"

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise ConfigError(f"output.format must be json or csv, got {self.format!r}")


SECTIONS = {
    "propagate": PropagateConfig,
    "norms": NormsConfig,
    "maximal_ratio": MaximalRatioConfig,
    "counterexample": CounterexampleConfig,
    "randomize": RandomizeConfig,
    "tails": TailsConfig,
    "convergence": ConvergenceConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    grid: GridConfig = section(GridConfig)
    datum: DatumConfig = section(DatumConfig)
    params: Any = None
    output: OutputConfig = section(OutputConfig)
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (isinstance(self.threads, int) and self.threads >= 1):
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")
        if self.params is None:
            object.__setattr__(self, "params", SECTIONS[self.kind]())

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a mapping")
        data = dict(data)
        if "params" in data:
            raise ConfigError("config: unknown keys ['params']")
        kind = data.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
        params = data.pop(kind, None)
        # a section belonging to another kind is almost always a mistake
        stray = sorted(set(data) & (set(KINDS) - {kind}))
        if stray:
            raise ConfigError(f"sections {stray} do not apply to kind {kind!r}")
        cfg = _build(cls, data, "config")
        return dataclasses.replace(cfg, params=_build(SECTIONS[kind], params, kind))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d[self.kind] = d.pop("params")
        return _plain(d)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "out" in kw:
            kw["output"] = dataclasses.replace(self.output, dir=str(kw.pop("out")))
        if "format" in kw:
            kw["output"] = dataclasses.replace(kw.get("output", self.output), format=kw.pop("format"))
        try:
            return dataclasses.replace(self, **kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    return ExperimentConfig.from_dict(data)
