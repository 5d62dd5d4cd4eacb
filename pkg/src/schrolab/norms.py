"""Fourier-Lebesgue, Lebesgue and mixed space-time norms on grids.

All physical-space integrals are cell sums (a node belongs to a region iff it
lies in the region), all frequency integrals are lattice sums. The supremum
in time is a finite maximum over a :class:`TimeGrid`.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ContractError, DegenerateInputError, InputError
from .spectral import (
    FREQUENCY,
    PHYSICAL,
    GridFunction,
    SpectralGrid,
    inverse_transform,
    schrodinger_symbol,
)


@dataclass(frozen=True)
class NormSpec:
    """Regularity ``s`` and Fourier-Lebesgue exponent ``r``; the norm is the
    ``L^{r'}`` norm of ``<xi>^s f_hat``."""

    s: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 2):
            raise InputError(f"Fourier-Lebesgue exponent must satisfy r >= 2, got r = {self.r}")
        if not math.isfinite(self.s):
            raise InputError("regularity s must be finite")

    @property
    def r_conj(self) -> float:
        return self.r / (self.r - 1)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise InputError("ball radius must be positive")

    def mask(self, grid: SpectralGrid) -> np.ndarray:
        c = _broadcast_center(self.center, grid.dim)
        r2 = sum((x - c[i]) ** 2 for i, x in enumerate(grid.x_mesh()))
        return np.broadcast_to(r2 <= self.radius**2, grid.shape)

    def inside(self, grid: SpectralGrid) -> bool:
        c = _broadcast_center(self.center, grid.dim)
        half = grid.extent / 2
        return bool(np.all(c - self.radius >= -half) and np.all(c + self.radius <= half))

    def describe(self) -> str:
        return f"ball(center={list(self.center)},radius={self.radius!r})"


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(c) for c in np.atleast_1d(self.lower)))
        object.__setattr__(self, "upper", tuple(float(c) for c in np.atleast_1d(self.upper)))
        if len(self.lower) != len(self.upper) or any(
            lo >= hi for lo, hi in zip(self.lower, self.upper)
        ):
            raise InputError("box needs lower < upper in every coordinate")

    def mask(self, grid: SpectralGrid) -> np.ndarray:
        lo = _broadcast_center(self.lower, grid.dim)
        hi = _broadcast_center(self.upper, grid.dim)
        m = np.ones(grid.shape, dtype=bool)
        for i, x in enumerate(grid.x_mesh()):
            m = m & (x >= lo[i]) & (x <= hi[i])
        return m

    def inside(self, grid: SpectralGrid) -> bool:
        half = grid.extent / 2
        lo = _broadcast_center(self.lower, grid.dim)
        hi = _broadcast_center(self.upper, grid.dim)
        return bool(np.all(lo >= -half) and np.all(hi <= half))

    def describe(self) -> str:
        return f"box(lower={list(self.lower)},upper={list(self.upper)})"


Region = Union[Ball, Box, None]


def _broadcast_center(c: Sequence[float], dim: int) -> np.ndarray:
    a = np.asarray(c, dtype=float)
    if a.size == 1:
        return np.full(dim, a.item())
    if a.size != dim:
        raise InputError(f"region has {a.size} coordinates on a {dim}-dimensional grid")
    return a


def region_mask(grid: SpectralGrid, region: Region) -> np.ndarray:
    if region is None:
        return np.ones(grid.shape, dtype=bool)
    if not region.inside(grid):
        raise InputError(f"region {region.describe()} is not contained in the grid box")
    m = region.mask(grid)
    if not m.any():
        raise InputError(f"region {region.describe()} contains no grid cells")
    return m


def region_label(region: Region) -> str:
    return "full" if region is None else region.describe()


def region_from_dict(d: dict | None) -> Region:
    if d is None:
        return None
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "ball":
        return Ball(tuple(d.pop("center", (0.0,))), float(d.pop("radius")))
    if kind == "box":
        return Box(tuple(d.pop("lower")), tuple(d.pop("upper")))
    if kind == "full":
        return None
    raise InputError(f"unknown region kind {kind!r}")


@dataclass(frozen=True)
class MixedNormSpec:
    """``L^q_x(region) L^p_t``: inner norm in time, outer in space."""

    q_space: float
    p_time: float = math.inf
    region: Region = None

    def __post_init__(self):
        for name in ("q_space", "p_time"):
            v = getattr(self, name)
            if not v >= 1:
                raise InputError(f"{name} must lie in [1, inf], got {v}")


@dataclass(frozen=True)
class TimeGrid:
    times: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in self.times)
        if not t:
            raise InputError("time grid is empty")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise InputError("time grid must be strictly increasing")
        if not all(math.isfinite(v) for v in t):
            raise InputError("time grid contains non-finite values")
        object.__setattr__(self, "times", t)

    @classmethod
    def geometric(cls, t_max: float, decades: float = 4, per_decade: int = 64) -> "TimeGrid":
        n = int(round(decades * per_decade)) + 1
        return cls(tuple(t_max * np.logspace(-decades, 0, n)))

    @classmethod
    def linear(cls, t_max: float, count: int = 33, include_zero: bool = True) -> "TimeGrid":
        if include_zero:
            return cls(tuple(np.linspace(0.0, t_max, count)))
        return cls(tuple(np.linspace(t_max / count, t_max, count)))

    def refined(self) -> "TimeGrid":
        """Insert a point between every pair of neighbours (geometric mean when
        both are positive). The result contains the original grid."""
        t = np.asarray(self.times)
        if t.size == 1:
            return self
        a, b = t[:-1], t[1:]
        mid = np.where(a > 0, np.sqrt(np.abs(a * b)), (a + b) / 2)
        out = np.empty(2 * t.size - 1)
        out[0::2] = t
        out[1::2] = mid
        return TimeGrid(tuple(out))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class LevelSet:
    alpha: float
    measure: float


@dataclass(frozen=True, eq=False)
class SpaceTimeSamples:
    """``|u(x, t)|`` style samples: values has shape ``(len(times), *grid.shape)``."""

    grid: SpectralGrid
    times: tuple[float, ...]
    values: np.ndarray


# ---------------------------------------------------------------------------


def fourier_lebesgue_norm(f: GridFunction, spec: NormSpec) -> float:
    """``|| <xi>^s f_hat ||_{L^{r'}}`` by lattice quadrature."""
    fh = f.to_frequency()
    g = f.grid
    w = np.abs(fh.values) if spec.s == 0 else np.abs(fh.values) * (1.0 + g.xi_sq) ** (spec.s / 2)
    rc = spec.r_conj
    return float((np.sum(w**rc) * g.freq_cell_volume) ** (1 / rc))


def _lp(vals: np.ndarray, p: float, cell: float) -> float:
    if p == math.inf:
        return float(vals.max())
    return float((np.sum(vals**p) * cell) ** (1 / p))


def lebesgue_norm(f: GridFunction, p: float, region: Region = None) -> float:
    if f.space != PHYSICAL:
        raise ContractError("lebesgue_norm expects a physical-space function")
    if not p >= 1:
        raise InputError(f"Lebesgue exponent must be >= 1, got {p}")
    m = region_mask(f.grid, region)
    return _lp(np.abs(f.values[m]), p, f.grid.cell_volume)


def _evolution_moduli(fh: np.ndarray, grid: SpectralGrid, times: Sequence[float]):
    for t in times:
        yield t, np.abs(
            inverse_transform(GridFunction(grid, fh * schrodinger_symbol(grid, t), FREQUENCY)).values
        )


def maximal_function(
    f: GridFunction, tg: TimeGrid, region: Region = None, workers: int = 1
) -> GridFunction:
    """``max_{t in tg} |U(t) f(x)|`` on ``region`` (zero outside it)."""
    grid = f.grid
    mask = region_mask(grid, region)
    fh = f.to_frequency().values
    times = tg.times

    def chunk_max(ts):
        out = np.zeros(grid.shape)
        for _, mod in _evolution_moduli(fh, grid, ts):
            np.maximum(out, mod, out=out)
        return out

    if workers <= 1 or len(times) < 2:
        best = chunk_max(times)
    else:
        parts = [times[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(chunk_max, [p for p in parts if p]))
        best = np.maximum.reduce(results)
    return GridFunction(grid, np.where(mask, best, 0.0), PHYSICAL)


def sample_evolution(f: GridFunction, times: Sequence[float]) -> SpaceTimeSamples:
    fh = f.to_frequency().values
    vals = np.stack([mod for _, mod in _evolution_moduli(fh, f.grid, times)])
    return SpaceTimeSamples(f.grid, tuple(float(t) for t in times), vals)


def mixed_norm(u: GridFunction | SpaceTimeSamples, spec: MixedNormSpec) -> float:
    """Outer ``L^q`` over the region of the inner ``L^p`` in time.

    A :class:`GridFunction` is read as time-independent data, which for
    ``p_time = inf`` is how a maximal function enters.
    """
    if isinstance(u, GridFunction):
        if spec.p_time != math.inf:
            raise InputError("a finite time exponent needs time-indexed samples")
        return lebesgue_norm(u.to_physical(), spec.q_space, spec.region)
    if not isinstance(u, SpaceTimeSamples):
        raise InputError("mixed_norm takes a GridFunction or SpaceTimeSamples")
    mask = region_mask(u.grid, spec.region)
    vals = np.abs(u.values)
    if spec.p_time == math.inf:
        inner = vals.max(axis=0)
    elif len(u.times) < 2:
        raise InputError("a finite time exponent needs at least two time samples")
    else:
        inner = np.trapezoid(vals**spec.p_time, x=np.asarray(u.times), axis=0) ** (1 / spec.p_time)
    return _lp(inner[mask], spec.q_space, u.grid.cell_volume)


def level_set_measure(g: GridFunction, alpha: float, region: Region = None) -> LevelSet:
    """Cell-counted measure of ``{x in region : |g(x)| > alpha}``."""
    if not alpha > 0:
        raise InputError(f"threshold must be positive, got {alpha}")
    if g.space != PHYSICAL:
        raise ContractError("level_set_measure expects a physical-space function")
    m = region_mask(g.grid, region)
    count = int(np.count_nonzero(np.abs(g.values[m]) > alpha))
    return LevelSet(float(alpha), count * g.grid.cell_volume)


def inequality_ratio(
    f: GridFunction, lhs: MixedNormSpec, tg: TimeGrid, rhs: NormSpec, workers: int = 1
) -> float:
    """``||U(t) f||_{L^q_x L^inf_t} / ||f||_{H^{s,r}}``."""
    den = fourier_lebesgue_norm(f, rhs)
    if den == 0:
        raise DegenerateInputError("Fourier-Lebesgue norm of the data vanishes")
    if lhs.p_time != math.inf:
        num = mixed_norm(sample_evolution(f, tg.times), lhs)
    else:
        num = mixed_norm(maximal_function(f, tg, lhs.region, workers), lhs)
    return num / den


# ---------------------------------------------------------------------------
# batch output

NORM_COLUMNS = ("function_id", "norm_kind", "s", "r", "q", "p", "region", "value")


@dataclass(frozen=True)
class NormRecord:
    function_id: str
    norm_kind: str
    s: float | None
    r: float | None
    q: float | None
    p: float | None
    region: str
    value: float


def write_norm_rows(rows: Iterable[NormRecord], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(NORM_COLUMNS)
        for row in rows:
            d = asdict(row)
            w.writerow(["" if d[c] is None else d[c] for c in NORM_COLUMNS])
    return path
