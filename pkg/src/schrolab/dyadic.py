"""Dyadic-annulus data that break the maximal estimate below ``s = 1/p``.

The datum at scale ``k`` has spectrum ``2^(-k sigma)`` on
``2^k <= |xi| <= 2^(k+1)`` with ``sigma = s + 1 - 2/p``, which keeps its
``H^{s, p/2}`` norm of order one. On ``|x| <= 2^-k`` and for
``0 <= t <= (delta/100) 4^-k`` the phase ``x xi - t xi^2`` stays bounded, so
``|U(t) f|`` is of size ``2^(k(1 - sigma))`` there and the ``L^p_x L^inf_t``
norm grows like ``2^(k(1/p - s))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, InputError, ResolutionError
from .norms import (
    Ball,
    NormSpec,
    TimeGrid,
    fourier_lebesgue_norm,
    lebesgue_norm,
    maximal_function,
)
from .spectral import AnalyticSignal, GridFunction, SpectralGrid, materialize

MIN_REGION_CELLS = 8


@dataclass(frozen=True)
class DyadicDatum:
    k: int
    s: float
    p: float
    delta: float = 0.5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InputError(f"dyadic scale must be an integer >= 1, got {self.k}")
        if not self.p >= 4:
            raise InputError(f"exponent p must be >= 4, got {self.p}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def sigma(self) -> float:
        """Amplitude exponent ``s + 1/(p/2)'``."""
        return self.s + 1 - 2 / self.p

    @property
    def amplitude(self) -> float:
        return 2.0 ** (-self.k * self.sigma)

    @property
    def inner_radius(self) -> float:
        return 2.0**self.k

    @property
    def outer_radius(self) -> float:
        return 2.0 ** (self.k + 1)

    @property
    def region_radius(self) -> float:
        return 2.0 ** (-self.k)

    @property
    def t_window(self) -> float:
        return self.delta / 100 * 4.0 ** (-self.k)

    @property
    def norm_spec(self) -> NormSpec:
        return NormSpec(self.s, self.p / 2)

    @property
    def expected_slope(self) -> float:
        return 1 / self.p - self.s


@dataclass(frozen=True)
class ScalingFit:
    scales: tuple[float, ...]
    values: tuple[float, ...]
    fitted_slope: float
    intercept: float
    residual: float

    def summary(self, expected_slope: float | None = None) -> dict:
        out = {"slope": self.fitted_slope, "intercept": self.intercept, "residual": self.residual}
        if expected_slope is not None:
            out["expected_slope"] = expected_slope
        return out


def scale_grid(k: int, lattice_per_band: int = 256, points: int = 1 << 16) -> SpectralGrid:
    """Grid for scale ``k`` whose box shrinks like ``2^-k``.

    The frequency spacing is ``2^k / lattice_per_band``, so every scale sees
    the annulus sampled by the same number of lattice nodes and the region
    ``|x| <= 2^-k`` by the same number of cells.
    """
    extent = 2 * math.pi * lattice_per_band * 2.0 ** (-k)
    return SpectralGrid(1, extent, points)


def refining_grid(k: int) -> SpectralGrid:
    """Alternative grid with box ``2 pi 2^k`` and ``2^(2k+6)`` points.

    Frequency resolution relative to the annulus improves like ``4^-k``, so
    unlike :func:`scale_grid` the discretisation is not self-similar.
    """
    return SpectralGrid(1, 2 * math.pi * 2.0**k, 2 ** (2 * k + 6))


def build_datum(datum: DyadicDatum, grid: SpectralGrid) -> GridFunction:
    if grid.dim != 1:
        raise InputError("the dyadic counterexample is one-dimensional")
    return materialize(AnalyticSignal.dyadic_annulus(datum.k, datum.sigma), grid)


def growth_time_grid(datum: DyadicDatum, count: int = 33) -> TimeGrid:
    return TimeGrid.linear(datum.t_window, count, include_zero=True)


def _check_region(datum: DyadicDatum, grid: SpectralGrid) -> Ball:
    cells = 2 * datum.region_radius / grid.dx
    if cells < MIN_REGION_CELLS:
        raise ResolutionError(
            f"region |x| <= 2^-{datum.k} spans {cells:.1f} cells, need {MIN_REGION_CELLS}"
        )
    return Ball((0.0,), datum.region_radius)


def measure_growth(
    datum: DyadicDatum, grid: SpectralGrid, tg: TimeGrid | None = None, workers: int = 1
) -> float:
    """``||U(t) f||_{L^p(|x| <= 2^-k) L^inf_t}`` over the short time window."""
    region = _check_region(datum, grid)
    tg = growth_time_grid(datum) if tg is None else tg
    if tg.times[-1] > datum.t_window * (1 + 1e-12) or tg.times[0] < 0:
        raise InputError("time grid leaves the window [0, (delta/100) 4^-k]")
    f = build_datum(datum, grid)
    return lebesgue_norm(maximal_function(f, tg, region, workers), datum.p, region)


def annulus_evolution(
    datum: DyadicDatum, x: np.ndarray, t: np.ndarray, nodes: int = 64, panels: int = 4
) -> np.ndarray:
    """Direct quadrature of ``U(t) f(x)`` for the datum.

    Uses ``U(t) f(x) = (2/pi)^(1/2) A int_a^b cos(x xi) exp(-i t xi^2) dxi``
    with composite Gauss-Legendre on the annulus. Returns shape ``(len(t), len(x))``.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(datum.inner_radius, datum.outer_radius, panels + 1)
    xi = np.concatenate([(b - a) / 2 * gx + (a + b) / 2 for a, b in zip(edges, edges[1:])])
    w = np.concatenate([(b - a) / 2 * gw for a, b in zip(edges, edges[1:])])
    x = np.asarray(x, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    cosx = np.cos(np.outer(x, xi)) * w  # (X, Q)
    phase = np.exp(-1j * np.outer(t, xi**2))  # (T, Q)
    return math.sqrt(2 / math.pi) * datum.amplitude * (phase @ cosx.T)


def growth_oracle(
    datum: DyadicDatum, grid: SpectralGrid, refine: int = 10, time_count: int = 65
) -> float:
    """Grid-free reference for :func:`measure_growth`.

    Evaluates the annulus integral by quadrature on a mesh ``refine`` times
    finer than the grid over ``|x| <= 2^-k`` and integrates ``sup_t |u|^p``
    with the trapezoid rule.
    """
    h = grid.dx / refine
    n = int(math.ceil(datum.region_radius / h))
    x = np.linspace(0.0, datum.region_radius, n + 1)
    t = np.linspace(0.0, datum.t_window, time_count)
    sup = np.abs(annulus_evolution(datum, x, t)).max(axis=0)
    # the integrand is even in x
    return float((2 * np.trapezoid(sup**datum.p, x)) ** (1 / datum.p))


def phase_budget(datum: DyadicDatum) -> dict:
    """Largest phases met inside the window: ``|t xi^2|`` and ``|x xi|``."""
    return {
        "dispersive": datum.t_window * datum.outer_radius**2,
        "transport": datum.region_radius * datum.outer_radius,
    }


def fit_blowup(scales, values) -> ScalingFit:
    """Least-squares slope of ``log2(value)`` against the scale."""
    k = np.asarray(scales, dtype=float)
    v = np.asarray(values, dtype=float)
    if k.size != v.size:
        raise FitError("scales and values differ in length")
    if k.size < 4:
        raise FitError(f"need at least 4 scales for a fit, got {k.size}")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise FitError("values must be positive and finite")
    y = np.log2(v)
    A = np.vstack([k, np.ones_like(k)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.sum((A @ np.array([slope, intercept]) - y) ** 2)))
    return ScalingFit(tuple(k.tolist()), tuple(v.tolist()), float(slope), float(intercept), resid)


@dataclass
class SweepRow:
    k: int
    s: float
    p: float
    delta: float
    norm: float
    growth_value: float
    oracle_value: float | None


SWEEP_COLUMNS = ("k", "s", "p", "delta", "norm", "growth_value", "oracle_value")


@dataclass
class SweepResult:
    rows: list[SweepRow]
    fit: ScalingFit
    expected_slope: float
    grids: dict = field(default_factory=dict)


def sweep(
    ks,
    s: float,
    p: float,
    delta: float = 0.5,
    *,
    lattice_per_band: int = 256,
    points: int = 1 << 16,
    time_count: int = 33,
    with_oracle: bool = True,
    workers: int = 1,
) -> SweepResult:
    """Measure the growth at every scale and fit the exponent."""

    def cell(k):
        d = DyadicDatum(int(k), s, p, delta)
        g = scale_grid(d.k, lattice_per_band, points)
        f = build_datum(d, g)
        val = measure_growth(d, g, growth_time_grid(d, time_count))
        ora = growth_oracle(d, g) if with_oracle else None
        return SweepRow(d.k, s, p, delta, fourier_lebesgue_norm(f, d.norm_spec), val, ora), g

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            out = list(ex.map(cell, ks))
    else:
        out = [cell(k) for k in ks]
    rows = [r for r, _ in out]
    fit = fit_blowup([r.k for r in rows], [r.growth_value for r in rows])
    return SweepResult(rows, fit, 1 / p - s, {r.k: g.describe() for r, g in out})
