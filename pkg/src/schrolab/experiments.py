"""Pointwise convergence sweeps, density splitting and Monte Carlo tail
probabilities for randomized data.

The random statistics are all linear in the coefficients: for a probe point
``x`` the quantity ``U(t) f^omega(x) - f^omega(x)`` equals
``sum_k g_k(omega) d_k(x)`` with ``d_k = (U(t) - 1) psi(D - k) f``. The
``d_k`` are computed once by FFT and every draw is then a short dot product.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, ResolutionError
from .norms import NormSpec, Region, fourier_lebesgue_norm, level_set_measure, region_mask
from .report import ExperimentReport
from .spectral import GridFunction, SpectralGrid, inverse_transform, schrodinger_symbol
from .wiener import (
    BumpPartition,
    RandomizationPlan,
    check_coverage,
    random_series,
    sign_patterns,
)

DEFAULT_ALPHAS = (1e-3, 1e-2, 1e-1)


# ---------------------------------------------------------------------------
# deterministic convergence


@dataclass
class ConvergenceSweep:
    times: tuple[float, ...]
    sup_errors: tuple[float, ...]
    alphas: tuple[float, ...]
    level_measures: tuple[tuple[float, ...], ...]
    region: str

    def rate(self, t_min: float = 0.0, t_max: float = math.inf) -> float:
        """Log-log slope of the sup error against ``t`` on ``[t_min, t_max]``."""
        t = np.array(self.times)
        e = np.array(self.sup_errors)
        keep = (t > 0) & (t >= t_min) & (t <= t_max) & (e > 0)
        if keep.sum() < 2:
            raise InputError("need two positive times with nonzero error to fit a rate")
        slope, _ = np.polyfit(np.log(t[keep]), np.log(e[keep]), 1)
        return float(slope)


def convergence_sweep(
    f: GridFunction,
    times: Sequence[float],
    region: Region = None,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
) -> ConvergenceSweep:
    """Record ``sup_region |U(t) f - f|`` and level-set measures as ``t`` decreases."""
    ts = sorted({float(t) for t in times}, reverse=True)
    if any(t < 0 for t in ts):
        raise InputError("sweep times must be nonnegative")
    mask = region_mask(f.grid, region)
    fh = f.to_frequency()
    errs, levels = [], []
    for t in ts:
        # (U(t) - 1) applied as one multiplier: exact zero at t = 0 and no
        # cancellation between two O(1) fields for small t
        diff = inverse_transform(fh.with_values(fh.values * (schrodinger_symbol(f.grid, t) - 1.0)))
        errs.append(float(np.abs(diff.values[mask]).max()))
        levels.append(tuple(level_set_measure(diff, a, region).measure for a in alphas))
    return ConvergenceSweep(
        tuple(ts), tuple(errs), tuple(float(a) for a in alphas), tuple(levels),
        "full" if region is None else region.describe(),
    )


def bandlimited_error_bound(f: GridFunction, t: float) -> float:
    """``|t| M^2 ||f_hat||_{L^1} (2 pi)^(-n/2)`` with ``M`` the largest
    frequency carrying mass; bounds ``sup |U(t) f - f|``."""
    g = f.grid
    fh = np.abs(f.to_frequency().values)
    m = g.xi_abs[fh > 0].max(initial=0.0)
    return abs(t) * m**2 * fh.sum() * g.freq_cell_volume * (2 * math.pi) ** (-g.dim / 2)


# ---------------------------------------------------------------------------
# density splitting


@dataclass
class SplitResult:
    g: GridFunction
    h: GridFunction
    eps: float
    achieved_norm: float
    radius: float


def smooth_cutoff(grid: SpectralGrid, radius: float) -> np.ndarray:
    """1 on ``|xi| <= R``, 0 on ``|xi| >= 2R``, raised-cosine ramp between."""
    if radius <= 0:
        return np.zeros(grid.shape)
    u = (grid.xi_abs - radius) / radius
    return np.where(u <= 0, 1.0, np.where(u >= 1, 0.0, np.cos(np.pi * u / 2) ** 2))


def density_split(
    f: GridFunction, eps: float, spec: NormSpec, radius: float | None = None
) -> SplitResult:
    """Split ``f = g + h`` with ``g`` band-limited and ``||h||_{H^{s,r}} < eps``.

    Without ``radius`` the smallest lattice radius that works is found by
    bisection; the ramp of the cutoff must end below ``xi_max``.
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    grid = f.grid
    fh = f.to_frequency()

    def tail(R):
        return fh.with_values(fh.values * (1.0 - smooth_cutoff(grid, R)))

    if radius is None:
        cands = np.unique(grid.xi_abs[grid.xi_abs <= grid.xi_max / 2])
        if fourier_lebesgue_norm(tail(cands[-1]), spec) >= eps:
            raise ResolutionError(
                "tail beyond xi_max/2 already exceeds eps; refine the grid"
            )
        lo, hi = 0, len(cands) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if fourier_lebesgue_norm(tail(cands[mid]), spec) < eps:
                hi = mid
            else:
                lo = mid + 1
        radius = float(cands[lo])
    ghat = fh.with_values(fh.values * smooth_cutoff(grid, radius))
    hhat = fh - ghat
    achieved = fourier_lebesgue_norm(hhat, spec)
    if achieved >= eps:
        raise ResolutionError(f"cutoff radius {radius} leaves a tail of norm {achieved} >= eps")
    return SplitResult(ghat.in_space(f.space), hhat.in_space(f.space), float(eps), achieved, float(radius))


# ---------------------------------------------------------------------------
# random tails


@dataclass(frozen=True)
class Probe:
    """Probe points (snapped to grid nodes) and how to combine them."""

    points: tuple[tuple[float, ...], ...]
    mode: str = "sup"

    def __post_init__(self):
        if self.mode not in ("point", "sup"):
            raise InputError(f"probe mode must be 'point' or 'sup', got {self.mode!r}")
        if not self.points:
            raise InputError("probe has no points")
        if self.mode == "point" and len(self.points) != 1:
            raise InputError("a point probe takes exactly one point")
        object.__setattr__(
            self, "points", tuple(tuple(float(c) for c in np.atleast_1d(p)) for p in self.points)
        )

    @classmethod
    def point(cls, x0) -> "Probe":
        return cls((tuple(np.atleast_1d(x0)),), "point")

    @classmethod
    def region_sample(cls, grid: SpectralGrid, count: int = 16, radius: float | None = None) -> "Probe":
        """``count`` points spread over the cube ``[-radius, radius]^n``."""
        radius = grid.extent / 8 if radius is None else radius
        per_axis = max(1, round(count ** (1 / grid.dim)))
        axis = np.linspace(-radius, radius, per_axis)
        pts = list(np.stack(np.meshgrid(*([axis] * grid.dim), indexing="ij"), -1).reshape(-1, grid.dim))
        return cls(tuple(map(tuple, pts[:count])), "sup")

    def indices(self, grid: SpectralGrid) -> tuple[np.ndarray, ...]:
        p = np.array(self.points)
        if p.shape[1] != grid.dim:
            raise InputError("probe dimension does not match the grid")
        idx = np.rint((p + grid.extent / 2) / grid.dx).astype(int) % grid.points
        return tuple(idx[:, a] for a in range(grid.dim))

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "mode": self.mode}


STATISTICS = ("difference", "evolved", "initial")


def piece_values(
    f: GridFunction,
    plan: RandomizationPlan,
    t: float,
    probe: Probe,
    part: BumpPartition | None = None,
    statistic: str = "difference",
    check: bool = True,
) -> np.ndarray:
    """Values of ``(U(t) - 1) P_k f`` (or ``U(t) P_k f``, or ``P_k f``) at the
    probe points, shape ``(points, K)`` in active-set order."""
    if statistic not in STATISTICS:
        raise InputError(f"unknown statistic {statistic!r}")
    part = part or BumpPartition(f.grid.dim)
    if check:
        check_coverage(f, plan, part)
    grid = f.grid
    fh = f.to_frequency().values
    if statistic == "difference":
        mult = schrodinger_symbol(grid, t) - 1.0
    elif statistic == "evolved":
        mult = schrodinger_symbol(grid, t)
    else:
        mult = np.ones(grid.shape)
    idx = probe.indices(grid)
    out = np.empty((len(probe.points), len(plan.active_set)), dtype=complex)
    base = fh * mult
    for j, k in enumerate(plan.active_set):
        piece = inverse_transform(GridFunction(grid, base * part.weights(grid, k), "frequency"))
        out[:, j] = piece.values[idx]
    return out


def _reduce(x: np.ndarray, mode: str) -> np.ndarray:
    a = np.abs(x)
    return a[:, 0] if mode == "point" else a.max(axis=1)


def draw_statistic(
    plan: RandomizationPlan,
    coeffs: np.ndarray,
    probe: Probe,
    num_draws: int,
    *,
    workers: int = 1,
    chunk: int = 1 << 14,
    first_draw: int = 0,
) -> np.ndarray:
    """``|sum_k g_k coeffs[:, k]|`` reduced over the probe, for each draw."""

    def block(start):
        idx = np.arange(first_draw + start, first_draw + min(start + chunk, num_draws))
        return _reduce(random_series(plan.coefficients(idx), coeffs), probe.mode)

    starts = range(0, num_draws, chunk)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return np.concatenate(list(ex.map(block, starts)))
    return np.concatenate([block(s) for s in starts])


def exceedance(stat: np.ndarray, alphas: Sequence[float]) -> np.ndarray:
    a = np.asarray(alphas, dtype=float)
    return (stat[:, None] > a[None, :]).mean(axis=0)


def default_alphas(stat: np.ndarray, count: int = 24) -> np.ndarray:
    med = float(np.median(stat))
    if med <= 0:
        raise InputError("statistic vanishes for every draw; no alpha grid")
    return med * np.geomspace(0.1, 10.0, count)


def fit_gaussian_tail(alphas, p_hat, t: float | None = None) -> dict:
    """Least-squares fit of ``log P = log C1 - alpha^2 / (C e |t|)^2`` on the tail
    (``0 < P <= 1/2``). Returns slope, intercept and the implied constants."""
    a = np.asarray(alphas, dtype=float)
    p = np.asarray(p_hat, dtype=float)
    keep = (p > 0) & (p <= 0.5)
    out = {"slope": math.nan, "intercept": math.nan, "C": math.nan, "C1": math.nan, "points": int(keep.sum())}
    if keep.sum() < 2:
        return out
    slope, intercept = np.polyfit(a[keep] ** 2, np.log(p[keep]), 1)
    out.update(slope=float(slope), intercept=float(intercept), C1=float(math.exp(intercept)))
    if t and slope < 0:
        out["C"] = float(1 / (math.e * abs(t) * math.sqrt(-slope)))
    return out


@dataclass
class TailEstimate:
    t: float
    alphas: tuple[float, ...]
    p_hat: tuple[float, ...]
    stderr: tuple[float, ...]
    num_draws: int
    probe: dict
    fit: dict = field(default_factory=dict)
    median: float = math.nan

    def rows(self) -> list[dict]:
        return [
            {"alpha": a, "p_hat": p, "stderr": s}
            for a, p, s in zip(self.alphas, self.p_hat, self.stderr)
        ]


def tail_probability(
    f: GridFunction,
    plan: RandomizationPlan,
    t: float,
    alphas: Sequence[float] | None = None,
    probe: Probe | None = None,
    num_draws: int = 10_000,
    *,
    part: BumpPartition | None = None,
    statistic: str = "difference",
    workers: int = 1,
) -> TailEstimate:
    """Empirical ``P(|U(t) f^omega - f^omega| > alpha)`` at the probe."""
    if num_draws < 1000:
        raise InputError(f"need at least 1000 draws, got {num_draws}")
    if alphas is not None and len(alphas) == 0:
        raise InputError("alpha grid is empty")
    probe = probe or Probe.region_sample(f.grid)
    coeffs = piece_values(f, plan, t, probe, part, statistic)
    stat = draw_statistic(plan, coeffs, probe, num_draws, workers=workers)
    alphas = default_alphas(stat) if alphas is None else np.asarray(alphas, dtype=float)
    p = exceedance(stat, alphas)
    se = np.sqrt(p * (1 - p) / num_draws)
    return TailEstimate(
        float(t), tuple(map(float, alphas)), tuple(map(float, p)), tuple(map(float, se)),
        int(num_draws), probe.to_dict(), fit_gaussian_tail(alphas, p, t), float(np.median(stat)),
    )


def exact_tail_probability(
    f: GridFunction,
    plan: RandomizationPlan,
    t: float,
    alphas: Sequence[float],
    probe: Probe,
    *,
    part: BumpPartition | None = None,
    statistic: str = "difference",
    max_terms: int = 12,
) -> np.ndarray:
    """Exact probabilities for a Rademacher plan by enumerating sign patterns."""
    if plan.law != "rademacher":
        raise InputError("exact enumeration needs the rademacher law")
    if len(plan.active_set) > max_terms:
        raise InputError(f"enumeration limited to {max_terms} active coefficients")
    coeffs = piece_values(f, plan, t, probe, part, statistic)
    stat = _reduce(random_series(sign_patterns(len(plan.active_set)), coeffs), probe.mode)
    return exceedance(stat, alphas)


# ---------------------------------------------------------------------------
# stochastic continuity


@dataclass
class UnionBound:
    alpha: float
    num_draws: int
    p5: float
    p6: float
    p8: float
    p9: float
    violations: int

    @property
    def stderr(self) -> dict:
        n = self.num_draws
        return {k: math.sqrt(v * (1 - v) / n) for k, v in
                (("p5", self.p5), ("p6", self.p6), ("p8", self.p8), ("p9", self.p9))}


def union_bound_check(
    split: SplitResult,
    plan: RandomizationPlan,
    t: float,
    alpha: float,
    probe: Probe,
    num_draws: int = 10_000,
    *,
    part: BumpPartition | None = None,
    workers: int = 1,
) -> UnionBound:
    """Events of the ``f = g + h`` decomposition evaluated on shared draws.

    ``A5 = {|U f - f| > a}``, ``A6 = {|U g - g| > a/2}``,
    ``A8 = {|U h| > a/4}``, ``A9 = {|h| > a/4}``; ``A5`` implies one of the
    others draw by draw.
    """
    # coverage is a property of f = g + h; the pieces carry round-off elsewhere
    check_coverage(split.g + split.h, plan, part or BumpPartition(split.g.grid.dim))
    dg = piece_values(split.g, plan, t, probe, part, "difference", check=False)
    dh_u = piece_values(split.h, plan, t, probe, part, "evolved", check=False)
    dh_0 = piece_values(split.h, plan, t, probe, part, "initial", check=False)
    stacked = np.concatenate([dg, dh_u, dh_0], axis=0)
    P = len(probe.points)

    def block(start, chunk=1 << 14):
        idx = np.arange(start, min(start + chunk, num_draws))
        x = random_series(plan.coefficients(idx), stacked)
        xg, xu, x0 = x[:, :P], x[:, P:2 * P], x[:, 2 * P:]
        return (
            _reduce(xg + (xu - x0), probe.mode) > alpha,
            _reduce(xg, probe.mode) > alpha / 2,
            _reduce(xu, probe.mode) > alpha / 4,
            _reduce(x0, probe.mode) > alpha / 4,
        )

    starts = range(0, num_draws, 1 << 14)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    a5, a6, a8, a9 = (np.concatenate([p[i] for p in parts]) for i in range(4))
    viol = int(np.count_nonzero(a5 & ~(a6 | a8 | a9)))
    rates = (float(a.mean()) for a in (a5, a6, a8, a9))
    return UnionBound(float(alpha), int(num_draws), *rates, viol)


def uniformity_probe(
    f: GridFunction,
    plan: RandomizationPlan,
    t: float,
    alpha: float,
    points: Sequence[Sequence[float]],
    num_draws: int = 10_000,
    *,
    part: BumpPartition | None = None,
    workers: int = 1,
) -> dict:
    """Exceedance probability at each probe point on shared draws."""
    probe = Probe(tuple(map(tuple, np.atleast_2d(points))), "sup")
    coeffs = piece_values(f, plan, t, probe, part)
    x = np.abs(random_series(plan.coefficients(np.arange(num_draws)), coeffs))
    p = (x > alpha).mean(axis=0)
    pbar = float(p.mean())
    pooled = math.sqrt(max(pbar * (1 - pbar), 0.0) * 2 / num_draws)
    return {
        "p_hat": p.tolist(),
        "spread": float(p.max() - p.min()),
        "pooled_stderr": pooled,
    }


def stochastic_continuity_report(
    f: GridFunction,
    plan: RandomizationPlan,
    t_grid: Sequence[float],
    alpha: float,
    probe: Probe | None = None,
    num_draws: int = 10_000,
    *,
    eps: float | None = None,
    spec: NormSpec = NormSpec(0.0, 2.0),
    part: BumpPartition | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Exceedance probability at a fixed ``alpha`` as ``t`` decreases.

    With ``eps`` the data are first split by :func:`density_split` and the
    union bound over the pieces is checked at every ``t``.
    """
    start = time.perf_counter()
    probe = probe or Probe.region_sample(f.grid)
    ts = sorted({float(t) for t in t_grid}, reverse=True)
    split = density_split(f, eps, spec) if eps is not None else None
    per_t = []
    for t in ts:
        est = tail_probability(f, plan, t, [alpha], probe, num_draws, part=part, workers=workers)
        rec = {"t": t, "per_alpha": est.rows()}
        if split is not None:
            ub = union_bound_check(split, plan, t, alpha, probe, num_draws, part=part, workers=workers)
            rec["union_bound"] = {
                "p5": ub.p5, "p6": ub.p6, "p8": ub.p8, "p9": ub.p9,
                "violations": ub.violations, "stderr": ub.stderr,
            }
        per_t.append(rec)
    probs = [r["per_alpha"][0]["p_hat"] for r in per_t]
    results = {
        "per_t": per_t,
        "trend": {
            "monotone": all(b <= a for a, b in zip(probs, probs[1:])),
            "final_below_resolution": probs[-1] < 1 / num_draws,
        },
    }
    if split is not None:
        results["split"] = {"eps": split.eps, "achieved_norm": split.achieved_norm, "radius": split.radius}
    config = {
        "t_grid": ts, "alpha": alpha, "num_draws": num_draws, "probe": probe.to_dict(),
        "plan": plan.to_json(), "eps": eps, "spec": {"s": spec.s, "r": spec.r},
    }
    return ExperimentReport(
        "stochastic_continuity", config, plan.seed, results, wall_clock=time.perf_counter() - start
    )
