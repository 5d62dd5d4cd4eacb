"""Unit-lattice partition of unity in frequency and randomization of data.

``psi(xi) = prod_i eta(xi_i)`` with ``eta`` even, supported in ``[-1, 1]``
and ``sum_k eta(x - k) = 1``. The projection ``P_k f`` keeps
``psi(xi - k) f_hat``; the randomization multiplies each piece by an
independent coefficient ``g_k``.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import rng
from .errors import CoverageError, InputError
from .spectral import GridFunction, SpectralGrid, inverse_transform

Point = tuple[int, ...]

SUPPORT_THRESHOLD = 1e-14


def _raised_cosine(x: np.ndarray) -> np.ndarray:
    return np.where(np.abs(x) < 1, np.cos(np.pi * x / 2) ** 2, 0.0)


def _hat(x: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - np.abs(x), 0.0, None)


PROFILES = {"raised_cosine": _raised_cosine, "bspline2": _hat}


@dataclass(frozen=True)
class BumpPartition:
    dim: int
    profile: str = "raised_cosine"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InputError(f"partition dimension must be 1, 2 or 3, got {self.dim}")
        if self.profile not in PROFILES:
            raise InputError(f"unknown partition profile {self.profile!r}")

    def eta(self, x) -> np.ndarray:
        return PROFILES[self.profile](np.asarray(x, dtype=float))

    def weights(self, grid: SpectralGrid, k: Sequence[int]) -> np.ndarray:
        """``psi(xi - k)`` on the grid's frequency lattice."""
        if len(k) != grid.dim:
            raise InputError(f"lattice point {tuple(k)} does not match dimension {grid.dim}")
        out = np.ones(grid.shape)
        for ax, xi in enumerate(grid.xi_mesh()):
            out = out * self.eta(xi - k[ax])
        return out

    def lattice_range(self, grid: SpectralGrid) -> range:
        """Integers whose unit cube meets the frequency lattice."""
        lo = math.floor(grid.xi[0]) - 1
        hi = math.ceil(grid.xi[-1]) + 1
        return range(lo, hi + 1)

    def partition_sum(self, grid: SpectralGrid) -> np.ndarray:
        """``sum_k psi(xi - k)`` over every contributing lattice point."""
        # the tensor sum factorises; evaluate the 1D sum and multiply
        ks = np.array(self.lattice_range(grid))
        one_d = self.eta(grid.xi[:, None] - ks[None, :]).sum(axis=1)
        out = np.ones(grid.shape)
        for ax in range(grid.dim):
            shp = [1] * grid.dim
            shp[ax] = grid.points
            out = out * one_d.reshape(shp)
        return out


def build_partition(dim: int, profile_kind: str = "raised_cosine") -> BumpPartition:
    return BumpPartition(dim, profile_kind)


def _check_point(grid: SpectralGrid, part: BumpPartition, k: Sequence[int]) -> Point:
    k = tuple(int(v) for v in k)
    if len(k) != grid.dim or part.dim != grid.dim:
        raise InputError(f"lattice point {k} does not match dimension {grid.dim}")
    r = part.lattice_range(grid)
    if any(v < r.start or v >= r.stop for v in k):
        raise InputError(f"lattice point {k} lies outside the representable range")
    return k


def project(f: GridFunction, k: Sequence[int], part: BumpPartition) -> GridFunction:
    """``psi(D - k) f`` in physical space."""
    k = _check_point(f.grid, part, k)
    fh = f.to_frequency()
    return inverse_transform(fh.with_values(fh.values * part.weights(f.grid, k)))


def support_points(f: GridFunction, part: BumpPartition) -> list[Point]:
    """Lattice points ``k`` with ``psi(. - k) f_hat`` not identically zero."""
    fh = np.abs(f.to_frequency().values)
    peak = fh.max()
    if peak == 0:
        return []
    idx = np.nonzero(fh > SUPPORT_THRESHOLD * peak)
    xi = [f.grid.xi[i] for i in idx]
    cand = set()
    fl = [np.floor(c).astype(int) for c in xi]
    for shift in itertools.product((0, 1), repeat=f.grid.dim):
        ks = np.stack([fl[a] + shift[a] for a in range(f.grid.dim)], axis=1)
        w = np.ones(ks.shape[0])
        for a in range(f.grid.dim):
            w = w * part.eta(xi[a] - ks[:, a])
        cand.update(map(tuple, ks[w > 0].tolist()))
    return sorted(cand)


@dataclass(frozen=True)
class RandomizationPlan:
    law: str
    seed: int
    active_set: tuple[Point, ...]

    def __post_init__(self):
        if self.law not in rng.LAWS:
            raise InputError(f"unknown coefficient law {self.law!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
        pts = tuple(sorted({tuple(int(v) for v in k) for k in self.active_set}))
        if not pts:
            raise InputError("active set is empty")
        if len({len(k) for k in pts}) != 1:
            raise InputError("active set mixes dimensions")
        object.__setattr__(self, "active_set", pts)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def for_data(
        cls, f: GridFunction, law: str, seed: int, part: BumpPartition | None = None
    ) -> "RandomizationPlan":
        """Plan whose active set is exactly the data's covering set."""
        part = part or BumpPartition(f.grid.dim)
        pts = support_points(f, part)
        if not pts:
            raise InputError("data vanish identically; nothing to randomize")
        return cls(law, seed, tuple(pts))

    @property
    def dim(self) -> int:
        return len(self.active_set[0])

    def bounds(self) -> list[list[int]]:
        a = np.array(self.active_set)
        return [[int(lo), int(hi)] for lo, hi in zip(a.min(axis=0), a.max(axis=0))]

    def is_box(self) -> bool:
        b = self.bounds()
        return len(self.active_set) == math.prod(hi - lo + 1 for lo, hi in b)

    def coefficients(self, draw_indices, points: Sequence[Point] | None = None) -> np.ndarray:
        """Coefficients ``g_k(omega)``, shape ``(draws, points)``."""
        pts = self.active_set if points is None else points
        return rng.coefficients(self.law, self.seed, np.atleast_1d(draw_indices), pts)

    def to_json(self) -> str:
        d = {"law": self.law, "seed": self.seed, "active_set_bounds": self.bounds()}
        if not self.is_box():
            d["active_set"] = [list(k) for k in self.active_set]
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | Mapping) -> "RandomizationPlan":
        d = json.loads(text) if isinstance(text, str) else dict(text)
        if "active_set" in d:
            pts = [tuple(k) for k in d["active_set"]]
        else:
            ranges = [range(lo, hi + 1) for lo, hi in d["active_set_bounds"]]
            pts = list(itertools.product(*ranges))
        return cls(d["law"], int(d["seed"]), tuple(pts))


@dataclass(frozen=True)
class RandomSample:
    plan: RandomizationPlan
    draw_index: int
    coefficients: dict = field(default_factory=dict)

    @classmethod
    def draw(cls, plan: RandomizationPlan, draw_index: int) -> "RandomSample":
        g = plan.coefficients([draw_index])[0]
        return cls(plan, int(draw_index), dict(zip(plan.active_set, g.tolist())))


def check_coverage(f: GridFunction, plan: RandomizationPlan, part: BumpPartition) -> None:
    needed = set(support_points(f, part))
    missing = needed - set(plan.active_set)
    if missing:
        raise CoverageError(
            f"active set misses {len(missing)} lattice points, e.g. {sorted(missing)[:3]}"
        )


def randomize(
    f: GridFunction,
    plan: RandomizationPlan,
    draw_index: int = 0,
    part: BumpPartition | None = None,
    coefficients: Mapping[Point, float] | None = None,
) -> GridFunction:
    """``f^omega`` with ``f_hat^omega = sum_k g_k psi(xi - k) f_hat``.

    ``coefficients`` overrides the random draw (missing points count as 0).
    Returned in the same space as ``f``.
    """
    part = part or BumpPartition(f.grid.dim)
    check_coverage(f, plan, part)
    if coefficients is None:
        coefficients = RandomSample.draw(plan, draw_index).coefficients
    mult = np.zeros(f.grid.shape)
    for k in plan.active_set:
        c = coefficients.get(k, 0.0)
        if c:
            mult += c * part.weights(f.grid, k)
    fh = f.to_frequency()
    return fh.with_values(fh.values * mult).in_space(f.space)


def projections(
    f: GridFunction, part: BumpPartition, points: Iterable[Point] | None = None
) -> dict[Point, GridFunction]:
    points = support_points(f, part) if points is None else points
    return {tuple(k): project(f, k, part) for k in points}


def square_function(
    f: GridFunction, part: BumpPartition | None = None, points: Iterable[Point] | None = None
) -> GridFunction:
    """``(sum_k |psi(D - k) f|^2)^(1/2)`` in physical space."""
    part = part or BumpPartition(f.grid.dim)
    acc = np.zeros(f.grid.shape)
    for piece in projections(f, part, points).values():
        acc += np.abs(piece.values) ** 2
    return GridFunction(f.grid, np.sqrt(acc))


def random_series(G: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``sum_k G[:, k] c[..., k]`` with a fixed summation order.

    ``G`` has shape (D, K); ``c`` has shape (..., K). Returns (D, ...).
    Avoids BLAS so the result does not depend on the thread count.
    """
    c = np.asarray(c)
    out = np.zeros((G.shape[0],) + c.shape[:-1], dtype=np.result_type(G, c))
    for j in range(G.shape[1]):
        out += np.multiply.outer(G[:, j], c[..., j])
    return out


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    p: float
    num_draws: int


def _as_arrays(c: Mapping[Point, complex]) -> tuple[list[Point], np.ndarray]:
    if not c:
        raise InputError("coefficient family is empty")
    pts = [tuple(int(v) for v in np.atleast_1d(k)) for k in c]
    return pts, np.array([complex(v) for v in c.values()])


def khintchine_moment(
    c: Mapping[Point, complex],
    law: str,
    p: float,
    num_draws: int,
    seed: int,
    *,
    workers: int = 1,
    chunk: int = 1 << 15,
) -> MomentEstimate:
    """Monte Carlo ``(E |sum_k g_k c_k|^p)^(1/p)`` with a delta-method stderr."""
    if not p >= 2:
        raise InputError(f"moment order must be >= 2, got {p}")
    if num_draws < 1000:
        raise InputError(f"need at least 1000 draws, got {num_draws}")
    pts, vals = _as_arrays(c)

    def block(start):
        idx = np.arange(start, min(start + chunk, num_draws))
        G = rng.coefficients(law, seed, idx, pts)
        return np.abs(random_series(G, vals)) ** p

    starts = range(0, num_draws, chunk)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            samples = np.concatenate(list(ex.map(block, starts)))
    else:
        samples = np.concatenate([block(s) for s in starts])
    m = samples.mean()
    se_m = samples.std(ddof=1) / math.sqrt(num_draws)
    value = m ** (1 / p)
    stderr = se_m * value / (p * m) if m > 0 else 0.0
    return MomentEstimate(float(value), float(stderr), float(p), int(num_draws))


def rademacher_exact_moment(c: Mapping[Point, complex], p: float, max_terms: int = 20) -> float:
    """Exact ``(E |sum eps_k c_k|^p)^(1/p)`` by enumerating all sign patterns."""
    _, vals = _as_arrays(c)
    if vals.size > max_terms:
        raise InputError(f"enumeration limited to {max_terms} coefficients")
    signs = sign_patterns(vals.size)
    return float(np.mean(np.abs(random_series(signs, vals)) ** p) ** (1 / p))


def sign_patterns(n: int) -> np.ndarray:
    """All ``2^n`` sign vectors, shape ``(2^n, n)``."""
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return 1.0 - 2.0 * bits
