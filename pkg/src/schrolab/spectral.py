"""Periodic spectral grids, the symmetric Fourier transform and the free
Schrodinger propagator.

Conventions
-----------
Physical nodes are ``x_j = -L/2 + j L/N`` for ``j = 0..N-1`` in every axis.
Frequency nodes are ``xi_m = 2 pi m / L`` for ``m = -N/2..N/2-1`` and are
stored in that (centered) order, so the Nyquist node sits on the negative
side. The transform pair carries ``(2 pi)^(-n/2)`` on both sides and uses the
rectangle (periodic trapezoid) rule, which makes discrete Plancherel exact::

    f_hat(xi_m) = (2 pi)^(-n/2) dx^n  sum_j exp(-i x_j . xi_m) f(x_j)
    f(x_j)      = (2 pi)^(-n/2) dxi^n sum_m exp(+i x_j . xi_m) f_hat(xi_m)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import ContractError, InputError, ResolutionError

PHYSICAL = "physical"
FREQUENCY = "frequency"
Space = Literal["physical", "frequency"]


@dataclass(frozen=True)
class SpectralGrid:
    """Truncated periodic box ``[-L/2, L/2)^n`` with ``N`` points per axis."""

    dim: int
    extent: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InputError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if not (math.isfinite(self.extent) and self.extent > 0):
            raise InputError(f"extent must be a positive real, got {self.extent}")
        n = int(self.points)
        if n != self.points or n < 8 or n & (n - 1):
            raise InputError(f"points per axis must be a power of two >= 8, got {self.points}")
        object.__setattr__(self, "points", n)
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    @property
    def dx(self) -> float:
        return self.extent / self.points

    @property
    def freq_spacing(self) -> float:
        return 2 * math.pi / self.extent

    @property
    def xi_max(self) -> float:
        return math.pi * self.points / self.extent

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def freq_cell_volume(self) -> float:
        return self.freq_spacing**self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """Physical nodes along one axis."""
        return -self.extent / 2 + self.dx * np.arange(self.points)

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers along one axis, centered order."""
        return np.arange(-self.points // 2, self.points // 2)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency nodes along one axis, centered order."""
        return self.freq_spacing * self.modes

    def x_mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.x] * self.dim), indexing="ij", sparse=True)

    def xi_mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.xi] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        """|xi|^2 on the full frequency lattice."""
        return sum(k**2 for k in self.xi_mesh())

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def r_sq(self) -> np.ndarray:
        """|x|^2 on the full physical grid."""
        return sum(c**2 for c in self.x_mesh())

    @cached_property
    def _sign(self) -> np.ndarray:
        # (-1)^m along each axis; N/2 is even so this is (-1)^index.
        s1 = np.where(np.arange(self.points) % 2 == 0, 1.0, -1.0)
        out = np.ones(self.shape)
        for ax in range(self.dim):
            shp = [1] * self.dim
            shp[ax] = self.points
            out = out * s1.reshape(shp)
        return out

    def refined(self, factor: int = 2) -> "SpectralGrid":
        """Same box, ``factor`` times the resolution."""
        return SpectralGrid(self.dim, self.extent, self.points * factor)

    def enlarged(self, factor: int = 2) -> "SpectralGrid":
        """Box ``factor`` times larger at the same spacing."""
        return SpectralGrid(self.dim, self.extent * factor, self.points * factor)

    def describe(self) -> dict:
        return {"dim": self.dim, "L": self.extent, "N": self.points}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a grid, in either physical or frequency space."""

    grid: SpectralGrid
    values: np.ndarray
    space: Space = PHYSICAL

    def __post_init__(self):
        if self.space not in (PHYSICAL, FREQUENCY):
            raise InputError(f"unknown space tag {self.space!r}")
        v = np.array(self.values, dtype=np.complex128)
        if v.size != self.grid.size:
            raise InputError(
                f"expected {self.grid.size} samples for the grid, got {v.size}"
            )
        v = v.reshape(self.grid.shape)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def to_frequency(self) -> "GridFunction":
        return self if self.space == FREQUENCY else forward_transform(self)

    def to_physical(self) -> "GridFunction":
        return self if self.space == PHYSICAL else inverse_transform(self)

    def in_space(self, space: Space) -> "GridFunction":
        return self.to_frequency() if space == FREQUENCY else self.to_physical()

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values, self.space)

    def _coerce(self, other: "GridFunction") -> np.ndarray:
        if other.grid != self.grid:
            raise InputError("grid functions live on different grids")
        return other.in_space(self.space).values

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values + self._coerce(other))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values - self._coerce(other))

    def __mul__(self, c: complex) -> "GridFunction":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)


def zeros(grid: SpectralGrid, space: Space = PHYSICAL) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.shape, dtype=complex), space)


def forward_transform(f: GridFunction) -> GridFunction:
    if f.space != PHYSICAL:
        raise ContractError("forward_transform expects a physical-space function")
    g = f.grid
    spec = np.fft.fftshift(np.fft.fftn(f.values))
    scale = (g.dx / math.sqrt(2 * math.pi)) ** g.dim
    return GridFunction(g, spec * g._sign * scale, FREQUENCY)


def inverse_transform(f: GridFunction) -> GridFunction:
    if f.space != FREQUENCY:
        raise ContractError("inverse_transform expects a frequency-space function")
    g = f.grid
    scale = (g.freq_spacing * g.points / math.sqrt(2 * math.pi)) ** g.dim
    vals = np.fft.ifftn(np.fft.ifftshift(f.values * g._sign)) * scale
    return GridFunction(g, vals, PHYSICAL)


def schrodinger_symbol(grid: SpectralGrid, t: float) -> np.ndarray:
    """exp(-i t |xi|^2) on the frequency lattice."""
    return np.exp(-1j * t * grid.xi_sq)


def propagate(f: GridFunction, t: float) -> GridFunction:
    """Free evolution ``U(t) f``, returned in physical space."""
    t = float(t)
    if not math.isfinite(t):
        raise InputError(f"time must be finite, got {t}")
    fh = f.to_frequency()
    return inverse_transform(fh.with_values(fh.values * schrodinger_symbol(f.grid, t)))


def fractional_derivative(f: GridFunction, alpha: float) -> GridFunction:
    """``D^alpha f``: multiply the spectrum by ``|xi|^alpha``. Same space as ``f``."""
    if not alpha >= 0:
        raise InputError(f"derivative order must be >= 0, got {alpha}")
    fh = f.to_frequency()
    weight = np.ones(f.grid.shape) if alpha == 0 else f.grid.xi_abs**alpha
    return fh.with_values(fh.values * weight).in_space(f.space)


def bracket_weight(f: GridFunction, s: float) -> GridFunction:
    """Multiply the spectrum by ``<xi>^s = (1 + |xi|^2)^(s/2)``."""
    fh = f.to_frequency()
    return fh.with_values(fh.values * (1.0 + f.grid.xi_sq) ** (s / 2))


# ---------------------------------------------------------------------------
# Closed-form signals


@dataclass(frozen=True)
class AnalyticSignal:
    """A signal with a closed form.

    ``gaussian``: ``exp(-|x - c|^2 / (2 w^2)) exp(i m . x)``.
    ``plane_wave``: ``exp(i mode . x)``; the mode must be a lattice frequency.
    ``dyadic_annulus``: spectrum ``2^(-k a)`` on ``2^k <= |xi| <= 2^(k+1)``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def gaussian(cls, center=0.0, width=1.0, modulation=0.0) -> "AnalyticSignal":
        if not width > 0:
            raise InputError(f"gaussian width must be positive, got {width}")
        return cls("gaussian", {
            "center": _as_tuple(center), "width": float(width),
            "modulation": _as_tuple(modulation),
        })

    @classmethod
    def plane_wave(cls, mode) -> "AnalyticSignal":
        return cls("plane_wave", {"mode": _as_tuple(mode)})

    @classmethod
    def dyadic_annulus(cls, k: int, amplitude_exponent: float) -> "AnalyticSignal":
        return cls("dyadic_annulus", {"k": int(k), "amplitude_exponent": float(amplitude_exponent)})

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticSignal":
        d = dict(d)
        kind = d.pop("kind", None)
        makers = {"gaussian": cls.gaussian, "plane_wave": cls.plane_wave,
                  "dyadic_annulus": cls.dyadic_annulus}
        if kind not in makers:
            raise InputError(f"unknown signal kind {kind!r}")
        try:
            return makers[kind](**d)
        except TypeError as exc:
            raise InputError(f"bad parameters for {kind} signal: {exc}") from None

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: list(v) if isinstance(v, tuple) else v
                                      for k, v in self.params.items()}}


def _as_tuple(v) -> tuple[float, ...]:
    return tuple(float(a) for a in np.atleast_1d(np.asarray(v, dtype=float)))


def _broadcast(v: tuple[float, ...], dim: int) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.size == 1:
        return np.full(dim, a[0])
    if a.size != dim:
        raise InputError(f"vector of length {a.size} does not match dimension {dim}")
    return a


def materialize(sig: AnalyticSignal, grid: SpectralGrid) -> GridFunction:
    """Sample a closed-form signal in its natural space."""
    n = grid.dim
    if sig.kind == "gaussian":
        c = _broadcast(sig.params["center"], n)
        m = _broadcast(sig.params["modulation"], n)
        w = sig.params["width"]
        vals = np.ones(grid.shape, dtype=complex)
        for ax, x in enumerate(grid.x_mesh()):
            vals = vals * np.exp(-((x - c[ax]) ** 2) / (2 * w**2) + 1j * m[ax] * x)
        return GridFunction(grid, vals, PHYSICAL)
    if sig.kind == "plane_wave":
        mode = _broadcast(sig.params["mode"], n)
        idx = mode / grid.freq_spacing
        if np.any(np.abs(idx - np.round(idx)) > 1e-9) or np.any(
            (np.round(idx) < -grid.points // 2) | (np.round(idx) >= grid.points // 2)
        ):
            raise ResolutionError(f"mode {mode.tolist()} is not on the frequency lattice")
        vals = np.ones(grid.shape, dtype=complex)
        for ax, x in enumerate(grid.x_mesh()):
            vals = vals * np.exp(1j * mode[ax] * x)
        return GridFunction(grid, vals, PHYSICAL)
    if sig.kind == "dyadic_annulus":
        k = sig.params["k"]
        a = sig.params["amplitude_exponent"]
        if 2.0 ** (k + 1) >= grid.xi_max:
            raise ResolutionError(
                f"annulus outer radius 2^{k + 1} exceeds xi_max = {grid.xi_max:.6g}"
            )
        r = grid.xi_abs
        vals = np.where((r >= 2.0**k) & (r <= 2.0 ** (k + 1)), 2.0 ** (-k * a), 0.0)
        return GridFunction(grid, vals, FREQUENCY)
    raise InputError(f"unknown signal kind {sig.kind!r}")


def gaussian_evolution(
    x, t: float, center=0.0, width=1.0, modulation=0.0, period: float | None = None, images: int = 8
) -> np.ndarray:
    """Exact ``U(t)`` applied to a 1D gaussian, evaluated at points ``x``.

    With ``period`` the result is the evolution on the circle of that length,
    i.e. the sum of ``2 * images + 1`` translated copies of the line solution.
    """
    x = np.asarray(x, dtype=float)
    if period is not None:
        return sum(
            gaussian_evolution(x + j * period, t, center, width, modulation)
            for j in range(-images, images + 1)
        )
    w2 = width**2
    a = w2 + 2j * t
    y = x - center - 2 * t * modulation
    return (
        np.sqrt(w2 / a)
        * np.exp(-(y**2) / (2 * a))
        * np.exp(1j * modulation * x - 1j * t * modulation**2)
    )


def gaussian_spectrum(xi, center=0.0, width=1.0, modulation=0.0) -> np.ndarray:
    """Exact transform of the 1D gaussian in the symmetric convention."""
    xi = np.asarray(xi, dtype=float)
    return width * np.exp(-(width**2) * (xi - modulation) ** 2 / 2) * np.exp(
        -1j * center * (xi - modulation)
    )


def random_bandlimited(
    grid: SpectralGrid, rng: np.random.Generator, bandwidth: float, *, smooth: bool = True
) -> GridFunction:
    """Random spectrum supported in ``|xi| <= bandwidth``.

    With ``smooth`` the complex white noise is tapered by a raised-cosine
    envelope so the function decays in space as well.
    """
    if bandwidth >= grid.xi_max:
        raise ResolutionError("bandwidth must be below xi_max")
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    r = grid.xi_abs / bandwidth
    if smooth:
        env = np.where(r < 1, np.cos(np.pi * r / 2) ** 2, 0.0)
    else:
        env = (r <= 1).astype(float)
    return GridFunction(grid, noise * env, FREQUENCY)


def wave_packets(
    grid: SpectralGrid,
    rng: np.random.Generator,
    count: int = 4,
    max_freq: float = 4.0,
    width: float = 1.0,
    spread: float | None = None,
) -> GridFunction:
    """Sum of gaussian packets with random centers, carriers and amplitudes."""
    spread = grid.extent / 8 if spread is None else spread
    total = np.zeros(grid.shape, dtype=complex)
    for _ in range(count):
        c = rng.uniform(-spread, spread, grid.dim)
        m = rng.uniform(-max_freq, max_freq, grid.dim)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        total += amp * materialize(AnalyticSignal.gaussian(c, width, m), grid).values
    return GridFunction(grid, total, PHYSICAL)


def relative_l2_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm((a - b).ravel()) / np.linalg.norm(np.ravel(b)))
