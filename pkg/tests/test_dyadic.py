import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schrolab.dyadic import (
    DyadicDatum,
    annulus_evolution,
    build_datum,
    fit_blowup,
    growth_oracle,
    growth_time_grid,
    measure_growth,
    phase_budget,
    refining_grid,
    scale_grid,
    sweep,
)
from schrolab.errors import FitError, InputError, ResolutionError
from schrolab.norms import Ball, NormSpec, TimeGrid, fourier_lebesgue_norm, lebesgue_norm
from schrolab.spectral import SpectralGrid

KS = range(2, 7)


def test_datum_validation():
    with pytest.raises(InputError):
        DyadicDatum(0, 0.0, 4.0)
    with pytest.raises(InputError):
        DyadicDatum(2, 0.0, 3.0)
    with pytest.raises(InputError):
        DyadicDatum(2, 0.0, 4.0, delta=1.0)
    d = DyadicDatum(3, 0.1, 6.0)
    assert math.isclose(d.sigma, 0.1 + 1 - 1 / 3)
    assert d.norm_spec == NormSpec(0.1, 3.0)
    assert math.isclose(d.expected_slope, 1 / 6 - 0.1)


def test_datum_values():
    d = DyadicDatum(2, 0.5, 4.0)  # sigma = 1
    g = scale_grid(2)
    f = build_datum(d, g)
    inside = (g.xi_abs >= 4) & (g.xi_abs <= 8)
    assert np.all(f.values[inside] == 0.25)
    assert not np.any(f.values[~inside])


def test_annulus_beyond_nyquist():
    with pytest.raises(ResolutionError):
        build_datum(DyadicDatum(5, 0.0, 4.0), SpectralGrid(1, 2 * math.pi, 64))


@pytest.mark.parametrize("s", [0.0, 0.25])
def test_norm_is_order_one(s):
    for k in KS:
        d = DyadicDatum(k, s, 4.0)
        val = fourier_lebesgue_norm(build_datum(d, scale_grid(k)), d.norm_spec)
        assert 0.5 <= val <= 2.0


@pytest.mark.parametrize("k", list(KS))
def test_frequency_mass(k):
    d = DyadicDatum(k, 0.0, 4.0)
    g = scale_grid(k)
    f = build_datum(d, g)
    mass = np.sum(np.abs(f.values)) * g.freq_spacing
    exact = 2 * 2.0**k * d.amplitude
    # trapezoid on a lattice through both endpoints: one extra node per edge
    assert abs(mass - exact) <= 2 * g.freq_spacing * d.amplitude + 1e-12


def test_initial_profile_has_no_cancellation():
    for k in KS:
        d = DyadicDatum(k, 0.0, 4.0)
        g = scale_grid(k)
        x = np.linspace(0, d.region_radius, 200)
        u0 = annulus_evolution(d, x, [0.0])[0]
        # closed form of the t = 0 integral
        y = 2.0**k * x
        exact = math.sqrt(2 / math.pi) * d.amplitude * 2.0**k * np.where(
            y == 0, 1.0, (np.sin(2 * y) - np.sin(y)) / np.where(y == 0, 1, y))
        assert np.abs(u0 - exact).max() < 1e-10 * np.abs(exact).max()
        ratio = np.abs(u0) / 2.0 ** (k * (1 - d.sigma))
        assert ratio.min() > 0.05
        # t = 0 alone reproduces the data's L^p norm on the region
        region = Ball((0.0,), d.region_radius)
        val = measure_growth(d, g, TimeGrid((0.0,)))
        assert math.isclose(val, lebesgue_norm(build_datum(d, g).to_physical(), 4.0, region),
                            rel_tol=1e-12)


def test_phase_control():
    for k in KS:
        d = DyadicDatum(k, 0.0, 4.0, 0.5)
        b = phase_budget(d)
        assert b["dispersive"] <= 4 * d.delta / 100 * (1 + 1e-12)
        assert b["transport"] <= 2 * (1 + 1e-12)
        x = np.linspace(-d.region_radius, d.region_radius, 101)
        t = np.linspace(0, d.t_window, 17)
        u = np.abs(annulus_evolution(d, x, t))
        assert u.min() / 2.0 ** (k * (1 - d.sigma)) > 0.05


def test_time_refinement_is_stable():
    d = DyadicDatum(4, 0.0, 4.0)
    g = scale_grid(4)
    a = measure_growth(d, g, growth_time_grid(d, 33))
    b = measure_growth(d, g, growth_time_grid(d, 65))
    assert b >= a
    assert (b - a) / a < 1e-3


def test_time_window_is_enforced():
    d = DyadicDatum(2, 0.0, 4.0)
    with pytest.raises(InputError):
        measure_growth(d, scale_grid(2), TimeGrid((0.0, 2 * d.t_window)))


def test_under_resolved_region():
    d = DyadicDatum(2, 0.0, 4.0)
    with pytest.raises(ResolutionError):
        measure_growth(d, SpectralGrid(1, 2 * math.pi * 8, 64))


# -- fits ----------------------------------------------------------------------------

@given(st.floats(-2, 2), st.floats(-5, 5))
def test_exact_log_linear_data(slope, intercept):
    ks = np.arange(2, 7)
    fit = fit_blowup(ks, 2.0 ** (slope * ks + intercept))
    assert abs(fit.fitted_slope - slope) < 1e-10
    assert abs(fit.intercept - intercept) < 1e-9
    assert fit.residual < 1e-9


def test_fit_errors():
    with pytest.raises(FitError):
        fit_blowup([1, 2, 3], [1, 2, 4])
    with pytest.raises(FitError):
        fit_blowup([1, 2, 3, 4], [1, 2, 0, 4])
    with pytest.raises(FitError):
        fit_blowup([1, 2, 3, 4], [1, 2, 3])


@pytest.mark.parametrize("s,p", [(0.0, 4.0), (0.25, 4.0), (0.0, 6.0), (0.1, 8.0)])
def test_sweep_matches_oracle_and_exponent(s, p):
    res = sweep(KS, s, p, with_oracle=True)
    for row in res.rows:
        assert abs(row.growth_value - row.oracle_value) <= 0.02 * row.oracle_value
    assert abs(res.fit.fitted_slope - (1 / p - s)) < 0.05
    if 1 / p - s >= 0.15:
        assert res.fit.fitted_slope > 0.1
    if s == 1 / p:
        assert abs(res.fit.fitted_slope) < 0.05


def test_refining_grid_cross_check():
    # the alternative discretisation reaches the same exponent within the band
    for s, expected in ((0.0, 0.25), (0.25, 0.0)):
        vals = []
        for k in range(2, 6):
            d = DyadicDatum(k, s, 4.0)
            vals.append(measure_growth(d, refining_grid(k)))
        assert abs(fit_blowup(range(2, 6), vals).fitted_slope - expected) < 0.05


def test_oracle_on_coarser_mesh():
    d = DyadicDatum(3, 0.0, 4.0)
    g = scale_grid(3)
    a = growth_oracle(d, g, refine=10)
    b = growth_oracle(d, g, refine=20, time_count=129)
    assert abs(a - b) < 2e-3 * b
