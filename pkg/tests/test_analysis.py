import math
import warnings

import numpy as np
import pytest

from foliated_link.analysis import (
    AlphaGrid,
    AlphaRow,
    build_alpha_grid,
    cost,
    default_n_max,
    eta_eff_model,
    fit_attenuation,
    grid_from_points,
    optimize_repeaters,
)
from foliated_link.montecarlo import brute_force_single_hop_etr

STEANE_09_L10_ALPHA = 0.21701466343495485


def test_fit_exact_model():
    pts = [(L, 10 ** (-0.02 * L)) for L in (10, 20, 50, 100)]
    fit = fit_attenuation(pts)
    assert fit.alpha_eff == pytest.approx(0.2, rel=1e-12)
    assert fit.log10_prefactor == pytest.approx(0.0, abs=1e-12)
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-12)


def test_fit_with_prefactor():
    pts = [(L, 0.8 * 10 ** (-0.001 * L)) for L in (4, 8, 12)]
    fit = fit_attenuation(pts, stderrs=[0.01] * 3)
    assert fit.alpha_eff == pytest.approx(0.01, rel=1e-12)
    assert fit.log10_prefactor == pytest.approx(math.log10(0.8), rel=1e-12)
    assert fit.alpha_stderr > 0


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_attenuation([(1, 0.5)])
    with pytest.raises(ValueError):
        fit_attenuation([(1, 0.5), (1, 0.4)])
    with pytest.raises(ValueError):
        fit_attenuation([(1, 0.5), (2, 0.0)])


def test_steane_grid_regression(steane_code):
    g = build_alpha_grid(steane_code, 0.9, [10.0], (2, 12), trials=20_000, seed=0)
    row = g.rows[0]
    assert row.alpha_eff == pytest.approx(STEANE_09_L10_ALPHA, rel=1e-12)
    assert row.rms_residual < 0.05


def test_steane_grid_matches_factorization(steane_code):
    g = build_alpha_grid(steane_code, 1.0, [5.0, 10.0], (2, 12), trials=20_000, seed=0)
    for row in g.rows:
        eta = 10 ** (-0.2 * row.l0_km / 10)
        closed = -(10 / row.l0_km) * math.log10(brute_force_single_hop_etr(steane_code, eta))
        assert row.alpha_eff == pytest.approx(closed, rel=0.02)


def test_zero_rate_cells_dropped_with_warning():
    items = [(5.0, 1, 0.5, 0.01), (5.0, 2, 0.25, 0.01), (5.0, 3, 0.0, 0.0)]
    with pytest.warns(UserWarning, match="zero-rate"):
        g = grid_from_points("c", 1.0, items)
    assert g.rows[0].alpha_eff == pytest.approx(10 * math.log10(2) / 5)


def grid(rows, n=48, k=6):
    return AlphaGrid("g", 0.9, tuple(AlphaRow(*r) for r in rows), (2, 30), n, k)


def test_model_interpolation():
    g = grid([(2.0, 0.002, -0.01), (4.0, 0.006, -0.03)])
    # on a row, at a fitted distance
    assert eta_eff_model(g, 2.0, 20.0) == pytest.approx(10 ** (-0.01 - 0.002 * 2))
    # midpoint uses the mean alpha and prefactor
    assert eta_eff_model(g, 3.0, 100.0) == pytest.approx(10 ** (-0.02 - 0.004 * 10))
    flat = grid([(1.0, 0.0, 0.0), (2.0, 0.0, 0.0)])
    assert eta_eff_model(flat, 1.5, 10) == eta_eff_model(flat, 1.5, 10_000) == 1.0
    with pytest.raises(ValueError):
        eta_eff_model(g, 5.0, 10.0)


def test_cost_examples():
    assert cost(1, 10, 1.0, 8, 1) == pytest.approx(0.8)
    assert cost(3, 10, 0.5, 7, 1) == pytest.approx(2 * cost(3, 10, 1.0, 7, 1))
    assert cost(1, 10, 0.0, 7, 1) == math.inf
    with pytest.raises(ValueError):
        cost(1, 0, 1.0, 7, 1)


def test_grid_validation():
    with pytest.raises(ValueError):
        grid([])
    with pytest.raises(ValueError):
        grid([(2.0, 0, 0), (2.0, 0, 0)])


def brute_min(g, L, n_max):
    best = None
    for N in range(1, n_max + 1):
        l0 = L / N
        if g.l0_range[0] <= l0 <= g.l0_range[1]:
            c = cost(N, L, eta_eff_model(g, l0, L), g.n, g.k)
            if best is None or c < best[0]:
                best = (c, N)
    return best


def test_optimize_is_true_minimum():
    g = grid([(1.0, 0.001, 0.0), (2.0, 0.003, -0.001), (4.0, 0.015, -0.002), (8.0, 0.05, -0.01)])
    for L in (10.0, 37.0, 100.0, 1000.0, 5000.0):
        res = optimize_repeaters(g, L)
        assert (res.cost, res.n_opt) == brute_min(g, L, default_n_max(L))
        for N in (res.n_opt - 1, res.n_opt + 1):
            l0 = L / N if N >= 1 else None
            if l0 and g.l0_range[0] <= l0 <= g.l0_range[1]:
                assert cost(N, L, eta_eff_model(g, l0, L), 48, 6) >= res.cost


def test_optimize_short_link_uses_one_repeater():
    g = grid([(0.5, 0.0, 0.0), (4.0, 0.0, 0.0)])
    assert optimize_repeaters(g, 3.0).n_opt == 1


def test_optimize_insufficient_grid():
    g = grid([(1.0, 0.0, 0.0), (2.0, 0.0, 0.0)])
    with pytest.raises(ValueError, match="grid range insufficient"):
        optimize_repeaters(g, 10.0, n_max=3)
