"""Effective-attenuation fits, spacing interpolation and repeater-count optimization."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .codes import CssCode
from .decoding import EXACT
from .foliation import foliate
from .montecarlo import ALPHA0_DB_PER_KM, LossModel, SimResult, estimate_etr

DEFAULT_N_RANGE = (2, 30)
N_MAX_CAP = 100_000
ALL_LOGICALS = "all"
PER_LOGICAL = "per-logical"


@dataclass(frozen=True)
class FitResult:
    alpha_eff: float
    log10_prefactor: float
    rms_residual: float
    points: int
    # standard error of alpha_eff; propagated from MC errors when given
    alpha_stderr: float = float("nan")


def fit_attenuation(points: Sequence[tuple[float, float]], stderrs: Sequence[float] | None = None) -> FitResult:
    """Least squares on ``log10(eta) = c - (alpha/10) L``.

    ``points`` are ``(L_km, eta_eff)`` pairs.  When per-point standard
    errors of ``eta_eff`` are given, ``alpha_stderr`` comes from the delta
    method; otherwise from the residual variance.
    """
    if len(points) < 2:
        raise ValueError("need at least 2 points to fit an attenuation")
    L = np.array([p[0] for p in points], dtype=float)
    eta = np.array([p[1] for p in points], dtype=float)
    if np.any(eta <= 0):
        raise ValueError("cannot fit zero rate")
    if np.ptp(L) == 0:
        raise ValueError("need at least two distinct distances")
    y = np.log10(eta)
    design = np.column_stack([np.ones_like(L), L])
    (c, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (c + slope * L)
    rms = float(np.sqrt(np.mean(resid**2)))
    dev = L - L.mean()
    sxx = float(np.sum(dev**2))
    if stderrs is not None:
        sigma = np.asarray(stderrs, dtype=float) / (eta * math.log(10))
        var = float(np.sum((dev / sxx) ** 2 * sigma**2))
    elif len(points) > 2:
        var = float(np.sum(resid**2)) / (len(points) - 2) / sxx
    else:
        var = float("nan")
    return FitResult(
        alpha_eff=float(-10.0 * slope),
        log10_prefactor=float(c),
        rms_residual=rms,
        points=len(points),
        alpha_stderr=10.0 * math.sqrt(var) if var == var else var,
    )


@dataclass(frozen=True)
class AlphaRow:
    l0_km: float
    alpha_eff: float
    log10_prefactor: float
    rms_residual: float = 0.0
    alpha_stderr: float = float("nan")


@dataclass(frozen=True)
class AlphaGrid:
    code: str
    eta_r: float
    rows: tuple[AlphaRow, ...]
    n_range: tuple[int, int] = DEFAULT_N_RANGE
    n: int = 1
    k: int = 1
    alpha0: float = ALPHA0_DB_PER_KM
    metric: str = ALL_LOGICALS

    def __post_init__(self):
        if not self.rows:
            raise ValueError("alpha grid is empty")
        l0 = [r.l0_km for r in self.rows]
        if any(b <= a for a, b in zip(l0, l0[1:])):
            raise ValueError("grid L0 values must be strictly increasing")

    @property
    def l0_range(self) -> tuple[float, float]:
        return self.rows[0].l0_km, self.rows[-1].l0_km

    def row_at(self, l0_km: float) -> AlphaRow:
        for r in self.rows:
            if r.l0_km == l0_km:
                return r
        raise KeyError(l0_km)


def cell_rate(cell: SimResult, metric: str = ALL_LOGICALS) -> tuple[float, float]:
    """``(eta_eff, stderr)`` of a simulated cell under the chosen success metric."""
    if metric == ALL_LOGICALS:
        return cell.eta_eff, cell.stderr
    if metric == PER_LOGICAL:
        p = float(np.mean(cell.p_primal_logical)) * float(np.mean(cell.p_dual_logical))
        return p, math.sqrt(max(p * (1 - p), 0.0) / cell.trials)
    raise ValueError(f"unknown metric {metric!r}")


def simulate_cells(
    code: CssCode,
    eta_r: float,
    l0_list: Iterable[float],
    n_values: Iterable[int],
    trials: int,
    seed: int,
    alpha0: float = ALPHA0_DB_PER_KM,
    decoder: str = EXACT,
) -> list[SimResult]:
    """One Monte Carlo estimate per (L0, N) cell; every cell shares ``seed``."""
    n_values = sorted(set(int(n) for n in n_values))
    chains = {}
    cells = []
    for l0 in l0_list:
        model = LossModel(alpha0=alpha0, eta_r=eta_r, l0_km=float(l0))
        if not 0.0 < model.channel_transmission < 1.0:
            raise ValueError(f"L0={l0} km gives channel transmission outside (0, 1)")
        for n in n_values:
            if n not in chains:
                chains[n] = foliate(code, n)
            cells.append(estimate_etr(chains[n], model, trials, seed, decoder))
    return cells


def fit_grid(
    cells: Sequence[SimResult],
    n: int = 1,
    k: int = 1,
    metric: str = ALL_LOGICALS,
) -> AlphaGrid:
    """Fit one attenuation per L0 from simulated cells (any order)."""
    if not cells:
        raise ValueError("no cells to fit")
    items = [(c.l0_km, c.hops, *cell_rate(c, metric)) for c in cells]
    codes = {c.code for c in cells}
    etas = {c.eta_r for c in cells}
    if len(codes) != 1 or len(etas) != 1:
        raise ValueError("cells mix several codes or repeater efficiencies")
    return grid_from_points(codes.pop(), etas.pop(), items, n, k, cells[0].alpha0, metric)


def grid_from_points(
    code: str,
    eta_r: float,
    items: Iterable[tuple[float, int, float, float]],
    n: int = 1,
    k: int = 1,
    alpha0: float = ALPHA0_DB_PER_KM,
    metric: str = ALL_LOGICALS,
) -> AlphaGrid:
    """Fit ``(l0_km, hops, eta_eff, stderr)`` items into an ``AlphaGrid``.

    Zero-rate points are dropped with a warning since their log is undefined.
    """
    by_l0: dict[float, list[tuple[int, float, float]]] = {}
    for l0, hops, rate, err in items:
        by_l0.setdefault(float(l0), []).append((int(hops), float(rate), float(err)))
    if not by_l0:
        raise ValueError("no points to fit")
    rows, hops_seen = [], []
    for l0 in sorted(by_l0):
        pts, errs = [], []
        for hops, rate, err in sorted(by_l0[l0]):
            hops_seen.append(hops)
            if rate <= 0:
                warnings.warn(f"dropping zero-rate cell L0={l0} N={hops} from the fit")
                continue
            pts.append((hops * l0, rate))
            errs.append(err)
        try:
            fit = fit_attenuation(pts, errs)
        except ValueError as exc:
            raise ValueError(f"L0={l0} km: {exc}") from exc
        rows.append(AlphaRow(l0, fit.alpha_eff, fit.log10_prefactor, fit.rms_residual, fit.alpha_stderr))
    return AlphaGrid(
        code=code,
        eta_r=float(eta_r),
        rows=tuple(rows),
        n_range=(min(hops_seen), max(hops_seen)),
        n=n,
        k=k,
        alpha0=alpha0,
        metric=metric,
    )


def build_alpha_grid(
    code: CssCode,
    eta_r: float,
    l0_list: Iterable[float],
    n_range: tuple[int, int] = DEFAULT_N_RANGE,
    trials: int = 10_000,
    seed: int = 0,
    alpha0: float = ALPHA0_DB_PER_KM,
    decoder: str = EXACT,
    metric: str = ALL_LOGICALS,
    n_step: int = 1,
) -> AlphaGrid:
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad N range {n_range}")
    cells = simulate_cells(code, eta_r, l0_list, range(lo, hi + 1, n_step), trials, seed, alpha0, decoder)
    return fit_grid(cells, code.n, code.k, metric)


def eta_eff_model(grid: AlphaGrid, l0_km: float, L_km: float) -> float:
    """Interpolated ETR of an ``L_km`` chain with spacing ``l0_km``."""
    lo, hi = grid.l0_range
    if not lo <= l0_km <= hi:
        raise ValueError(f"L0={l0_km} km outside grid range [{lo}, {hi}]")
    if L_km <= 0:
        raise ValueError("distance must be positive")
    xs = [r.l0_km for r in grid.rows]
    alpha = float(np.interp(l0_km, xs, [r.alpha_eff for r in grid.rows]))
    c = float(np.interp(l0_km, xs, [r.log10_prefactor for r in grid.rows]))
    return min(1.0, max(0.0, 10.0 ** (c - alpha * L_km / 10.0)))


def cost(N: int, L_km: float, eta_eff: float, n: int, k: int) -> float:
    """Repeater stations per km over ETR, times photons per logical qubit."""
    if L_km <= 0:
        raise ValueError("distance must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    if eta_eff <= 0:
        return math.inf
    return (N / L_km) / eta_eff * (n / k)


@dataclass(frozen=True)
class OptimizationResult:
    distance_km: float
    n_opt: int
    l0_km: float
    eta_eff: float
    cost: float
    n_scanned: tuple[int, int] = field(default=(1, 1))

    def to_row(self) -> dict:
        return {
            "distance_km": self.distance_km,
            "n_opt": self.n_opt,
            "l0_km": self.l0_km,
            "eta_eff": self.eta_eff,
            "cost": self.cost,
        }


def default_n_max(L_km: float) -> int:
    return int(min(max(1, math.ceil(2 * L_km)), N_MAX_CAP))


def optimize_repeaters(grid: AlphaGrid, L_km: float, n_max: int | None = None) -> OptimizationResult:
    """Scan N = 1..n_max and return the cheapest feasible N (smallest on ties)."""
    if L_km <= 0:
        raise ValueError("distance must be positive")
    n_max = default_n_max(L_km) if n_max is None else int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lo, hi = grid.l0_range
    best = None
    for N in range(1, n_max + 1):
        l0 = L_km / N
        if not lo <= l0 <= hi:
            continue
        eta = eta_eff_model(grid, l0, L_km)
        c = cost(N, L_km, eta, grid.n, grid.k)
        if best is None or c < best[0]:
            best = (c, N, l0, eta)
    if best is None:
        raise ValueError("grid range insufficient: no N gives a spacing inside the grid")
    c, N, l0, eta = best
    return OptimizationResult(float(L_km), N, l0, eta, c, (1, n_max))
