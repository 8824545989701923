"""Boosted traveling waves u(x, y) e^{i alpha t} moving along y with speed omega:

    -u_xx + D_y^{2s} u + i omega u_y + alpha u = |u|^{p-2} u,

found as critical points of the Weinstein quotient
    W(u) = (int (xi^2 + |eta|^{2s} - omega eta + alpha)|u_hat|^2)^{p/2} / ||u||_p^p.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import functionals as F
from .ground_state import (ConvergenceError, GroundStateResult, _check_power, _result,
                           default_seed, gauge_fix, gradient_flow, stationarity_residual,
                           weinstein_iteration)
from .kernel import DecayReport, omega1_scan
from .spectral import Symbol


@dataclass
class BoostedWave:
    field: np.ndarray
    params: F.ModelParams
    quotient: float
    el_residual: float
    poho_ratio: float = None
    iterations: int = 0
    grid: object = None


@dataclass
class ScalingStudy:
    omegas: list
    masses: list          # ||u_omega||_2
    hdots: list           # ||u_omega||_Hdot
    quotients: list
    fitted_slope: float
    hdot_slope: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "mass", "hdot", "quotient"])
            for row in zip(self.omegas, self.masses, self.hdots, self.quotients):
                w.writerow([repr(float(v)) for v in row])


def omega_floor(s, omega):
    """omega_0 = (2s-1)|omega/(2s)|^{2s/(2s-1)}, the depth of |eta|^{2s} - omega eta."""
    if not 0.5 < s < 1:
        raise ValueError("the floor needs s in (1/2, 1); s = 1/2 uses |omega| < 1 instead")
    return (2 * s - 1) * abs(omega / (2 * s)) ** (2 * s / (2 * s - 1))


def coercivity(params, grid):
    """('coercive' | 'indefinite', lattice minimum of the boosted symbol)."""
    m = F.quadratic_form_omega(grid, params)
    return ("coercive" if m > 0 else "indefinite"), m


def boosted_symbol(grid, params):
    return Symbol.half_wave_form(params.alpha, params.omega, params.s).multiplier(grid).real


def _check_boosted(params, grid):
    s, w, a = params.s, params.omega, params.alpha
    if s < 0.5:
        raise ValueError("boosted waves need s >= 1/2")
    _check_power(params)
    if s == 0.5 and abs(w) >= 1:
        raise ValueError("quadratic form indefinite")
    if s > 0.5 and not a > omega_floor(s, w):
        raise ValueError("quadratic form indefinite")
    if coercivity(params, grid)[0] != "coercive":
        raise ValueError("quadratic form indefinite")


def half_wave_pohozaev(phi, grid, omega):
    """int sgn(eta)|phi_hat|^2 / (omega ||phi||^2), with sgn = 0 on the zero
    and Nyquist rows."""
    if omega == 0:
        raise ValueError("ratio undefined for omega = 0")
    pw = np.abs(grid.fft(phi)) ** 2 * grid.dual_cell
    sg = np.sign(grid.eta)
    sg[np.abs(grid.ky) == grid.ny // 2] = 0.0
    return float(np.sum(pw * sg[None, :]) / (omega * np.sum(pw)))


def solve_boosted(params, grid, seed=None, tol=1e-10, max_iter=5000):
    """Critical point of W, rescaled so the Euler-Lagrange equation holds with
    the given alpha (the power iteration returns that normalisation)."""
    _check_boosted(params, grid)
    Lsym = boosted_symbol(grid, params)
    u0 = default_seed(grid) if seed is None else seed
    phi, it, _, _ = weinstein_iteration(Lsym, params.p, grid, u0, tol, max_iter)
    phi = gauge_fix(phi, grid)
    res = stationarity_residual(phi, grid, params, params.omega)
    poho = None
    if params.s == 0.5 and params.omega != 0:
        poho = half_wave_pohozaev(phi, grid, params.omega)
    return BoostedWave(phi, params, F.weinstein_quotient(phi, grid, params), res, poho, it, grid)


def steiner_symmetrize(u, grid):
    """Per xi column, put the sorted |u_hat| values on eta indices ordered
    0, +1, -1, +2, -2, ... (Nyquist last); ties go to +eta first."""
    uh = np.abs(grid.fft(u))
    ny = grid.ny
    order = [0]
    for k in range(1, ny // 2):
        order += [k, ny - k]
    order.append(ny // 2)
    srt = -np.sort(-uh, axis=1, kind="stable")
    out = np.empty_like(uh)
    out[:, order] = srt
    return grid.ifft(out.astype(complex))


def boosted_decay_check(wave, region=None, alpha0=None):
    """max and min of |y|^2 exp(sqrt(alpha0)|x|) |phi| over an outer rectangle
    region = ((0, xmax), (ymin, ymax)) in |x|, |y|."""
    g, pr = wave.grid, wave.params
    if region is None:
        region = ((0.0, 3.0), (3.0, g.ly / 2))
    (x0, x1), (y0, y1) = region
    if x1 > g.lx or y1 > g.ly or x1 < x0 or y1 < y0:
        raise ValueError("region exceeds the box")
    if alpha0 is None:
        alpha0 = pr.alpha - (omega1_scan(pr) if pr.omega != 0 else 0.0)
    X, Y = g.mesh
    ax, ay = np.abs(X), np.abs(Y)
    m = (ax >= x0) & (ax <= x1) & (ay >= y0) & (ay <= y1)
    if not m.any():
        raise ValueError("empty region")
    w = ay[m] ** 2 * np.exp(math.sqrt(alpha0) * ax[m]) * np.abs(wave.field[m])
    return DecayReport("boosted", region, float(w.min()), float(w.max()), 0, 0, int(m.sum()))


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def mass_scaling_study(omegas, params, grid, tol=1e-9, grids=None):
    """Boosted waves at each omega (s = 1/2, fixed alpha) and the log-log slopes
    of ||u||_2 and ||u||_Hdot against 1 - |omega|.  ``grids`` may give one
    grid per omega."""
    if params.s != 0.5:
        raise ValueError("the scaling law is for s = 1/2")
    if len(omegas) < 2:
        raise ValueError("need >= 2 points")
    ms, hs, qs = [], [], []
    for i, w in enumerate(omegas):
        if not abs(w) < 1:
            raise ValueError("need |omega| < 1")
        g = grids[i] if grids else grid
        wave = solve_boosted(params.replace(omega=w), g, tol=tol)
        ms.append(math.sqrt(F.mass(wave.field, g)))
        hs.append(math.sqrt(F.hdot(wave.field, g, params.s)))
        qs.append(wave.quotient)
    e = 1 - np.abs(np.asarray(omegas, dtype=float))
    return ScalingStudy(list(omegas), ms, hs, qs, _slope(e, ms), _slope(e, hs))


def normalized_boosted_min(c, params, grid, seed=None, tol=1e-8, max_iter=50000):
    """Minimise E_omega on ||u||^2 = c (subcritical p)."""
    if params.regime != "subcritical":
        raise ValueError(f"normalized boosted minimisation needs p < {params.p_critical:g}")
    if params.s < 0.5 or (params.s == 0.5 and abs(params.omega) >= 1):
        raise ValueError("need s > 1/2, or s = 1/2 with |omega| < 1")
    if seed is None and params.omega != 0:
        # a seed already moving along y: shift its spectrum towards the
        # minimum of |eta|^{2s} - omega eta
        X, Y = grid.mesh
        es = 0.0
        if params.s > 0.5:
            es = math.copysign((abs(params.omega) / (2 * params.s)) ** (1 / (2 * params.s - 1)),
                               params.omega)
        seed = default_seed(grid) * np.exp(1j * es * Y)
    u, alpha, it, res, hist, _ = gradient_flow(c, params, grid, seed, tol=tol,
                                               max_iter=max_iter, omega=params.omega)
    u = gauge_fix(u, grid)
    r = _result(u, grid, params.replace(c=c, alpha=alpha), alpha, it, res,
                "boosted_normalized", hist.energy)
    r.energy = F.energy_omega(u, grid, params)
    return r
