"""Quadrature evaluation of the fractional heat profile H_s, the resolvent
kernel K_s = (1 + xi^2 + |eta|^{2s})^{-1} (inverse transform) and its boosted
relative G = (alpha + xi^2 + |eta|^{2s} - omega*eta)^{-1}.

    H_s(y, t) = int exp(-t|eta|^{2s}) exp(i y eta) d eta
    K_s(x, y) = C_s int_0^inf exp(-t - x^2/4t) t^{-1/2} H_s(y, t) dt

with C_s = 1/(4 pi^{3/2}), the value for which int K_s = K_s_hat(0) = 1.
"""
import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gamma

C_S = 1.0 / (4.0 * math.pi**1.5)

# the t-integral runs over u = log t in [U_LO, U_HI]; outside it the integrand
# is below exp(-60) relative to its peak for every |x|, |y| >= 1e-10
U_LO, U_HI = -60.0, 5.0
# H_s(., 1) is taken from its large-|y| series whenever the first omitted term
# is below SERIES_TOL relative, and from the cosine quadrature otherwise
SERIES_TOL = 1e-14


class QuadratureError(RuntimeError):
    """An adaptive quadrature did not reach the requested accuracy."""


@dataclass
class KernelSample:
    x: float
    y: float
    value: float          # complex for the boosted kernel with omega != 0
    abs_err_estimate: float


@dataclass
class DecayReport:
    bound_id: str
    region: tuple          # ((x0, x1), (y0, y1)) in |x|, |y|
    ratio_min: float
    ratio_max: float
    k: int = 0
    m: int = 0
    n_samples: int = 0


def _check_s(s):
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")


def _quiet_quad(*a, **kw):
    # round-off warnings are expected near machine precision; the returned
    # error estimate is checked by the callers instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(*a, **kw)[:2]


def _cos_integral(f, w, A, tol):
    """int_0^A f(r) cos(w r) dr by QUADPACK's cosine-weighted rule."""
    if w == 0.0:
        return _quiet_quad(f, 0.0, A, epsabs=0.0, epsrel=tol, limit=500)
    return _quiet_quad(f, 0.0, A, weight="cos", wvar=w, epsabs=0.0, epsrel=tol, limit=500)


def _h_series(z, s):
    # h(z) ~ 2 sum_n (-1)^{n+1} Gamma(2sn+1) sin(pi s n)/n! z^{-2sn-1}
    # terms with s*n an integer vanish identically and are skipped; the error
    # estimate is the first term left out
    tot, last = 0.0, math.inf
    for n in range(1, 80):
        sn = math.sin(math.pi * s * n)
        if abs(sn) < 1e-9:
            continue
        lg = math.lgamma(2 * s * n + 1) - math.lgamma(n + 1) - (2 * s * n + 1) * math.log(z)
        if lg > 700.0:
            return tot, math.inf
        term = 2.0 * (-1) ** (n + 1) * sn * math.exp(lg)
        if abs(term) > last or abs(term) < 1e-17 * abs(tot):
            return tot, abs(term)
        tot += term
        last = abs(term)
    return tot, math.inf


def _h_unit(z, s, tol=1e-11):
    """(H_s(z, 1), error estimate) for z >= 0."""
    if z == 0.0:
        return 2.0 * gamma(1.0 + 0.5 / s), 0.0
    if z >= 1.0:    # the series is asymptotic: no use below |z| ~ 1
        v, e = _h_series(z, s)
        if e < SERIES_TOL * abs(v):
            return v, e
    A = 45.0 ** (0.5 / s)   # exp(-A^{2s}) < 1e-19
    v, e = _cos_integral(lambda r: 2.0 * math.exp(-r ** (2 * s)), z, A, tol)
    return v, e


def _hs(y, t, s, tol=1e-11):
    sc = t ** (-0.5 / s)
    v, e = _h_unit(abs(y) * sc, s, tol)
    return sc * v, sc * e


def hs_profile(y, t, s, tol=1e-11):
    """H_s(y, t) through the cosine form 2 int_0^inf exp(-t eta^{2s}) cos(y eta).

    The quadrature runs on the unit-time profile and is carried to time t by
    H_s(y, t) = t^{-1/(2s)} H_s(t^{-1/(2s)} y, 1)."""
    _check_s(s)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    v, e = _hs(float(y), float(t), s, tol)
    if not e <= 1e-9 * max(abs(v), 1e-300):
        raise QuadratureError(f"H_s({y}, {t}) error estimate {e:.2e} vs value {v:.2e}")
    return v


def hs_profile_contour(y, t, s):
    """Independent evaluation: the eta contour rotated by a fixed angle into the
    upper half plane, where the integrand decays exponentially."""
    _check_s(s)
    th = min(math.pi / 4, math.pi / (8 * s))
    w, w2 = np.exp(1j * th), np.exp(2j * s * th)
    sc = t ** (-0.5 / s)
    z = abs(y) * sc

    def f(r):
        return 2.0 * (w * np.exp(-r ** (2 * s) * w2 + 1j * z * r * w)).real

    v, _ = _quiet_quad(f, 0.0, np.inf, epsabs=1e-15, epsrel=1e-12, limit=400)
    return sc * v


def _t_integral(g, tol):
    # int_0^inf g(t) dt/t * t  on u = log t
    def f(u):
        return g(math.exp(u)) * math.exp(u)
    return _quiet_quad(f, U_LO, U_HI, epsabs=0.0, epsrel=tol, limit=800)


def ks_kernel(x, y, s, tol=1e-11):
    """K_s(x, y) with an error estimate; raises QuadratureError when the
    estimate exceeds 1e-8 relative."""
    _check_s(s)
    x, y = abs(float(x)), abs(float(y))
    if x == 0.0 and y == 0.0:
        raise ValueError("K_s is singular at the origin")
    rel = [0.0]

    def g(t):
        h, he = _hs(y, t, s)
        if h > 0:
            rel[0] = max(rel[0], he / h)
        return math.exp(-t - x * x / (4 * t)) / math.sqrt(t) * h

    v, e = _t_integral(g, tol)
    val = C_S * v
    # the integrand is positive, so inner relative errors pass through as is
    err = C_S * e + rel[0] * abs(val)
    if not err < 1e-8 * max(abs(val), 1e-12):
        raise QuadratureError(f"K_s({x}, {y}): error estimate {err:.2e}, value {val:.2e}")
    return KernelSample(x, y, val, err)


def ks_marginal(y, s, tol=1e-11):
    """int K_s(x, y) dx = (1/2pi) int_0^inf exp(-t) H_s(y, t) dt."""
    y = abs(float(y))
    v, _ = _t_integral(lambda t: math.exp(-t) * _hs(y, t, s)[0], tol)
    return v / (2 * math.pi)


def kernel_mass(s, ymax=500.0, tail=True, tol=1e-7):
    """int K_s over the strip |y| <= ymax (whole x line), plus the analytic
    tail beyond ymax from K's leading |y|^{-1-2s} decay when ``tail``."""
    _check_s(s)
    pts = [v for v in (1e-6, 1e-3, 1.0, 10.0, 100.0) if v < ymax]
    edges = [0.0] + pts + [ymax]
    tot = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = _quiet_quad(lambda yy: ks_marginal(yy, s, tol=1e-9), a, b, epsrel=tol, limit=200)
        tot += v
    tot *= 2.0
    if tail:
        A = 2.0 * gamma(2 * s + 1) * math.sin(math.pi * s)
        tot += 2.0 * A / (2 * math.pi) * ymax ** (-2 * s) / (2 * s)
    return tot


def _fd(fun, x, y, k, m, h=1e-3):
    if m and k:
        return (fun(x + h, y + h) - fun(x + h, y - h) - fun(x - h, y + h) + fun(x - h, y - h)) / (4 * h * h)
    if m:
        return (fun(x + h, y) - fun(x - h, y)) / (2 * h)
    if k:
        return (fun(x, y + h) - fun(x, y - h)) / (2 * h)
    return fun(x, y)


# descriptive bound names; the short interface ids are accepted as aliases
BOUND_ALIASES = {"est-1": "general", "1.1-3": "far-exp", "1.1-4": "far-gauss"}
BOUNDS = ("general", "far-exp", "far-gauss", "boosted")


def canonical_bound(bound_id):
    b = BOUND_ALIASES.get(bound_id, bound_id)
    if b not in BOUNDS:
        raise ValueError(f"unknown bound {bound_id!r}")
    return b


def _bound(bound_id, x, y, s, k, m, alpha0=None):
    ax, ay = abs(x), abs(y)
    if bound_id == "general":
        return ay ** (s - 1 - k - 2 * s * m) * ax**m * math.exp(-ax)
    if bound_id == "far-exp":
        return ax**m * ay ** (-1 - 2 * s - k - 2 * m * s) * math.exp(-ax / 4)
    if bound_id == "far-gauss":
        return ax**m * ay ** (-1 - 2 * s - k) * math.exp(-ax * ax / 4)
    if bound_id == "boosted":
        return ay**-2.0 * math.exp(-math.sqrt(alpha0) * ax)
    raise ValueError(f"unknown bound {bound_id!r}")


def _region_points(region, n, log_y=True):
    (x0, x1), (y0, y1) = region
    xs = np.linspace(x0, x1, n[0]) if x1 > x0 else np.array([x0])
    if y1 > y0:
        ys = np.geomspace(y0, y1, n[1]) if (log_y and y0 > 0) else np.linspace(y0, y1, n[1])
    else:
        ys = np.array([y0])
    return xs, ys


def decay_report(s, bound_id, region, k=0, m=0, n=(5, 12), refine=1, params=None):
    """Min and max of |d_x^m d_y^k kernel| / bound over a sample rectangle.

    region = ((xmin, xmax), (ymin, ymax)) in |x|, |y|.  ``refine`` multiplies
    the sample density and tightens the quadrature tolerance by 100x per step.
    bound_id "boosted" samples G for ``params`` against y^-2 exp(-sqrt(a0)|x|)."""
    _check_s(s)
    bound_id = canonical_bound(bound_id)
    (x0, x1), (y0, y1) = region
    if x1 < x0 or y1 < y0:
        raise ValueError("empty region")
    if bound_id == "far-exp" and y0 < 1:
        raise ValueError("bound far-exp needs |y| >= 1")
    if bound_id == "far-gauss" and (y0 < 1 or x1 > 1):
        raise ValueError("bound far-gauss needs |y| >= 1 >= |x|")
    tol = 1e-11 / 100 ** (refine - 1)
    alpha0 = None
    if bound_id == "boosted":
        if params is None:
            raise ValueError("boosted bound needs model parameters")
        alpha0 = params.alpha - omega1_scan(params)

        def fun(x, y):
            return g_kernel(x, y, params, tol=tol).value
    else:
        def fun(x, y):
            return ks_kernel(x, y, s, tol=tol).value
    nn = (max(1, (n[0] - 1) * refine + 1), max(1, (n[1] - 1) * refine + 1))
    xs, ys = _region_points(region, nn)
    ratios = []
    for x in xs:
        for y in ys:
            b = _bound(bound_id, x, y, s, k, m, alpha0)
            if b == 0.0 or not math.isfinite(b):
                continue
            ratios.append(abs(_fd(fun, x, y, k, m)) / b)
    if not ratios:
        raise ValueError("empty region")
    r = np.array(ratios)
    return DecayReport(bound_id, region, float(r.min()), float(r.max()), k, m, len(r))


def convolution_residual(phi, grid, params):
    """||phi - K_s * (P|phi|^{p-2}phi)|| / ||phi|| with the exact symbol."""
    from .functionals import nonlinearity
    from .spectral import dealias
    if params.alpha != 1.0:
        raise ValueError("convolution identity needs alpha = 1")
    nrm = np.sqrt(np.sum(np.abs(phi) ** 2))
    if nrm == 0.0:
        raise ValueError("zero field")
    xi, eta = grid.kmesh
    sym = 1.0 / (1.0 + xi**2 + np.abs(eta) ** (2 * params.s))
    nh = dealias(grid.fft(nonlinearity(phi, params.p)), grid)
    r = phi - grid.ifft(sym * nh)
    return float(np.sqrt(np.sum(np.abs(r) ** 2)) / nrm)


def kernel_on_grid(grid, s):
    """Periodized K_s from the inverse transform of its symbol on ``grid``."""
    xi, eta = grid.kmesh
    sym = 1.0 / (1.0 + xi**2 + np.abs(eta) ** (2 * s))
    return grid.ifft(sym).real


def omega1_scan(params, omega2=0.5, n_scan=1000, eta_max=None, n_eta=20001):
    """Smallest omega1 = alpha*j/n_scan with
    |eta|^{2s} - omega*eta + omega1 >= omega2*|eta|^{2s} on an eta lattice."""
    s, w, a = params.s, params.omega, params.alpha
    if eta_max is None:
        eta_max = max(10.0, 10.0 * (abs(w) / max(s * (1 - omega2), 1e-12)) ** (1 / max(2 * s - 1, 1e-3)))
        eta_max = min(eta_max, 1e6)
    eta = np.linspace(-eta_max, eta_max, n_eta)
    gap = (1 - omega2) * np.abs(eta) ** (2 * s) - w * eta
    need = -gap.min()
    for j in range(1, n_scan):
        w1 = a * j / n_scan
        if w1 >= need:
            return w1
    raise ValueError(f"no omega1 in (0, alpha) with omega2 = {omega2} for omega = {w}")


def _boosted_check(params):
    s, w, a = params.s, params.omega, params.alpha
    if s < 0.5 or (s == 0.5 and abs(w) >= 1.0):
        if w != 0.0:
            raise ValueError("boosted symbol not positive: need s > 1/2, or s = 1/2 and |omega| < 1")
    if s > 0.5 and w != 0.0:
        # min of |eta|^{2s} - omega*eta over eta>0 at eta* = (|w|/2s)^{1/(2s-1)}
        es = (abs(w) / (2 * s)) ** (1 / (2 * s - 1))
        lo = es ** (2 * s) - abs(w) * es
    else:
        lo = 0.0
    if a + lo <= 0.0:
        raise ValueError("boosted symbol not positive for these parameters")


def _j_unit(z, wp, s, tol):
    """2 int_0^inf exp(-r^{2s}) cos((z - i wp) r) dr as a complex number."""
    if wp == 0.0:
        return complex(_h_unit(z, s, tol)[0]), _h_unit(z, s, tol)[1]
    # cutoff where r^{2s} - |wp| r > 45 + log-margin
    A = 45.0 ** (0.5 / s)
    while A ** (2 * s) - abs(wp) * A < 45.0:
        A *= 1.5
    fr = lambda r: 2.0 * math.exp(-r ** (2 * s)) * math.cosh(wp * r)
    fi = lambda r: 2.0 * math.exp(-r ** (2 * s)) * math.sinh(wp * r)
    vr, er = _cos_integral(fr, z, A, tol)
    if z == 0.0:
        return complex(vr), er
    vi, ei = _quiet_quad(fi, 0.0, A, weight="sin", wvar=z, epsabs=0.0, epsrel=tol, limit=500)
    return complex(vr, vi), er + ei


def g_kernel(x, y, params, tol=1e-11):
    """Boosted kernel G(x, y) for the symbol alpha + xi^2 + |eta|^{2s} - omega*eta.

    For s = 1/2 the eta integral is taken in closed form,
    2t / (t^2 + (y - i omega t)^2)."""
    _boosted_check(params)
    s, w, a = params.s, params.omega, params.alpha
    x, y = abs(float(x)), float(y)
    if x == 0.0 and y == 0.0:
        raise ValueError("G is singular at the origin")

    if s == 0.5:
        def J(t):
            return 2 * t / (t * t + (y - 1j * w * t) ** 2), 0.0
    else:
        def J(t):
            sc = t ** (-0.5 / s)
            # eta = sc*r: exp(-t eta^{2s} + w t eta + i y eta)
            # cos is even, so J(-y; omega) = J(y; -omega)
            v, e = _j_unit(abs(y) * sc, math.copysign(1.0, y) * w * t * sc, s, 1e-12)
            return sc * v, sc * e

    def parts(t):
        j, _ = J(t)
        return math.exp(-a * t - x * x / (4 * t)) / math.sqrt(t) * j

    vr, er = _t_integral(lambda t: parts(t).real, tol)
    vi, ei = _t_integral(lambda t: parts(t).imag, tol) if w != 0.0 else (0.0, 0.0)
    val = C_S * complex(vr, vi)
    if w == 0.0:
        val = val.real
    return KernelSample(x, y, val, C_S * (er + ei))


def export_csv(samples, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "value", "abs_err_estimate"])
        for k in samples:
            wr.writerow([repr(k.x), repr(k.y), repr(k.value), repr(k.abs_err_estimate)])
