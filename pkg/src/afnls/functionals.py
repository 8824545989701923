"""Conserved quantities, Pohozaev functional, scaling map and the boosted
(speed omega) variants.

Frequency-space pairings use <f, g> = int conj(f) g, so that the boosted
quadratic form reads  int (xi^2 + |eta|^{2s} - omega*eta + alpha) |u_hat|^2.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import dealias, resample


class ResolutionWarning(UserWarning):
    """A scaled field no longer fits the resolved band or the box."""


@dataclass(frozen=True)
class ModelParams:
    s: float
    p: float
    alpha: float = 1.0
    omega: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not self.p > 2.0:
            raise ValueError(f"p must exceed 2, got {self.p}")
        if not self.c > 0.0:
            raise ValueError(f"mass c must be positive, got {self.c}")

    @property
    def p_critical(self):
        return 2.0 * (3 * self.s + 1) / (self.s + 1)

    @property
    def p_upper(self):
        return 2.0 * (1 + self.s) / (1 - self.s)

    @property
    def regime(self):
        pc = self.p_critical
        if math.isclose(self.p, pc, rel_tol=1e-12, abs_tol=1e-12):
            return "critical"
        if self.p < pc:
            return "subcritical"
        if self.p < self.p_upper:
            return "supercritical"
        return "beyond_upper"

    # exponents of the dilation u_t = t^{(s+1)/2} u(t^s x, t y)
    @property
    def beta(self):
        """E(u_t) potential term scales as t^beta."""
        return (self.s + 1) * (self.p - 2) / 2.0

    @property
    def kq(self):
        """Coefficient of ||u||_p^p in Q."""
        return (self.s + 1) * (self.p - 2) / (2.0 * self.p)

    def replace(self, **kw):
        d = dict(s=self.s, p=self.p, alpha=self.alpha, omega=self.omega, c=self.c)
        d.update(kw)
        return ModelParams(**d)


@dataclass
class Diagnostics:
    t: float
    mass: float
    energy: float
    q: float
    momentum: float
    hdot: float
    lp: float
    virial: float = None


@dataclass
class Components:
    """Quadratic pieces and the L^p power of one field, computed once."""
    mass: float
    ux2: float       # ||u_x||^2
    dys2: float      # ||D_y^s u||^2
    lp: float        # ||u||_p^p
    cross: float     # int eta |u_hat|^2
    pxi: float = 0.0  # int xi |u_hat|^2
    extra: dict = field(default_factory=dict)

    @property
    def hdot(self):
        return self.ux2 + self.dys2


def _finite(u):
    u = np.asarray(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite samples")
    return u


def nonlinearity(u, p):
    """|u|^{p-2} u with the modulus-power taken as 0 below 1e-300."""
    a = np.abs(u)
    w = np.zeros_like(a)
    nz = a > 1e-300
    w[nz] = a[nz] ** (p - 2)
    return w * u


def _odd_weights(grid):
    """xi and eta as first-moment weights, zero on the Nyquist rows where
    the sign of the frequency is undefined."""
    xi, eta = grid.kmesh
    xo = np.where((np.abs(grid.kx) == grid.nx // 2)[:, None], 0.0, xi)
    eo = np.where((np.abs(grid.ky) == grid.ny // 2)[None, :], 0.0, eta)
    return xo, eo


def components(u, grid, params):
    u = _finite(u)
    uh = grid.fft(u)
    pw = np.abs(uh) ** 2 * grid.dual_cell
    xi, eta = grid.kmesh
    xo, eo = _odd_weights(grid)
    ud = grid.ifft(dealias(uh, grid))
    return Components(
        mass=float(np.sum(np.abs(u) ** 2) * grid.cell),
        ux2=float(np.sum(xi**2 * pw)),
        dys2=float(np.sum(np.abs(eta) ** (2 * params.s) * pw)),
        lp=float(np.sum(np.abs(ud) ** params.p) * grid.cell),
        cross=float(np.sum(eo * pw)),
        pxi=float(np.sum(xo * pw)),
    )


def mass(u, grid):
    u = _finite(u)
    return float(np.sum(np.abs(u) ** 2) * grid.cell)


def hdot(u, grid, s):
    u = _finite(u)
    pw = np.abs(grid.fft(u)) ** 2 * grid.dual_cell
    xi, eta = grid.kmesh
    return float(np.sum((xi**2 + np.abs(eta) ** (2 * s)) * pw))


def lp_power(u, grid, p):
    """||P u||_p^p with P the 2/3 dealiasing projector."""
    u = _finite(u)
    ud = grid.ifft(dealias(grid.fft(u), grid))
    return float(np.sum(np.abs(ud) ** p) * grid.cell)


def energy(u, grid, params):
    c = components(u, grid, params)
    return 0.5 * c.hdot - c.lp / params.p


def q_pohozaev(u, grid, params):
    c = components(u, grid, params)
    return params.s * c.hdot - params.kq * c.lp


def momentum(u, grid):
    """P = int sgn(eta)|eta| |u_hat|^2 - int xi |u_hat|^2 (pairing conj-first)."""
    u = _finite(u)
    pw = np.abs(grid.fft(u)) ** 2 * grid.dual_cell
    xo, eo = _odd_weights(grid)
    return float(np.sum(eo * pw) - np.sum(xo * pw))


def energy_omega(u, grid, params):
    c = components(u, grid, params)
    return 0.5 * c.hdot - 0.5 * params.omega * c.cross - c.lp / params.p


def weinstein_quotient(u, grid, params):
    c = components(u, grid, params)
    if c.lp <= 0.0:
        raise ValueError("zero field")
    num = c.hdot - params.omega * c.cross + params.alpha * c.mass
    return num ** (params.p / 2.0) / c.lp


def quadratic_form_omega(grid, params):
    """Lattice minimum of xi^2 + |eta|^{2s} - omega*eta + alpha."""
    eta = grid.eta
    drift = np.where(np.abs(grid.ky) == grid.ny // 2, 0.0, eta)
    row = np.abs(eta) ** (2 * params.s) - params.omega * drift
    return float(np.min(row) + params.alpha)  # xi = 0 is on the lattice


def energy_from_components(c, params, t=1.0):
    """E(u_t) from the components of u:  t^{2s}/2 hdot - t^beta/p lp."""
    return 0.5 * t ** (2 * params.s) * c.hdot - t ** params.beta * c.lp / params.p


def q_from_components(c, params, t=1.0):
    return params.s * t ** (2 * params.s) * c.hdot - params.kq * t ** params.beta * c.lp


def scale_field(u, grid, t, s, check=True):
    """u_t(x, y) = t^{(s+1)/2} u(t^s x, t y) by spectral interpolation.

    Emits ResolutionWarning when the result loses mass (support pushed past
    the box) or puts noticeable power into the top third of the spectrum."""
    if not t > 0:
        raise ValueError(f"scaling parameter must be positive, got {t}")
    if t == 1.0:
        return np.array(u, dtype=complex, copy=True)
    ut = t ** ((s + 1) / 2.0) * resample(u, grid, t**s, t)
    if check:
        m0, m1 = mass(u, grid), mass(ut, grid)
        uh = grid.fft(ut)
        tail = np.sum(np.abs(uh[~grid.dealias_mask]) ** 2) * grid.dual_cell
        if m0 > 0 and (abs(m1 - m0) > 1e-6 * m0 or tail > 1e-6 * m1):
            warnings.warn(
                f"scale_field(t={t:g}) loses resolution: relative mass change "
                f"{abs(m1 - m0) / m0:.2e}, top-band fraction {tail / max(m1, 1e-300):.2e}",
                ResolutionWarning, stacklevel=2)
    return ut


def diagnostics(u, grid, params, t=0.0, cutoff=None):
    c = components(u, grid, params)
    vir = None
    if cutoff is not None:
        from .evolution import virial_m
        vir = virial_m(u, cutoff, grid, params)
    return Diagnostics(
        t=float(t),
        mass=c.mass,
        energy=0.5 * c.hdot - c.lp / params.p,
        q=params.s * c.hdot - params.kq * c.lp,
        momentum=c.cross - c.pxi,
        hdot=c.hdot,
        lp=c.lp,
        virial=vir,
    )


def galilean_phase(u, grid, nu):
    """Multiply by exp(i nu x / 2)."""
    X, _ = grid.mesh
    return u * np.exp(0.5j * nu * X)
