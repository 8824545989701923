"""Periodic box, centred Fourier transform and multiplier calculus.

Fields are plain complex arrays of shape (nx, ny), indexed [i, j] <-> (x_i, y_j)
with x_i = -lx + i*dx.  Spectra live in FFT order, so index 0 is the zero mode
and index n/2 the single Nyquist mode.

The transform approximates the continuous one centred at the origin,

    u_hat(xi, eta) ~ int u(x, y) exp(-i(x xi + y eta)) dx dy,

which makes Parseval read  sum |u|^2 dx dy = sum |u_hat|^2 dxi deta / (2 pi)^2.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if int(n) != n or n % 2:
                raise ValueError("sample count must be even")
            if n < 8:
                raise ValueError("sample count must be at least 8")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("box sizes must be positive")

    @property
    def dx(self):
        return 2.0 * self.lx / self.nx

    @property
    def dy(self):
        return 2.0 * self.ly / self.ny

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def cell(self):
        """Physical quadrature weight dx*dy."""
        return self.dx * self.dy

    @property
    def dual_cell(self):
        """Spectral quadrature weight dxi*deta/(2 pi)^2."""
        return 1.0 / (4.0 * self.lx * self.ly)

    @cached_property
    def x(self):
        return -self.lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self):
        return -self.ly + self.dy * np.arange(self.ny)

    @cached_property
    def kx(self):
        """Integer wavenumber index in FFT order."""
        return np.fft.fftfreq(self.nx, 1.0 / self.nx).astype(int)

    @cached_property
    def ky(self):
        return np.fft.fftfreq(self.ny, 1.0 / self.ny).astype(int)

    @cached_property
    def xi(self):
        return (np.pi / self.lx) * self.kx

    @cached_property
    def eta(self):
        return (np.pi / self.ly) * self.ky

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kmesh(self):
        return np.meshgrid(self.xi, self.eta, indexing="ij")

    @cached_property
    def dealias_mask(self):
        mx = np.abs(self.kx) <= self.nx // 3
        my = np.abs(self.ky) <= self.ny // 3
        return mx[:, None] & my[None, :]

    def fft(self, u):
        return sfft.fft2(sfft.ifftshift(u)) * self.cell

    def ifft(self, uh):
        return sfft.fftshift(sfft.ifft2(uh)) / self.cell

    def refine(self, factor=2):
        return GridSpec(self.nx * factor, self.ny * factor, self.lx, self.ly)

    def scaled(self, ax, ay):
        """Same sample counts on the box stretched by (ax, ay)."""
        return GridSpec(self.nx, self.ny, self.lx * ax, self.ly * ay)


def build_grid(nx, ny, lx, ly):
    return GridSpec(nx, ny, float(lx), float(ly))


def to_spectrum(u, grid):
    return grid.fft(np.asarray(u, dtype=complex))


def from_spectrum(uh, grid):
    return grid.ifft(uh)


def _check_s(s):
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier.  ``kind`` names the operator; remaining fields
    are its parameters (unused ones stay None)."""
    kind: str
    s: float = None
    dt: float = None
    alpha: float = None
    omega: float = None

    @classmethod
    def dx(cls):
        return cls("dx")

    @classmethod
    def dxx(cls):
        return cls("dxx")

    @classmethod
    def dy(cls):
        return cls("dy")

    @classmethod
    def dys(cls, s):
        _check_s(s)
        return cls("dys", s=s)

    @classmethod
    def hilbert_y(cls):
        return cls("hilbert_y")

    @classmethod
    def linear_phase(cls, dt, s):
        _check_s(s)
        return cls("linear_phase", s=s, dt=dt)

    @classmethod
    def half_wave_form(cls, alpha, omega, s):
        _check_s(s)
        return cls("half_wave_form", s=s, alpha=alpha, omega=omega)

    def multiplier(self, grid):
        xi, eta = grid.kmesh
        nyq_x = (np.abs(grid.kx) == grid.nx // 2)[:, None]
        nyq_y = (np.abs(grid.ky) == grid.ny // 2)[None, :]
        k = self.kind
        if k == "dx":
            return np.where(nyq_x, 0.0, 1j * xi)
        if k == "dxx":
            return -xi**2 + 0j
        if k == "dy":
            return np.where(nyq_y, 0.0, 1j * eta)
        if k == "dys":
            return np.abs(eta) ** (2 * self.s) + 0j
        if k == "hilbert_y":
            return np.where(nyq_y, 0.0, -1j * np.sign(eta))
        if k == "linear_phase":
            return np.exp(-1j * self.dt * (xi**2 + np.abs(eta) ** (2 * self.s)))
        if k == "half_wave_form":
            drift = np.where(nyq_y, 0.0, self.omega * eta)
            return xi**2 + np.abs(eta) ** (2 * self.s) - drift + self.alpha + 0j
        raise ValueError(f"unknown symbol kind {k!r}")


def apply_symbol(u, sym, grid, spectral=False):
    """Multiply by ``sym`` in frequency space.  With ``spectral=True`` the
    input is already a spectrum and a spectrum is returned."""
    u = np.asarray(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite samples")
    m = sym.multiplier(grid)
    if spectral:
        return m * u
    return grid.ifft(m * grid.fft(u))


def dealias(uh, grid):
    """2/3 rule: zero every mode with |index| > n/3 along either axis."""
    return np.where(grid.dealias_mask, uh, 0.0)


def dealias_field(u, grid):
    return grid.ifft(dealias(grid.fft(u), grid))


def _interp_matrix(k, L, pts, nyq):
    # u(x) = sum_k c_k exp(i pi k x / L); the Nyquist term is taken as a cosine
    # so that real data interpolates to real values.
    ph = np.exp(1j * np.pi * np.outer(pts, k) / L)
    ph[:, nyq] = np.cos(np.pi * np.outer(pts, k[nyq]) / L)
    return ph


def resample(u, grid, ax, ay):
    """Evaluate the trigonometric interpolant of u at (ax*x_i, ay*y_j).

    u is treated as a function on the plane that vanishes outside the box:
    points that land outside [-lx, lx) x [-ly, ly) get the value 0 rather
    than a periodic copy."""
    uh = grid.fft(u) * grid.dual_cell
    nx2 = np.flatnonzero(np.abs(grid.kx) == grid.nx // 2)
    ny2 = np.flatnonzero(np.abs(grid.ky) == grid.ny // 2)
    px, py = ax * grid.x, ay * grid.y
    ex = _interp_matrix(grid.kx, grid.lx, px, nx2)
    ey = _interp_matrix(grid.ky, grid.ly, py, ny2)
    ex[(px < -grid.lx) | (px >= grid.lx)] = 0.0
    ey[(py < -grid.ly) | (py >= grid.ly)] = 0.0
    return ex @ uh @ ey.T


def random_field(grid, rng, kmax=None, width=None):
    """Smooth random complex field: random low modes times a Gaussian window."""
    kmax = kmax or max(2, min(grid.nx, grid.ny) // 8)
    mask = (np.abs(grid.kx)[:, None] <= kmax) & (np.abs(grid.ky)[None, :] <= kmax)
    coef = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * mask
    u = sfft.ifft2(coef) * grid.nx * grid.ny / np.sqrt(mask.sum())
    X, Y = grid.mesh
    w = width or 0.3 * min(grid.lx, grid.ly)
    u = u * np.exp(-(X**2 + Y**2) / (2 * w**2))
    return dealias_field(u, grid)
