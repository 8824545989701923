import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afnls import ModelParams, build_grid
from afnls import functionals as F
from afnls.spectral import random_field
from afnls.traveling_waves import omega_floor

AREA = (2 * np.pi) ** 2


def _dft_power(u, g):
    """|u_hat|^2 dxi deta/(2pi)^2 by an explicit O(N^4) sum, origin at x = y = 0."""
    X, Y = g.mesh
    out = np.empty(g.shape)
    for i, xi in enumerate(g.xi):
        for j, eta in enumerate(g.eta):
            uh = np.sum(u * np.exp(-1j * (xi * X + eta * Y))) * g.cell
            out[i, j] = abs(uh) ** 2 * g.dual_cell
    return out


def test_mass_basic(pi_box, rng):
    g = pi_box
    assert F.mass(np.zeros(g.shape), g) == 0.0
    assert F.mass(np.ones(g.shape), g) == pytest.approx(AREA, rel=1e-14)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    direct = sum(abs(u[i, j]) ** 2 for i in range(8) for j in range(8)) * g.dx * g.dy
    assert F.mass(u, g) == pytest.approx(direct, rel=1e-12)


def test_nonfinite_rejected(pi_box):
    u = np.ones(pi_box.shape)
    u[1, 1] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        F.mass(u, pi_box)


def test_plane_wave_energy_and_q(pi_box):
    g = pi_box
    X, Y = g.mesh
    u = np.exp(1j * (X + Y))
    pr = ModelParams(0.5, 4.0)
    assert F.energy(u, g, pr) == pytest.approx(AREA * 0.75, rel=1e-12)
    assert F.q_pohozaev(u, g, pr) == pytest.approx(AREA * (1 - 3 / 8), rel=1e-12)
    z = np.zeros(g.shape)
    assert F.energy(z, g, pr) == 0 and F.q_pohozaev(z, g, pr) == 0


def test_momentum(pi_box, rng):
    g = pi_box
    X, Y = g.mesh
    assert F.momentum(np.zeros(g.shape), g) == 0
    assert abs(F.momentum(rng.standard_normal(g.shape), g)) < 1e-12
    u = np.exp(1j * (X + 2 * Y))
    assert F.momentum(u, g) == pytest.approx(AREA, rel=1e-12)
    g2 = build_grid(8, 8, 3.0, 4.0)
    v = rng.standard_normal(g2.shape) + 1j * rng.standard_normal(g2.shape)
    pw = _dft_power(v, g2)
    # first moments with the unpaired Nyquist frequencies left out
    xi = np.where(np.abs(g2.kx) == 4, 0.0, g2.xi)[:, None]
    eta = np.where(np.abs(g2.ky) == 4, 0.0, g2.eta)[None, :]
    oracle = np.sum(eta * pw) - np.sum(xi * pw)
    assert F.momentum(v, g2) == pytest.approx(oracle, rel=1e-10)


def test_energy_omega_single_mode(pi_box, rng):
    g = pi_box
    _, Y = g.mesh
    u = np.exp(1j * Y)
    pr = ModelParams(0.5, 3.0, omega=0.5)
    cross = F.energy_omega(u, g, pr) - F.energy(u, g, pr)
    assert abs(cross) == pytest.approx(0.25 * F.mass(u, g), rel=1e-12)
    r = rng.standard_normal(g.shape)
    for w in (0.0, 0.3, -2.0):
        assert F.energy_omega(r, g, pr.replace(omega=w)) == pytest.approx(F.energy(r, g, pr), abs=1e-12)


def test_weinstein_quotient(rng):
    g = build_grid(48, 48, 6.0, 6.0)
    X, Y = g.mesh
    u = np.exp(-X**2 - Y**2) + 0j
    pr = ModelParams(0.75, 3.0, alpha=1.0)
    # direct-sum oracle with an explicit spectrum and physical L^p sum
    pw = _dft_power(u, g)
    xi, eta = g.kmesh
    num = np.sum((xi**2 + np.abs(eta) ** 1.5 + 1.0) * pw)
    den = np.sum(np.abs(u) ** 3) * g.cell
    assert F.weinstein_quotient(u, g, pr) == pytest.approx(num**1.5 / den, rel=1e-8)
    v = random_field(g, rng)
    for lam in (0.3, 7.0):
        assert F.weinstein_quotient(lam * v, g, pr) == pytest.approx(
            F.weinstein_quotient(v, g, pr), rel=1e-12)
    with pytest.raises(ValueError, match="zero field"):
        F.weinstein_quotient(np.zeros(g.shape), g, pr)


def test_quadratic_form_omega():
    g = build_grid(16, 256, 4.0, 50.0)
    pr = ModelParams(0.5, 3.0)
    assert F.quadratic_form_omega(g, pr) == 1.0
    for w in (0.8, -0.8):
        assert F.quadratic_form_omega(g, pr.replace(omega=w)) == pytest.approx(1.0, abs=1e-14)
    mins = [F.quadratic_form_omega(build_grid(16, ny, 4.0, 50.0), pr.replace(omega=1.2))
            for ny in (256, 512, 1024)]
    assert mins[0] < 0 and mins[0] > mins[1] > mins[2]


def test_indefinite_threshold_eta_range():
    # s = 1/2, |omega| > 1: negative once the eta range passes alpha/(|omega|-1)
    pr = ModelParams(0.5, 3.0, omega=1.5)
    thresh = pr.alpha / (abs(pr.omega) - 1)   # = 2
    for ny in (8, 10, 12, 16, 32):
        g = build_grid(8, ny, 4.0, 2 * np.pi)   # eta spacing 1/2
        eta_max = (ny // 2 - 1) * 0.5
        assert (F.quadratic_form_omega(g, pr) < 0) == (eta_max > thresh)


def _scaled_energy(c, pr, t):
    # E(u_t) = t^{2s}/2 hdot - t^{(s+1)(p-2)/2}/p ||u||_p^p
    return 0.5 * t ** (2 * pr.s) * c.hdot - t ** ((pr.s + 1) * (pr.p - 2) / 2) * c.lp / pr.p


def test_scaling_identity_gaussian():
    # the lattice sum of |eta|^{2s}|u_hat|^2 carries an O(deta^{1+2s}) error
    # from the kink of the weight at eta = 0, hence the long y box
    g = build_grid(128, 2048, 12.0, 192.0)
    X, Y = g.mesh
    u = np.exp(-X**2 - 0.7 * Y**2) * (1 + 0.2j * Y)
    pr = ModelParams(0.75, 3.0)
    c = F.components(u, g, pr)
    assert np.array_equal(F.scale_field(u, g, 1.0, pr.s), u)
    for t in (0.5, 2.0):
        ut = F.scale_field(u, g, t, pr.s)
        assert F.mass(ut, g) == pytest.approx(c.mass, rel=1e-6)
    assert F.energy(ut, g, pr) == pytest.approx(_scaled_energy(c, pr, 2.0), rel=1e-6)


@pytest.mark.parametrize("s", [0.5, 0.75])
def test_scaling_identity_tight(s):
    # spectrum ~ eta^6 near eta = 0 removes the kink error; p = 4 keeps |u|^p smooth
    g = build_grid(256, 1024, 24.0, 64.0)
    xi, eta = g.kmesh
    u = g.ifft(np.exp(-xi**2 / 2 - eta**2) * eta**6 * (1 + 0.3j * xi))
    pr = ModelParams(s, 4.0)
    c = F.components(u, g, pr)
    for t in (0.5, 2.0):
        ut = F.scale_field(u, g, t, s)
        assert F.energy(ut, g, pr) == pytest.approx(_scaled_energy(c, pr, t), rel=1e-10)


def test_scale_field_errors():
    g = build_grid(32, 32, 4.0, 4.0)
    X, Y = g.mesh
    u = np.exp(-(X**2 + Y**2) / 4) + 0j
    with pytest.raises(ValueError):
        F.scale_field(u, g, 0.0, 0.5)
    with pytest.warns(F.ResolutionWarning):
        F.scale_field(u, g, 0.1, 0.5)
    with pytest.warns(F.ResolutionWarning):
        F.scale_field(u, g, 20.0, 0.5)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.1, 0.9), p=st.floats(2.2, 6.0), seed=st.integers(0, 2**32 - 1))
def test_q_energy_relation(s, p, seed):
    g = build_grid(32, 32, 6.0, 6.0)
    u = 2.0 * random_field(g, np.random.default_rng(seed))
    pr = ModelParams(s, p)
    lp = F.lp_power(u, g, p)
    want = 2 * s * F.energy(u, g, pr) - ((s + 1) * (p - 2) - 4 * s) / (2 * p) * lp
    assert F.q_pohozaev(u, g, pr) == pytest.approx(want, rel=1e-10, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), p=st.floats(2.1, 8.0),
       seed=st.integers(0, 2**32 - 1))
def test_homogeneity(lam, p, seed):
    g = build_grid(16, 16, 4.0, 4.0)
    u = random_field(g, np.random.default_rng(seed))
    assert F.mass(lam * u, g) == pytest.approx(lam**2 * F.mass(u, g), rel=1e-12)
    assert F.lp_power(lam * u, g, p) == pytest.approx(abs(lam) ** p * F.lp_power(u, g, p), rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(s=st.floats(0.55, 0.95), w=st.floats(-3, 3), seed=st.integers(0, 2**32 - 1))
def test_omega_floor_bound(s, w, seed):
    g = build_grid(16, 64, 4.0, 8.0)
    u = random_field(g, np.random.default_rng(seed), kmax=12)
    pr = ModelParams(s, 3.0, omega=w)
    c = F.components(u, g, pr)
    # <u, D^{2s} u + i omega u_y> = ||D^s u||^2 - omega int eta |u_hat|^2
    assert c.dys2 - w * c.cross >= -omega_floor(s, w) * c.mass - 1e-12 * c.mass


def test_diagnostics_consistency(rng):
    g = build_grid(32, 32, 5.0, 5.0)
    u = random_field(g, rng)
    pr = ModelParams(0.6, 3.5)
    d = F.diagnostics(u, g, pr, t=0.25)
    assert d.t == 0.25 and d.mass >= 0 and d.hdot >= 0 and d.lp >= 0
    assert d.energy == pytest.approx(d.hdot / 2 - d.lp / pr.p, rel=1e-13)
    assert d.momentum == pytest.approx(F.momentum(u, g), rel=1e-12)
    assert d.virial is None


@settings(max_examples=20, deadline=None)
@given(nu=st.floats(-10, 10), seed=st.integers(0, 2**32 - 1))
def test_galilean_phase_mass(nu, seed):
    g = build_grid(16, 16, 3.0, 3.0)
    u = random_field(g, np.random.default_rng(seed))
    assert F.mass(F.galilean_phase(u, g, nu), g) == pytest.approx(F.mass(u, g), rel=1e-14)


def test_params_validation():
    for kw in (dict(s=0.0, p=3), dict(s=1.0, p=3), dict(s=0.5, p=2.0), dict(s=0.5, p=3, c=0)):
        with pytest.raises(ValueError):
            ModelParams(**kw)
    assert ModelParams(0.5, 3).regime == "subcritical"
    assert ModelParams(0.5, 10 / 3).regime == "critical"
    assert ModelParams(0.5, 4).regime == "supercritical"
    assert ModelParams(0.75, 15).regime == "beyond_upper"
    assert math.isclose(ModelParams(0.5, 3).p_critical, 10 / 3)


def test_nonlinearity_small_modulus():
    u = np.array([0.0, 1e-310, 2.0 + 0j])
    out = F.nonlinearity(u, 2.5)
    assert out[0] == 0 and out[1] == 0 and out[2] == pytest.approx(2.0 ** 1.5)
