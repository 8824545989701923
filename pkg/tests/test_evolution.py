import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afnls import ModelParams, build_grid
from afnls import evolution as EV
from afnls import functionals as F
from afnls import ground_state as G


@settings(max_examples=20, deadline=None)
@given(k=st.integers(-3, 3), l=st.integers(-3, 3), amp=st.floats(0.1, 2.0),
       s=st.floats(0.2, 0.9), scheme=st.sampled_from(["strang", "lie"]))
def test_plane_wave_exact(k, l, amp, s, scheme):
    # A e^{i(kx+ly)} e^{i theta t}, theta = A^{p-2} - k^2 - |l|^{2s}, solves the
    # equation and both sub-flows act on it exactly
    g = build_grid(16, 16, np.pi, np.pi)
    X, Y = g.mesh
    pr = ModelParams(s, 3.0)
    u0 = amp * np.exp(1j * (k * X + l * Y))
    tr = EV.evolve(u0, 0.5, 0.01, pr, g, scheme=scheme, every=50)
    theta = amp - k * k - abs(l) ** (2 * s)
    assert np.max(np.abs(tr.final - u0 * np.exp(1j * theta * 0.5))) < 1e-11


def test_gaussian_conservation():
    g = build_grid(64, 64, 8.0, 8.0)
    X, Y = g.mesh
    pr = ModelParams(0.75, 3.0)
    u0 = np.exp(-X**2 - Y**2) * (1 + 0.2j * X)
    tr = EV.evolve(u0, 0.2, 1e-3, pr, g, every=20)
    m = tr.series("mass")
    e = tr.series("energy")
    assert np.max(np.abs(m - m[0])) / m[0] < 1e-12
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-4
    assert tr.times[-1] == pytest.approx(0.2) and len(tr.times) == 11


def test_strang_second_order_lie_first():
    g = build_grid(64, 64, 8.0, 8.0)
    X, Y = g.mesh
    pr = ModelParams(0.75, 3.0)
    u0 = np.exp(-X**2 / 2 - Y**2 / 2) + 0j
    assert EV.convergence_order(u0, 0.5, 0.02, pr, g) >= 1.9
    lie = EV.convergence_order(u0, 0.5, 0.02, pr, g, scheme="lie")
    assert 0.8 < lie < 1.3


def test_evolve_argument_errors():
    g = build_grid(16, 16, 4.0, 4.0)
    pr = ModelParams(0.5, 3.0)
    u = np.ones(g.shape, complex)
    with pytest.raises(ValueError, match="positive"):
        EV.evolve(u, 0.0, 0.1, pr, g)
    with pytest.raises(ValueError, match="multiple"):
        EV.evolve(u, 0.25, 0.1, pr, g)
    with pytest.raises(ValueError, match="scheme"):
        EV.step(u, 0.1, pr, g, scheme="rk4")
    with pytest.raises(ValueError):
        EV.step(u, -0.1, pr, g)


def test_nan_abort():
    g = build_grid(16, 16, 4.0, 4.0)
    u = np.zeros(g.shape, complex)
    u[8, 8] = 1e200
    with np.errstate(over="ignore", invalid="ignore"):
        tr = EV.evolve(u, 0.1, 0.01, ModelParams(0.75, 5.0), g, dealias_initial=False)
    assert tr.aborted_at == pytest.approx(0.01)
    assert len(tr.times) == 1


def test_snapshots_and_stop():
    g = build_grid(16, 16, 4.0, 4.0)
    X, Y = g.mesh
    u0 = np.exp(-X**2 - Y**2) + 0j
    tr = EV.evolve(u0, 0.1, 0.01, ModelParams(0.5, 3.0), g, snapshot_every=5)
    assert [t for t, _ in tr.snapshots] == pytest.approx([0.0, 0.05, 0.1])
    tr = EV.evolve(u0, 0.1, 0.01, ModelParams(0.5, 3.0), g, stop=lambda t, d: t >= 0.03)
    assert tr.stopped_early and tr.times[-1] == pytest.approx(0.03)


def test_cutoff_profile():
    r = np.linspace(0, 3, 30001)
    th = [EV._theta(r, k) for k in range(5)]
    # C^2 across the joins at 1 and 2
    for k in range(3):
        for a in (1.0, 2.0):
            lo, hi = EV._theta(np.array([a - 1e-9, a + 1e-9]), k)
            assert hi == pytest.approx(lo, abs=1e-6)
    assert np.all(th[2] <= 2 + 1e-12)
    assert np.allclose(th[0][r < 1], r[r < 1] ** 2) and np.all(th[0][r >= 2] == 2)
    # derivatives agree with finite differences away from the joins
    h = r[1] - r[0]
    away = (np.abs(r - 1) > 1e-3) & (np.abs(r - 2) > 1e-3) & (r > 1e-3) & (r < 3 - 1e-3)
    for k in range(4):
        fd = np.gradient(th[k], h)
        assert np.max(np.abs(fd - th[k + 1])[away]) < 1e-3


def test_build_cutoff_errors():
    g = build_grid(32, 32, 8.0, 8.0)
    with pytest.raises(ValueError, match="exceed 1"):
        EV.build_cutoff(1.0, g, 0.5)
    with pytest.raises(ValueError, match="too large"):
        EV.build_cutoff(5.0, g, 0.5)
    c = EV.build_cutoff(2.0, g, 0.5)
    assert c.tx.shape == (5, 32) and c.C[0] == pytest.approx(2.0)


def test_virial_galilean_oracle():
    # for u = a e^{i nu x}, M = 2 s nu int theta_R'(x) a^2
    g = build_grid(64, 64, 10.0, 10.0)
    X, Y = g.mesh
    pr = ModelParams(0.6, 3.0)
    a = np.exp(-(X - 1) ** 2 - Y**2)
    cut = EV.build_cutoff(2.0, g, pr.s)
    assert abs(EV.virial_m(a + 0j, cut, g, pr)) < 1e-12
    nu = 2 * np.pi / 10.0     # a lattice frequency
    M = EV.virial_m(a * np.exp(1j * nu * X), cut, g, pr)
    want = 2 * pr.s * nu * np.sum(cut.tx[1][:, None] * a**2) * g.cell
    assert M == pytest.approx(want, rel=1e-8)
    bad = np.full(g.shape, np.nan)
    with pytest.raises(ValueError):
        EV.virial_m(bad, cut, g, pr)


def test_virial_derivative_report():
    g = build_grid(64, 64, 12.0, 12.0)
    X, Y = g.mesh
    pr = ModelParams(0.75, 3.0)
    cut = EV.build_cutoff(3.0, g, pr.s)
    u0 = np.exp(-X**2 - Y**2) * (1 + 0.1j * Y)
    tr = EV.evolve(u0, 0.2, 1e-3, pr, g, every=10, snapshot_every=10)
    rep = EV.virial_derivative_check(tr, cut, pr)
    assert len(rep.dmdt) == len(tr.snapshots) - 2
    assert rep.c_required >= 0 and math.isfinite(rep.c_bound) and rep.q0 == 2.5
    assert rep.margin >= -1e-8 or rep.c_required > 1.0
    with pytest.raises(ValueError, match="snapshots"):
        EV.virial_derivative_check(EV.evolve(u0, 0.01, 1e-3, pr, g), cut, pr)


def test_outer_mass_and_v_psi():
    g = build_grid(32, 32, 8.0, 8.0)
    u = np.ones(g.shape)
    assert EV.outer_mass(u, g, 0.0) == pytest.approx(256.0)
    assert EV.outer_mass(u, g, 9.0) == 0.0
    assert EV.v_psi(u, g, 100.0) == 0.0
    assert 0 < EV.v_psi(u, g, 4.0) < 256.0


@pytest.fixture(scope="module")
def phi_34_5():
    g = build_grid(128, 256, 12.0, 24.0)
    pr = ModelParams(0.75, 5.0)
    return G.solve_fixed_alpha(pr, g).field, g, pr


def test_instability_data(phi_34_5):
    phi, g, pr = phi_34_5
    with pytest.raises(ValueError, match="exceed 1"):
        EV.instability_data(phi, 1.0, pr, g)
    with pytest.warns(F.ResolutionWarning):   # top band of phi gains ~1e-4 of its mass
        u = EV.instability_data(phi, 1.05, pr, g)
    assert F.mass(u, g) == pytest.approx(F.mass(phi, g), rel=1e-6)
    assert F.q_pohozaev(u, g, pr) < 0


def test_dichotomy_sides(phi_34_5):
    phi, g, pr = phi_34_5
    small = EV.dichotomy_conditions(0.5 * phi, phi, g, pr)
    assert small["global_side"] and not small["blowup_side"]
    at = EV.dichotomy_conditions(phi, phi, g, pr)
    assert at["energy_ratio"] == pytest.approx(1.0) and not at["global_side"]


def test_classify_global_and_blowup(phi_34_5):
    phi, g, pr = phi_34_5
    v = EV.classify_blowup(0.5 * phi, pr, 0.5, g, dt=1e-3, phi=phi)
    assert v.classification == "global_suspected" and v.hdot_growth < 3
    v = EV.classify_blowup(1.5 * phi, pr, 2.0, g, dt=5e-4, phi=phi)
    assert v.classification == "blowup_suspected"
    assert v.q_max < 0 and v.hdot_growth > 3 and v.delta == -v.q_max
    assert v.q_max <= 2 * pr.s * F.energy(1.5 * phi, g, pr) + 1e-6
    with pytest.raises(ValueError, match="regime"):
        EV.classify_blowup(phi, pr.replace(p=3.0), 0.1, g)
