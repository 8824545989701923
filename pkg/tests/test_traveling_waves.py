import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afnls import ModelParams, build_grid
from afnls import functionals as F
from afnls import traveling_waves as TW


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.55, 0.95), w=st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3))
def test_omega_floor_is_symbol_minimum(s, w):
    # brute-force minimum of |eta|^{2s} - omega eta near the predicted minimiser
    es = (abs(w) / (2 * s)) ** (1 / (2 * s - 1))
    eta = np.sign(w) * np.linspace(0, 3 * es, 200001)
    depth = -np.min(np.abs(eta) ** (2 * s) - w * eta)
    assert TW.omega_floor(s, w) == pytest.approx(depth, rel=1e-6)


def test_omega_floor_range():
    with pytest.raises(ValueError):
        TW.omega_floor(0.5, 0.3)


def test_coercivity_detector():
    g = build_grid(32, 512, 8.0, 64.0)
    pr = ModelParams(0.5, 3.0, alpha=1.0)
    kind, m = TW.coercivity(pr.replace(omega=1.2), g)
    assert kind == "indefinite" and m < 0
    kind, m = TW.coercivity(pr.replace(omega=0.8), g)
    assert kind == "coercive" and m == pytest.approx(pr.alpha, abs=1e-14)


def test_boosted_at_rest_is_ground_state(gs_half_3):
    r, g, pr = gs_half_3
    wave = TW.solve_boosted(pr.replace(omega=0.0), g)
    assert np.max(np.abs(wave.field - r.field)) < 1e-8 * np.max(np.abs(r.field))
    assert wave.poho_ratio is None
    with pytest.raises(ValueError, match="omega = 0"):
        TW.half_wave_pohozaev(wave.field, g, 0.0)


@pytest.fixture(scope="module")
def boosted_half():
    g = build_grid(128, 512, 10.0, 40.0)
    return TW.solve_boosted(ModelParams(0.5, 3.0, alpha=1.0, omega=0.5), g)


def test_boosted_half_wave(boosted_half):
    w = boosted_half
    g = w.grid
    assert w.el_residual < 1e-8
    assert w.poho_ratio == pytest.approx(1.0, abs=1e-2)
    # moving along +y: momentum picks up the sign of omega
    assert F.momentum(w.field, g) > 0
    # |u| stays even in x
    a = np.abs(w.field)
    assert np.max(np.abs(a - np.roll(a[::-1], 1, axis=0))) < 1e-8 * a.max()
    assert w.quotient == pytest.approx(F.weinstein_quotient(w.field, g, w.params))


def test_boosted_decay(boosted_half):
    rep = TW.boosted_decay_check(boosted_half)
    assert 0 < rep.ratio_min <= rep.ratio_max < np.inf
    with pytest.raises(ValueError, match="box"):
        TW.boosted_decay_check(boosted_half, region=((0.0, 30.0), (1.0, 2.0)))


def test_boosted_errors():
    g = build_grid(16, 64, 4.0, 8.0)
    with pytest.raises(ValueError, match="s >= 1/2"):
        TW.solve_boosted(ModelParams(0.4, 3.0, omega=0.2), g)
    with pytest.raises(ValueError, match="indefinite"):
        TW.solve_boosted(ModelParams(0.5, 3.0, omega=1.0), g)
    pr = ModelParams(0.75, 3.0, omega=2.0)
    with pytest.raises(ValueError, match="indefinite"):
        TW.solve_boosted(pr.replace(alpha=0.5 * TW.omega_floor(0.75, 2.0)), g)


def test_steiner_symmetrize(rng):
    g = build_grid(16, 32, 4.0, 6.0)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    pr = ModelParams(0.7, 3.0)
    v = TW.steiner_symmetrize(u, g)
    cu, cv = F.components(u, g, pr), F.components(v, g, pr)
    assert cv.mass == pytest.approx(cu.mass, rel=1e-12)
    assert cv.ux2 == pytest.approx(cu.ux2, rel=1e-12)
    assert cv.dys2 <= cu.dys2
    vh = np.abs(g.fft(v))
    # decreasing in |eta| along every xi column
    order = np.argsort(np.abs(g.eta), kind="stable")
    assert np.all(np.diff(vh[:, order], axis=1) <= 1e-12 * vh.max())
    assert np.allclose(TW.steiner_symmetrize(v, g), v, atol=1e-12)


def test_mass_scaling_study_small(tmp_path):
    g = build_grid(32, 256, 8.0, 32.0)
    pr = ModelParams(0.5, 4.0, alpha=1.0)
    st_ = TW.mass_scaling_study([0.2, 0.4], pr, g, tol=1e-8)
    assert len(st_.masses) == 2 and all(m > 0 for m in st_.masses)
    path = tmp_path / "scaling.csv"
    st_.to_csv(path)
    assert path.read_text().splitlines()[0] == "omega,mass,hdot,quotient"
    with pytest.raises(ValueError, match="s = 1/2"):
        TW.mass_scaling_study([0.2, 0.4], pr.replace(s=0.75), g)
    with pytest.raises(ValueError, match="2 points"):
        TW.mass_scaling_study([0.2], pr, g)
    with pytest.raises(ValueError, match="omega"):
        TW.mass_scaling_study([0.2, 1.0], pr, g)


def test_normalized_boosted_min():
    g = build_grid(128, 256, 10.0, 20.0)
    pr = ModelParams(0.75, 3.0)
    r0 = TW.normalized_boosted_min(1.0, pr, g)
    r1 = TW.normalized_boosted_min(1.0, pr.replace(omega=0.3), g)
    for r in (r0, r1):
        assert F.mass(r.field, g) == pytest.approx(1.0, rel=1e-10)
        assert r.grad_residual < 1e-8 and r.multiplier > 0
    assert r1.energy <= r0.energy
    assert abs(F.momentum(r0.field, g)) < 1e-12
    with pytest.raises(ValueError, match="p <"):
        TW.normalized_boosted_min(1.0, ModelParams(0.75, 4.0), g)
    with pytest.raises(ValueError, match="omega"):
        TW.normalized_boosted_min(1.0, ModelParams(0.5, 3.0, omega=1.5), g)
