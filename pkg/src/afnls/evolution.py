"""Split-step integration of

    i u_t + u_xx - D_y^{2s} u + |u|^{p-2} u = 0,

with localized virial quantities and a blow-up classifier.

The nonlinear sub-flow u -> u exp(i h |u|^{p-2}) is exact because it leaves
|u| fixed; the linear one is the exact Fourier multiplier.  Both are unitary,
so mass is conserved up to round-off.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import functionals as F
from .spectral import Symbol, dealias_field


class NumericalBlowup(FloatingPointError):
    """The field picked up non-finite samples."""


@dataclass
class Trajectory:
    times: list
    diagnostics: list
    snapshots: list = field(default_factory=list)   # (t, field) pairs
    dt: float = 0.0
    scheme: str = "strang"
    aborted_at: float = None     # time of a non-finite field, if any
    stopped_early: bool = False

    def series(self, name):
        return np.array([getattr(d, name) for d in self.diagnostics])


@dataclass
class Cutoff:
    R: float
    grid: object
    s: float
    C: tuple                      # sup |theta^{(k)}|, k = 0..4, of the unit profile
    tx: np.ndarray = None         # theta_R and derivatives on the x axis, shape (5, nx)
    ty: np.ndarray = None

    @property
    def phi(self):
        return self.s * self.tx[0][:, None] + self.ty[0][None, :]


@dataclass
class BlowupVerdict:
    classification: str
    q_max: float
    hdot_growth: float
    criteria_used: list
    trajectory: Trajectory = None
    delta: float = None


# ---------------------------------------------------------------------------
# stepping

def _lin(grid, dt, s):
    return Symbol.linear_phase(dt, s).multiplier(grid)


def _nl(u, h, p):
    # overflow here is reported by the finiteness check in step
    with np.errstate(over="ignore", invalid="ignore"):
        return u * np.exp(1j * h * np.abs(u) ** (p - 2))


def step(u, dt, params, grid, scheme="strang", _lin_cache=None):
    if not dt > 0:
        raise ValueError("dt must be positive")
    lin = _lin_cache if _lin_cache is not None else _lin(grid, dt, params.s)
    p = params.p
    if scheme == "strang":
        u = _nl(u, 0.5 * dt, p)
        u = grid.ifft(lin * grid.fft(u))
        u = _nl(u, 0.5 * dt, p)
    elif scheme == "lie":
        u = grid.ifft(lin * grid.fft(_nl(u, dt, p)))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(u)):
        raise NumericalBlowup("non-finite field")
    return u


def evolve(u0, T, dt, params, grid, scheme="strang", every=1, snapshot_every=None,
           cutoff=None, stop=None, dealias_initial=True):
    """Integrate to time T.  Diagnostics are recorded every ``every`` steps,
    snapshots every ``snapshot_every`` steps.  ``stop(t, diag)`` returning
    True ends the run early.  A non-finite field ends the run with
    ``aborted_at`` set and the trajectory up to the last finite step."""
    if not T > 0:
        raise ValueError("T must be positive")
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * T:
        raise ValueError("T must be a multiple of dt")
    u = dealias_field(u0, grid) if dealias_initial else np.asarray(u0, dtype=complex)
    lin = _lin(grid, dt, params.s)

    def diag(t, u):
        return F.diagnostics(u, grid, params, t, cutoff)

    traj = Trajectory([0.0], [diag(0.0, u)], dt=dt, scheme=scheme)
    if snapshot_every:
        traj.snapshots.append((0.0, u.copy()))
    for k in range(1, nsteps + 1):
        try:
            u = step(u, dt, params, grid, scheme, lin)
        except NumericalBlowup:
            traj.aborted_at = k * dt
            break
        t = k * dt
        last = k == nsteps
        if k % every == 0 or last:
            d = diag(t, u)
            if not (math.isfinite(d.hdot) and math.isfinite(d.energy)):
                traj.aborted_at = t
                break
            traj.times.append(t)
            traj.diagnostics.append(d)
            if stop is not None and stop(t, d):
                traj.stopped_early = not last
                if snapshot_every:
                    traj.snapshots.append((t, u.copy()))
                break
        if snapshot_every and (k % snapshot_every == 0 or last):
            traj.snapshots.append((t, u.copy()))
    traj.final = u
    return traj


def convergence_order(u0, T, dt, params, grid, scheme="strang"):
    """Self-convergence order log2(|u_dt - u_dt/2| / |u_dt/2 - u_dt/4|) at T."""
    sols = []
    for h in (dt, dt / 2, dt / 4):
        tr = evolve(u0, T, h, params, grid, scheme, every=10**9)
        sols.append(tr.final)
    e1 = np.linalg.norm(sols[0] - sols[1])
    e2 = np.linalg.norm(sols[1] - sols[2])
    return math.log2(e1 / e2)


# ---------------------------------------------------------------------------
# cutoff and virial

def _theta(r, k=0):
    """k-th derivative of the unit profile: r^2 on |r|<1, 2 on |r|>2, quintic
    blend in between (C^2 across the joins, theta'' <= 2)."""
    a = np.abs(r)
    sg = np.sign(r) ** k
    # -a^5 + 9a^4 - 31a^3 + 50a^2 - 36a + 10 and its derivatives
    quint = [
        lambda a: (((-a + 9) * a - 31) * a + 50) * a * a - 36 * a + 10,
        lambda a: (((-5 * a + 36) * a - 93) * a + 100) * a - 36,
        lambda a: ((-20 * a + 108) * a - 186) * a + 100,
        lambda a: (-60 * a + 216) * a - 186,
        lambda a: -120 * a + 216,
    ]
    inner = [a**2, 2 * a, 2 + 0 * a, 0 * a, 0 * a][k]
    outer = [2 + 0 * a, 0 * a, 0 * a, 0 * a, 0 * a][k]
    out = np.where(a < 1, inner, np.where(a >= 2, outer, quint[k](a)))
    return sg * out


def build_cutoff(R, grid, s):
    if not R > 1:
        raise ValueError("R must exceed 1")
    if 2 * R > min(grid.lx, grid.ly):
        raise ValueError("R too large for the box")
    mesh = np.linspace(-3, 3, 10001)
    C = tuple(float(np.max(np.abs(_theta(mesh, k)))) for k in range(5))

    def table(x):
        return np.array([R ** (2 - k) * _theta(x / R, k) for k in range(5)])

    return Cutoff(R, grid, s, C, table(grid.x), table(grid.y))


def virial_m(u, cutoff, grid, params):
    """2 Im int conj(u) (s theta_R'(x) u_x + theta_R'(y) u_y)."""
    u = np.asarray(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite samples")
    uh = grid.fft(u)
    ux = grid.ifft(Symbol.dx().multiplier(grid) * uh)
    uy = grid.ifft(Symbol.dy().multiplier(grid) * uh)
    w = params.s * cutoff.tx[1][:, None] * ux + cutoff.ty[1][None, :] * uy
    return float(2.0 * np.imag(np.sum(np.conj(u) * w)) * grid.cell)


def outer_mass(u, grid, R):
    """||u||^2 over {|x| >= R, |y| >= R}."""
    X, Y = grid.mesh
    m = (np.abs(X) >= R) & (np.abs(Y) >= R)
    return float(np.sum(np.abs(u[m]) ** 2) * grid.cell)


def h_norm_sq(u, grid, s):
    return F.mass(u, grid) + F.hdot(u, grid, s)


@dataclass
class VirialReport:
    times: np.ndarray
    dmdt: np.ndarray
    eight_q: np.ndarray
    remainder_scale: np.ndarray   # (R^-2 + R^-2s) M + ||u||_{L2(outer)}^{q0}
    margin: float                  # min(8Q + C*scale - dM/dt)
    c_required: float              # smallest C making every margin >= 0
    c_bound: float                 # max |dM/dt| / (grad-phi norms * sup ||u||_H^2)
    q0: float


def virial_derivative_check(traj, cutoff, params, C=1.0):
    if len(traj.snapshots) < 3:
        raise ValueError("need at least 3 snapshots")
    grid, R, s, p = cutoff.grid, cutoff.R, params.s, params.p
    q0 = (2 + p) / 2
    ts = np.array([t for t, _ in traj.snapshots])
    us = [u for _, u in traj.snapshots]
    M = np.array([virial_m(u, cutoff, grid, params) for u in us])
    dmdt = (M[2:] - M[:-2]) / (ts[2:] - ts[:-2])
    mid = us[1:-1]
    eq = np.array([8 * F.q_pohozaev(u, grid, params) for u in mid])
    scale = np.array([(R**-2 + R ** (-2 * s)) * F.mass(u, grid) + outer_mass(u, grid, R) ** (q0 / 2)
                      for u in mid])
    excess = dmdt - eq
    creq = float(max(0.0, np.max(excess / scale)))
    gnorm = s * np.max(np.abs(cutoff.tx[1])) + np.max(np.abs(cutoff.ty[1])) + np.max(np.abs(cutoff.ty[2]))
    hmax = max(h_norm_sq(u, grid, s) for u in us)
    return VirialReport(ts[1:-1], dmdt, eq, scale, float(np.min(eq + C * scale - dmdt)), creq,
                        float(np.max(np.abs(dmdt)) / (gnorm * hmax)), q0)


def _smoothstep(r):
    # 0 for r <= 1/2, 1 for r >= 1, quintic C^2 blend between
    z = np.clip(2 * r - 1, 0, 1)
    return z**3 * (10 - 15 * z + 6 * z * z)


def v_psi(u, grid, R):
    """int Psi_R |u|^2 with Psi_R radial, 0 inside r < R/2 and 1 outside r > R."""
    X, Y = grid.mesh
    return float(np.sum(_smoothstep(np.hypot(X, Y) / R) * np.abs(u) ** 2) * grid.cell)


# ---------------------------------------------------------------------------
# blow-up classification and instability

def dichotomy_conditions(u0, phi, grid, params):
    """The two inequalities guaranteeing bounded solutions (E(u0) >= 0 side),
    evaluated with the ground state phi."""
    from .ground_state import blowup_thresholds
    rep = blowup_thresholds(phi, grid, params)
    e0, ep = F.energy(u0, grid, params), F.energy(phi, grid, params)
    h0, hp = F.hdot(u0, grid, params.s), F.hdot(phi, grid, params.s)
    b = rep.ratio_bound
    return {"energy_ratio": e0 / ep, "hdot_ratio": h0 / hp, "bound": b,
            "energy_nonneg": e0 >= 0,
            "global_side": e0 >= 0 and e0 / ep < b and h0 / hp < b,
            "blowup_side": e0 / ep < b and h0 / hp > b}


def classify_blowup(u0, params, horizon, grid, dt=1e-3, phi=None, growth=3.0, every=5,
                    energy_tol=1e-2):
    """Evolve to ``horizon`` and classify.

    blowup_suspected: Q < 0 at every resolved time and the run ends in one of
    the blow-up proxies, Hdot growth by ``growth`` or a non-finite field.
    Resolution loss (energy drift above ``energy_tol`` times |E(0)| + Hdot(0)/2)
    comes first on desk-sized grids since the collapsing profile outruns any
    fixed lattice.  The run continues past it to the proxy, but Q is only
    trusted up to that point, so q_max is taken over the resolved part.
    global_suspected: the data satisfy the bounded-side inequalities (or,
    at critical p, E(u0) >= 0) and Hdot stays below ``growth`` times its
    initial value with energy conserved.  Otherwise undetermined."""
    reg = params.regime
    if reg not in ("critical", "supercritical"):
        raise ValueError(f"classification needs the critical or supercritical regime, got {reg}")
    e0 = F.energy(u0, grid, params)
    hd0 = F.hdot(u0, grid, params.s)
    h0 = math.sqrt(hd0)
    escale = abs(e0) + 0.5 * hd0
    why = {}

    def stop(t, d):
        if "resolution_loss" not in why and abs(d.energy - e0) > energy_tol * escale:
            why["resolution_loss"] = t
        return math.sqrt(d.hdot) > growth * h0

    traj = evolve(u0, horizon, dt, params, grid, every=every, stop=stop)
    t_loss = why.get("resolution_loss", math.inf)
    resolved = [d for t, d in zip(traj.times, traj.diagnostics) if t < t_loss]
    q_max = float(max(d.q for d in resolved))
    g = float(np.max(np.sqrt(traj.series("hdot"))) / h0)
    proxies = []
    if g > growth:
        proxies.append("hdot_growth")
    if traj.aborted_at is not None:
        proxies.append("nan_abort")
    blown = q_max < 0 and bool(proxies)
    if "resolution_loss" in why:
        proxies.append("resolution_loss")
    if blown:
        return BlowupVerdict("blowup_suspected", q_max, g, ["q_negative"] + proxies, traj, -q_max)
    if proxies:
        return BlowupVerdict("undetermined", q_max, g, proxies, traj)
    if reg == "supercritical":
        if phi is None:
            from .ground_state import solve_fixed_alpha
            phi = solve_fixed_alpha(params.replace(alpha=1.0, omega=0.0), grid).field
        if dichotomy_conditions(u0, phi, grid, params)["global_side"]:
            return BlowupVerdict("global_suspected", q_max, g,
                                 ["bounded_side_inequalities", "hdot_bounded"], traj)
    elif e0 >= 0:
        return BlowupVerdict("global_suspected", q_max, g, ["energy_nonneg", "hdot_bounded"], traj)
    return BlowupVerdict("undetermined", q_max, g, [], traj)


def instability_data(phi, lam, params, grid):
    """phi_lambda = lambda^{(s+1)/2} phi(lambda^s x, lambda y), checked to lower
    the energy and raise the Hdot norm."""
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    u = F.scale_field(phi, grid, lam, params.s)
    if not F.energy(u, grid, params) < F.energy(phi, grid, params):
        raise ValueError("scaled field does not lower the energy")
    if not F.hdot(u, grid, params.s) > F.hdot(phi, grid, params.s):
        raise ValueError("scaled field does not raise the Hdot norm")
    return u
