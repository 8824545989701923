"""Ground states at fixed frequency and at fixed mass, with the identity checks."""
import numpy as np

from afnls import ModelParams, build_grid
from afnls import functionals as F
from afnls import ground_state as G


def identities(r, g, pr):
    s, p = pr.s, pr.p
    c = F.components(r.field, g, pr)
    want = s * (p - 2) / (p * (s - 1) + 2 * (1 + s))
    return c.ux2 / c.mass / want - 1, s * c.dys2 / c.ux2 - 1


print("alpha = 1 ground states")
print(f"{'s':>5} {'p':>7} {'regime':>14} {'E':>11} {'mass':>9} {'|Q|/hdot':>9} {'id1':>9} {'id2':>9}")
for s, p, dims in [(0.5, 3.0, (128, 512, 10, 40)),
                   (0.75, 3.0, (128, 256, 10, 20)),
                   (0.75, 26 / 7, (128, 256, 10, 20)),
                   (0.75, 4.0, (128, 256, 10, 20)),
                   (0.75, 5.0, (256, 512, 12, 24))]:
    pr = ModelParams(s, p)
    g = build_grid(*dims)
    r = G.solve_fixed_alpha(pr, g)
    a, b = identities(r, g, pr)
    print(f"{s:5.2f} {p:7.4f} {pr.regime:>14} {r.energy:11.5f} {F.mass(r.field, g):9.5f} "
          f"{r.q_residual:9.1e} {a:9.1e} {b:9.1e}")

# m(c) for s = 1/2, p = 3: negative and strictly subadditive
pr = ModelParams(0.5, 3.0)
print("\nnormalized, s = 1/2, p = 3")
m = {}
for c in (0.5, 1.0, 2.0):
    g, alpha, _ = G.natural_grid(pr, c, 128, 512)
    r = G.solve_subcritical(c, pr, g)
    m[c] = r.energy
    print(f"c = {c:4.1f}  m(c) = {r.energy:.6e}  alpha = {r.multiplier:.6e}  iters {r.iterations}")
for c in (0.5, 1.0):
    print(f"m({2 * c:g}) < 2 m({c:g}): {m[2 * c] < 2 * m[c]}")

# the supercritical branch decreases in c
pr = ModelParams(0.75, 4.0)
print("\nnormalized, s = 3/4, p = 4")
for c in (0.5, 1.0, 1.5):
    g, alpha, _ = G.natural_grid(pr, c, 128, 256, 10, 20)
    r = G.solve_supercritical(c, pr, g)
    print(f"c = {c:4.1f}  gamma(c) = {r.energy:.6e}  alpha = {r.multiplier:.6e}  |Q|/hdot {r.q_residual:.1e}")

# sharp constants and the critical mass
pr = ModelParams(0.5, 10 / 3)
g = build_grid(256, 1024, 16, 64)
phi = G.solve_fixed_alpha(pr, g).field
print(f"\ncritical mass (s = 1/2): c_* = {G.critical_mass(phi, g, pr):.6f}")
pr = ModelParams(0.75, 5.0)
g = build_grid(256, 512, 12, 24)
rep = G.blowup_thresholds(G.solve_fixed_alpha(pr, g).field, g, pr)
print(f"thresholds (s = 3/4, p = 5): C = {rep.c_qs:.6f}, rho = {rep.rho:g}, "
      f"X0^2 = {rep.x0_sq:.5f}, g(X0) = {rep.g_x0:.5f}, ratio bound = {rep.ratio_bound:.5f}")
