"""Amplified ground state (s = 3/4, p = 5): collapse for 1.5 phi and for the
unstable dilation phi_1.05, bounded evolution for 0.5 phi."""
import numpy as np

from afnls import ModelParams, build_grid
from afnls import evolution as EV
from afnls import functionals as F
from afnls import ground_state as G

pr = ModelParams(0.75, 5.0)
g = build_grid(256, 512, 12, 24)
phi = G.solve_fixed_alpha(pr, g).field

for name, u0 in [("1.5 phi", 1.5 * phi), ("phi_1.05", EV.instability_data(phi, 1.05, pr, g)),
                 ("0.5 phi", 0.5 * phi)]:
    v = EV.classify_blowup(u0, pr, 2.0, g, dt=5e-4, phi=phi)
    tr = v.trajectory
    print(f"{name}: E(0) = {F.energy(u0, g, pr):.4f}  -> {v.classification} "
          f"[{', '.join(v.criteria_used)}]  q_max {v.q_max:.3f}  Hdot x{v.hdot_growth:.2f}  "
          f"t_end {tr.times[-1]:.4f}")
    t = np.array(tr.times)
    q, h, e = tr.series("q"), np.sqrt(tr.series("hdot")), tr.series("energy")
    # a large energy drift marks records past resolution loss (Q there is noise)
    for k in np.linspace(0, len(t) - 1, 6).astype(int):
        print(f"    t = {t[k]:.4f}  Q = {q[k]:12.4f}  ||u||_Hdot = {h[k]:10.4f}  "
              f"energy drift {abs(e[k] - e[0]) / abs(e[0]):.1e}")

print(EV.dichotomy_conditions(0.5 * phi, phi, g, pr))
