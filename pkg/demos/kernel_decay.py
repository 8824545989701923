"""Resolvent kernel K_s: values, decay ratios against both bounds, total mass."""
import numpy as np

from afnls import kernel as K

s = 0.5
print("K_s(x, y), s = 1/2")
for x in (0.0, 0.5, 1.0, 2.0):
    row = [K.ks_kernel(x, y, s).value for y in (0.5, 1.0, 5.0, 20.0)]
    print(f"x = {x:3.1f}  " + "  ".join(f"{v:.6e}" for v in row))

region = ((0.0, 1.0), (1.0, 20.0))
for bound in ("far-exp", "far-gauss"):
    for refine in (1, 2):
        r = K.decay_report(s, bound, region, refine=refine)
        print(f"{bound} refine {refine}: ratio in [{r.ratio_min:.5f}, {r.ratio_max:.5f}] "
              f"over {r.n_samples} points")

# the x-marginal decays like y^{-1-2s}; for s = 1/2 the constant is 1/pi
ys = np.geomspace(5, 400, 6)
print("y^2 * marginal(y):", ", ".join(f"{y * y * K.ks_marginal(y, s):.5f}" for y in ys),
      f"(1/pi = {1 / np.pi:.5f})")
print(f"int K_s = {K.kernel_mass(s):.8f}")
