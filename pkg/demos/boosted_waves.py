"""Boosted traveling waves for s = 1/2 and s = 3/4."""
from afnls import ModelParams, build_grid
from afnls import functionals as F
from afnls import traveling_waves as TW

g = build_grid(128, 512, 10, 40)
for w in (0.0, 0.25, 0.5, 0.75):
    wave = TW.solve_boosted(ModelParams(0.5, 3.0, alpha=1.0, omega=w), g)
    extra = "" if wave.poho_ratio is None else f"  half-wave ratio {wave.poho_ratio:.5f}"
    print(f"s = 1/2 omega = {w:4.2f}: W = {wave.quotient:.5f}  mass {F.mass(wave.field, g):.5f}  "
          f"momentum {F.momentum(wave.field, g):+.5f}  residual {wave.el_residual:.1e}{extra}")

for w in (1.2, 0.8):
    print(f"s = 1/2 omega = {w}: ", TW.coercivity(ModelParams(0.5, 3.0, alpha=1.0, omega=w),
                                                  build_grid(32, 512, 8, 64)))

pr = ModelParams(0.75, 3.0, alpha=1.0, omega=0.3)
for dims in ((128, 256, 12, 48), (256, 512, 12, 48)):
    wave = TW.solve_boosted(pr, build_grid(*dims))
    rep = TW.boosted_decay_check(wave, region=((0.0, 4.0), (3.0, 24.0)))
    print(f"s = 3/4 omega = 0.3 on {dims}: decay sup {rep.ratio_max:.5f}")

# mass scaling as omega -> 1 (s = 1/2, p = 4); the long y box resolves the
# slowly decaying tail of the symbol for omega near 1
st = TW.mass_scaling_study([0.5, 0.7, 0.9], ModelParams(0.5, 4.0, alpha=1.0),
                           build_grid(128, 8192, 10, 20))
print("||u||_2:", [f"{m:.6f}" for m in st.masses], f"slope {st.fitted_slope:.3f}",
      f"Hdot slope {st.hdot_slope:.3f}")
