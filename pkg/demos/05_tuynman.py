"""
Geometric quantization versus Toeplitz quantization
===================================================

The projected prequantum operator of f equals i T of f - Delta f / 2m, once the
Laplacian is normalised correctly.  We let the data pick the normalisation.
"""
import numpy as np

import btq
from btq.asymptotics import calibrate_kappa

for model in (btq.KahlerModel.sphere(), btq.KahlerModel.torus(0.3 + 0.8j)):
    report = calibrate_kappa(model)
    print(model, "-> kappa =", report["kappa"])
    for k, r in report["residuals"].items():
        print(f"    kappa={k:+d}   residual {r:.2e}")

S2 = btq.KahlerModel.sphere()
rng = np.random.default_rng(3)
f = btq.random_observable(S2, rng)
print("\nf =", f.label)
for m in (5, 10, 20, 40):
    ctx = btq.context(S2, m)
    print(f"m={m:3d}   ||Q f - i T_(f - Df/2m)|| = {btq.tuynman_residual(ctx, f):.2e}")

# T_f alone is off by O(1/m)
ctx = btq.context(S2, 10)
print("without the Laplacian correction:",
      btq.operator_norm(btq.prequantum_matrix(ctx, f) - 1j * btq.toeplitz_matrix(ctx, f)))
