"""
Toeplitz matrices on the sphere
===============================

Quantize the embedding coordinates x1, x2, x3 at a few levels and look at
what comes out: a spin representation, squeezed by a factor 2/(m+2).
"""
import numpy as np

import btq

S2 = btq.KahlerModel.sphere()
x1, x2, x3 = (btq.sphere_atom(S2, i) for i in (1, 2, 3))

m = 6
ctx = btq.context(S2, m)
print(ctx, " scaled Gram condition:", ctx.condition)

T1, T2, T3 = (btq.toeplitz_matrix(ctx, x) for x in (x1, x2, x3))
np.set_printoptions(precision=4, suppress=True, linewidth=110)
print("T_x3 is diagonal:")
print(T3.real)

# rescale to angular momentum matrices J_i = (m+2)/2 T_i, spin j = m/2
J1, J2, J3 = ((m + 2) / 2 * T for T in (T1, T2, T3))
casimir = J1 @ J1 + J2 @ J2 + J3 @ J3
j = m / 2
print("J.J = j(j+1) * I ?", np.allclose(casimir, j * (j + 1) * np.eye(m + 1)))
# the quantization rule is m i [T_f, T_g] ~ T_{f,g}, i.e. [T_f, T_g] ~ -i/m T_{f,g}:
# the opposite sign to the physicist's [A, B] = i hbar {a, b}, so J3, J1, J2 come
# out with reversed orientation
print("[J3, J1] = -i J2 ?", np.allclose(J3 @ J1 - J1 @ J3, -1j * J2))

# so x1^2 + x2^2 + x3^2 = 1 only holds approximately after quantization
for m in (2, 8, 32, 128):
    ctx = btq.context(S2, m)
    Ts = [btq.toeplitz_matrix(ctx, x) for x in (x1, x2, x3)]
    r2 = sum(T @ T for T in Ts)
    print(f"m={m:4d}   T1^2+T2^2+T3^2 = {r2[0, 0].real:.6f} * I   (m(m+2)/(m+2)^2 = {m / (m + 2):.6f})")
