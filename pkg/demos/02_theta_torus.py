"""
Theta functions and the flat torus
==================================
"""
import math

import numpy as np

import btq

tau = 0.5 + 1.5j
T2 = btq.KahlerModel.torus(tau)
basis = btq.build_basis(T2, 5)
print(basis, "summation window n_max =", basis.n_max, " tail bound", basis.tail_bound)

rng = np.random.default_rng(0)
z = T2.torus_point(rng.random(4), rng.random(4))

# pointwise norms |theta_k|^2 h^m are doubly periodic
n0 = np.abs(basis.normed(z)) ** 2
print("periodic under z -> z+1:  ", np.allclose(np.abs(basis.normed(z + 1)) ** 2, n0))
print("periodic under z -> z+tau:", np.allclose(np.abs(basis.normed(z + tau)) ** 2, n0))

# the thetas are orthogonal with equal norms
ctx = btq.context(T2, 5)
print("Gram diagonal:", np.diag(ctx.gram).real)
print("expected     :", 2 * math.pi / math.sqrt(2 * 5 * tau.imag))

# Fourier modes in u quantize to damped cyclic shifts
T1 = btq.KahlerModel.torus(1j)
m = 6
ctx = btq.context(T1, m)
T = btq.toeplitz_matrix(ctx, btq.fourier_atom(T1, "c", 1, 0))
S = np.roll(np.eye(m), 1, axis=0)
print("T_cos(2 pi u) = exp(-pi/2m) (S + S^T)/2 ?",
      np.allclose(T, math.exp(-math.pi / (2 * m)) * (S + S.T) / 2))

# the Bergman density is constant up to an exponentially small ripple
for m in (2, 4, 8, 16, 32):
    eps = btq.epsilon_function(btq.context(T1, m)).values
    print(f"m={m:3d}  relative ripple of epsilon {np.ptp(eps) / eps.mean():.2e}"
          f"   8 exp(-pi m/2) = {8 * math.exp(-math.pi * m / 2):.2e}")
