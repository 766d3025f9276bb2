"""
The first star-product coefficient
==================================

C1(f, g) is read off from m * sigma(T_f T_g - T_fg).  At finite m_ref it is
biased by O(1/m_ref); combining two levels removes most of that.
"""
import numpy as np

from btq import KahlerModel, fourier_atom, poisson_bracket, sphere_atom
from btq.asymptotics import c1_antisymmetry_residual, estimate_c1, sweep, verdict

S2 = KahlerModel.sphere()
x1, x3 = sphere_atom(S2, 1), sphere_atom(S2, 3)
z = np.array([0.2 + 0.1j, -0.7 + 0.9j, 1.5j])

print("direct estimate of C1(x3, x1) at three points")
for m_ref in (24, 48, 96, 192):
    print(f"  m_ref={m_ref:4d}", np.round(estimate_c1(S2, x3, x1, m_ref)(z), 5))
print("extrapolated")
for m_ref in (48, 96, 192):
    print(f"  m_ref={m_ref:4d}", np.round(estimate_c1(S2, x3, x1, m_ref, extrapolate=True)(z), 5))

# antisymmetric part should reproduce -i{f, g}
print("\n|C1(f,g) - C1(g,f) + i{f,g}|:")
for m_ref in (16, 32, 64, 96):
    print(f"  m_ref={m_ref:3d}  {c1_antisymmetry_residual(S2, x3, x1, m_ref):.4f}")
print("{x3, x1} - 2 x2 at z:", poisson_bracket(S2, x3, x1)(z) - 2 * sphere_atom(S2, 2)(z))

T2 = KahlerModel.torus(1j)
c10, s10 = fourier_atom(T2, "c", 1, 0), fourier_atom(T2, "s", 1, 0)
for extrapolate in (False, True):
    s = sweep(T2, "star-2", (8, 16, 32, 64), c10, s10, c1_extrapolate=extrapolate)
    print(f"torus N=2 slope, {'richardson' if extrapolate else 'direct'} C1:",
          round(verdict(s, (8, 64))["slope"], 3))
