"""
Measuring convergence rates
===========================

Each experiment turns one asymptotic statement into a number per level; the
harness fits log(value) against log(m).
"""
from btq import KahlerModel, fourier_atom, sphere_atom
from btq.asymptotics import sweep, verdict

S2 = KahlerModel.sphere()
x1, x2, x3 = (sphere_atom(S2, i) for i in (1, 2, 3))
levels = (8, 16, 32, 64, 128)


def show(series, window=(8, float("inf"))):
    v = verdict(series, window)
    vals = "  ".join(f"{x:.3e}" for x in series.values)
    slope = "-" if v["slope"] is None else f"{v['slope']:+.3f}"
    print(f"{series.experiment:<13} {series.f:>7},{series.g:<7} {vals}   slope {slope}"
          f"  {'PASS' if v['pass'] else 'FAIL'}{' (trivial)' if v['trivial'] else ''}")


show(sweep(S2, "norm-deficit", levels, x3))
show(sweep(S2, "commutator", levels, x3, x1))
show(sweep(S2, "star-1", levels, x3, x1))
show(sweep(S2, "star-2", (8, 16, 32, 64), x3, x1, m_ref=96), (8, 64))

T2 = KahlerModel.torus(1j)
c10, s10, c11 = (fourier_atom(T2, k, a, b) for k, a, b in [("c", 1, 0), ("s", 1, 0), ("c", 1, 1)])
# cos and sin of the same mode commute exactly after quantization: nothing to fit
show(sweep(T2, "commutator", levels, c10, s10))
show(sweep(T2, "commutator", levels, c10, c11))
