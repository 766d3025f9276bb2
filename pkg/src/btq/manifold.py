r"""Model Kähler geometries and symbolic observables.

Two compact Kähler manifolds are supported, each described in a single chart:

* the Riemann sphere, quasi-global coordinate ``z`` in C, with
  :math:`\omega = i\rho\,dz\wedge d\bar z`, :math:`\rho = (1+|z|^2)^{-2}`;
* the torus C / (Z + tau Z), coordinate ``z = u + v*tau`` on the covering
  space, with constant density :math:`\rho = \pi/\mathrm{Im}\,\tau`.

Observables are small sympy expressions in the independent symbols ``z`` and
``zb`` (standing for z-bar), so that holomorphic and antiholomorphic
derivatives are exact.

Hamiltonian vector fields.  Writing :math:`X = X^z\partial_z + X^{\bar z}
\partial_{\bar z}` and :math:`\omega(X, Y) = i\rho(X^z Y^{\bar z} - X^{\bar z}
Y^z)`, the condition :math:`\omega(X_f, \cdot) = df` read off on the
:math:`dz` and :math:`d\bar z` components gives

.. math::

    X_f^z = -\frac{i}{\rho}\,\partial_{\bar z} f, \qquad
    X_f^{\bar z} = \frac{i}{\rho}\,\partial_z f,

and therefore :math:`\{f, g\} = \omega(X_f, X_g) = \frac{i}{\rho}
(\partial_{\bar z} f\,\partial_z g - \partial_z f\,\partial_{\bar z} g)`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.optimize
import sympy as sp

Z, ZB = sp.symbols("z zb")

# Laplacian normalisation: Delta f = (KAPPA / rho) d dbar f.  Frozen from the
# Tuynman calibration (see btq.asymptotics.calibrate_kappa).
LAPLACIAN_KAPPA = 2


@dataclass(frozen=True)
class KahlerModel:
    """A model quantizable Kähler curve.

    Use :meth:`sphere` or :meth:`torus` to construct one.
    """

    kind: str
    tau: complex | None = None

    def __post_init__(self):
        if self.kind not in ("sphere", "torus"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "torus":
            if self.tau is None:
                raise ValueError("torus requires a modulus tau")
            object.__setattr__(self, "tau", complex(self.tau))
            if not self.tau.imag > 0:
                raise ValueError("Im tau must be positive")
        elif self.tau is not None:
            raise ValueError("sphere takes no modulus")

    @classmethod
    def sphere(cls) -> KahlerModel:
        return cls("sphere")

    @classmethod
    def torus(cls, tau: complex = 1j) -> KahlerModel:
        return cls("torus", tau)

    @property
    def name(self) -> str:
        return self.kind

    @property
    def volume(self) -> float:
        """Symplectic volume of M (both models are normalised to 2*pi)."""
        return 2 * math.pi

    def __str__(self):
        if self.kind == "sphere":
            return "sphere"
        return f"torus(tau={self.tau.real:g}{self.tau.imag:+g}j)"

    # -- chart bookkeeping -------------------------------------------------

    def torus_point(self, u, v):
        """Covering-space coordinate of the torus point (u, v) reduced mod 1."""
        u = np.mod(np.asarray(u, dtype=float), 1.0)
        v = np.mod(np.asarray(v, dtype=float), 1.0)
        return u + v * self.tau

    def lattice_coords(self, z):
        """Real coordinates (u, v) with z = u + v*tau (not reduced)."""
        z = np.asarray(z, dtype=complex)
        v = z.imag / self.tau.imag
        return z.real - v * self.tau.real, v

    # -- symbolic pieces ---------------------------------------------------

    @cached_property
    def density_expr(self) -> sp.Expr:
        if self.kind == "sphere":
            return 1 / (1 + Z * ZB) ** 2
        return sp.pi / sp.Float(self.tau.imag, 17)

    @cached_property
    def tau_expr(self) -> sp.Expr:
        return sp.Float(self.tau.real, 17) + sp.I * sp.Float(self.tau.imag, 17)

    @cached_property
    def uv_expr(self) -> tuple[sp.Expr, sp.Expr]:
        # z = u + v tau, zb = u + v conj(tau)  =>  v = (z - zb) / (2 i Im tau)
        tau = self.tau_expr
        v = (Z - ZB) / (2 * sp.I * sp.Float(self.tau.imag, 17))
        return Z - tau * v, v


def kahler_density(model: KahlerModel, z):
    """Kähler density rho with omega = i rho dz ^ dzbar, evaluated at chart points ``z``."""
    z = np.asarray(z, dtype=complex)
    if model.kind == "sphere":
        return 1.0 / (1.0 + np.abs(z) ** 2) ** 2
    return np.full(z.shape, math.pi / model.tau.imag)


# ---------------------------------------------------------------------------
# observables


def _conj_expr(expr: sp.Expr) -> sp.Expr:
    swapped = expr.xreplace({Z: ZB, ZB: Z})
    return swapped.xreplace({sp.I: -sp.I})


@dataclass(frozen=True, eq=False)
class Observable:
    """A smooth function on a model manifold, kept as a sympy expression.

    ``degree`` bounds the polynomial degree in the sphere atoms, or the
    Fourier order (max |a| + |b|) on the torus; quadrature rules are sized
    from it.
    """

    model: KahlerModel
    expr: sp.Expr
    is_real: bool = True
    degree: int = 0
    label: str = field(default="", compare=False)

    def __str__(self):
        return self.label or str(self.expr)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Observable):
            if other.model != self.model:
                raise ValueError("observables live on different models")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return constant(self.model, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Observable(self.model, self.expr + other.expr, self.is_real and other.is_real,
                          max(self.degree, other.degree), _join(self, "+", other))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Observable(self.model, self.expr - other.expr, self.is_real and other.is_real,
                          max(self.degree, other.degree), _join(self, "-", other))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Observable(self.model, -self.expr, self.is_real, self.degree,
                          f"-({self})" if self.label else "")

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Observable(self.model, self.expr * other.expr, self.is_real and other.is_real,
                          self.degree + other.degree, _join(self, "*", other))

    __rmul__ = __mul__

    def __pow__(self, n):
        if int(n) != n or n < 0:
            return NotImplemented
        n = int(n)
        return Observable(self.model, self.expr**n, self.is_real, self.degree * n,
                          f"({self})^{n}" if self.label else "")

    def conj(self) -> Observable:
        if self.is_real:
            return self
        return Observable(self.model, _conj_expr(self.expr), False, self.degree)

    def dz(self) -> Observable:
        """Holomorphic derivative d/dz (formal, z and zb independent)."""
        return Observable(self.model, sp.diff(self.expr, Z), False, self.degree)

    def dzb(self) -> Observable:
        """Antiholomorphic derivative d/dzbar."""
        return Observable(self.model, sp.diff(self.expr, ZB), False, self.degree)

    @cached_property
    def _func(self) -> Callable:
        return sp.lambdify((Z, ZB), self.expr, modules="numpy", cse=True)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        val = np.asarray(self._func(z, np.conj(z)), dtype=complex)
        val = np.broadcast_to(val, z.shape).copy()
        return val.real if self.is_real else val


def _join(a, op, b):
    if a.label and b.label:
        return f"({a.label} {op} {b.label})"
    return ""


def constant(model: KahlerModel, c) -> Observable:
    c = complex(c)
    if c.imag == 0:
        expr = sp.Float(c.real, 17) if c.real != int(c.real) else sp.Integer(int(c.real))
        label = f"{c.real:g}"
    else:
        expr = sp.Float(c.real, 17) + sp.I * sp.Float(c.imag, 17)
        label = f"({c})"
    return Observable(model, expr, c.imag == 0, 0, label)


def sphere_atom(model: KahlerModel, i: int) -> Observable:
    """Embedding coordinate x_i of the unit sphere, i in {1, 2, 3}."""
    if model.kind != "sphere":
        raise ValueError("x1, x2, x3 are sphere atoms")
    n = 1 + Z * ZB
    expr = {1: (Z + ZB) / n, 2: -sp.I * (Z - ZB) / n, 3: (1 - Z * ZB) / n}[i]
    return Observable(model, expr, True, 1, f"x{i}")


def fourier_atom(model: KahlerModel, kind: str, a: int, b: int) -> Observable:
    """cos or sin of 2*pi*(a u + b v) on the torus (``kind`` is 'c' or 's')."""
    if model.kind != "torus":
        raise ValueError("c(a,b), s(a,b) are torus atoms")
    u, v = model.uv_expr
    phase = 2 * sp.pi * (a * u + b * v)
    expr = sp.cos(phase) if kind == "c" else sp.sin(phase)
    return Observable(model, expr, True, abs(a) + abs(b), f"{kind}({a},{b})")


# ---------------------------------------------------------------------------
# geometric operations


def hamiltonian_field(model: KahlerModel, f: Observable, z):
    """Chart components (X^z, X^zbar) of the Hamiltonian field of ``f`` at ``z``."""
    rho = kahler_density(model, z)
    xz = -1j * np.asarray(f.dzb()(z), dtype=complex) / rho
    xzb = 1j * np.asarray(f.dz()(z), dtype=complex) / rho
    return xz, xzb


def poisson_bracket(model: KahlerModel, f: Observable, g: Observable) -> Observable:
    """Poisson bracket {f, g} = (i/rho)(dbar f dg - df dbar g)."""
    expr = sp.I / model.density_expr * (
        sp.diff(f.expr, ZB) * sp.diff(g.expr, Z) - sp.diff(f.expr, Z) * sp.diff(g.expr, ZB)
    )
    deg = max(f.degree + g.degree - 1, 0) if model.kind == "sphere" else f.degree + g.degree
    label = f"{{{f},{g}}}" if f.label and g.label else ""
    return Observable(model, expr, f.is_real and g.is_real, deg, label)


def laplacian(model: KahlerModel, f: Observable, kappa: float = LAPLACIAN_KAPPA) -> Observable:
    """Laplacian (kappa/rho) d dbar f; the default kappa is the calibrated one."""
    expr = kappa / model.density_expr * sp.diff(f.expr, Z, ZB)
    return Observable(model, expr, f.is_real and complex(kappa).imag == 0, f.degree,
                      f"Lap({f})" if f.label else "")


def _sup_grid(model: KahlerModel, n: int):
    """Dense grid in real parameters plus a map from parameters to chart points."""
    if model.kind == "sphere":
        # polar angle / azimuth; the south pole is approached, never stored
        top = math.pi - 1e-8
        a = np.linspace(0.0, top, n // 2 + 1)
        b = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        bounds = [(0.0, top), (None, None)]

        def to_z(p):
            p = np.asarray(p)
            return np.tan(p[..., 0] / 2) * np.exp(1j * p[..., 1])
    else:
        a = np.linspace(0.0, 1.0, n, endpoint=False)
        b = np.linspace(0.0, 1.0, n, endpoint=False)
        bounds = [(None, None), (None, None)]

        def to_z(p):
            p = np.asarray(p)
            return p[..., 0] + p[..., 1] * model.tau
    A, Bv = np.meshgrid(a, b, indexing="ij")
    return np.stack([A.ravel(), Bv.ravel()], axis=-1), to_z, bounds


def sup_norm(model: KahlerModel, f: Observable, grid: int = 512, refine: int = 8,
             extra_points=None) -> float:
    """Sup-norm of a real observable.

    Maximises |f| over a ``grid`` x ``grid`` parameter grid (plus any
    ``extra_points`` such as quadrature nodes), then polishes the ``refine``
    best candidates with a bounded quasi-Newton search.
    """
    if not f.is_real:
        raise ValueError("sup_norm needs a real observable")
    params, to_z, bounds = _sup_grid(model, grid)
    vals = np.abs(f(to_z(params)))
    best = float(vals.max())
    if extra_points is not None:
        extra = np.asarray(extra_points, dtype=complex).ravel()
        if extra.size:
            best = max(best, float(np.abs(f(extra)).max()))
    for i in np.argsort(vals)[::-1][:refine]:
        res = scipy.optimize.minimize(
            lambda p: -float(np.abs(f(to_z(p)))), params[i], method="L-BFGS-B",
            bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 200},
        )
        best = max(best, -float(res.fun))
    return best


def verify_quantization_condition(model: KahlerModel, log_metric: sp.Expr, points=None) -> float:
    r"""Max over test points of |i dbar d log h - omega| on dz ^ dzbar coefficients.

    ``log_metric`` is log h-hat in the symbols ``z``, ``zb``.  Since
    :math:`\bar\partial\partial\phi = -\phi_{z\bar z}\,dz\wedge d\bar z`, the
    condition reads :math:`-\phi_{z\bar z} = \rho`.
    """
    lhs = -sp.diff(log_metric, Z, ZB)
    func = sp.lambdify((Z, ZB), lhs, modules="numpy")
    if points is None:
        rng = np.random.default_rng(0)
        if model.kind == "sphere":
            points = rng.normal(size=200) * 2 + 1j * rng.normal(size=200) * 2
        else:
            points = model.torus_point(rng.random(200), rng.random(200))
    points = np.asarray(points, dtype=complex)
    vals = np.broadcast_to(np.asarray(func(points, np.conj(points)), dtype=complex), points.shape)
    return float(np.abs(vals - kahler_density(model, points)).max())
