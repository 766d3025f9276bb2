r"""Berezin-Toeplitz operators at a fixed level m.

A :class:`ToeplitzContext` holds, for one level, the quadrature nodes and the
orthonormalised section basis evaluated there.  Operators are plain complex
``numpy`` arrays written in that orthonormal basis, with entries
``A[j, k] = <A u_k, u_j>``; in particular

.. math::

    (T_f)_{jk} = \int_M f\, u_k\, \overline{u_j}\, \hat h^m\, \Omega .

Coherent states enter through the reproducing kernel: the coefficient vector
of the coherent state at x is c_k = conj(u_k(x)), giving the covariant symbol
sigma(A)(x) = c^* A c / c^* c and Rawnsley's epsilon function
eps(x) = sum_k |u_k(x)|^2 h^m(x).  With the Hilbert-Schmidt pairing
tr(A^* B) and the measure eps * Omega one has the exact finite-m identity
tr(T_f^* A) = int conj(f) sigma(A) eps Omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .manifold import (LAPLACIAN_KAPPA, KahlerModel, Observable, kahler_density, laplacian,
                       poisson_bracket)
from .quadrature import QuadratureRule, default_rule, integrate
from .sections import SectionBasis

MAX_GRAM_CONDITION = 1e8


class QuadratureError(RuntimeError):
    """The Gram matrix is not numerically positive definite at this resolution."""


class ToeplitzContext:
    """Gram matrix, orthonormal basis evaluations and operator assembly for one level."""

    def __init__(self, model: KahlerModel, basis: SectionBasis, rule: QuadratureRule):
        if basis.model != model or rule.model != model:
            raise ValueError("basis and rule must belong to the same model")
        if rule.m < basis.m:
            raise ValueError(f"rule sized for level {rule.m} cannot resolve level {basis.m}")
        self.model = model
        self.basis = basis
        self.rule = rule
        self.m = basis.m
        self.dim = basis.dim
        self._refined = {}

        B = basis.normed(rule.nodes)
        w = rule.weights
        WB = w[:, None] * B
        # gram[j, k] = <b_k, b_j>; Jacobi-scaled before factorising because the
        # monomial norms on the sphere span many decades
        gram = B.conj().T @ WB
        gram = 0.5 * (gram + gram.conj().T)
        diag = np.real(np.diag(gram))
        if np.any(diag <= 0):
            raise QuadratureError("Gram matrix has a non-positive diagonal entry")
        scale = np.sqrt(diag)
        scaled = gram / np.outer(scale, scale)
        ev = np.linalg.eigvalsh(scaled)
        self.condition = float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf
        if not ev[0] > 0 or self.condition > MAX_GRAM_CONDITION:
            raise QuadratureError(
                f"under-resolved quadrature at m={self.m}: scaled Gram condition number "
                f"{self.condition:.3e} (limit {MAX_GRAM_CONDITION:.0e}); increase the node count")
        Rs = scipy.linalg.cholesky(scaled, lower=False)
        self.gram = gram
        self.R = Rs * scale[None, :]
        # normed orthonormal evaluations u_k(x) h^{m/2}(x)
        self.Un = scipy.linalg.solve_triangular(Rs, (B / scale).T, trans="T", lower=False).T
        self.V = self.Un * np.sqrt(w)[:, None]
        self.hw = basis.metric_weight(rule.nodes) * w

    def __repr__(self):
        return f"ToeplitzContext({self.model}, m={self.m}, nodes={len(self.rule)})"

    @property
    def nodes(self):
        return self.rule.nodes

    @property
    def U(self):
        """Orthonormal basis values u_k at the nodes (may overflow for very large m)."""
        return self.Un / np.sqrt(self.basis.metric_weight(self.nodes))[:, None]

    def orthonormal_normed(self, z, derivative=False):
        """u_k(z) h^{m/2}(z) (or du_k/dz h^{m/2}) at arbitrary chart points."""
        B = self.basis.normed(z, derivative)
        return scipy.linalg.solve_triangular(self.R, B.T, trans="T", lower=False).T

    def for_degree(self, degree: int) -> ToeplitzContext:
        """This context, or a finer one at the same level resolving ``degree``."""
        if degree <= self.rule.capacity:
            return self
        if degree not in self._refined:
            rule = default_rule(self.model, self.m, degree)
            self._refined[degree] = ToeplitzContext(self.model, self.basis, rule)
        return self._refined[degree]

    def assemble(self, values) -> np.ndarray:
        """Matrix of Pi M_f Pi from the values of f at this context's nodes."""
        return self.V.conj().T @ (np.asarray(values)[:, None] * self.V)


def build_context(model: KahlerModel, basis: SectionBasis, rule: QuadratureRule) -> ToeplitzContext:
    return ToeplitzContext(model, basis, rule)


def context(model: KahlerModel, m: int, degree: int = 4) -> ToeplitzContext:
    """Convenience: basis and default rule at level m resolving the given degree."""
    return ToeplitzContext(model, SectionBasis(model, m), default_rule(model, m, degree))


def toeplitz_matrix(ctx: ToeplitzContext, f) -> np.ndarray:
    """T_f^(m) in the orthonormal basis.

    ``f`` is an :class:`Observable` or any callable on chart points carrying a
    ``degree`` attribute (such as :class:`CovariantSymbol`).
    """
    c = ctx.for_degree(getattr(f, "degree", 0))
    return c.assemble(f(c.nodes))


def is_hermitian(A, tol=1e-13) -> bool:
    A = np.asarray(A)
    return bool(np.abs(A - A.conj().T).max() <= tol * max(1.0, np.abs(A).max()))


def operator_norm(A) -> float:
    """Spectral norm; Hermitian eigensolve when A is Hermitian, SVD otherwise."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if is_hermitian(A):
        return float(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T))).max())
    return float(np.linalg.svd(A, compute_uv=False)[0])


def commutator_residual(ctx: ToeplitzContext, f: Observable, g: Observable) -> float:
    """|| m i [T_f, T_g] - T_{f,g} ||."""
    Tf, Tg = toeplitz_matrix(ctx, f), toeplitz_matrix(ctx, g)
    Tfg = toeplitz_matrix(ctx, poisson_bracket(ctx.model, f, g))
    return operator_norm(ctx.m * 1j * (Tf @ Tg - Tg @ Tf) - Tfg)


def prequantum_matrix(ctx: ToeplitzContext, f: Observable) -> np.ndarray:
    r"""Q^(m) f = Pi P^(m) f on holomorphic sections.

    P^(m) f = -nabla_{X} + i f with X the Hamiltonian field of f for the
    form m*omega, i.e. X = X_f / m.  On holomorphic sections only the
    (1,0) part survives: P s = -(X_f^z / m)(ds/dz + a s) + i f s.
    """
    c = ctx.for_degree(f.degree + 4)
    z = c.nodes
    rho_inv = 1.0 / kahler_density(c.model, z)
    xz = -1j * np.asarray(f.dzb()(z), dtype=complex) * rho_inv
    a = c.basis.connection_potential(z)
    dUn = c.orthonormal_normed(z, derivative=True)
    fv = np.asarray(f(z))
    P = -(xz / c.m)[:, None] * (dUn + a[:, None] * c.Un) + 1j * fv[:, None] * c.Un
    return c.V.conj().T @ (np.sqrt(c.rule.weights)[:, None] * P)


def tuynman_residual(ctx: ToeplitzContext, f: Observable, kappa: float = LAPLACIAN_KAPPA) -> float:
    """|| Q^(m) f - i T_{f - Delta f / 2m} ||."""
    g = f - (1.0 / (2 * ctx.m)) * laplacian(ctx.model, f, kappa)
    return operator_norm(prequantum_matrix(ctx, f) - 1j * toeplitz_matrix(ctx, g))


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True, eq=False)
class SymbolField:
    """Values of a function on M at the nodes of a quadrature rule."""

    rule: QuadratureRule
    values: np.ndarray

    @property
    def nodes(self):
        return self.rule.nodes

    def integral(self) -> complex:
        return integrate(self.rule, self.values)


def epsilon_function(ctx: ToeplitzContext) -> SymbolField:
    """Rawnsley's epsilon function sum_k |u_k|^2 h^m at the nodes."""
    return SymbolField(ctx.rule, (np.abs(ctx.Un) ** 2).sum(axis=1))


def _symbol_values(Un, A):
    eps = (np.abs(Un) ** 2).sum(axis=1)
    if np.any(eps <= 0):
        raise ZeroDivisionError("epsilon function vanishes at a node")
    num = np.einsum("nj,jk,nk->n", Un, A, Un.conj())
    return num / eps


def covariant_symbol(ctx: ToeplitzContext, A) -> SymbolField:
    """Berezin covariant symbol sigma(A) = <A e_x, e_x> / <e_x, e_x> at the nodes."""
    return SymbolField(ctx.rule, _symbol_values(ctx.Un, np.asarray(A)))


class CovariantSymbol:
    """sigma(A), optionally scaled, as a function evaluable at any chart point.

    Its ``degree`` records how fine a rule must be to integrate it: the
    symbol of a level-m operator is a degree-m polynomial in the sphere atoms,
    and on the torus it carries Fourier modes up to about 5 sqrt(m).
    """

    is_real = False

    def __init__(self, ctx: ToeplitzContext, A, scale=1.0):
        self.ctx = ctx
        self.A = np.asarray(A)
        self.scale = scale
        if ctx.model.kind == "sphere":
            self.degree = ctx.m
        else:
            self.degree = math.ceil(4.9 * math.sqrt(ctx.m / ctx.model.tau.imag))

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return self.scale * _symbol_values(self.ctx.orthonormal_normed(z), self.A)


def hs_adjointness_residual(ctx: ToeplitzContext, f: Observable, A) -> float:
    """| tr(T_f^* A) - int conj(f) sigma(A) eps Omega |."""
    c = ctx.for_degree(f.degree)
    A = np.asarray(A)
    Tf = toeplitz_matrix(c, f)
    lhs = complex(np.vdot(Tf, A))  # sum conj(Tf) * A = tr(Tf^* A)
    fv = np.conj(np.asarray(f(c.nodes), dtype=complex))
    sym = covariant_symbol(c, A).values
    eps = epsilon_function(c).values
    rhs = integrate(c.rule, fv * sym * eps)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# text matrix format


def format_matrix(A, m: int, model: str) -> str:
    """Serialise a matrix as ``btq-matrix v1`` text (shortest round-trip floats)."""
    A = np.asarray(A, dtype=complex)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError("matrix must be square")
    lines = [f"btq-matrix v1 d={d} m={m} model={model}"]
    for i in range(d):
        for j in range(d):
            v = A[i, j]
            lines.append(f"{i} {j} {float(v.real)!r} {float(v.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_matrix(text: str):
    """Inverse of :func:`format_matrix`; returns (matrix, m, model)."""
    lines = text.splitlines()
    head = lines[0].split()
    if head[:2] != ["btq-matrix", "v1"]:
        raise ValueError("not a btq-matrix v1 file")
    meta = dict(item.split("=", 1) for item in head[2:])
    d, m = int(meta["d"]), int(meta["m"])
    if len(lines) - 1 != d * d:
        raise ValueError(f"expected {d * d} entries, found {len(lines) - 1}")
    A = np.empty((d, d), dtype=complex)
    for n, line in enumerate(lines[1:]):
        i, j, re, im = line.split()
        if (int(i), int(j)) != divmod(n, d):
            raise ValueError(f"entry {n} out of row-major order")
        A[int(i), int(j)] = complex(float(re), float(im))
    return A, m, meta["model"]


def save_matrix(path, A, m: int, model: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(A, m, model))


def load_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())
