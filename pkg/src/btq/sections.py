r"""Holomorphic section bases of L^m for the model manifolds.

Sphere (hyperplane bundle): b_k(z) = z^k, k = 0..m, with
:math:`\hat h^m = (1+|z|^2)^{-m}`.

Torus (degree-one theta bundle): level-m theta functions

.. math::

    \theta_{k,m}(z) = \sum_{n\in\mathbb Z}
        \exp\bigl(i\pi m (n + k/m)^2 \tau + 2\pi i m (n + k/m) z\bigr),
    \qquad k = 0..m-1,

with :math:`\hat h^m(z) = \exp(-2\pi m (\mathrm{Im}\,z)^2/\mathrm{Im}\,\tau)`.
Writing q = n + k/m and y = Im z, each normed term has modulus
:math:`\exp(-\pi m (y + q\,\mathrm{Im}\,\tau)^2/\mathrm{Im}\,\tau)`, so the
series is summed over a window of n centred on the dominant term.

Pointwise values of raw sections overflow for large m on the sphere, so all
numerical work goes through the *normed* evaluations
b_k(z) * h^{m/2}(z), which are O(1).
"""
from __future__ import annotations

import math

import numpy as np
import sympy as sp

from .manifold import ZB, KahlerModel, Z


def theta_window(m: int, tau_imag: float) -> int:
    """Half-width of the theta summation window (tail below 1e-14)."""
    return math.ceil(math.sqrt(14 * math.log(10) / (math.pi * m * tau_imag))) + 2


class SectionBasis:
    """Basis of holomorphic sections of L^m on ``model`` (not orthonormal)."""

    def __init__(self, model: KahlerModel, m: int):
        if int(m) != m or m < 1:
            raise ValueError(f"level must be a positive integer, got {m!r}")
        self.model = model
        self.m = int(m)
        if model.kind == "sphere":
            self.dim = self.m + 1
            self.n_max = None
        else:
            self.dim = self.m
            self.n_max = theta_window(self.m, model.tau.imag)

    def __repr__(self):
        return f"SectionBasis({self.model}, m={self.m}, dim={self.dim})"

    @property
    def tail_bound(self) -> float:
        """Bound on the dropped theta tail relative to the normed section (torus only)."""
        if self.n_max is None:
            return 0.0
        a = math.pi * self.m * self.model.tau.imag
        j = np.arange(self.n_max + 1, self.n_max + 60)
        return float(2 * np.exp(-a * (j - 0.5) ** 2).sum())

    # -- symbolic metric ---------------------------------------------------

    def log_metric_expr(self, level: int | None = None) -> sp.Expr:
        """log h-hat^level as a sympy expression in ``z``, ``zb`` (default level m)."""
        level = self.m if level is None else level
        if self.model.kind == "sphere":
            return -level * sp.log(1 + Z * ZB)
        y = (Z - ZB) / (2 * sp.I)
        return -2 * sp.pi * level * y**2 / sp.Float(self.model.tau.imag, 17)

    def metric_weight(self, z):
        """h-hat^m at chart points ``z``."""
        z = np.asarray(z, dtype=complex)
        if self.model.kind == "sphere":
            return (1.0 + np.abs(z) ** 2) ** (-self.m)
        return np.exp(-2 * math.pi * self.m * z.imag**2 / self.model.tau.imag)

    def connection_potential(self, z):
        """a(z) = d/dz log h-hat^m, so that nabla_z s = ds/dz + a s."""
        z = np.asarray(z, dtype=complex)
        if self.model.kind == "sphere":
            return -self.m * np.conj(z) / (1.0 + np.abs(z) ** 2)
        return 2j * math.pi * self.m * z.imag / self.model.tau.imag + 0 * z

    # -- section values ----------------------------------------------------

    def _check_index(self, k):
        if not 0 <= k < self.dim:
            raise IndexError(f"section index {k} out of range for dimension {self.dim}")

    def normed(self, z, derivative: bool = False):
        """Array (npoints, dim) of b_k(z) h^{m/2}(z), or of (d b_k/dz) h^{m/2}(z)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.model.kind == "sphere":
            return self._sphere_normed(z, derivative)
        return self._theta_normed(z, derivative)

    def _sphere_normed(self, z, derivative):
        m = self.m
        k = np.arange(self.dim)
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(r)
            logmag = np.where(k[None, :] == 0, 0.0, k[None, :] * logr[:, None])
        logmag = logmag - 0.5 * m * np.log1p(r**2)[:, None]
        vals = np.exp(logmag) * np.exp(1j * k[None, :] * np.angle(z)[:, None])
        if not derivative:
            return vals
        out = np.zeros_like(vals)
        out[:, 1:] = k[None, 1:] * vals[:, :-1]
        return out

    def _theta_normed(self, z, derivative):
        m, tau = self.m, self.model.tau
        t2 = tau.imag
        y = z.imag
        k = np.arange(self.dim)
        out = np.zeros((z.size, self.dim), dtype=complex)
        # centre of the dominant term: n + k/m ~ -y/Im(tau)
        n0 = np.rint(-y[:, None] / t2 - k[None, :] / m)
        for j in range(-self.n_max, self.n_max + 1):
            q = n0 + j + k[None, :] / m
            mq = m * q
            re = -math.pi * m / t2 * (y[:, None] + q * t2) ** 2
            im = math.pi * mq * q * tau.real + 2 * math.pi * mq * z.real[:, None]
            term = np.exp(re + 1j * im)
            if derivative:
                term = term * (2j * math.pi * mq)
            out += term
        return out

    def evaluate_all(self, z):
        """Raw section values b_k(z), shape (npoints, dim)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.model.kind == "sphere":
            return z[:, None] ** np.arange(self.dim)[None, :]
        return self.normed(z) / np.sqrt(self.metric_weight(z))[:, None]

    def evaluate(self, k: int, z):
        """Value of the k-th raw basis section at ``z``."""
        self._check_index(k)
        scalar = np.ndim(z) == 0
        vals = self.evaluate_all(z)[:, k]
        return complex(vals[0]) if scalar else vals


def build_basis(model: KahlerModel, m: int) -> SectionBasis:
    """Basis of the full space of holomorphic sections of L^m (dimension m+1 or m)."""
    return SectionBasis(model, m)


def evaluate_section(basis: SectionBasis, k: int, z):
    return basis.evaluate(k, z)


def metric_weight(basis: SectionBasis, z):
    return basis.metric_weight(z)


def connection_potential(basis: SectionBasis, z):
    return basis.connection_potential(z)
