r"""Quadrature rules for the L^2 pairing of sections.

Sphere.  With t = r^2/(1+r^2) the Liouville form becomes
:math:`\Omega = 2\rho\,r\,dr\,d\theta = dt\,d\theta` on [0,1] x [0, 2pi), and
:math:`|z|^{2k}\hat h^m = t^k (1-t)^{m-k}`.  Every integrand
:math:`\bar b_j\, f\, b_k\, \hat h^m` with f a polynomial of degree D in the
atoms therefore reduces to a polynomial of degree <= m + D in t times
exponentials e^{i l theta} with |l| <= m + D, so a Gauss-Legendre rule in t
and a uniform rule in theta integrate it exactly.

Torus.  Uniform N x N grid in (u, v); Omega = 2 pi du dv.  The normed theta
products are smooth and doubly periodic, so the trapezoidal rule converges
spectrally; N is chosen so the first aliased Fourier mode is below 1e-16.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .manifold import KahlerModel


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes (chart points) and positive weights for integrals against Omega.

    ``capacity`` is the highest observable degree (sphere) or Fourier order
    (torus) the rule resolves at level ``m``.
    """

    model: KahlerModel
    nodes: np.ndarray
    weights: np.ndarray
    m: int
    capacity: int
    shape: tuple

    def __len__(self):
        return self.nodes.size

    def describe(self) -> dict:
        if self.model.kind == "sphere":
            return {"rule": "gauss-legendre x uniform", "radial_nodes": self.shape[0],
                    "angular_nodes": self.shape[1], "exact_degree": self.m + self.capacity}
        return {"rule": "trapezoidal", "N": self.shape[0], "order": self.capacity}


def sphere_rule(m: int, extra_degree: int = 0, model: KahlerModel | None = None) -> QuadratureRule:
    """Product rule exact for <b_j, f b_k> at level m, f of degree <= extra_degree."""
    if m < 1 or extra_degree < 0:
        raise ValueError("need m >= 1 and extra_degree >= 0")
    model = model or KahlerModel.sphere()
    n_t = (m + extra_degree + 2) // 2 + 1
    n_a = 2 * (m + extra_degree) + 1
    x, wx = scipy.special.roots_legendre(n_t)
    t = 0.5 * (x + 1.0)
    r = np.sqrt(t / (1.0 - t))
    theta = 2 * math.pi * np.arange(n_a) / n_a
    nodes = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = np.repeat(0.5 * wx, n_a) * (2 * math.pi / n_a)
    return QuadratureRule(model, nodes, weights, m, extra_degree, (n_t, n_a))


def torus_grid_size(model: KahlerModel, m: int, order: int = 0) -> int:
    """Smallest even N resolving level-m theta products times order-``order`` modes."""
    tau = model.tau
    spread = max(math.sqrt(tau.imag), 1 / math.sqrt(tau.imag)) * (1 + abs(tau.real))
    n = math.ceil(4.9 * math.sqrt(m) * spread) + 2 * order + 8
    return max(16, n + n % 2)


def torus_rule(model: KahlerModel, N: int | None = None, m: int = 1, order: int = 0) -> QuadratureRule:
    """Uniform N x N grid on the fundamental square, weights 2 pi / N^2."""
    if model.kind != "torus":
        raise ValueError("torus_rule needs a torus model")
    if N is None:
        N = torus_grid_size(model, m, order)
    if N < 4:
        raise ValueError("grid size must be at least 4")
    g = np.arange(N) / N
    U, V = np.meshgrid(g, g, indexing="ij")
    nodes = (U + V * model.tau).ravel()
    # density pi/Im(tau) times cell area 2 Im(tau)/N^2 in dz ^ dzbar units
    w = (math.pi / model.tau.imag) * (2 * model.tau.imag) / N**2
    weights = np.full(nodes.size, w)
    # largest order still below the aliasing threshold at this N
    cap = max(0, (N - torus_grid_size(model, m, 0)) // 2)
    return QuadratureRule(model, nodes, weights, m, cap, (N, N))


def default_rule(model: KahlerModel, m: int, degree: int = 0) -> QuadratureRule:
    """Rule for level m resolving observables of the given degree / Fourier order."""
    if model.kind == "sphere":
        return sphere_rule(m, degree, model)
    return torus_rule(model, None, m, degree)


def integrate(rule: QuadratureRule, values) -> complex:
    """Weighted sum of ``values`` over the nodes (correctly rounded via math.fsum)."""
    values = np.asarray(values)
    if values.shape != rule.weights.shape:
        raise ValueError(f"expected {rule.weights.size} node values, got shape {values.shape}")
    prod = rule.weights * values
    re = math.fsum(np.real(prod).tolist())
    if np.iscomplexobj(prod):
        return complex(re, math.fsum(np.imag(prod).tolist()))
    return complex(re, 0.0)
