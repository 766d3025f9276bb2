"""Level sweeps, decay-rate fits and pass/fail verdicts.

Every experiment maps a level m to one nonnegative number:

=============  =======================================================
norm-deficit   ||f||_inf - ||T_f||
commutator     || m i [T_f, T_g] - T_{f,g} ||
star-1         || T_f T_g - T_{fg} ||
star-2         || T_f T_g - T_{fg} - T_{C1}/m ||, C1 estimated at m_ref
tuynman        || Q f - i T_{f - Delta f / 2m} ||
adjointness    | tr(T_f^* T_g) - int conj(f) sigma(T_g) eps Omega |
epsilon        | int eps Omega - dim |
=============  =======================================================

Slopes are least-squares fits of log(value) against log(m).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .manifold import LAPLACIAN_KAPPA, KahlerModel, Observable, poisson_bracket, sup_norm
from .quadrature import default_rule, torus_rule
from .sections import SectionBasis
from .toeplitz import (CovariantSymbol, ToeplitzContext, commutator_residual, covariant_symbol,
                       epsilon_function, hs_adjointness_residual, operator_norm,
                       toeplitz_matrix, tuynman_residual)

DEGENERATE_FLOOR = 1e-13
EXPERIMENTS = ("norm-deficit", "commutator", "star-1", "star-2", "tuynman", "adjointness",
               "epsilon")


class FitError(ValueError):
    pass


class DegenerateSeries(FitError):
    """The series is identically zero (to roundoff); no slope can be claimed."""


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConvergenceSeries:
    experiment: str
    model: str
    f: str
    g: str
    ms: tuple
    values: tuple
    # roundoff scale per point: a value below DEGENERATE_FLOOR * scale is zero
    scales: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ms, self.ms[1:])):
            raise ValueError("levels must be strictly increasing")
        if len(self.values) != len(self.ms):
            raise ValueError("one value per level required")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("series values must be finite")
        if not self.scales:
            object.__setattr__(self, "scales", (1.0,) * len(self.ms))

    def rows(self):
        for m, v in zip(self.ms, self.values):
            yield (self.experiment, self.model, self.f, self.g, m, v)

    def is_degenerate(self, floor=DEGENERATE_FLOOR) -> bool:
        return all(abs(v) <= floor * s for v, s in zip(self.values, self.scales))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    window: tuple
    n_points: int

    def predict(self, m):
        return math.exp(self.intercept) * np.asarray(m, dtype=float) ** self.slope


def fit_slope(series: ConvergenceSeries, window=(8, math.inf), floor=DEGENERATE_FLOOR,
              min_points: int = 4) -> SlopeFit:
    """Least-squares line through (log m, log value) for levels inside ``window``.

    Raises :class:`FitError` with fewer than ``min_points`` levels in the
    window, and :class:`DegenerateSeries` if any value there sits at the
    roundoff floor.
    """
    lo, hi = window
    sel = [(m, v, s) for m, v, s in zip(series.ms, series.values, series.scales) if lo <= m <= hi]
    if len(sel) < min_points:
        raise FitError(f"too few points for slope fit: {len(sel)} in window {lo}..{hi}, "
                       f"need {min_points}")
    if any(v <= floor * s for _, v, s in sel):
        raise DegenerateSeries(f"{series.experiment}: values at the roundoff floor")
    x = np.log([m for m, _, _ in sel])
    y = np.log([v for _, v, _ in sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2, (lo, hi), len(sel))


# ---------------------------------------------------------------------------
# star products


def _star_defect(ctx, f, g):
    return toeplitz_matrix(ctx, f) @ toeplitz_matrix(ctx, g) - toeplitz_matrix(ctx, f * g)


class _Extrapolated:
    """2 C(m_ref) - C(m_ref/2): cancels the O(1/m_ref) bias of the direct estimate."""

    is_real = False

    def __init__(self, fine, coarse):
        self.fine, self.coarse = fine, coarse
        self.degree = max(fine.degree, coarse.degree)

    def __call__(self, z):
        return 2 * self.fine(z) - self.coarse(z)


def estimate_c1(model: KahlerModel, f: Observable, g: Observable, m_ref: int,
                extrapolate: bool = False, ctx: ToeplitzContext | None = None):
    """Estimate C_1(f, g) as m_ref * sigma(T_f T_g - T_fg) at level m_ref.

    The direct estimate carries an O(1/m_ref) error.  With ``extrapolate`` the
    same estimate at m_ref // 2 is combined Richardson-style to remove it.
    The result is a callable on chart points (see :class:`CovariantSymbol`).
    """
    ctx = ctx or make_context(model, m_ref, max(f.degree + g.degree, 4))
    fine = CovariantSymbol(ctx, _star_defect(ctx, f, g), scale=m_ref)
    if not extrapolate:
        return fine
    half = m_ref // 2
    cctx = make_context(model, half, max(f.degree + g.degree, 4))
    coarse = CovariantSymbol(cctx, _star_defect(cctx, f, g), scale=half)
    return _Extrapolated(fine, coarse)


def star_truncation_residual(ctx: ToeplitzContext, f: Observable, g: Observable, N: int,
                             c1=None) -> float:
    """Norm of T_f T_g minus the first N terms of the Berezin-Toeplitz star expansion."""
    if N not in (1, 2):
        raise ValueError("truncation order must be 1 or 2")
    D = _star_defect(ctx, f, g)
    if N == 2:
        if c1 is None:
            raise ValueError("N = 2 needs an estimate of C_1 (see estimate_c1)")
        D = D - toeplitz_matrix(ctx, c1) / ctx.m
    return operator_norm(D)


def c1_antisymmetry_residual(model: KahlerModel, f: Observable, g: Observable, m_ref: int) -> float:
    """max over nodes of |C1(f,g) - C1(g,f) + i{f,g}| with C1 from level m_ref."""
    ctx = make_context(model, m_ref, max(f.degree + g.degree, 4))
    D = _star_defect(ctx, f, g) - _star_defect(ctx, g, f)
    anti = m_ref * covariant_symbol(ctx, D).values
    br = poisson_bracket(model, f, g)(ctx.nodes)
    return float(np.abs(anti + 1j * br).max())


def calibrate_kappa(model: KahlerModel | None = None, m: int = 10, f: Observable | None = None,
                    candidates=(1, -1, 2, -2, 4, -4), tol: float = 1e-6) -> dict:
    """Find the Laplacian normalisation for which the Tuynman relation holds.

    Returns ``{"kappa": best, "residuals": {kappa: residual}}``; raises
    ``RuntimeError`` when no candidate reaches ``tol``.
    """
    from .manifold import fourier_atom, sphere_atom
    model = model or KahlerModel.sphere()
    if f is None:
        f = sphere_atom(model, 3) if model.kind == "sphere" else fourier_atom(model, "c", 1, 0)
    ctx = make_context(model, m, f.degree + 4)
    residuals = {k: tuynman_residual(ctx, f, k) for k in candidates}
    best = min(residuals, key=residuals.get)
    if residuals[best] > tol:
        raise RuntimeError(f"no Laplacian normalisation satisfies the Tuynman relation "
                           f"(best kappa={best}, residual {residuals[best]:.3e})")
    return {"kappa": best, "residuals": residuals, "m": m, "model": str(model), "f": str(f)}


# ---------------------------------------------------------------------------
# sweeps


def make_context(model: KahlerModel, m: int, degree: int = 4, torus_n: int | None = None):
    if model.kind == "torus" and torus_n is not None:
        rule = torus_rule(model, torus_n, m)
    else:
        rule = default_rule(model, m, degree)
    return ToeplitzContext(model, SectionBasis(model, m), rule)


def _level_value(kind, model, m, f, g, opts):
    degree = max(opts.get("degree", 4), f.degree + (g.degree if g is not None else 0))
    ctx = make_context(model, m, degree, opts.get("torus_n"))
    scale = 1.0
    if kind == "norm-deficit":
        value = opts["sup"] - operator_norm(toeplitz_matrix(ctx, f))
    elif kind == "commutator":
        value = commutator_residual(ctx, f, g)
        scale = float(m)
    elif kind == "star-1":
        value = star_truncation_residual(ctx, f, g, 1)
    elif kind == "star-2":
        value = star_truncation_residual(ctx, f, g, 2, opts["c1"])
    elif kind == "tuynman":
        value = tuynman_residual(ctx, f, opts.get("kappa", LAPLACIAN_KAPPA))
    elif kind == "adjointness":
        value = hs_adjointness_residual(ctx, f, toeplitz_matrix(ctx, g))
    elif kind == "epsilon":
        value = abs(epsilon_function(ctx).integral() - ctx.dim)
    else:
        raise ValueError(f"unknown experiment {kind!r}")
    return value, scale, ctx.rule.describe()


def sweep(model: KahlerModel, kind: str, ms, f: Observable, g: Observable | None = None, *,
          m_ref: int = 96, c1_extrapolate: bool = True, degree: int = 4,
          torus_n: int | None = None, threads: int = 1) -> ConvergenceSeries:
    """Run experiment ``kind`` at every level in ``ms`` (ascending).

    Levels are independent and may run on ``threads`` worker threads; the
    result does not depend on the thread count.
    """
    ms = [int(m) for m in ms]
    if kind not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {kind!r}; choose from {', '.join(EXPERIMENTS)}")
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("m-list must be strictly ascending")
    if kind in ("commutator", "star-1", "star-2", "adjointness") and g is None:
        raise ValueError(f"{kind} needs a second observable g")
    opts = {"degree": degree, "torus_n": torus_n}
    meta = {"quadrature": {}}
    if kind == "norm-deficit":
        biggest = make_context(model, ms[-1], max(degree, f.degree), torus_n)
        opts["sup"] = sup_norm(model, f, extra_points=biggest.nodes)
        meta["sup_norm"] = opts["sup"]
    if kind == "star-2":
        opts["c1"] = estimate_c1(model, f, g, m_ref, extrapolate=c1_extrapolate)
        meta.update(m_ref=m_ref, c1_estimator="richardson" if c1_extrapolate else "direct")

    def work(m):
        try:
            return _level_value(kind, model, m, f, g, opts)
        except Exception as exc:
            raise SweepError(f"{kind} at m={m}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, ms))
    else:
        results = [work(m) for m in ms]
    for m, (_, _, quad) in zip(ms, results):
        meta["quadrature"][m] = quad
    return ConvergenceSeries(kind, str(model), str(f), "" if g is None else str(g), tuple(ms),
                             tuple(float(v) for v, _, _ in results),
                             tuple(s for _, s, _ in results), meta)


# ---------------------------------------------------------------------------
# verdicts

DEFAULT_TOLERANCES = {
    "commutator": {"slope_min": -1.6, "slope_max": -0.6, "r2_min": 0.95},
    "star-1": {"slope_min": -1.5, "slope_max": -0.7},
    "star-2": {"slope_max": -1.5},
    "norm-deficit": {"decay_factor": 4.0},
    "adjointness": {"tol": 1e-9},
    "epsilon": {"tol": 1e-10},
}


def _tuynman_tol(model):
    return 1e-8 if model.startswith("sphere") else 1e-7


def verdict(series: ConvergenceSeries, window=(8, math.inf), **overrides) -> dict:
    """Pass/fail record ``{experiment, slope, r2, window, pass, ...}`` for a series.

    Slope-based experiments raise :class:`FitError` when the window holds
    too few points.  Identically-zero series pass trivially.
    """
    kind = series.experiment
    tol = dict(DEFAULT_TOLERANCES.get(kind, {}))
    if kind == "tuynman":
        tol["tol"] = _tuynman_tol(series.model)
    tol.update({k: v for k, v in overrides.items() if v is not None})
    rec = {"experiment": kind, "model": series.model, "f": series.f, "g": series.g,
           "slope": None, "r2": None, "window": [window[0], None if math.isinf(window[1]) else window[1]],
           "pass": False, "trivial": False}
    values = np.asarray(series.values)
    if kind in ("commutator", "star-1", "star-2", "norm-deficit"):
        if kind == "norm-deficit" and len(values) < 2:
            raise FitError("too few points for slope fit: norm-deficit needs at least 2 levels")
        try:
            fit = fit_slope(series, window)
        except DegenerateSeries:
            if series.is_degenerate():
                rec.update({"pass": True, "trivial": True})
                return rec
            if kind != "norm-deficit":
                raise
            fit = None
        except FitError:
            if kind != "norm-deficit":
                raise
            fit = None
        if fit is not None:
            rec["slope"], rec["r2"] = fit.slope, fit.r2
        if kind == "norm-deficit":
            rec["pass"] = bool(values.min() >= -1e-10
                               and values[-1] * tol["decay_factor"] <= values[0])
        else:
            ok = fit.slope <= tol.get("slope_max", math.inf)
            ok &= fit.slope >= tol.get("slope_min", -math.inf)
            ok &= fit.r2 >= tol.get("r2_min", -math.inf)
            rec["pass"] = bool(ok)
    else:
        rec["max_value"] = float(values.max())
        rec["pass"] = bool(values.max() <= tol["tol"])
    rec["tolerances"] = tol
    return rec
