"""Command-line front end.

Usage::

    btq <command> [--config PATH] [--out DIR] [--threads N] [--m 8,16,32]

Commands: dims, calibrate, norm, commutator, star, tuynman, epsilon,
adjointness, all.

Configuration files hold one ``key = value`` per line; ``#`` starts a
comment.  Keys and defaults:

=============  ===========================  ===================================
key            default                      meaning
=============  ===========================  ===================================
model          sphere                       sphere | torus
tau            0 1                          torus modulus as "re im", Im > 0
f              x3 (sphere) / c(1,0)         first observable
g              x1 (sphere) / c(1,1)         second observable
kind           norm                         dims | norm | commutator | star1 |
                                            star2 | tuynman | epsilon |
                                            adjointness
m              8,16,32,64,128               ascending level list
window         8,inf                        slope-fit level window
m_ref          96                           reference level for C1 (star2)
c1_estimator   richardson                   richardson | direct
extra_degree   4                            quadrature degree headroom
torus_n        (auto)                       torus grid size override
out            btq-out                      output directory
threads        1                            worker threads across levels
slope_min,     (per experiment)             verdict tolerance overrides
slope_max,
r2_min, tol
=============  ===========================  ===================================

Observables use the grammar of :mod:`btq.parsing`: ``x1 x2 x3 c(a,b) s(a,b)``,
numbers, ``+ - *`` and parentheses.

Outputs: ``series.csv`` (columns ``experiment,model,f,g,m,value``),
``verdicts.json`` (list of ``{experiment, slope, r2, window, pass, ...}``)
and ``run-manifest.json``.  Exit status is 0 when every verdict passes, 2
when a verdict fails and 1 on any execution error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .asymptotics import FitError, calibrate_kappa, sweep, verdict
from .manifold import LAPLACIAN_KAPPA, KahlerModel
from .parsing import ParseError, parse_observable
from .sections import SectionBasis

KINDS = {
    "dims": "dims", "norm": "norm-deficit", "commutator": "commutator", "star1": "star-1",
    "star2": "star-2", "tuynman": "tuynman", "epsilon": "epsilon", "adjointness": "adjointness",
}
_FLOAT_KEYS = ("slope_min", "slope_max", "r2_min", "tol")


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


@dataclass
class ExperimentConfig:
    model: str = "sphere"
    tau: tuple = (0.0, 1.0)
    f: str = ""
    g: str = ""
    kind: str = "norm"
    m: tuple = (8, 16, 32, 64, 128)
    window: tuple = (8, math.inf)
    m_ref: int = 96
    c1_estimator: str = "richardson"
    extra_degree: int = 4
    torus_n: int | None = None
    out: str = "btq-out"
    threads: int = 1
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.f:
            self.f = "x3" if self.model == "sphere" else "c(1,0)"
        if not self.g:
            self.g = "x1" if self.model == "sphere" else "c(1,1)"

    def kahler_model(self) -> KahlerModel:
        if self.model == "sphere":
            return KahlerModel.sphere()
        return KahlerModel.torus(complex(*self.tau))

    def echo(self) -> str:
        """The full configuration, defaults included, in the input format."""
        hi = "inf" if math.isinf(self.window[1]) else str(self.window[1])
        lines = [
            f"model = {self.model}",
            f"tau = {self.tau[0]!r} {self.tau[1]!r}",
            f"f = {self.f}",
            f"g = {self.g}",
            f"kind = {self.kind}",
            f"m = {','.join(str(m) for m in self.m)}",
            f"window = {self.window[0]},{hi}",
            f"m_ref = {self.m_ref}",
            f"c1_estimator = {self.c1_estimator}",
            f"extra_degree = {self.extra_degree}",
            f"torus_n = {'auto' if self.torus_n is None else self.torus_n}",
            f"out = {self.out}",
            f"threads = {self.threads}",
        ]
        lines += [f"{k} = {v!r}" for k, v in sorted(self.tolerances.items())]
        return "\n".join(lines) + "\n"


def _int_list(text, line):
    try:
        ms = tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError:
        raise ConfigError(f"level list must be comma-separated integers, got {text!r}", line)
    if not ms:
        raise ConfigError("level list is empty", line)
    if any(m < 1 for m in ms):
        raise ConfigError("levels must be positive", line)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ConfigError("m-list must be strictly ascending", line)
    return ms


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate ``key = value`` configuration text."""
    raw = {}
    lines = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", n)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in ExperimentConfig.__dataclass_fields__ and key not in _FLOAT_KEYS:
            raise ConfigError(f"unknown key {key!r}", n)
        if key == "tolerances":
            raise ConfigError(f"unknown key {key!r}", n)
        raw[key] = value
        lines[key] = n

    cfg = {}
    tol = {}
    for key, value in raw.items():
        n = lines[key]
        try:
            if key == "model":
                if value not in ("sphere", "torus"):
                    raise ConfigError(f"model must be sphere or torus, got {value!r}", n)
                cfg[key] = value
            elif key == "tau":
                parts = value.split()
                if len(parts) != 2:
                    raise ConfigError("tau takes two reals: 're im'", n)
                re_, im_ = float(parts[0]), float(parts[1])
                if not im_ > 0:
                    raise ConfigError("Im τ must be positive", n)
                cfg[key] = (re_, im_)
            elif key in ("f", "g", "out"):
                cfg[key] = value
            elif key == "kind":
                if value not in KINDS:
                    raise ConfigError(f"unknown kind {value!r}; choose from {', '.join(KINDS)}", n)
                cfg[key] = value
            elif key == "m":
                cfg[key] = _int_list(value, n)
            elif key == "window":
                lo, hi = (s.strip() for s in value.split(","))
                cfg[key] = (int(lo), math.inf if hi in ("inf", "") else int(hi))
            elif key in ("m_ref", "extra_degree", "threads"):
                cfg[key] = int(value)
            elif key == "torus_n":
                cfg[key] = None if value == "auto" else int(value)
            elif key == "c1_estimator":
                if value not in ("richardson", "direct"):
                    raise ConfigError("c1_estimator must be richardson or direct", n)
                cfg[key] = value
            else:
                tol[key] = float(value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", n) from None

    config = ExperimentConfig(**cfg, tolerances=tol)
    model = config.kahler_model()
    for key in ("f", "g"):
        try:
            parse_observable(model, getattr(config, key))
        except ParseError as exc:
            raise ConfigError(f"malformed expression for {key}: {exc}", lines.get(key)) from None
    return config


# ---------------------------------------------------------------------------
# running


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _dims_verdict(config):
    model = config.kahler_model()
    rows = []
    ok = True
    for m in config.m:
        d = SectionBasis(model, m).dim
        want = m + 1 if model.kind == "sphere" else m
        ok &= d == want
        rows.append(("dims", str(model), "", "", m, float(d)))
    return rows, {"experiment": "dims", "model": str(model), "slope": None, "r2": None,
                  "window": None, "pass": bool(ok)}


def execute(config: ExperimentConfig):
    """Run one configured experiment; returns (csv rows, verdict, series meta)."""
    if config.kind == "dims":
        rows, rec = _dims_verdict(config)
        return rows, rec, {}
    model = config.kahler_model()
    f = parse_observable(model, config.f)
    g = parse_observable(model, config.g)
    kind = KINDS[config.kind]
    uses_g = kind in ("commutator", "star-1", "star-2", "adjointness")
    series = sweep(model, kind, config.m, f, g if uses_g else None, m_ref=config.m_ref,
                   c1_extrapolate=config.c1_estimator == "richardson",
                   degree=config.extra_degree, torus_n=config.torus_n, threads=config.threads)
    rec = verdict(series, config.window, **config.tolerances)
    return list(series.rows()), rec, series.meta


def _write_outputs(out, rows, verdicts, manifest):
    os.makedirs(out, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "model", "f", "g", "m", "value"])
    for exp, model, f, g, m, v in rows:
        w.writerow([exp, model, f, g, m, repr(float(v))])
    with open(os.path.join(out, "series.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    with open(os.path.join(out, "verdicts.json"), "w", encoding="utf-8") as fh:
        json.dump(_json_safe(verdicts), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out, "run-manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(_json_safe(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(configs, metas, t0):
    return {
        "btq_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "laplacian_kappa": LAPLACIAN_KAPPA,
        "configs": [dict(asdict(c), window=[c.window[0], None if math.isinf(c.window[1]) else
                                             c.window[1]]) for c in configs],
        "series": metas,
        "wall_time_s": round(time.time() - t0, 3),
    }


def run(config: ExperimentConfig | list, out: str | None = None) -> int:
    """Execute one or more configs, write outputs and return the exit code."""
    configs = config if isinstance(config, list) else [config]
    out = out or configs[0].out
    t0 = time.time()
    rows, verdicts, metas = [], [], []
    try:
        for c in configs:
            r, rec, meta = execute(c)
            rows += r
            verdicts.append(rec)
            metas.append(meta)
        _write_outputs(out, rows, verdicts, _manifest(configs, metas, t0))
    except (FitError, ConfigError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for rec in verdicts:
        print(f"{'PASS' if rec['pass'] else 'FAIL'}  {rec['experiment']:<13} {rec['model']:<18} "
              f"slope={_fmt(rec.get('slope'))} r2={_fmt(rec.get('r2'))}")
    return 0 if all(rec["pass"] for rec in verdicts) else 2


def _fmt(x):
    return "-" if x is None else f"{x:.4f}"


def calibrate(model: KahlerModel | None = None, out: str | None = None) -> int:
    """Run the Laplacian-normalisation search and write ``calibration.json``."""
    try:
        report = calibrate_kappa(model)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"kappa = {report['kappa']}")
    for k, r in report["residuals"].items():
        print(f"  kappa={k:+d}  residual={r:.3e}")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "calibration.json"), "w", encoding="utf-8") as fh:
            json.dump(_json_safe(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def default_battery(base: ExperimentConfig) -> list:
    """The experiment set run by ``btq all``."""
    sphere = replace(base, model="sphere", f="x3", g="x1")
    torus = replace(base, model="torus", tau=(0.0, 1.0), f="c(1,0)", g="c(1,1)")
    ms = (8, 16, 32, 64, 128)
    cfgs = [replace(sphere, kind="dims", m=tuple(range(1, 129))),
            replace(torus, kind="dims", m=tuple(range(1, 129)))]
    for c in (sphere, torus):
        cfgs += [replace(c, kind="norm", m=ms), replace(c, kind="commutator", m=ms),
                 replace(c, kind="star1", m=ms),
                 replace(c, kind="star2", m=(8, 16, 32, 64), window=(8, 64)),
                 replace(c, kind="tuynman", m=(5, 10, 20, 40)),
                 replace(c, kind="epsilon", m=(4, 16, 64)),
                 replace(c, kind="adjointness", m=(4, 16, 64))]
    return cfgs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="btq", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=["dims", "calibrate", "norm", "commutator", "star",
                                            "tuynman", "epsilon", "adjointness", "all"])
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads across levels")
    parser.add_argument("--m", help="comma-separated level list (overrides config)")
    parser.add_argument("--order", type=int, choices=[1, 2], default=1,
                        help="star-product truncation order for 'star'")
    parser.add_argument("--model", choices=["sphere", "torus"], help="model for 'calibrate'")
    args = parser.parse_args(argv)

    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                config = parse_config(fh.read())
        else:
            config = ExperimentConfig()
        if args.m:
            config.m = _int_list(args.m, None)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.threads:
        config.threads = args.threads
    if args.out:
        config.out = args.out

    if args.command == "calibrate":
        model = KahlerModel.torus() if args.model == "torus" else KahlerModel.sphere()
        return calibrate(model, config.out)
    if args.command == "all":
        sys.stdout.write(config.echo())
        return run(default_battery(config), config.out)
    kind = f"star{args.order}" if args.command == "star" else args.command
    config = replace(config, kind=kind)
    sys.stdout.write(config.echo())
    return run(config, config.out)


if __name__ == "__main__":
    sys.exit(main())
