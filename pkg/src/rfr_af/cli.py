"""Command-line front end.

Subcommands: ``moments``, ``curve``, ``optimize``, ``synthesize``,
``simulate`` and ``figure``.  JSON and CSV output write floats with 17
significant digits, so identical inputs give byte-identical files.

Exit codes: 0 success, 2 invalid input, 3 numeric failure, 4 ambiguous
optimum (parameters on a threshold), 5 solver divergence.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .asymptotics import Regime, RegimeParams, objective
from .errors import (
    InterpolationThreshold,
    InvalidMoments,
    NumericError,
    RFRError,
    SolverDiverged,
    TieBreakAmbiguous,
)
from .moments import ActivationSpec, Moments, compute_moments, functional_norms, parse_af
from .optimizer import solve
from .simulator import CSV_COLUMNS, SimConfig, estimate
from .synthesis import synthesize_l1, synthesize_l2

__all__ = ["main", "build_parser", "CurveRequest", "curve_rows", "format_float", "dumps", "FIGURE_PANELS"]

EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_TIE = 4
EXIT_DIVERGED = 5


# ---------------------------------------------------------------------------
# Deterministic formatting
# ---------------------------------------------------------------------------


def format_float(v: float) -> str:
    """17 significant digits; ``Infinity``/``NaN`` spelled as Python's json module does."""
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written by :func:`format_float`."""

    def enc(o, level: int) -> str:
        pad, inner = " " * (indent * level), " " * (indent * (level + 1))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(inner + enc(v, level + 1) for v in o) + "\n" + pad + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, float):
            return format_float(o)
        if isinstance(o, int):
            return str(o)
        return json.dumps(str(o))

    return enc(_to_plain(obj), 0) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def _write_csv(fh, header: Sequence[str], rows: Iterable[Sequence], params: Optional[dict] = None) -> None:
    if params is not None:
        fh.write("# params: " + json.dumps(_to_plain(_fmt_floats(params)), sort_keys=True) + "\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def _fmt_floats(obj):
    # Floats inside the params header are written as strings to pin 17 digits.
    if isinstance(obj, dict):
        return {k: _fmt_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fmt_floats(v) for v in obj]
    if isinstance(obj, float):
        return format_float(obj)
    return obj


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveRequest:
    """One sweep of the asymptotic objective over ``psi1`` or ``lambda``."""

    regime: Regime
    sweep: str
    lo: float
    hi: float
    points: int
    scale: str
    af: "ActivationSpec | str"
    params: RegimeParams

    def __post_init__(self) -> None:
        if self.sweep not in ("psi1", "lambda"):
            raise ValueError("sweep must be 'psi1' or 'lambda'")
        if self.regime is Regime.R1 and self.sweep == "lambda":
            raise ValueError("R1 is ridgeless; sweep psi1 instead")
        if self.regime is Regime.R2 and self.sweep == "psi1":
            raise ValueError("R2 does not depend on psi1; sweep lambda instead")
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if self.scale not in ("linear", "log"):
            raise ValueError("scale must be 'linear' or 'log'")
        if self.scale == "log" and not self.lo > 0:
            raise ValueError("log scale requires lo > 0")
        if isinstance(self.af, str) and self.af != "optimal":
            raise ValueError("af must be an ActivationSpec or 'optimal'")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.points)
        return np.linspace(self.lo, self.hi, self.points)

    def describe_af(self) -> str:
        return self.af if isinstance(self.af, str) else self.af.describe()

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "sweep": self.sweep,
            "lo": self.lo,
            "hi": self.hi,
            "points": self.points,
            "scale": self.scale,
            "af": self.describe_af(),
            **self.params.to_dict(),
        }


CURVE_COLUMNS = ("error", "sensitivity", "objective", "flag")


def curve_rows(req: CurveRequest) -> list[tuple]:
    """Rows ``(sweep_value, error, sensitivity, objective, flag)``; failed points have empty values."""
    moments = None if isinstance(req.af, str) else compute_moments(req.af)
    key = "psi1" if req.sweep == "psi1" else "lam"
    rows = []
    for v in req.grid():
        v = float(v)
        p = req.params.replace(**{key: v})
        try:
            if moments is None:
                opt = solve(req.regime, p)
                ev = (opt.error, opt.sensitivity, opt.objective)
            else:
                e = objective(req.regime, moments, p)
                ev = (e.error, e.sensitivity, e.objective)
        except InterpolationThreshold:
            rows.append((v, None, None, None, "interpolation_threshold"))
            continue
        except TieBreakAmbiguous:
            rows.append((v, None, None, None, "tie"))
            continue
        except NumericError:
            rows.append((v, None, None, None, "numeric"))
            continue
        rows.append((v, *ev, ""))
    return rows


def write_curve(req: CurveRequest, fh) -> None:
    _write_csv(fh, (req.sweep, *CURVE_COLUMNS), curve_rows(req), req.to_dict())


# Preset sweeps behind the four panels.  Panel C sweeps two noise levels.
FIGURE_PANELS = {
    "A": dict(regime="R1", sweep="psi1", lo=0.05, hi=8.0, scale="linear", afs=("optimal", "relu"),
              params=dict(psi2=3.0, F1=1.0, tau=0.0, F_star=0.0, alpha=0.0), taus_sq=(0.0,)),
    "B": dict(regime="R1", sweep="psi1", lo=0.05, hi=8.0, scale="linear", afs=("optimal", "relu", "linear:1,0"),
              params=dict(psi2=3.0, F1=1.0, tau=1.0, F_star=0.0, alpha=0.0), taus_sq=(1.0,)),
    "C": dict(regime="R2", sweep="lambda", lo=1e-3, hi=1e2, scale="log", afs=("optimal", "relu"),
              params=dict(psi2=10.0, F1=1.0, F_star=0.0, alpha=0.0), taus_sq=(10.0, 5.0)),
    "D": dict(regime="R2", sweep="lambda", lo=1e-3, hi=1e2, scale="log", afs=("optimal", "relu"),
              params=dict(psi2=10.0, F1=10.0, F_star=0.0, alpha=0.0), taus_sq=(5.0,)),
}


def figure_requests(panel: str, points: int = 200, psi2: Optional[float] = None) -> list[tuple[str, CurveRequest]]:
    """``(file_stem, request)`` pairs for one panel."""
    spec = FIGURE_PANELS[panel.upper()]
    base = dict(spec["params"])
    if psi2 is not None:
        base["psi2"] = psi2
    out = []
    for tau_sq in spec["taus_sq"]:
        kw = dict(base, tau=math.sqrt(tau_sq))
        params = RegimeParams(psi1=1.0, **kw)
        for af_text in spec["afs"]:
            af = af_text if af_text == "optimal" else parse_af(af_text)
            req = CurveRequest(Regime.parse(spec["regime"]), spec["sweep"], spec["lo"], spec["hi"], points,
                               spec["scale"], af, params)
            stem = f"panel{panel.upper()}_{af_text.split(':')[0]}"
            if len(spec["taus_sq"]) > 1:
                stem += f"_tau2-{format_float(tau_sq)}"
            out.append((stem, req))
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _params_from_args(args, psi1_default: float = 1.0) -> RegimeParams:
    return RegimeParams(
        psi1=args.psi1 if args.psi1 is not None else psi1_default,
        psi2=args.psi2 if args.psi2 is not None else 1.0,
        lam=args.lam,
        alpha=args.alpha,
        F1=args.f1,
        F_star=args.fstar,
        tau=args.tau,
    )


def cmd_moments(args) -> int:
    af = parse_af(args.af)
    m = compute_moments(af, args.nodes)
    n1, n2 = functional_norms(af, args.nodes)
    _emit(dumps({"af": af.describe(), **m.to_dict(), "norm1": n1, "norm2": n2}), args.out)
    return 0


def cmd_curve(args) -> int:
    af = "optimal" if args.af == "optimal" else parse_af(args.af)
    req = CurveRequest(Regime.parse(args.regime), args.sweep, args.lo, args.hi, args.points, args.scale, af,
                       _params_from_args(args))
    buf = io.StringIO()
    write_curve(req, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def _synth(m: Moments, norm: str, sign: str):
    return synthesize_l1(m) if norm == "1" else synthesize_l2(m, sign)


def cmd_optimize(args) -> int:
    params = _params_from_args(args)
    opt = solve(args.regime, params)
    out = {"params": params.to_dict(), **opt.to_dict()}
    if args.emit_af:
        m = opt.canonical_moments
        if not all(math.isfinite(v) for v in (m.mu0, m.mu1, m.mu_star_sq)):
            raise InvalidMoments("the optimum is only approached as mu1 -> inf; no finite AF to emit")
        out["af"] = _synth(m, args.emit_af, args.sign).to_dict()
    _emit(dumps(out), args.out)
    return 0


def cmd_synthesize(args) -> int:
    if (args.mu2 is None) == (args.mu_star is None):
        raise ValueError("give exactly one of --mu2 and --mu-star")
    if args.mu2 is not None:
        m = Moments.from_triple(args.mu0, args.mu1, args.mu2)
    else:
        m = Moments.from_components(args.mu0, args.mu1, args.mu_star**2)
    _emit(dumps(_synth(m, args.norm, args.sign).to_dict()), args.out)
    return 0


_SIM_FLAGS = ("d", "psi1", "psi2", "lam", "af", "F0", "F1", "F_star", "tau", "n_test", "trials", "seed")


def sim_config_from_args(args) -> SimConfig:
    data: dict = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
    for key in _SIM_FLAGS:
        v = getattr(args, f"sim_{key}", None)
        if v is not None:
            data[key] = v
    env_seed = os.environ.get("RFR_SEED")
    if env_seed not in (None, ""):
        data["seed"] = int(env_seed)
    return SimConfig.from_dict(data)


def sim_csv_row(cfg: SimConfig, est) -> tuple:
    return (cfg.d, cfg.psi1, cfg.psi2, cfg.lam, cfg.af.describe(), est.error_mean, est.error_se,
            est.sens_mean, est.sens_se, cfg.trials, cfg.seed)


def cmd_simulate(args) -> int:
    cfg = sim_config_from_args(args)
    est = estimate(cfg)
    text = dumps({"config": cfg.to_dict(), **est.to_dict()})
    _emit(text, args.out)
    if args.csv:
        buf = io.StringIO()
        _write_csv(buf, CSV_COLUMNS, [sim_csv_row(cfg, est)], cfg.to_dict())
        Path(args.csv).write_text(buf.getvalue())
    return 0


def cmd_figure(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, req in figure_requests(args.panel, args.points, args.psi2):
        path = out_dir / f"{stem}.csv"
        with path.open("w") as fh:
            write_curve(req, fh)
        written.append(str(path))
    sys.stdout.write("\n".join(written) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_regime_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--psi1", type=float, default=None, help="N/d (default 1; ignored in R2)")
    p.add_argument("--psi2", type=float, default=None, help="n/d (default 1; ignored in R3)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="ridge parameter (ignored in R1)")
    p.add_argument("--alpha", type=float, default=0.0, help="sensitivity weight in [0, 1)")
    p.add_argument("--f1", type=float, default=1.0, help="linear signal magnitude F1")
    p.add_argument("--fstar", type=float, default=0.0, help="nonlinear signal magnitude F_star")
    p.add_argument("--tau", type=float, default=0.0, help="noise standard deviation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfr-af", description="Optimal activation functions for random features regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="Gaussian moments and norms of an activation function")
    p.add_argument("--af", required=True, help="relu, tanh, linear:c,d, quadratic:a,b,c, satlin:mu0,b,s, shifted-relu:t[,b,c]")
    p.add_argument("--nodes", type=int, default=201)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("curve", help="asymptotic error, sensitivity and objective along a sweep")
    p.add_argument("--regime", required=True, type=str.upper, choices=["R1", "R2", "R3"])
    p.add_argument("--sweep", required=True, choices=["psi1", "lambda"])
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--scale", choices=["linear", "log"], default="linear")
    p.add_argument("--af", default="optimal", help="activation spec or 'optimal'")
    p.add_argument("--out", default=None)
    _add_regime_params(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("optimize", help="optimal activation moments for one regime")
    p.add_argument("--regime", required=True, type=str.upper, choices=["R1", "R2", "R3"])
    p.add_argument("--emit-af", choices=["1", "2"], default=None, help="also synthesize a minimal-norm AF")
    p.add_argument("--sign", choices=["+", "-"], default="+", help="quadratic coefficient sign for --emit-af 2")
    p.add_argument("--out", default=None)
    _add_regime_params(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("synthesize", help="minimal-norm AF with given moments")
    p.add_argument("--mu0", type=float, required=True)
    p.add_argument("--mu1", type=float, required=True)
    p.add_argument("--mu2", type=float, default=None)
    p.add_argument("--mu-star", dest="mu_star", type=float, default=None)
    p.add_argument("--norm", choices=["1", "2"], default="2")
    p.add_argument("--sign", choices=["+", "-"], default="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate of error and sensitivity")
    p.add_argument("config", nargs="?", default=None, help="JSON config file; flags override its keys")
    p.add_argument("--d", dest="sim_d", type=int)
    p.add_argument("--psi1", dest="sim_psi1", type=float)
    p.add_argument("--psi2", dest="sim_psi2", type=float)
    p.add_argument("--lambda", dest="sim_lam", type=float)
    p.add_argument("--af", dest="sim_af")
    p.add_argument("--f0", dest="sim_F0", type=float)
    p.add_argument("--f1", dest="sim_F1", type=float)
    p.add_argument("--fstar", dest="sim_F_star", type=float)
    p.add_argument("--tau", dest="sim_tau", type=float)
    p.add_argument("--n-test", dest="sim_n_test", type=int)
    p.add_argument("--trials", dest="sim_trials", type=int)
    p.add_argument("--seed", dest="sim_seed", type=int)
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.add_argument("--csv", default=None, help="also write a one-row CSV summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="write the CSV data behind one figure panel")
    p.add_argument("--panel", required=True, type=str.upper, choices=sorted(FIGURE_PANELS))
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--psi2", type=float, default=None, help="override psi2 (panels C and D)")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TieBreakAmbiguous as exc:
        code, msg = EXIT_TIE, exc
    except SolverDiverged as exc:
        code, msg = EXIT_DIVERGED, exc
    except NumericError as exc:
        code, msg = EXIT_NUMERIC, exc
    except (RFRError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        code, msg = EXIT_INPUT, exc
    sys.stderr.write(f"rfr-af: error: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
