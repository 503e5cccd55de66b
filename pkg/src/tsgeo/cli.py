"""Command-line front end.

Every subcommand prints one JSON record ``{"manifest": ..., "result": ...}``
to stdout, with sorted keys so that identical invocations give identical
bytes. ``--pretty`` prints the same record as an aligned table instead.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
The environment variable ``TSGEO_QUAD_TOL`` sets both the absolute and the
relative tolerance of the quadrature oracles.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from typing import Any, Callable, Optional, Sequence

import numpy as np

from tsgeo import __version__
from tsgeo._quad import QuadratureConfig
from tsgeo.charfn import auto_grid, sample
from tsgeo.divergence import alpha_divergence, alpha_divergence_quadrature
from tsgeo.errors import ConvergenceError, DomainError
from tsgeo.geometry import (
    alpha_connection,
    fisher_metric,
    geometry_quadrature_detail,
    levi_civita,
    metric_from_divergence,
)
from tsgeo.inference import (
    AnsatzSpec,
    bias_study,
    fit_mle,
    jeffreys_prior,
    laplace_beltrami_grid,
    penalized_loglik,
    standard_errors,
)
from tsgeo.params import ModelKind, ProcessSpec, make_equivalent, validate

EXIT_OK, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4
TOL_ENV = "TSGEO_QUAD_TOL"
SUPERHARMONIC_TOL = 1e-10


# -- argument helpers -----------------------------------------------------------


def _add_model(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (defaults: CTS with a=0.5, C=1, λ+=2, λ-=3)")
    g.add_argument("--model", default="cts", choices=[k.value.lower() for k in ModelKind])
    g.add_argument("--a", type=float, default=0.5, help="index of both tails")
    g.add_argument("--c", type=float, default=1.0, help="scale of both tails")
    g.add_argument("--a-plus", type=float, help="GTS/RDTS: positive-tail index (overrides --a)")
    g.add_argument("--a-minus", type=float, help="GTS/RDTS: negative-tail index (overrides --a)")
    g.add_argument("--c-plus", type=float, help="GTS/RDTS: positive-tail scale (overrides --c)")
    g.add_argument("--c-minus", type=float, help="GTS/RDTS: negative-tail scale (overrides --c)")
    g.add_argument("--lp", type=float, default=2.0, help="decay rate λ+")
    g.add_argument("--lm", type=float, default=3.0, help="decay rate λ-")
    g.add_argument("--m", type=float, default=0.0, help="mean drift")
    g.add_argument("--t", type=float, default=1.0, help="horizon T")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pretty", action="store_true", help="print an aligned table instead of JSON")
    p.add_argument("--timing", action="store_true", help="add wall time to the manifest")


def _spec(args) -> ProcessSpec:
    kind = ModelKind.parse(args.model)
    raw: dict[str, Any] = {"lambda_plus": args.lp, "lambda_minus": args.lm, "m": args.m, "horizon_t": args.t}
    if kind is ModelKind.CTS:
        extra = [n for n in ("a_plus", "a_minus", "c_plus", "c_minus") if getattr(args, n) is not None]
        if extra:
            raise DomainError(f"CTS shares one index and scale; drop --{extra[0].replace('_', '-')}")
        raw.update(a=args.a, c=args.c)
    else:
        for name, default in (("a", args.a), ("c", args.c)):
            for side in ("plus", "minus"):
                v = getattr(args, f"{name}_{side}")
                raw[f"{name}_{side}"] = default if v is None else v
    return validate(kind, raw)


def _quad_cfg() -> QuadratureConfig:
    text = os.environ.get(TOL_ENV)
    if text is None:
        return QuadratureConfig()
    try:
        tol = float(text)
    except ValueError:
        raise DomainError(f"{TOL_ENV} must be a number, got {text!r}") from None
    return QuadratureConfig(abs_tol=tol, rel_tol=tol)


def _max_rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    gap = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    return gap / scale if scale > 0 else gap


# -- subcommands --------------------------------------------------------------


def cmd_divergence(args) -> dict:
    spec = _spec(args)
    pair = make_equivalent(spec, args.new_lp, args.new_lm)
    value = alpha_divergence(pair, args.alpha)
    out: dict[str, Any] = {"pair": pair.to_dict(), "alpha": args.alpha, "value": value}
    if args.oracle:
        quad = alpha_divergence_quadrature(pair, args.alpha, _quad_cfg())
        gap = abs(quad.value - value)
        rel = gap / abs(value) if value != 0 else gap
        out.update(
            quadrature=quad.value,
            quadrature_error=quad.error,
            abs_gap=gap,
            rel_gap=rel,
            tol=args.tol,
            **{"pass": bool(rel <= args.tol)},
        )
    return out


def cmd_geometry(args) -> dict:
    spec = _spec(args)
    metric = fisher_metric(spec)
    conn = alpha_connection(spec, args.alpha)
    out: dict[str, Any] = {
        "spec": spec.to_dict(),
        "alpha": args.alpha,
        "metric": metric.to_list(),
        "levi_civita": levi_civita(spec).to_dict(),
        "alpha_connection": conn.to_dict(),
    }
    if args.oracle:
        fd = metric_from_divergence(None, spec, args.alpha)
        quad = geometry_quadrature_detail(spec, args.alpha, _quad_cfg())
        gaps = {
            "metric_fd": _max_rel(fd.g, metric.g),
            "metric_quadrature": _max_rel(quad.metric.g, metric.g),
            "connection_quadrature": _max_rel(quad.connection.coeffs, conn.coeffs)
            if np.any(conn.coeffs)
            else float(np.max(np.abs(quad.connection.coeffs))),
        }
        out.update(
            metric_fd=fd.to_list(),
            metric_quadrature=quad.metric.to_list(),
            connection_quadrature=quad.connection.to_dict(),
            form_gap=quad.form_gap,
            gaps=gaps,
            tol=args.tol,
            **{"pass": bool(max(gaps.values()) <= args.tol)},
        )
    return out


def cmd_prior(args) -> dict:
    spec = _spec(args)
    j = jeffreys_prior(spec)
    out: dict[str, Any] = {"spec": spec.to_dict(), "jeffreys": j, "log_jeffreys": math.log(j)}
    if args.loglik is not None:
        out.update(loglik=args.loglik, penalized_loglik=penalized_loglik(args.loglik, spec))
    return out


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def cmd_ansatz_check(args) -> dict:
    spec = _spec(args)
    ansatz = AnsatzSpec(args.kind, k=args.k, l=args.l, c1=args.c1, c2=args.c2)
    grid = laplace_beltrami_grid(spec, ansatz, args.lo, args.hi, args.grid_n)
    if args.csv:
        _write_csv(args.csv, ("lambda_plus", "lambda_minus", "delta_phi"), grid)
    worst = float(np.max(grid[:, 2]))
    return {
        "spec": spec.to_dict(),
        "ansatz": ansatz.to_dict(),
        "grid": {"lo": args.lo, "hi": args.hi, "n": args.grid_n},
        "max_delta_phi": worst,
        "min_delta_phi": float(np.min(grid[:, 2])),
        "tol": SUPERHARMONIC_TOL,
        "pass": bool(worst <= SUPERHARMONIC_TOL),
    }


def cmd_density(args) -> dict:
    spec = _spec(args)
    grid = auto_grid(spec)
    if args.csv:
        _write_csv(args.csv, ("x", "value"), zip(grid.x, grid.values))
    return {
        "spec": spec.to_dict(),
        "n": grid.n,
        "x_min": grid.x_min,
        "x_max": grid.x_max,
        "mass": grid.mass(),
        "mean": grid.mean(),
    }


def _read_samples(path: str) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text.split(",")[0]))
            except ValueError:
                if values or lineno > 1:
                    raise OSError(f"{path}:{lineno}: not a number: {text!r}") from None
    return np.array(values)


def cmd_fit(args) -> dict:
    spec = _spec(args)
    if args.samples:
        x = _read_samples(args.samples)
        source = {"file": args.samples}
    else:
        x = sample(spec, args.n, args.seed)
        source = {"drawn": args.n, "seed": args.seed}
    fit = fit_mle(x, spec, args.penalized)
    out: dict[str, Any] = {"template": spec.to_dict(), "samples": source, "fit": fit.to_dict()}
    if args.se:
        se = standard_errors(x, spec, fit)
        out["standard_errors"] = {"lambda_plus": se[0], "lambda_minus": se[1]}
    return out


def cmd_bias_study(args) -> dict:
    spec = _spec(args)
    summary = bias_study(spec, args.n, args.seeds, args.seed0)
    return {"spec": spec.to_dict(), "summary": summary.to_dict()}


# -- parser and driver ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsgeo",
        description="Divergences, geometry and priors for tempered stable processes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="alpha-divergence between equivalent measures")
    _add_model(p)
    p.add_argument("--new-lp", type=float, required=True, help="decay λ+ of the second measure")
    p.add_argument("--new-lm", type=float, required=True, help="decay λ- of the second measure")
    p.add_argument("--alpha", type=float, default=-1.0)
    p.add_argument("--oracle", action="store_true", help="also integrate numerically and compare")
    p.add_argument("--tol", type=float, default=1e-8, help="relative tolerance for --oracle")
    _add_output(p)
    p.set_defaults(func=cmd_divergence, stochastic=False)

    p = sub.add_parser("geometry", help="Fisher metric and alpha-connection")
    _add_model(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--oracle", action="store_true", help="add finite-difference and quadrature checks")
    p.add_argument("--tol", type=float, default=1e-5, help="relative tolerance for --oracle")
    _add_output(p)
    p.set_defaults(func=cmd_geometry, stochastic=False)

    p = sub.add_parser("prior", help="Jeffreys prior and penalized log-likelihood")
    _add_model(p)
    p.add_argument("--loglik", type=float, help="log-likelihood to penalize")
    _add_output(p)
    p.set_defaults(func=cmd_prior, stochastic=False)

    p = sub.add_parser("ansatz-check", help="Laplace-Beltrami sign of a prior ansatz on a grid")
    _add_model(p)
    p.add_argument("--kind", required=True, choices=["phi1", "phi2", "phi3", "phi4"])
    p.add_argument("--k", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--lo", type=float, default=0.5, help="smallest decay on the grid")
    p.add_argument("--hi", type=float, default=4.0, help="largest decay on the grid")
    p.add_argument("--grid-n", type=int, default=9, help="grid points per axis")
    p.add_argument("--csv", help="write the grid to this CSV file")
    _add_output(p)
    p.set_defaults(func=cmd_ansatz_check, stochastic=False)

    p = sub.add_parser("density", help="density of X_T by FFT inversion")
    _add_model(p)
    p.add_argument("--csv", help="write the density grid to this CSV file")
    _add_output(p)
    p.set_defaults(func=cmd_density, stochastic=False)

    p = sub.add_parser("fit", help="fit the decay rates by (penalized) maximum likelihood")
    _add_model(p)
    p.add_argument("--samples", help="file with one sample per line; drawn from the model if omitted")
    p.add_argument("--n", type=int, default=1000, help="sample size when drawing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalized", action="store_true", help="add the log Jeffreys prior")
    p.add_argument("--se", action="store_true", help="report observed-information standard errors")
    _add_output(p)
    p.set_defaults(func=cmd_fit, stochastic=True)

    p = sub.add_parser("bias-study", help="Monte Carlo bias of plain vs penalized fits")
    _add_model(p)
    p.add_argument("--n", type=int, default=200, help="sample size per seed")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--seed0", type=int, default=42)
    _add_output(p)
    p.set_defaults(func=cmd_bias_study, stochastic=True)
    return parser


_SKIP = {"func", "stochastic", "pretty", "timing", "command"}


def _manifest(args, elapsed: Optional[float]) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _SKIP}
    out: dict[str, Any] = {"command": args.command, "parameters": params, "version": __version__}
    if args.stochastic:
        out["seed"] = params.get("seed0", params.get("seed"))
    if elapsed is not None:
        out["wall_time_s"] = elapsed
    return out


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    else:
        rows.append((prefix, value))


def render(record: dict, pretty: bool) -> str:
    if not pretty:
        return json.dumps(record, sort_keys=True, allow_nan=False)
    rows: list = []
    _flatten("", record, rows)
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    func: Callable[[Any], dict] = args.func
    start = time.perf_counter()
    try:
        result = func(args)
        elapsed = time.perf_counter() - start if args.timing else None
        text = render({"manifest": _manifest(args, elapsed), "result": result}, args.pretty)
    except DomainError as exc:
        print(f"tsgeo: invalid input: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"tsgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"tsgeo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # non-finite output refused by the JSON encoder
        print(f"tsgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(text)
    return EXIT_OK
