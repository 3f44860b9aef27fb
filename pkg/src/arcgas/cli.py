"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
2 + k when a verification suite has k failing checks.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__, gas, kernels
from .arcs import ArcValidationError, arc_from_dict, load_arc, make_interval
from .energies import analyze_arc, energy_report, prediction_report
from .equilibrium import ChebSeries
from .verification import SUITES, run_suite

EXIT_USAGE = 1
EXIT_NUMERIC = 2


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"{stage} failed: {exc}")
        self.stage = stage


def manifest(command: str, spec=None, **settings) -> dict:
    out = {
        "command": command,
        "settings": settings,
        "versions": {"arcgas": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "kernel_backend": kernels.BACKEND,
    }
    if spec is not None:
        out["arc"] = spec.to_dict()
        out["arc_hash"] = spec.content_hash()
    # wall-clock time would break byte-identical reruns; honour a pinned epoch only
    if "SOURCE_DATE_EPOCH" in os.environ:
        out["timestamp"] = int(os.environ["SOURCE_DATE_EPOCH"])
    return out


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _write(out: Path | None, name: str, text: str):
    if out is None:
        click.echo(text, nl=False)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    click.echo(f"wrote {out / name}", err=True)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def _load_arc(path):
    try:
        return load_arc(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot load arc config {path}: {exc}") from exc


def _parse_u(text):
    if text is None:
        return None
    try:
        coeffs = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise click.BadParameter("expected comma-separated Chebyshev coefficients c1,c2,...") from exc
    return ChebSeries(0.0, np.array(coeffs))


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Log-gases on analytic Jordan arcs."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--arc", "arc_path", required=True, type=click.Path(dir_okay=False))
@click.option("--grunsky-n", default=64, show_default=True, help="Grunsky truncation N.")
@click.option("--quad-m", default=512, show_default=True, help="Samples for maps and quadrature.")
@click.option("--tol", default=1e-4, show_default=True, help="Cross-route agreement tolerance.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path))
def analyze(arc_path, grunsky_n, quad_m, tol, out):
    """Capacity, energies and Grunsky data of one arc."""
    spec = _load_arc(arc_path)
    an = _stage("analysis", analyze_arc, spec, N=grunsky_n, M=quad_m)
    rep = _stage("energies", energy_report, an).to_dict()
    rep["route_agreement"] = {
        "JA": "PASS" if abs(rep["JA_geometric"] - rep["JA_spectral"]) <= tol else "FAIL",
        "JF": "PASS" if abs(rep["JF_cheb"] - rep["JF_dirichlet"]) <= tol else "FAIL",
        "cap": "PASS" if abs(rep["cap"] - rep["cap_frostman"]) <= tol else "FAIL",
    }
    doc = {"manifest": manifest("analyze", spec, grunsky_n=grunsky_n, quad_m=quad_m, tol=tol),
           "report": rep}
    _write(out, "report.json", dumps(doc))


@cli.command()
@click.option("--arc", "arc_path", required=True, type=click.Path(dir_okay=False))
@click.option("--beta", default=2.0, show_default=True)
@click.option("--u", "u_text", default=None, help="Test function as Chebyshev coefficients c1,c2,...")
@click.option("--grunsky-n", default=64, show_default=True)
@click.option("--quad-m", default=512, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path))
def predict(arc_path, beta, u_text, grunsky_n, quad_m, out):
    """Free-energy constant, CLT parameters and Laplace terms."""
    if beta <= 0:
        raise click.BadParameter("beta must be positive")
    spec = _load_arc(arc_path)
    u = _parse_u(u_text)
    an = _stage("analysis", analyze_arc, spec, N=grunsky_n, M=quad_m)
    rep = _stage("predictions", prediction_report, an, beta, u)
    doc = {"manifest": manifest("predict", spec, beta=beta, u=u_text, grunsky_n=grunsky_n,
                                quad_m=quad_m),
           "report": rep.to_dict()}
    _write(out, "prediction.json", dumps(doc))


@cli.command()
@click.option("--suite", required=True, type=click.Choice(SUITES))
@click.option("--out", type=click.Path(file_okay=False, path_type=Path))
@click.pass_context
def verify(ctx, suite, out):
    """Run a verification suite; exit code 2 + number of failures if any fail."""
    t0 = time.time()
    checks = _stage(suite, run_suite, suite)
    for c in checks:
        click.echo(c.line(), err=out is None)
    failures = sum(not c.passed for c in checks)
    doc = {"manifest": manifest("verify", suite=suite), "suite": suite, "failures": failures,
           "runtime": time.time() - t0, "checks": [c.to_dict() for c in checks]}
    if out is not None:
        _write(out, f"verify-{suite}.json", dumps(doc))
    ctx.exit(min(EXIT_NUMERIC + failures, 255) if failures else 0)


def _read_params(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
        spec = arc_from_dict(data["arc"]) if data.get("arc") else make_interval()
    except (OSError, ValueError, KeyError) as exc:
        raise click.UsageError(f"cannot load simulation parameters {path}: {exc}") from exc
    return data, spec


@cli.command()
@click.option("--params", "params_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the seed in the parameter file.")
@click.option("--sweeps", type=int, default=None, help="Override the sweep count.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
def simulate(params_path, seed, sweeps, out):
    """Run the sampler: a single chain, a CLT study or a thermodynamic integration."""
    data, spec = _read_params(params_path)
    if seed is not None:
        data["seed"] = seed
    if sweeps is not None:
        data["sweeps"] = sweeps
    mode = data.get("mode", "chain")
    K = int(data.get("K", 16))
    N = int(data.get("grunsky_n", 64))
    an = None if spec.family == "interval" else _stage("analysis", analyze_arc, spec, N=N)
    model = gas.gas_model(an, K=K)
    try:
        params = gas.GasParams(n=int(data["n"]), beta=float(data.get("beta", 2.0)),
                               s=float(data.get("s", 1.0)), seed=int(data.get("seed", 0)),
                               sweeps=int(data.get("sweeps", 20000)),
                               burn_in=int(data.get("burn_in", 2000)))
    except (KeyError, ValueError) as exc:
        raise click.UsageError(f"bad simulation parameters: {exc}") from exc
    u = ChebSeries(0.0, np.array(data["u"], dtype=float)) if data.get("u") else None
    man = manifest("simulate", spec, **data)

    if mode == "chain":
        requests = {"linear": gas.linear_statistic(u)} if u is not None else {}
        summ = _stage("sampler", gas.mcmc_run, params, model.padded(u.N if u else 0), requests,
                      keep_series=True)
        _write(out, "summary.json", dumps({"manifest": man, "summary": summ.to_dict()}))
        _write(out, "series.csv", summ.series_csv())
    elif mode == "clt":
        if u is None:
            raise click.UsageError("clt mode needs a test function 'u'")
        # the interval model needs no analysis, but the predictions do
        pred_an = an or _stage("analysis", analyze_arc, spec, N=N)
        res = _stage("sampler", gas.linear_statistic_clt, params, model, u,
                     int(data.get("chains", 16)), an=pred_an)
        _write(out, "summary.json", dumps({"manifest": man, "clt": res}))
    elif mode == "thermo":
        res = _stage("sampler", gas.thermo_log_ratio, model, params.n, params.beta,
                     nodes=int(data.get("nodes", 8)), sweeps=params.sweeps,
                     burn_in=params.burn_in, seed=params.seed)
        doc = {"manifest": man, "thermo": {"estimate": res["estimate"], "se": res["se"]}}
        if params.beta == 2.0:
            from .selberg import logZ_beta2_product
            doc["thermo"]["exact_beta2"] = (gas.logZ_beta2_gram(spec, params.n)
                                            - logZ_beta2_product(params.n))
        _write(out, "summary.json", dumps(doc))
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["s", "weight", "b_prime", "se", "acceptance"],
                                lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in res["nodes"]:
            writer.writerow({k: repr(v) for k, v in row.items()})
        _write(out, "thermo_nodes.csv", buf.getvalue())
    else:
        raise click.UsageError(f"unknown mode {mode!r}; use chain, clt or thermo")


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="arcgas", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except StageError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_NUMERIC
    except (ArcValidationError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
