"""Command-line front end.

Exit codes: 0 pass, 1 configuration error, 2 precondition violated,
3 numerical failure (including an area-law residual above tolerance).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .config import ExperimentConfig, check_seed, check_tolerance, load_config
from .errors import ConfigError, NumericalError, PreconditionError
from .holonomy import holonomy_sweep, horizontal_holonomy
from .lie import classify_plane, fiber_closed_form, k_matrix
from .matrix import expm
from .sampling import random_cone, rng_for
from .selftest import run_selftest
from .surface import SurfaceChart, area_of_region


EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 1, 2, 3

CSV_COLUMNS = ("curve_id", "radius", "area", "theta", "predicted", "law_residual",
               "offdiag_residual", "scalar_residual", "status")
FIBER_TOLERANCE = 1e-10


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with the precondition code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _num(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".12g")


def _exit_for(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, PreconditionError):
        return EXIT_PRECONDITION
    return EXIT_NUMERIC


class Emitter:
    """Writes the final document to ``path`` or stdout; nothing is written before ``emit``."""

    def __init__(self, path: str | None):
        self.path = path

    def emit(self, text: str):
        if self.path is None:
            sys.stdout.write(text)
            if not text.endswith("\n"):
                sys.stdout.write("\n")
            return
        p = Path(self.path)
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_name(p.name + ".tmp")
        tmp.write_text(text, encoding="utf-8", newline="")
        tmp.replace(p)


def _manifest(command: str, cfg: ExperimentConfig | None, seed: int, tol: float | None,
              started: float, results) -> dict:
    return {
        "tool": "dualgrass",
        "version": __version__,
        "command": command,
        "backend": _backend.BACKEND,
        "config_sha256": None if cfg is None else cfg.sha256(),
        "seed": seed,
        "tolerance": tol,
        "wall_clock_seconds": time.perf_counter() - started,
        "results": results,
    }


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _resolve(args, *, need_curves=False, need_y=True) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config")
    return load_config(args.config, seed=args.seed, tolerance=args.tolerance,
                       need_curves=need_curves, need_y=need_y)


def _format(args, cfg: ExperimentConfig | None, allowed=("json", "csv")) -> str:
    fmt = args.format or (cfg.output.format if cfg is not None else "json")
    if fmt not in allowed:
        raise ConfigError(f"{args.command} does not support --format {fmt}")
    return fmt


def _target(args, cfg: ExperimentConfig | None) -> str | None:
    if args.output is not None:
        return args.output
    return None if cfg is None else cfg.output.path


def _csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# verbs -----------------------------------------------------------------------

def cmd_classify(args) -> int:
    started = time.perf_counter()
    cfg = _resolve(args)
    _format(args, cfg, ("json",))
    c = classify_plane(cfg.X, cfg.Y)
    res = c.to_json()
    res["witnesses"] = c.witnesses
    res["agrees_with_closure"] = c.agrees_with_closure
    Emitter(_target(args, cfg)).emit(_dump(_manifest("classify", cfg, cfg.seed, cfg.tolerance, started, res)))
    return EXIT_OK


def _report_row(i, curve, rep, tol) -> dict:
    return {
        "curve_id": i,
        "radius": _num(curve.radius),
        "area": _num(rep.area),
        "theta": _num(rep.theta),
        "predicted": _num(rep.predicted),
        "law_residual": _num(rep.law_residual),
        "offdiag_residual": _num(rep.offdiag_residual),
        "scalar_residual": _num(rep.scalar_residual),
        "status": "ok" if rep.law_residual <= tol else "law_failed",
    }


def _error_row(i, curve, exc) -> dict:
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(curve_id=i, radius=_num(curve.radius), status=type(exc).__name__)
    return row


def _run_transport(args, cfg: ExperimentConfig, curves, command: str, started: float) -> int:
    fmt = _format(args, cfg)
    chart = SurfaceChart.from_pair(cfg.X, cfg.Y)
    if len(curves) == 1:
        outcomes = [horizontal_holonomy(chart, curves[0], cfg.integrator, cfg.quadrature)]
    else:
        outcomes = holonomy_sweep(chart, curves, cfg.integrator, cfg.quadrature, jobs=args.jobs)
    code = EXIT_OK
    rows, results = [], []
    for i, (curve, out) in enumerate(zip(curves, outcomes)):
        if isinstance(out, Exception):
            code = max(code, _exit_for(out))
            rows.append(_error_row(i, curve, out))
            results.append({"curve_id": i, "curve": curve.to_json(), "status": type(out).__name__,
                            "error": str(out)})
            continue
        row = _report_row(i, curve, out, cfg.tolerance)
        if row["status"] != "ok":
            code = max(code, EXIT_NUMERIC)
        rows.append(row)
        results.append({"curve_id": i, "curve": curve.to_json(), "status": row["status"], **out.to_json()})
    if fmt == "csv":
        text = _csv(rows, CSV_COLUMNS)
    else:
        body = results[0] if command == "holonomy" else results
        text = _dump(_manifest(command, cfg, cfg.seed, cfg.tolerance, started, body))
    Emitter(_target(args, cfg)).emit(text)
    return code


def cmd_holonomy(args) -> int:
    started = time.perf_counter()
    cfg = _resolve(args, need_curves=True)
    if cfg.is_sweep:
        raise ConfigError("holonomy takes a single curve; use the sweep verb for a list")
    return _run_transport(args, cfg, cfg.curves, "holonomy", started)


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    cfg = _resolve(args, need_curves=True)
    return _run_transport(args, cfg, cfg.curves, "sweep", started)


def closed_form_area(chart: SurfaceChart, curve) -> float | None:
    """n (pi/2)(cosh(2 sqrt(lam) r) - 1) for an origin-centred circle on the (X, iX) chart."""
    if curve.kind != "circle" or any(curve.center):
        return None
    if np.linalg.norm(chart.Y - 1j * chart.X) > 1e-14 * np.linalg.norm(chart.X):
        return None
    r = curve.radius
    return chart.sig.n * 0.5 * math.pi * (math.cosh(2.0 * math.sqrt(chart.lam) * r) - 1.0)


def cmd_area(args) -> int:
    started = time.perf_counter()
    cfg = _resolve(args, need_curves=True)
    fmt = _format(args, cfg)
    chart = SurfaceChart.from_pair(cfg.X, cfg.Y)
    rows = []
    for i, curve in enumerate(cfg.curves):
        A = area_of_region(chart, curve, cfg.quadrature)
        rows.append({"curve_id": i, "radius": curve.radius, "area": A,
                     "closed_form": closed_form_area(chart, curve)})
    if fmt == "csv":
        text = _csv([{k: (v if k == "curve_id" else _num(v)) for k, v in r.items()} for r in rows],
                    ("curve_id", "radius", "area", "closed_form"))
    else:
        text = _dump(_manifest("area", cfg, cfg.seed, cfg.tolerance, started, rows))
    Emitter(_target(args, cfg)).emit(text)
    return EXIT_OK


def cmd_fiber_check(args) -> int:
    started = time.perf_counter()
    cfg = _resolve(args, need_y=False) if args.config is not None else None
    _format(args, cfg, ("json",))
    seed = cfg.seed if cfg is not None else check_seed(args.seed if args.seed is not None else 0)
    tol = check_tolerance(args.tolerance) if args.tolerance is not None else FIBER_TOLERANCE
    grid = cfg.theta_grid if cfg is not None else 32
    if cfg is not None:
        Xs = [cfg.X]
    else:
        trials = 20 if args.trials is None else args.trials
        sizes = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)]
        Xs = []
        for t in range(trials):
            n, m = sizes[t % len(sizes)]
            Xs.append(random_cone(rng_for(seed, 200, t), m, n))
    thetas = np.linspace(0.0, 4.0 * np.pi, grid)
    results, worst_closed, worst_comp = [], 0.0, 0.0
    for idx, X in enumerate(Xs):
        K = k_matrix(X).mat
        lam = float(np.real(np.trace(X.conj().T @ X))) / X.shape[1]
        closed = [fiber_closed_form(X, th) for th in thetas]
        r1 = max(float(np.linalg.norm(expm(-(th / lam) * K) - F)) for th, F in zip(thetas, closed))
        r2 = max(float(np.linalg.norm(closed[i] @ closed[j] - fiber_closed_form(X, thetas[i] + thetas[j])))
                 for i in range(0, grid, max(1, grid // 8)) for j in range(0, grid, max(1, grid // 8)))
        worst_closed, worst_comp = max(worst_closed, r1), max(worst_comp, r2)
        results.append({"index": idx, "n": X.shape[1], "m": X.shape[0], "lambda": lam,
                        "closed_form_residual": r1, "composition_residual": r2})
    passed = worst_closed <= tol and worst_comp <= tol
    body = {"passed": passed, "max_closed_form_residual": worst_closed,
            "max_composition_residual": worst_comp, "theta_points": grid, "cases": results}
    Emitter(_target(args, cfg)).emit(_dump(_manifest("fiber-check", cfg, seed, tol, started, body)))
    return EXIT_OK if passed else EXIT_NUMERIC


def cmd_selftest(args) -> int:
    started = time.perf_counter()
    seed = check_seed(args.seed if args.seed is not None else 0)
    trials = 100 if args.trials is None else args.trials
    if trials < 0:
        raise ConfigError("--trials must be nonnegative")
    fmt = args.format or "text"
    if fmt == "csv":
        raise ConfigError("selftest does not support --format csv")
    results = run_selftest(seed, trials)
    ok = all(r.passed for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.trials - r.failures}/{r.trials} within {r.tolerance:.0e} "
              f"(worst {r.worst:.3e})", file=sys.stderr if fmt == "json" and args.output is None else sys.stdout)
    if fmt == "json" or args.output is not None:
        body = {"passed": ok, "trials": trials, "suites": [r.to_json() for r in results]}
        doc = _manifest("selftest", None, seed, None, started, body)
        Emitter(args.output).emit(_dump(doc))
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "classify": (cmd_classify, "classify the plane spanned by the X and Y generators"),
    "holonomy": (cmd_holonomy, "transport around one curve and check the area law"),
    "area": (cmd_area, "integrate the induced area inside each curve"),
    "sweep": (cmd_sweep, "holonomy for every curve of a sweep"),
    "fiber-check": (cmd_fiber_check, "check the closed form of the fiber exponential"),
    "selftest": (cmd_selftest, "run the randomized invariant suites"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment configuration (JSON)")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--tolerance", type=float, help="pass threshold for the verb's residual")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    common.add_argument("--trials", type=int, help="instances per randomized suite")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="dualgrass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except ConfigError as exc:
        print(f"dualgrass {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, NumericalError, ArithmeticError) as exc:
        code = _exit_for(exc)
        diag = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(_dump(diag), end="")
        return code


if __name__ == "__main__":
    sys.exit(main())
