"""Experiment configuration: JSON ingestion, validation and hashing.

A configuration names a signature, the two generator matrices, one curve
or a sweep of curves, and the integrator and quadrature settings::

    {
      "signature": [2, 3],
      "X": {"random_cone": {"lambda": 2.0, "seed": 7}},
      "Y": "iX",
      "sweep": [{"kind": "circle", "radius": 0.2}, {"kind": "circle", "radius": 0.5}],
      "integrator": {"steps": 4096, "order": 4, "renormalize_every": 64},
      "quadrature": {"radial": 16, "angular": 32, "max_refinements": 6, "rtol": 1e-8},
      "output": {"path": "out.csv", "format": "csv"},
      "seed": 0,
      "tolerance": 1e-6
    }
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, PreconditionError
from .holonomy import IntegratorConfig
from .matrix import MAX_SIZE, Signature, matrix_from_json
from .sampling import flat_partner, random_cone, rng_for
from .surface import CurveSpec, QuadratureConfig

U64_MAX = 2 ** 64 - 1
DEFAULT_TOLERANCE = 1e-6
FORMATS = ("json", "csv")

# Stream ids keep the X and Y draws independent under one seed.
_X_STREAM, _Y_STREAM = 1, 2

_TOP_KEYS = {"signature", "X", "Y", "curve", "sweep", "integrator", "quadrature", "output",
             "seed", "tolerance", "theta_grid"}


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= U64_MAX:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_tolerance(tol) -> float:
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        raise ConfigError(f"tolerance must be a number, got {tol!r}") from None
    if not np.isfinite(tol) or tol <= 0:
        raise ConfigError(f"tolerance must be positive and finite, got {tol!r}")
    return tol


def _parse_signature(obj) -> Signature:
    if isinstance(obj, dict):
        obj = [obj.get("n"), obj.get("m")]
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ConfigError(f"signature must be [n, m] or {{\"n\": n, \"m\": m}}, got {obj!r}")
    try:
        sig = Signature(*obj)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if sig.size > MAX_SIZE:
        raise ConfigError(f"n + m = {sig.size} exceeds the supported maximum of {MAX_SIZE}")
    return sig


def _single_key(spec: dict, name: str) -> str:
    if len(spec) != 1:
        raise ConfigError(f"{name} spec must have exactly one variant, got keys {sorted(spec)}")
    return next(iter(spec))


def _load_matrix_file(path, base: Path | None, name: str) -> np.ndarray:
    p = Path(path)
    if base is not None and not p.is_absolute():
        p = base / p
    if not p.is_file():
        raise ConfigError(f"{name} file {str(p)!r} does not exist")
    try:
        return matrix_from_json(json.loads(p.read_text(encoding="utf-8")))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{name} file {str(p)!r}: {exc}") from None


def _random_cone_spec(body, sig: Signature, seed: int, stream: int, name: str) -> np.ndarray:
    if not isinstance(body, dict):
        raise ConfigError(f"{name}.random_cone must be an object")
    unknown = set(body) - {"lambda", "seed"}
    if unknown:
        raise ConfigError(f"{name}.random_cone has unknown keys {sorted(unknown)}")
    lam = body.get("lambda")
    if lam is not None:
        lam = float(lam)
        if not np.isfinite(lam) or lam <= 0:
            raise ConfigError(f"{name}.random_cone.lambda must be positive, got {lam!r}")
    if "seed" in body:
        rng = rng_for(check_seed(body["seed"]))
    else:
        rng = rng_for(seed, stream)
    if sig.n > sig.m:
        raise ConfigError(f"the cone is empty for n = {sig.n} > m = {sig.m}")
    return random_cone(rng, sig.m, sig.n, lam)


def _explicit(spec, shape, name) -> np.ndarray:
    try:
        M = matrix_from_json(spec)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if M.shape != shape:
        raise ConfigError(f"{name} must be {shape[0]}x{shape[1]} for this signature, got {M.shape}")
    return M


def _parse_x(spec, sig: Signature, seed: int, base) -> np.ndarray:
    shape = (sig.m, sig.n)
    if not isinstance(spec, dict):
        raise ConfigError("X must be a matrix object, {\"random_cone\": ...} or {\"file\": path}")
    if "rows" in spec:
        return _explicit(spec, shape, "X")
    key = _single_key(spec, "X")
    if key == "random_cone":
        return _random_cone_spec(spec[key], sig, seed, _X_STREAM, "X")
    if key == "file":
        M = _load_matrix_file(spec[key], base, "X")
        if M.shape != shape:
            raise ConfigError(f"X must be {shape[0]}x{shape[1]}, got {M.shape}")
        return M
    raise ConfigError(f"unknown X variant {key!r}")


def _parse_y(spec, X: np.ndarray, sig: Signature, seed: int, base) -> np.ndarray:
    shape = X.shape
    if spec == "iX":
        return 1j * X
    if isinstance(spec, str):
        raise ConfigError(f"unknown Y shorthand {spec!r}; only \"iX\" is recognised")
    if not isinstance(spec, dict):
        raise ConfigError("Y must be \"iX\", a matrix object or a single-variant object")
    if "rows" in spec:
        return _explicit(spec, shape, "Y")
    key = _single_key(spec, "Y")
    body = spec[key]
    if key == "random_cone":
        return _random_cone_spec(body, sig, seed, _Y_STREAM, "Y")
    if key == "file":
        M = _load_matrix_file(body, base, "Y")
        if M.shape != shape:
            raise ConfigError(f"Y must be {shape[0]}x{shape[1]}, got {M.shape}")
        return M
    if key == "flat_partner":
        if not isinstance(body, dict) or set(body) - {"mu", "lambda", "seed"}:
            raise ConfigError("Y.flat_partner takes an object with optional mu, lambda, seed")
        if sig.m < 2 * sig.n:
            raise ConfigError(f"a flat partner needs m >= 2n, got ({sig.n}, {sig.m})")
        rng = rng_for(check_seed(body["seed"])) if "seed" in body else rng_for(seed, _Y_STREAM)
        mu = None if body.get("mu") is None else float(body["mu"])
        lam = None if body.get("lambda") is None else float(body["lambda"])
        if lam is not None and lam <= 0:
            raise ConfigError("Y.flat_partner.lambda must be positive")
        return flat_partner(rng, X, mu, lam)
    raise ConfigError(f"unknown Y variant {key!r}")


def _parse_curve(obj, where: str) -> CurveSpec:
    try:
        return CurveSpec.from_json(obj)
    except PreconditionError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}, got {self.format!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment: concrete matrices, curves and settings."""

    sig: Signature
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    curves: tuple[CurveSpec, ...]
    is_sweep: bool
    integrator: IntegratorConfig
    quadrature: QuadratureConfig
    output: OutputSpec
    seed: int
    tolerance: float
    theta_grid: int = 32
    raw: dict = field(default_factory=dict, repr=False)

    def sha256(self) -> str:
        """Hash of the canonical JSON of the effective configuration."""
        eff = dict(self.raw)
        eff["seed"] = self.seed
        eff["tolerance"] = self.tolerance
        eff.pop("output", None)
        blob = json.dumps(eff, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def parse_config(obj: dict, *, base_dir: str | os.PathLike | None = None, seed=None,
                 tolerance=None, need_curves: bool = False, need_y: bool = True) -> ExperimentConfig:
    """Validate a decoded JSON object; ``seed`` and ``tolerance`` override the file."""
    if not isinstance(obj, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    base = Path(base_dir) if base_dir is not None else None
    if "signature" not in obj:
        raise ConfigError("configuration needs a signature")
    sig = _parse_signature(obj["signature"])
    seed = check_seed(obj.get("seed", 0) if seed is None else seed)
    tol = check_tolerance(obj.get("tolerance", DEFAULT_TOLERANCE) if tolerance is None else tolerance)

    if "X" not in obj:
        raise ConfigError("configuration needs an X spec")
    X = _parse_x(obj["X"], sig, seed, base)
    if "Y" in obj:
        Y = _parse_y(obj["Y"], X, sig, seed, base)
    elif need_y:
        raise ConfigError("configuration needs a Y spec")
    else:
        Y = 1j * X

    if "curve" in obj and "sweep" in obj:
        raise ConfigError("give either curve or sweep, not both")
    is_sweep = "sweep" in obj
    if is_sweep:
        if not isinstance(obj["sweep"], list):
            raise ConfigError("sweep must be a list of curves")
        curves = tuple(_parse_curve(c, f"sweep[{i}]") for i, c in enumerate(obj["sweep"]))
    elif "curve" in obj:
        curves = (_parse_curve(obj["curve"], "curve"),)
    else:
        curves = ()
    if need_curves and not curves:
        raise ConfigError("the sweep is empty" if is_sweep else "configuration needs a curve or sweep")

    try:
        integ = IntegratorConfig.from_json(obj.get("integrator", {}))
        quad = QuadratureConfig.from_json(obj.get("quadrature", {}))
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None

    out = obj.get("output", {})
    if not isinstance(out, dict) or set(out) - {"path", "format"}:
        raise ConfigError("output must be an object with optional path and format")
    output = OutputSpec(out.get("path"), out.get("format", "json"))

    grid = obj.get("theta_grid", 32)
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 1:
        raise ConfigError(f"theta_grid must be a positive integer, got {grid!r}")

    return ExperimentConfig(sig, X, Y, curves, is_sweep, integ, quad, output, seed, tol, grid, obj)


def load_config(path, **kwargs) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {str(p)!r} does not exist")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed JSON in {str(p)!r}: {exc}") from None
    return parse_config(obj, base_dir=p.parent, **kwargs)
