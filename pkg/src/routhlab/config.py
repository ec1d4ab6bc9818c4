"""JSON run configurations: model construction and initial data.

A configuration file declares a Lagrangian family with coefficient data
(numbers, or expression strings in the position variables), optional
cyclic-coordinate indices (1-based, as in the variable names x1, x2, ...),
an energy level, initial data, and integration settings. Malformed or
inconsistent declarations raise :class:`ConfigError`; expression syntax
problems keep their precise :class:`ParseError` positions.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .expressions import parse_expression
from .homogenize import gauge_shift
from .lagrangian import (
    LagrangianModel,
    MagneticLagrangian,
    MechanicalLagrangian,
    PowerQuadraticLagrangian,
    parse_lagrangian,
    poincare_disk_lagrangian,
)
from .routh import CyclicSplit
from .verify import rescale_to_energy

__all__ = [
    "load_config",
    "build_model",
    "build_split",
    "initial_state",
    "time_settings",
]

_FAMILIES = ("simple", "magnetic", "power", "expression", "poincare_disk")


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be a JSON object")
    return cfg


def _require(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where} is missing required key {key!r}")
    return cfg[key]


def _scalar_entry(entry, dim: int):
    """A number stays a number; a string compiles to a position function."""
    if isinstance(entry, (int, float)):
        return float(entry)
    if isinstance(entry, str):
        expr = parse_expression(entry, dim=dim, allow_velocity=False)

        def fn(xs, _expr=expr):
            return _expr(xs, ())

        return fn
    raise ConfigError(f"coefficient entries must be numbers or strings, got {entry!r}")


def _matrix_spec(entries, dim: int):
    if not isinstance(entries, list) or len(entries) != dim:
        raise ConfigError(f"metric must be a {dim}x{dim} array of entries")
    cells = []
    any_expr = False
    for row in entries:
        if not isinstance(row, list) or len(row) != dim:
            raise ConfigError(f"metric must be a {dim}x{dim} array of entries")
        compiled = [_scalar_entry(c, dim) for c in row]
        any_expr = any_expr or any(callable(c) for c in compiled)
        cells.append(compiled)
    if not any_expr:
        return np.array(cells, dtype=float)

    def metric(xs):
        return [[c(xs) if callable(c) else c for c in row] for row in cells]

    return metric


def _vector_spec(entries, dim: int):
    if entries is None:
        return None
    if not isinstance(entries, list) or len(entries) != dim:
        raise ConfigError(f"one-form must be a list of {dim} entries")
    compiled = [_scalar_entry(c, dim) for c in entries]
    if not any(callable(c) for c in compiled):
        return np.array(compiled, dtype=float)

    def beta(xs):
        return [c(xs) if callable(c) else c for c in compiled]

    return beta


def _potential_spec(entry, dim: int):
    if entry is None:
        return None
    compiled = _scalar_entry(entry, dim)
    return compiled if callable(compiled) else float(compiled)


def _domain_spec(entry):
    if entry is None:
        return None
    if not isinstance(entry, dict) or len(entry) != 1:
        raise ConfigError("domain must be an object with exactly one of: ball, positive")
    if "ball" in entry:
        r = float(entry["ball"])
        if r <= 0:
            raise ConfigError("domain ball radius must be positive")
        return lambda x: float(x @ x) < r * r
    if "positive" in entry:
        idx = [int(i) - 1 for i in entry["positive"]]
        if any(i < 0 for i in idx):
            raise ConfigError("domain 'positive' uses 1-based coordinate indices")
        return lambda x: all(x[i] > 0.0 for i in idx)
    raise ConfigError(f"unknown domain kind {set(entry)!r}")


def build_model(cfg: dict) -> LagrangianModel:
    """Construct the configured Lagrangian, including any gauge shift."""
    spec = _require(cfg, "lagrangian")
    if not isinstance(spec, dict):
        raise ConfigError("'lagrangian' must be an object")
    family = _require(spec, "family", "lagrangian")
    if family not in _FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {_FAMILIES}")

    if family == "poincare_disk":
        model: LagrangianModel = poincare_disk_lagrangian()
    elif family == "expression":
        source = _require(spec, "source", "lagrangian")
        dim = spec.get("dim")
        model = parse_lagrangian(
            source, dim=dim, domain=_domain_spec(spec.get("domain"))
        )
    else:
        dim = int(_require(spec, "dim", "lagrangian"))
        if dim < 1:
            raise ConfigError("lagrangian dim must be at least 1")
        metric = _matrix_spec(_require(spec, "metric", "lagrangian"), dim)
        domain = _domain_spec(spec.get("domain"))
        if family == "power":
            degree = float(_require(spec, "degree", "lagrangian"))
            model = PowerQuadraticLagrangian(dim, metric, degree=degree, domain=domain)
        elif family == "simple":
            model = MechanicalLagrangian(
                dim, metric, potential=_potential_spec(spec.get("potential"), dim),
                domain=domain,
            )
        else:
            model = MagneticLagrangian(
                dim,
                metric,
                beta=_vector_spec(spec.get("beta"), dim),
                potential=_potential_spec(spec.get("potential"), dim),
                domain=domain,
            )

    gauge = spec.get("gauge")
    if gauge is not None:
        if not isinstance(gauge, str):
            raise ConfigError("'gauge' must be an expression string in x variables")
        model = gauge_shift(model, gauge)
    return model


def build_split(cfg: dict, dim: int) -> CyclicSplit | None:
    """Cyclic split from 1-based coordinate indices, or None if not declared."""
    cyclic = cfg.get("cyclic")
    if cyclic is None:
        return None
    if not isinstance(cyclic, list) or not cyclic:
        raise ConfigError("'cyclic' must be a non-empty list of 1-based indices")
    try:
        zero_based = [int(i) - 1 for i in cyclic]
        if any(i < 0 for i in zero_based):
            raise ValueError
        return CyclicSplit.of(dim, zero_based)
    except ValueError as exc:
        raise ConfigError(f"bad cyclic indices {cyclic!r} for dimension {dim}: {exc}") from exc


def initial_state(cfg: dict, L: LagrangianModel):
    """(x0, v0, e) from the config; applies the requested energy rescale.

    With ``initial.rescale`` true the velocity is scaled along its ray to
    put the state exactly on the configured energy level (which must then
    be present).
    """
    init = _require(cfg, "initial")
    if not isinstance(init, dict):
        raise ConfigError("'initial' must be an object")
    x0 = np.asarray(_require(init, "x", "initial"), dtype=float)
    v0 = np.asarray(_require(init, "v", "initial"), dtype=float)
    if x0.shape != (L.dim,) or v0.shape != (L.dim,):
        raise ConfigError(
            f"initial data must have dimension {L.dim}, "
            f"got x{list(x0.shape)} and v{list(v0.shape)}"
        )
    e = cfg.get("energy")
    e = None if e is None else float(e)
    if init.get("rescale", False):
        if e is None:
            raise ConfigError("initial.rescale needs an 'energy' value")
        v0 = rescale_to_energy(L, x0, v0, e)
    return x0, v0, e


def time_settings(cfg: dict, require_t_end: bool = True):
    """(t_end, samples, tol) integration settings with defaults."""
    tc = cfg.get("time", {})
    if not isinstance(tc, dict):
        raise ConfigError("'time' must be an object")
    t_end = tc.get("t_end")
    if t_end is None and require_t_end:
        raise ConfigError("time.t_end is required for integration commands")
    samples = int(tc.get("samples", 801))
    if samples < 2:
        raise ConfigError("time.samples must be at least 2")
    tol = float(tc.get("tol", 1e-10))
    return (None if t_end is None else float(t_end)), samples, tol
