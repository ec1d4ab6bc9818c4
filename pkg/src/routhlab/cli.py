"""Command line driver.

Exit codes: 0 on success (and on passing verifications), 1 when a
verification ran to completion and failed, 2 for configuration or
expression problems, 3 when a numerical procedure could not complete
(domain exits, singular systems, unreachable energy levels, step failures).
"""

from __future__ import annotations

import json
import os

import click
import numpy as np

from .config import build_model, build_split, initial_state, load_config, time_settings
from .errors import (
    ConfigError,
    InvarianceError,
    ParseError,
    PreconditionError,
    RouthlabError,
)
from .fileio import curves_svg, write_report_json, write_trajectory_csv
from .homogenize import jacobi_finsler, quasi_definite_check, randers_closed_form
from .lagrangian import MagneticLagrangian, energy, integrate_el, strong_convexity_check
from .routh import check_invariance, momentum, reconstruct, routhian, verify_reduction
from .spray import integrate_geodesic
from .verify import check_geodesic_equivalence

__all__ = ["main"]


def _run(body) -> None:
    try:
        code = body()
    except (ParseError, ConfigError, InvarianceError) as exc:
        click.echo(f"config error: {exc}", err=True)
        raise SystemExit(2) from exc
    except RouthlabError as exc:
        click.echo(f"numerical failure ({type(exc).__name__}): {exc}", err=True)
        raise SystemExit(3) from exc
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        raise SystemExit(2) from exc
    raise SystemExit(int(code or 0))


def _common(fn):
    fn = click.option(
        "--config",
        "config_path",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="JSON run configuration.",
    )(fn)
    fn = click.option(
        "--out",
        "out_dir",
        default=".",
        type=click.Path(file_okay=False),
        help="Directory for output files.",
    )(fn)
    fn = click.option(
        "--seed", default=0, type=int, help="Seed for sampled checks.", show_default=True
    )(fn)
    return fn


def _outpath(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _need_energy(e):
    if e is None:
        raise ConfigError("this command needs an 'energy' value in the config")
    return e


@click.group()
def main() -> None:
    """Numerical toolkit for cyclic reduction and energy-level metrics."""


@main.command("describe")
@_common
def cmd_describe(config_path, out_dir, seed):
    """Print the configured model and pointwise diagnostics as JSON."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        payload = {"model": model.describe()}
        if "initial" in cfg:
            x0, v0, e = initial_state(cfg, model)
            ok, mineig = strong_convexity_check(model, x0, v0)
            payload["initial"] = {
                "x": list(x0),
                "v": list(v0),
                "energy": energy(model, x0, v0),
                "strongly_convex": ok,
                "hessian_min_eigenvalue": mineig,
            }
            split = build_split(cfg, model.dim)
            if split is not None:
                payload["initial"]["cyclic_momentum"] = list(
                    momentum(model, split, x0, v0)
                )
            if e is not None:
                payload["initial"]["target_energy"] = e
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return 0

    _run(body)


@main.command("integrate-el")
@_common
def cmd_integrate_el(config_path, out_dir, seed):
    """Integrate the Euler-Lagrange flow and write the sampled trajectory."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        x0, v0, _ = initial_state(cfg, model)
        t_end, samples, tol = time_settings(cfg)
        traj = integrate_el(model, x0, v0, t_end, tol=tol, samples=samples)
        path = _outpath(out_dir, "el_trajectory.csv")
        write_trajectory_csv(path, traj)
        drift = float(np.max(np.abs(traj.energy_log - traj.energy_log[0])))
        click.echo(f"wrote {path}")
        click.echo(
            f"steps={traj.stats.steps} rejected={traj.stats.rejected} "
            f"energy drift={drift:.3e}"
        )
        return 0

    _run(body)


@main.command("finslerize")
@_common
def cmd_finslerize(config_path, out_dir, seed):
    """Evaluate the energy-level metric at the initial state."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        x0, v0, e = initial_state(cfg, model)
        e = _need_energy(e)
        metric = jacobi_finsler(model, e)
        value = metric.value(x0, v0)
        scale = metric.energy_scale(x0, v0)
        ok, mineig = quasi_definite_check(metric, x0, v0)
        payload = {
            "energy": e,
            "value": value,
            "scale": scale,
            "quasi_definite": {"positive": ok, "min_eigenvalue": mineig},
            "metric": metric.describe(),
        }
        if isinstance(model, MagneticLagrangian):
            closed = randers_closed_form(model, e)
            payload["closed_form_gap"] = abs(closed.value(x0, v0) - value)
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return 0

    _run(body)


@main.command("geodesic")
@_common
def cmd_geodesic(config_path, out_dir, seed):
    """Integrate a geodesic of the energy-level metric and write it as CSV."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        x0, v0, e = initial_state(cfg, model)
        e = _need_energy(e)
        gcfg = cfg.get("geodesic", {})
        if not isinstance(gcfg, dict):
            raise ConfigError("'geodesic' must be an object")
        t_end, samples, tol = time_settings(cfg, require_t_end="t_end" not in gcfg)
        t_end = float(gcfg.get("t_end", t_end))
        metric = jacobi_finsler(model, e)
        level = metric.level_jet if gcfg.get("level", False) else None
        traj = integrate_geodesic(
            metric,
            x0,
            v0,
            t_end,
            tol=tol,
            samples=samples,
            level=level,
            unit_speed=bool(gcfg.get("unit_speed", True)),
        )
        path = _outpath(out_dir, "geodesic_trajectory.csv")
        write_trajectory_csv(path, traj)
        drift = float(np.max(np.abs(traj.energy_log - traj.energy_log[0])))
        click.echo(f"wrote {path}")
        click.echo(
            f"steps={traj.stats.steps} rejected={traj.stats.rejected} "
            f"speed drift={drift:.3e}"
        )
        return 0

    _run(body)


@main.command("verify")
@_common
def cmd_verify(config_path, out_dir, seed):
    """Check that the energy-level geodesics reproduce the Lagrangian flow."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        x0, v0, e = initial_state(cfg, model)
        e = _need_energy(e)
        t_end, samples, tol = time_settings(cfg)
        vcfg = cfg.get("verify", {})
        if not isinstance(vcfg, dict):
            raise ConfigError("'verify' must be an object")
        try:
            report = check_geodesic_equivalence(
                model,
                e,
                x0,
                v0,
                t_end,
                tol=tol,
                samples=samples,
                pointset_tol=float(vcfg.get("pointset_tol", 1e-6)),
                pointwise_tol=float(vcfg.get("pointwise_tol", 1e-6)),
                drift_tol=float(vcfg.get("drift_tol", 1e-8)),
            )
        except PreconditionError as exc:
            click.echo(f"[FAIL] geodesic equivalence: {exc}")
            return 1
        path = _outpath(out_dir, "verify_report.json")
        write_report_json(path, report, seed=seed, config=os.path.basename(config_path))
        click.echo(report.summary())
        click.echo(f"wrote {path}")
        return 0 if report.overall else 1

    _run(body)


@main.command("routh-reduce")
@_common
def cmd_routh_reduce(config_path, out_dir, seed):
    """Reduce the declared cyclic coordinates and verify the round trip."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        split = build_split(cfg, model.dim)
        if split is None:
            raise ConfigError("routh-reduce needs a 'cyclic' list of 1-based indices")
        x0, v0, _ = initial_state(cfg, model)
        t_end, samples, tol = time_settings(cfg)
        check_invariance(model, split, ref_x=x0, seed=seed)
        mu_cfg = cfg.get("momentum")
        mu = (
            momentum(model, split, x0, v0)
            if mu_cfg is None
            else np.asarray(mu_cfg, dtype=float)
        )
        report = verify_reduction(
            model, split, mu, x0, v0, t_end, tol=tol, samples=samples
        )
        cyc = split.cyc_idx
        shp = split.shape_idx
        reduced_model = routhian(model, split, mu, guess=v0[cyc], verify=False)
        reduced_traj = integrate_el(
            reduced_model, x0[shp], v0[shp], t_end, tol=tol, samples=samples
        )
        full = reconstruct(model, split, mu, reduced_traj, cyclic_start=x0[cyc])
        csv_path = _outpath(out_dir, "reconstructed_trajectory.csv")
        write_trajectory_csv(csv_path, full)
        report_path = _outpath(out_dir, "reduction_report.json")
        write_report_json(
            report_path, report, seed=seed, config=os.path.basename(config_path)
        )
        click.echo(report.summary())
        click.echo(f"wrote {csv_path}")
        click.echo(f"wrote {report_path}")
        return 0 if report.overall else 1

    _run(body)


@main.command("plot")
@_common
def cmd_plot(config_path, out_dir, seed):
    """Draw the Lagrangian flow (and level-metric geodesic) as an SVG."""

    def body():
        cfg = load_config(config_path)
        model = build_model(cfg)
        if model.dim != 2:
            raise ConfigError("plot requires a 2-dimensional model")
        x0, v0, e = initial_state(cfg, model)
        t_end, samples, tol = time_settings(cfg)
        traj = integrate_el(model, x0, v0, t_end, tol=tol, samples=samples)
        curves = [
            {"points": traj.positions, "label": "euler-lagrange", "color": "#1f6feb"}
        ]
        if e is not None:
            metric = jacobi_finsler(model, e)
            lengths = np.array(
                [
                    metric.value(traj.positions[i], traj.velocities[i])
                    for i in range(samples)
                ]
            )
            arc = integrate_geodesic(
                metric,
                x0,
                v0,
                float(np.trapezoid(lengths, traj.times)),
                tol=tol,
                samples=samples,
                unit_speed=True,
            )
            curves.append(
                {
                    "points": arc.positions,
                    "label": "level-metric geodesic",
                    "color": "#d1242f",
                    "dash": "6,4",
                }
            )
        pcfg = cfg.get("plot", {})
        show_disk = bool(pcfg.get("unit_disk", False)) if isinstance(pcfg, dict) else False
        path = _outpath(out_dir, "trajectories.svg")
        curves_svg(path, curves, show_unit_disk=show_disk, title="configured flows")
        click.echo(f"wrote {path}")
        return 0

    _run(body)


if __name__ == "__main__":
    main()
