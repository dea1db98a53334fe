"""Command-line front end: figure tables, single solves and finite-ring checks.

Every command writes CSV (default) or JSON.  CSV output starts with one
comment line carrying the package version, the config digest and the
reference constants of the infinite-ring optimum.  Exit codes: 0 ok,
2 domain error, 3 numerical failure.
"""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager

import click
import numpy as np

from . import __version__
from .bethe import NumericalError, scan_delta, solve_density, solve_for_y
from .concurrence import random_density_matrix, variational_minimize, wootters_concurrence
from .config import RunConfig, load_config
from .exact_ring import EigensolverError, RingSpec, cmax_details
from .model import OW_B, OW_CONCURRENCE, OW_Y, DomainError, curve_point_from_delta, ow_concurrence
from .perturbation import (
    SeriesError,
    SeriesSurface,
    contour_data,
    dE_deps_fixed_y,
    fixed_y_sign_change,
    fixed_y_slope_closed,
)

EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return "" if value is None else str(value)


def _json_value(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return float(format(v, ".12g")) if math.isfinite(v) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def header_line(config: RunConfig) -> str:
    return (
        f"# qubit_rings {__version__} config={config.digest()} "
        f"ow_concurrence={OW_CONCURRENCE} ow_b={OW_B} ow_y={OW_Y}"
    )


def render(columns: list[str], rows: list[list], config: RunConfig) -> str:
    if config.output_format == "json":
        meta = {
            "version": __version__,
            "config": config.digest(),
            "ow_concurrence": OW_CONCURRENCE,
            "ow_b": OW_B,
            "ow_y": OW_Y,
        }
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps({"meta": meta, "columns": columns, "rows": records}, indent=1) + "\n"
    lines = [header_line(config), ",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@contextmanager
def exit_codes():
    """Map library exceptions onto the documented exit codes."""
    try:
        yield
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)
    except (NumericalError, EigensolverError, SeriesError, FloatingPointError, ArithmeticError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


def _emit(ctx, columns, rows):
    text = render(columns, rows, ctx.obj["config"])
    out = ctx.obj["out"]
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
@click.option("--order", type=int, default=None, help="Gauss-Legendre order of the Nystrom solve.")
@click.option("--series-order", type=int, default=None, help="Truncation order of the eps series.")
@click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write to a file instead of stdout.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON config; defaults to $QUBIT_RINGS_CONFIG.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, order, series_order, output_format, out, config_path):
    """Maximal nearest-neighbour concurrence of qubit rings."""
    with exit_codes():
        config = load_config(config_path).replace(
            quadrature_order=order, series_order=series_order, output_format=output_format
        )
    ctx.obj = {"config": config, "out": out}


@main.command()
@click.option("--delta", type=float, required=True, help="Anisotropy, must be < -1.")
@click.option("--b", "b", type=float, default=None, help="Integration limit in [0, pi].")
@click.option("--y", "y", type=float, default=None, help="Target magnetisation in [0, 1].")
@click.pass_context
def solve(ctx, delta, b, y):
    """Solve the density equation at one (delta, b) or (delta, y)."""
    config = ctx.obj["config"]
    with exit_codes():
        if (b is None) == (y is None):
            raise DomainError("give exactly one of --b and --y")
        if not delta < -1.0:
            raise DomainError(f"delta must be < -1, got {delta}")
        point = curve_point_from_delta(delta)
        if b is not None:
            sol = solve_density(point, b, config.quadrature_order)
        else:
            sol = solve_for_y(point, y, config.quadrature_order)
            if abs(sol.y - y) > config.tolerances["y_root"]:
                raise NumericalError(f"located b misses y by {abs(sol.y - y):.3e}")
        if sol.residual > config.tolerances["residual"]:
            raise NumericalError(f"Nystrom residual {sol.residual:.3e}")
    rows = [
        ["delta", None, point.delta],
        ["s", None, point.s],
        ["b", None, sol.b],
        ["y", None, sol.y],
        ["f", None, sol.f],
        ["e_gs", None, sol.e_gs],
    ]
    rows += [["R", a, r] for a, r in zip(sol.nodes, sol.R_values)]
    _emit(ctx, ["quantity", "alpha", "value"], rows)


@main.command()
@click.option("--delta-min", type=float, default=-100.0, show_default=True)
@click.option("--delta-max", type=float, default=-1.5, show_default=True)
@click.option("--n-points", type=int, default=30, show_default=True)
@click.pass_context
def fig2(ctx, delta_min, delta_max, n_points):
    """-E_GS optimised over b against delta, log-spaced in |delta|."""
    config = ctx.obj["config"]
    with exit_codes():
        if not delta_min < delta_max < -1.0:
            raise DomainError("need delta_min < delta_max < -1")
        if n_points < 2:
            raise DomainError("n_points must be at least 2")
        deltas = -np.geomspace(-delta_min, -delta_max, n_points)
        scan = scan_delta(deltas, config.quadrature_order)
        if all(row.error for row in scan):
            raise NumericalError("every scan point failed")
    rows = [[r.delta, r.minus_egs, OW_CONCURRENCE] for r in scan]
    _emit(ctx, ["delta", "minus_egs", "ow_limit"], rows)


@main.command()
@click.option("--n-points", type=int, default=64, show_default=True)
@click.pass_context
def fig3(ctx, n_points):
    """dE_GS/d eps at eps = 0 and fixed y on a grid of b in (0, pi)."""
    with exit_codes():
        if n_points < 2:
            raise DomainError("n_points must be at least 2")
        grid = np.linspace(0.0, math.pi, n_points + 2)[1:-1]
        root = fixed_y_sign_change()
        rows = [[b, dE_deps_fixed_y(b), fixed_y_slope_closed(b), root] for b in grid]
    _emit(ctx, ["b", "de_deps", "closed_form", "root"], rows)


@main.command()
@click.option("--n-b", type=int, default=33, show_default=True, help="b grid points on [0, pi].")
@click.option("--n-eps", type=int, default=20, show_default=True, help="eps grid points on [0, eps-max].")
@click.option("--eps-max", type=float, default=0.95, show_default=True)
@click.option("--y-lines", type=str, default="0.9,0.6,0.4,0.3,0.25,0.2,0.1", show_default=True,
              help="Comma-separated fixed-y lines for the eps optimum.")
@click.pass_context
def fig4(ctx, n_b, n_eps, eps_max, y_lines):
    """Order-K series surface: contour table, eps*(y) and the global optimum.

    Column ``kind`` is ``contour`` for grid points, ``eps_star`` for the
    minimising eps along a fixed-y line and ``optimum`` for the overall
    minimum.  ``trusted`` is false where the last series term exceeds the
    first.
    """
    config = ctx.obj["config"]
    with exit_codes():
        if not 0.0 < eps_max <= 1.0:
            raise DomainError(f"eps-max must lie in (0, 1], got {eps_max}")
        try:
            ys = [float(t) for t in y_lines.split(",") if t.strip()]
        except ValueError as exc:
            raise DomainError(f"cannot parse --y-lines: {exc}") from exc
        order = config.series_order
        b_grid = np.linspace(0.0, math.pi, n_b)
        eps_grid = np.linspace(0.0, eps_max, n_eps)
        rows = [
            ["contour", r.b, r.epsilon, r.y, r.e_gs, r.trusted]
            for r in contour_data(b_grid, eps_grid, order)
        ]
        surface = SeriesSurface(order)
        for y in ys:
            opt = surface.optimal_epsilon(y, eps_grid)
            rows.append(["eps_star", opt.b, opt.epsilon, opt.y, opt.e_gs, opt.trusted])
        opt = surface.global_optimum(eps_grid)
        rows.append(["optimum", opt.b, opt.epsilon, opt.y, opt.e_gs, opt.trusted])
    _emit(ctx, ["kind", "b", "epsilon", "y", "e_gs", "trusted"], rows)


@main.command("finite-ring")
@click.option("--n", "n_sites", type=int, required=True, help="Number of sites.")
@click.option("--p", "p_down", type=int, default=None, help="Number of down spins.")
@click.option("--all-p", is_flag=True, help="Scan p = 0 .. N/2.")
@click.pass_context
def finite_ring(ctx, n_sites, p_down, all_p):
    """C^max(N, p) from exact diagonalisation, with the closed-form comparison."""
    config = ctx.obj["config"]
    with exit_codes():
        if all_p == (p_down is not None):
            raise DomainError("give exactly one of --p and --all-p")
        ps = range(n_sites // 2 + 1) if all_p else [p_down]
        rows = []
        for p in ps:
            spec = RingSpec(n_sites, p)
            res = cmax_details(spec, check=False)
            if abs(res.concurrence - res.c_max) > config.tolerances["concurrence_match"]:
                raise EigensolverError(
                    f"Wootters concurrence {res.concurrence:.10f} differs from -E {res.c_max:.10f}"
                )
            q = min(p, n_sites - p)
            ow = ow_concurrence(n_sites, q) if n_sites - q >= 2 else None
            rows.append([n_sites, p, res.c_max, res.s_star, res.boundary, res.concurrence, ow])
    _emit(ctx, ["n", "p", "c_max", "s_star", "s_limit", "wootters", "ow_concurrence"], rows)


@main.command()
@click.option("--n-states", type=int, default=5, show_default=True)
@click.option("--restarts", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for states and restarts.")
@click.pass_context
def variational(ctx, n_states, restarts, seed):
    """Compare the variational concurrence with Wootters' formula on random states."""
    with exit_codes():
        rng = np.random.default_rng(seed)
        rows = []
        for i in range(n_states):
            rho = random_density_matrix(rng)
            rows.append([i, wootters_concurrence(rho), variational_minimize(rho, restarts, rng)])
    _emit(ctx, ["state", "wootters", "variational"], rows)


if __name__ == "__main__":
    main()
