"""Command-line front end: sweeps, solver validation, fitting, servo export.

All outputs are written atomically (temp file + rename) with deterministic
formatting: floats are rendered with their shortest round-trip decimal, so
identical inputs give byte-identical files.

Exit codes: 0 success, 1 validation/convergence/fit failure, 2 usage
error, 3 IO or parse error.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import click

from . import calibration, capacitance, plate_fd
from .config import ConfigError, DeviceConfig, load_config
from .servo import servo_angle

# cmd_validate pass thresholds, matched to the solver's design targets.
VALIDATE_MAX_REL_ERROR = 0.01
VALIDATE_MIN_ORDER = 1.8
VALIDATE_MIN_R2 = 1.0 - 1e-9


class IOFailure(click.ClickException):
    exit_code = 3


class ParseFailure(click.ClickException):
    exit_code = 3


class CheckFailure(click.ClickException):
    exit_code = 1


def _atomic_write(path: str | Path, text: str) -> None:
    """Write text to path via a temp file and atomic rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "w", newline="") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def _echo(ctx: click.Context, message: str) -> None:
    if not ctx.obj["quiet"]:
        click.echo(message)


def _config(ctx: click.Context) -> DeviceConfig:
    return ctx.obj["config"]


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Device configuration JSON (bundled default if omitted).")
@click.option("--quiet", is_flag=True, help="Suppress informational output.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, quiet: bool) -> None:
    """Touch-mode capacitive pressure sensor toolkit."""
    # Config is validated up front so no command starts work on a bad one.
    try:
        cfg = load_config(config_path)
    except OSError as exc:
        raise IOFailure(f"cannot read config: {exc}") from exc
    except ConfigError as exc:
        raise ParseFailure(f"invalid config: {exc}") from exc
    ctx.obj = {"config": cfg, "quiet": quiet}


@main.command()
@click.option("--p-start", type=float, default=0.0, show_default=True,
              help="Sweep start pressure, Pa.")
@click.option("--p-end", type=float, default=60e3, show_default=True,
              help="Sweep end pressure, Pa.")
@click.option("--steps", type=int, default=61, show_default=True,
              help="Number of sample points (>= 2).")
@click.option("--profile", default="default", show_default=True)
@click.option("--output", type=click.Path(), default="cp_sweep.csv",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.pass_context
def sweep(ctx: click.Context, p_start: float, p_end: float, steps: int,
          profile: str, output: str, fmt: str) -> None:
    """Sample the capacitance-pressure curve and export plot-ready data.

    CSV output also writes a JSON sidecar (same stem, .json suffix) with
    the geometry and thresholds embedded.
    """
    if steps < 2:
        raise click.UsageError("--steps must be >= 2")
    if not p_start < p_end:
        raise click.UsageError("need --p-start < --p-end")
    if p_start < 0:
        raise click.UsageError("--p-start must be >= 0")
    cfg = _config(ctx)
    try:
        geom = cfg.geometry(profile)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    pressures = [p_start + (p_end - p_start) * i / (steps - 1)
                 for i in range(steps)]
    try:
        curve = capacitance.sweep_cp_curve(
            geom, pressures, thresholds=cfg.thresholds, geometry_id=profile,
            rel_tol=cfg.solver.quadrature_rel_tol)
    except (ValueError, capacitance.SweepPointError) as exc:
        raise CheckFailure(f"sweep failed: {exc}") from exc

    if fmt == "json":
        _atomic_write(output, curve.to_json(geom, cfg.thresholds))
    else:
        _atomic_write(output, curve.to_csv())
        sidecar = Path(output).with_suffix(".json")
        _atomic_write(sidecar, curve.to_json(geom, cfg.thresholds))
        _echo(ctx, f"sidecar: {sidecar}")
    modes = sorted({pt.mode.name.lower() for pt in curve.points})
    _echo(ctx, f"wrote {len(curve.points)} points to {output} "
               f"(modes: {', '.join(modes)})")


@main.command()
@click.option("--nodes", "node_counts", type=int, multiple=True,
              help="Grid node counts for the convergence study "
                   "(default 51 101 201).")
@click.option("--profile", default="fem_scaled", show_default=True)
@click.option("--pressure", type=float, default=10e3, show_default=True,
              help="Load pressure for the convergence study, Pa.")
@click.pass_context
def validate(ctx: click.Context, node_counts: tuple[int, ...], profile: str,
             pressure: float) -> None:
    """Check the plate solver against the analytic center deflection.

    Runs a grid convergence study plus a deflection-pressure linearity
    check and exits nonzero if any threshold is missed.
    """
    counts = sorted(node_counts) if node_counts else [51, 101, 201]
    cfg = _config(ctx)
    try:
        geom = cfg.geometry(profile)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    try:
        rows = plate_fd.convergence_study(geom, pressure, counts)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    orders = plate_fd.observed_orders(rows)

    _echo(ctx, f"{'nodes':>6}  {'center deflection (m)':>22}  {'rel error':>10}")
    for row in rows:
        _echo(ctx, f"{row.node_count:>6}  {row.center_deflection:>22.15e}  "
                   f"{row.relative_error:>10.3e}")
    for (a, b), order in zip(zip(counts, counts[1:]), orders):
        _echo(ctx, f"order {a}->{b}: {order:.3f}")

    p_lo, p_hi = 2e3, 10e3
    lin_pressures = [p_lo + (p_hi - p_lo) * i / 4 for i in range(5)]
    lin = plate_fd.linearity_check(
        geom, lin_pressures, plate_fd.RadialGrid(counts[-1], geom.radius))
    _echo(ctx, f"linearity R^2 over {p_lo:.0f}-{p_hi:.0f} Pa: "
               f"{lin.r_squared:.12f}")

    failures = []
    if rows[-1].relative_error > VALIDATE_MAX_REL_ERROR:
        failures.append(
            f"finest-grid error {rows[-1].relative_error:.3e} "
            f"> {VALIDATE_MAX_REL_ERROR}")
    for order in orders:
        if order < VALIDATE_MIN_ORDER:
            failures.append(f"convergence order {order:.3f} < {VALIDATE_MIN_ORDER}")
    if lin.r_squared < VALIDATE_MIN_R2:
        failures.append(f"linearity R^2 {lin.r_squared} < {VALIDATE_MIN_R2}")
    if failures:
        raise CheckFailure("validation failed: " + "; ".join(failures))
    _echo(ctx, "PASS")


@main.command()
@click.argument("data", type=click.Path())
@click.option("--free", "free_params", multiple=True, default=("gap",),
              show_default=True,
              help="Parameters to fit (repeatable).")
@click.option("--profile", default="default", show_default=True)
@click.option("--output", type=click.Path(), default="fit.json",
              show_default=True)
@click.pass_context
def fit(ctx: click.Context, data: str, free_params: tuple[str, ...],
        profile: str, output: str) -> None:
    """Fit model parameters to a measured pressure-capacitance CSV.

    Writes the fit result JSON plus a residual CSV sidecar and echoes a
    mode-segmentation summary of the data.  A non-converged fit still
    writes its best point but exits nonzero.
    """
    for name in free_params:
        if name not in calibration.FIT_PARAM_NAMES:
            raise click.UsageError(
                f"unknown fit parameter {name!r}; "
                f"choose from {', '.join(calibration.FIT_PARAM_NAMES)}")
    cfg = _config(ctx)
    try:
        geom = cfg.geometry(profile)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    try:
        series = calibration.MeasuredSeries.from_csv(_read_text(data), meta=data)
    except ValueError as exc:
        raise ParseFailure(f"{data}: {exc}") from exc

    try:
        result = calibration.fit_model(series, geom, list(free_params),
                                       cfg.solver.fit_bounds)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc

    _atomic_write(output, result.to_json())
    fitted_geom, offset = calibration.apply_params(geom, result.params)
    model = calibration.model_capacitances(fitted_geom, series.abscissa) + offset
    lines = ["pressure_pa,capacitance_f,model_f,residual_f"]
    for p, c, m in zip(series.abscissa, series.capacitance, model):
        lines.append(f"{float(p)!r},{float(c)!r},{float(m)!r},{float(m - c)!r}")
    residual_path = Path(output).with_suffix(".residuals.csv")
    _atomic_write(residual_path, "\n".join(lines) + "\n")

    for name, value in result.params.items():
        _echo(ctx, f"{name} = {value!r}")
    _echo(ctx, f"residual RMS = {result.residual_norm:.6e} F "
               f"after {result.iterations} iterations")
    try:
        seg = calibration.segment_modes(series)
        flag = " (low confidence)" if seg.low_confidence else ""
        bounds = ", ".join(f"{b / 1e3:.1f} kPa" for b in seg.boundaries)
        _echo(ctx, f"mode boundaries: {bounds}{flag}")
    except ValueError as exc:
        _echo(ctx, f"segmentation skipped: {exc}")
    if not result.converged:
        raise CheckFailure(
            f"fit did not converge after {result.iterations} iterations; "
            f"best-so-far written to {output}")
    _echo(ctx, f"wrote {output} and {residual_path}")


@main.command()
@click.argument("pressures", type=float, nargs=-1)
@click.option("--data", "data_path", type=click.Path(), default=None,
              help="CSV with a pressure_pa column (e.g. sweep output).")
@click.option("--profile", default="default", show_default=True)
@click.option("--output", type=click.Path(), default="servo.csv",
              show_default=True)
@click.pass_context
def servo(ctx: click.Context, pressures: tuple[float, ...],
          data_path: str | None, profile: str, output: str) -> None:
    """Map pressures to servo angles through the calibrated model.

    Takes pressures (Pa) as arguments or a CSV via --data and emits a
    (pressure, capacitance, angle) CSV.
    """
    if data_path is None and not pressures:
        raise click.UsageError("give pressures as arguments or --data CSV")
    if data_path is not None and pressures:
        raise click.UsageError("give either pressures or --data, not both")
    cfg = _config(ctx)
    try:
        geom = cfg.geometry(profile)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc

    if data_path is not None:
        p_list = _pressure_column(_read_text(data_path), data_path)
    else:
        p_list = list(pressures)
    if any(p < 0 for p in p_list):
        raise click.UsageError("pressures must be >= 0")

    lines = ["pressure_pa,capacitance_f,angle_deg"]
    for p in p_list:
        try:
            c = capacitance.capacitance_at(geom, p,
                                           rel_tol=cfg.solver.quadrature_rel_tol)
        except ValueError as exc:
            raise CheckFailure(f"P = {p} Pa: {exc}") from exc
        angle = servo_angle(cfg.servo, p)
        lines.append(f"{float(p)!r},{float(c)!r},{float(angle)!r}")
    _atomic_write(output, "\n".join(lines) + "\n")
    _echo(ctx, f"wrote {len(p_list)} rows to {output}")


def _pressure_column(text: str, where: str) -> list[float]:
    """Pressures from the pressure_pa column of a headed CSV."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseFailure(f"{where}: empty CSV")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if "pressure_pa" not in header:
        raise ParseFailure(f"{where}: no pressure_pa column in {lines[0]!r}")
    col = header.index("pressure_pa")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        try:
            out.append(float(fields[col]))
        except (IndexError, ValueError) as exc:
            raise ParseFailure(f"{where}: line {lineno}: {exc}") from None
    return out


@main.command()
@click.argument("data", type=click.Path())
@click.option("--output", type=click.Path(), default="modes.json",
              show_default=True)
@click.pass_context
def modes(ctx: click.Context, data: str, output: str) -> None:
    """Segment a measured pressure-capacitance CSV into four linear modes."""
    try:
        series = calibration.MeasuredSeries.from_csv(_read_text(data), meta=data)
    except ValueError as exc:
        raise ParseFailure(f"{data}: {exc}") from exc
    try:
        seg = calibration.segment_modes(series)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    _atomic_write(output, seg.to_json())
    bounds = ", ".join(f"{b!r}" for b in seg.boundaries)
    _echo(ctx, f"boundaries (Pa): {bounds}")
    _echo(ctx, f"segment R^2: "
               + ", ".join(f"{r:.4f}" for r in seg.r_squared))
    if seg.low_confidence:
        _echo(ctx, "warning: boundary pinned to the search edge; "
                   "data may contain fewer than four regimes")
    _echo(ctx, f"wrote {output}")


if __name__ == "__main__":
    main()
