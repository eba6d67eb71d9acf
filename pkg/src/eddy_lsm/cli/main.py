"""Main CLI application for eddy-current deposit imaging."""

from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import numpy as np
import typer
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from eddy_lsm.config.run import RunConfig, load_config, save_config
from eddy_lsm.config.scenarios import get_scenario, scenario_ids
from eddy_lsm.config.settings import SolverSettings, settings
from eddy_lsm.data.cache import cache_manager
from eddy_lsm.data.io import load_matrix, save_field, save_indicator, save_matrix, save_mesh, save_metrics, save_pgm
from eddy_lsm.exceptions import NumericalError
from eddy_lsm.models.results import IndicatorField, MultistaticMatrix, ReconstructionMetrics
from eddy_lsm.solvers.mesh_builder import mesh_summary
from eddy_lsm.solvers.pipeline import ReconstructionPipeline
from eddy_lsm.utils.logging import CONSOLE_FORMAT, setup_logging

app = typer.Typer(
    name="eddy-lsm",
    help="Eddy-current simulation and Linear Sampling Method imaging of deposits on tubes",
    add_completion=False,
    rich_markup_mode="rich",
)
console = Console()

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

CONFIG_SNAPSHOT = "config.json"


@app.callback()
def main(
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    cache_enabled: bool = typer.Option(True, "--cache/--no-cache", help="Enable/disable caching of incident fields"),
    log_file: Optional[Path] = typer.Option(None, "--log-file", help="Also log to this rotating file"),
):
    """Eddy-current LSM - locate conductive deposits from probe data."""
    log_level = "DEBUG" if debug else settings.logging.level
    setup_logging(
        log_level,
        log_file,
        sink=lambda msg: console.print(msg, end="", markup=False, highlight=False),
        console_format=CONSOLE_FORMAT,
    )

    settings.cache.enabled = cache_enabled

    if debug:
        logger.info(f"Debug mode enabled. Cache: {cache_enabled}")


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map failures to exit codes: 1 for invalid input, 2 for numerical failure."""
    try:
        yield
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        console.print(f"[bold red]Numerical error:[/bold red] {e}")
        raise typer.Exit(EXIT_NUMERICAL)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(f"Invalid input: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(EXIT_VALIDATION)


def _solver_settings(workers: Optional[int]) -> SolverSettings:
    if workers is None:
        return settings.solver
    if workers < 1:
        raise ValueError(f"--workers must be >= 1. Got: {workers}")
    return settings.solver.model_copy(update={"workers": workers})


def _resolve_config(
    config_path: Optional[Path],
    seed: Optional[int] = None,
    out: Optional[Path] = None,
    band_convention: Optional[str] = None,
) -> RunConfig:
    config = load_config(config_path)
    return config.with_overrides(seed=seed, band_convention=band_convention, output_directory=out)


def _progress() -> Progress:
    return Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console)


@app.command()
def forward(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    source: Optional[int] = typer.Option(None, "--source", help="Probe index of the source (default: middle probe)"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel workers"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Solve one source and export incident, scattered and total fields."""
    with _exit_codes():
        config = _resolve_config(config_path, out=out)
        pipeline = ReconstructionPipeline(config, _solver_settings(workers))
        console.print(f"\n[bold blue]Forward solve[/bold blue] {config.name} ({config.probes.kind} probes)")

        with _progress() as progress:
            task = progress.add_task("Solving forward problem...", total=None)
            fields = pipeline.forward_snapshot(source)
            progress.update(task, description="Writing fields...")

            directory = config.output.directory
            for name, field in fields.items():
                save_field(field, directory / f"{name}_field.csv", pipeline.config_hash)
            save_mesh(pipeline.data_mesh, directory / "mesh.txt", pipeline.config_hash)
            save_config(config, directory / CONFIG_SNAPSHOT)
            progress.update(task, description="Complete!")

    table = Table(title="Field snapshot")
    table.add_column("Field", style="cyan")
    table.add_column("max |u| (nodal)", justify="right", style="green")
    for name, field in fields.items():
        table.add_row(name, f"{np.abs(field.values).max():.4e}")
    console.print(table)

    summary = mesh_summary(pipeline.data_mesh)
    mesh_table = Table(title="Data mesh")
    mesh_table.add_column("Quantity", style="cyan")
    mesh_table.add_column("Value", justify="right", style="green")
    for key, value in summary.items():
        mesh_table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(mesh_table)
    console.print(f"\n[bold green]✓[/bold green] Fields written to {config.output.directory}")


@app.command()
def synthesize(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration (TOML)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Noise seed"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel workers"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    band_convention: Optional[str] = typer.Option(
        None, "--band-convention", help="Band convention: exclusive (|i-j| <= M-1) or inclusive (|i-j| <= M)"
    ),
):
    """Build the multistatic matrix, add noise, band-truncate and save it."""
    with _exit_codes():
        config = _resolve_config(config_path, seed, out, band_convention)
        pipeline = ReconstructionPipeline(config, _solver_settings(workers))

        with _progress() as progress:
            task = progress.add_task("Synthesizing data...", total=None)
            matrix = pipeline.synthesize()
            progress.update(task, description="Complete!")

        directory = config.output.directory
        path = save_matrix(matrix, directory / "matrix.txt")
        save_config(config, directory / CONFIG_SNAPSHOT)

    _display_matrix(matrix)
    console.print(f"\n[bold green]✓[/bold green] Matrix saved to {path}")


@app.command()
def invert(
    matrix_file: Path = typer.Argument(..., help="Matrix file written by 'synthesize'"),
    config_path: Optional[Path] = typer.Option(
        None, "--config", "-c", help="Run configuration (default: config.json next to the matrix)"
    ),
    delta: Optional[float] = typer.Option(None, "--delta", help="Noise level override"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel workers"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Run the LSM on a saved matrix and write the indicator (CSV and PGM)."""
    with _exit_codes():
        if config_path is None and (matrix_file.parent / CONFIG_SNAPSHOT).exists():
            config_path = matrix_file.parent / CONFIG_SNAPSHOT
        config = _resolve_config(config_path, out=out)
        matrix = load_matrix(matrix_file)
        if matrix.config_hash and matrix.config_hash != config.config_hash():
            logger.warning(f"Matrix was produced with config {matrix.config_hash}, inverting with {config.config_hash()}")

        pipeline = ReconstructionPipeline(config, _solver_settings(workers))
        with _progress() as progress:
            task = progress.add_task("Running the Linear Sampling Method...", total=None)
            field = pipeline.invert(matrix, delta)
            progress.update(task, description="Complete!")

        metrics = pipeline.metrics(field, matrix.band) if config.geometry.deposits else None
        _write_reconstruction(config, field, metrics, pipeline.config_hash)

    if metrics is not None:
        _display_metrics([metrics])
    console.print(f"\n[bold green]✓[/bold green] Indicator written to {config.output.directory}")


@app.command()
def reproduce(
    experiment_id: str = typer.Argument(..., help="Experiment id, or 'all'"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Noise seed"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel workers"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    band_convention: Optional[str] = typer.Option(None, "--band-convention", help="Band convention"),
):
    """Run canned experiments end to end and report localization metrics."""
    with _exit_codes():
        ids = scenario_ids() if experiment_id == "all" else [experiment_id]
        base = out or Path("results")
        results: List[ReconstructionMetrics] = []
        solver_settings = _solver_settings(workers)

        for scenario in ids:
            config = get_scenario(scenario).with_overrides(
                seed=seed, band_convention=band_convention, output_directory=base / scenario
            )
            console.print(f"\n[bold blue]Experiment {scenario}[/bold blue]")
            pipeline = ReconstructionPipeline(config, solver_settings)
            with _progress() as progress:
                task = progress.add_task("Synthesizing and inverting...", total=None)
                result = pipeline.run()
                progress.update(task, description="Complete!")

            save_matrix(result.matrix, config.output.directory / "matrix.txt")
            save_config(config, config.output.directory / CONFIG_SNAPSHOT)
            _write_reconstruction(config, result.indicator, result.metrics, pipeline.config_hash)
            results.append(result.metrics)

        if len(results) > 1:
            save_metrics(results, base / "metrics.csv")

    _display_metrics(results)


@app.command()
def cache_info():
    """Display cache information and statistics."""
    console.print("\n[bold blue]Cache Information[/bold blue]")

    stats = cache_manager.get_stats()
    if stats:
        table = Table(title="Cache Statistics")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", style="green")

        table.add_row("Status", "Enabled" if stats["enabled"] else "Disabled")
        table.add_row("Directory", str(stats["directory"]))
        table.add_row("Size (MB)", f"{stats['size_mb']:.2f}")
        table.add_row("Max Size (GB)", f"{stats['max_size_gb']:.1f}")
        table.add_row("Entry Count", str(stats["count"]))
        table.add_row("TTL (days)", str(stats["ttl_days"]))

        console.print(table)
    else:
        console.print("[yellow]Cache statistics unavailable[/yellow]")


@app.command()
def cache_clear(
    yes: bool = typer.Option(False, "--yes", "-y", help="Do not ask for confirmation"),
):
    """Clear all cached incident fields."""
    if yes or typer.confirm("Are you sure you want to clear all cached data?"):
        if cache_manager.clear_all():
            console.print("[bold green]✓[/bold green] Cache cleared successfully")
        else:
            console.print("[bold red]✗[/bold red] Failed to clear cache")
            raise typer.Exit(1)
    else:
        console.print("Cache clear cancelled")


@app.command()
def version():
    """Show version information."""
    from eddy_lsm import __version__

    console.print(f"\n[bold blue]{settings.app_name}[/bold blue]")
    console.print(f"Version: {__version__}")


def _write_reconstruction(
    config: RunConfig, field: IndicatorField, metrics: Optional[ReconstructionMetrics], config_hash: str
) -> None:
    directory = config.output.directory
    save_indicator(field, directory / "indicator.csv")
    if config.output.write_pgm:
        save_pgm(field, directory / "indicator.pgm")
    if metrics is not None:
        save_metrics([metrics], directory / "metrics.csv", config_hash)


def _display_matrix(matrix: MultistaticMatrix) -> None:
    table = Table(title="Multistatic matrix")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Size", f"{matrix.size} x {matrix.size}")
    table.add_row("Probes", matrix.kind)
    table.add_row("Noise", f"{matrix.delta:.2%} (seed {matrix.seed})")
    table.add_row("Band", "full" if matrix.band is None else f"M={matrix.band} ({matrix.band_convention})")
    table.add_row("max |Z|", f"{np.abs(matrix.entries).max():.4e}")
    table.add_row("Symmetry error", f"{matrix.symmetry_error():.2e}")
    console.print(table)


def _display_metrics(rows: List[ReconstructionMetrics]) -> None:
    table = Table(title="Reconstruction metrics")
    table.add_column("Scenario", style="cyan")
    table.add_column("Probes", style="yellow")
    table.add_column("N", justify="right")
    table.add_column("M", justify="right")
    table.add_column("Argmax (mm)", justify="right")
    table.add_column("Inside", justify="center")
    table.add_column("z error (mm)", justify="right", style="green")
    table.add_column("Contrast", justify="right", style="blue")
    table.add_column("Peaks", justify="right")
    table.add_column("Morozov", justify="right")

    for m in rows:
        table.add_row(
            m.scenario,
            m.probe_kind,
            str(m.probe_count),
            "full" if m.band is None else str(m.band),
            f"({m.argmax_r * 1e3:.2f}, {m.argmax_z * 1e3:.2f})",
            "✓" if m.argmax_inside else "✗",
            f"{m.z_error * 1e3:.2f}",
            f"{m.contrast:.3f}",
            f"{m.deposits_with_peak}/{m.deposit_count} ({m.local_maxima})",
            f"{m.morozov_satisfied:.1%}",
        )
    console.print(table)


if __name__ == "__main__":
    app()
