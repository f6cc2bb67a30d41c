"""Command line entry point: ``firetrack run | validate | render``.

Exit status is 0 on success, 1 on a configuration error and 2 when a run is
aborted at runtime. ``FIRETRACK_LOG_LEVEL`` overrides the log verbosity.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import BUNDLED, ConfigError, bundled_path, load_config
from .harness import configure_logging, run
from .render import read_snapshot, render_svg
from .runtime import RuntimeAbort

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _resolve(path: str) -> Path:
    # Bundled scenarios can be named directly, e.g. --config scenario_uniform.
    if path in BUNDLED:
        return bundled_path(path)
    return Path(path)


def _load(path: str):
    try:
        return load_config(_resolve(path))
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main():
    """Simulate camera drones tracking a spreading wildfire."""


@main.command("run")
@click.option("--config", "config_path", required=True, help="Scenario TOML file or bundled scenario name.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override scenario.seed.")
@click.option("--steps", type=int, default=None, help="Override scenario.steps.")
@click.option("--snapshot-every", type=int, default=None, help="Override scenario.snapshot_every.")
@click.option("--workers", type=int, default=None, help="Threads for agent updates (output is unaffected).")
@click.option("--quiet", is_flag=True, help="Only log warnings and errors.")
def run_cmd(config_path, out_dir, seed, steps, snapshot_every, workers, quiet):
    """Run a scenario and write trajectories, metrics and snapshots."""
    configure_logging(quiet)
    cfg = _load(config_path)
    overrides = {
        "scenario__seed": seed,
        "scenario__steps": steps,
        "scenario__snapshot_every": snapshot_every,
        "scenario__workers": workers,
    }
    try:
        cfg = cfg.with_overrides(**{k: v for k, v in overrides.items() if v is not None})
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        result = run(cfg, out_dir)
    except RuntimeAbort as exc:
        click.echo(f"run aborted: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    except OSError as exc:
        click.echo(f"run aborted: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    if not quiet:
        last = result.metrics[-1]
        click.echo(
            f"finished step {last.step}: H={last.objective_H:.6g} "
            f"covered={last.covered_fire_fraction:.3f} min_dist={last.min_pairwise_distance:.3f} "
            f"min_z={last.min_altitude:.3f}"
        )


@main.command("validate")
@click.option("--config", "config_path", required=True, help="Scenario TOML file or bundled scenario name.")
def validate_cmd(config_path):
    """Check a scenario file without running it."""
    cfg = _load(config_path)
    click.echo(f"ok: {cfg.scenario.name}, {cfg.agents.count} agents, {cfg.scenario.steps} steps")


@main.command("render")
@click.option("--world", "world_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def render_cmd(world_path, out_path):
    """Redraw a world snapshot (world_*.json) as SVG."""
    try:
        snap = read_snapshot(world_path)
    except (ValueError, KeyError) as exc:
        click.echo(f"bad snapshot: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    Path(out_path).write_text(render_svg(snap))


if __name__ == "__main__":
    main()
