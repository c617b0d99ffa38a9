#!/usr/bin/env python3
"""
Fiber Analysis CLI Tool
Command-line interface for frame/Riesz bounds, identity verification,
coefficient dumps, demos and field files of translate systems.

Exit codes: 0 pass, 1 check failure, 2 usage/config error, 3 degenerate system.
Status lines go to stderr, so stdout carries nothing but a JSON report.
"""

import functools
import sys
from pathlib import Path
from typing import Callable, List, Optional

import click

from fibers.errors import DegenerateSystemError
from fibers.verification import (
    DEMOS,
    bounds_csv_rows,
    coeffs_csv_rows,
    export_generators,
    import_summary,
    run_bounds,
    run_coeffs,
    run_demo,
    run_verify,
)
from models import CheckResult
from utils import (
    get_thread_count,
    load_run_config,
    report_json,
    resolve_output_path,
    write_csv,
    write_json_report,
)

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


def print_header(title):
    """Print a formatted header"""
    print("\n" + "=" * 60, file=sys.stderr)
    print(f" {title}", file=sys.stderr)
    print("=" * 60, file=sys.stderr)


def print_section(title):
    """Print a formatted section header"""
    print(f"\n{'-' * 40}", file=sys.stderr)
    print(f" {title}", file=sys.stderr)
    print("-" * 40, file=sys.stderr)


def print_checks(checks: List[CheckResult]):
    for c in checks:
        glyph = "✅" if c.passed else "❌"
        print(f"{glyph} {c.check:<28} lhs={c.lhs:.6e} rhs={c.rhs:.6e} err={c.rel_err:.2e} tol={c.tolerance:.0e}", file=sys.stderr)


def guarded(func: Callable) -> Callable:
    """Map library errors to exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except DegenerateSystemError as e:
            print(f"❌ Degenerate system: {e}", file=sys.stderr)
            ctx.exit(EXIT_DEGENERATE)
        except (ValueError, FileNotFoundError) as e:
            print(f"❌ Error: {e}", file=sys.stderr)
            ctx.exit(EXIT_USAGE)
    return wrapper


def emit(report, output: Optional[Path]):
    if output is None:
        click.echo(report_json(report), nl=False)
    else:
        write_json_report(report, output)
        print(f"✅ Report written to {output}", file=sys.stderr)


@click.group()
def cli():
    """Fiberization toolkit for shift-invariant spaces on nilpotent groups."""


config_argument = click.argument("config", type=click.Path(dir_okay=False))
output_option = click.option("--output", default=None, help="Report path (overrides the config's output)")
threads_option = click.option("--threads", type=int, default=None, help="Worker threads over sigma")
csv_option = click.option("--csv", "csv_path", default=None, help="Also write a CSV table")


@cli.command()
@config_argument
@output_option
@threads_option
@csv_option
@guarded
def bounds(config, output, threads, csv_path):
    """Per-fiber and essential frame/Riesz/Bessel bounds."""
    run_config = load_run_config(config)
    print_header(f"ESSENTIAL BOUNDS: {run_config.group} ({run_config.mode})")
    report = run_bounds(run_config, get_thread_count(threads))

    print_section("Global Bounds")
    print(f"A: {report.lower}", file=sys.stderr)
    print(f"B: {report.upper}", file=sys.stderr)
    print(f"Excluded fibers (zero Gramian): {report.excluded_sigmas}", file=sys.stderr)

    emit(report, resolve_output_path(output, run_config))
    if csv_path:
        header, rows = bounds_csv_rows(report)
        write_csv(csv_path, header, rows)


@cli.command()
@config_argument
@output_option
@threads_option
@guarded
def verify(config, output, threads):
    """Run every identity check against its brute-force oracle."""
    run_config = load_run_config(config)
    print_header(f"VERIFICATION: {run_config.group}")
    report = run_verify(run_config, get_thread_count(threads))

    print_section("Checks")
    print_checks(report.checks)
    emit(report, resolve_output_path(output, run_config))
    if not report.passed:
        print(f"❌ Failed checks: {', '.join(report.failures)}", file=sys.stderr)
        click.get_current_context().exit(EXIT_CHECK_FAILURE)


@cli.command()
@config_argument
@output_option
@threads_option
@csv_option
@guarded
def coeffs(config, output, threads, csv_path):
    """Dump the analysis coefficients <phi_a, L_gamma phi_b>."""
    run_config = load_run_config(config)
    print_header(f"ANALYSIS COEFFICIENTS: {run_config.group}")
    report = run_coeffs(run_config, get_thread_count(threads))
    print(f"📊 {len(report.coefficients)} coefficients", file=sys.stderr)
    emit(report, resolve_output_path(output, run_config))
    if csv_path:
        header, rows = coeffs_csv_rows(report)
        write_csv(csv_path, header, rows)


@cli.command()
@config_argument
@click.argument("name", type=click.Choice(DEMOS))
@output_option
@threads_option
@guarded
def demo(config, name, output, threads):
    """Run a demo: sis_not_left_invariant (twostep6) or bandlimited_onb (heisenberg3)."""
    run_config = load_run_config(config)
    print_header(f"DEMO: {name}")
    report = run_demo(run_config, name, get_thread_count(threads))

    print_section("Results")
    print_checks(report.checks)
    emit(report, resolve_output_path(output, run_config))
    if not report.passed:
        click.get_current_context().exit(EXIT_CHECK_FAILURE)


@cli.command()
@config_argument
@click.argument("path", type=click.Path(dir_okay=False))
@guarded
def export(config, path):
    """Write the generators' Fourier-side fields as SIZF1 files."""
    run_config = load_run_config(config)
    print_header("EXPORT FIELDS")
    export_generators(run_config, Path(path))


@cli.command("import")
@config_argument
@click.argument("path", type=click.Path(dir_okay=False))
@guarded
def import_field(config, path):
    """Validate a SIZF1 file against the config and summarize it."""
    run_config = load_run_config(config)
    print_header("IMPORT FIELD")
    summary = import_summary(run_config, Path(path))

    print_section("Field Summary")
    for key, value in summary.items():
        print(f"{key}: {value}", file=sys.stderr)


if __name__ == "__main__":
    cli()
