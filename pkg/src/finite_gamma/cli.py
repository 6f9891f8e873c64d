"""
Command-line interface for the finite-field gamma-factor checks.
"""

import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from rich.text import Text

from .cache import CACHE_DIR_ENV, DEFAULT_CACHE_DIR
from .exceptions import BudgetExceededError, CacheError
from .models import (
    ComponentRecord,
    DecompositionReport,
    GammaReport,
    RunConfig,
    TableReport,
    VerificationReport,
    suite_instances,
)
from .service import GammaService

console = Console()

EXIT_OK = 0
EXIT_THEOREM_FAILURE = 1
EXIT_CONFIG = 2

F = TypeVar("F", bound=Callable[..., Any])


def configure_logging(verbose: bool = False) -> None:
    """Route library logging through rich; DEBUG with --verbose, WARNING otherwise."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
        force=True,
    )


def _format_complex(z: complex) -> str:
    return f"{z.real:+.10f}{z.imag:+.10f}i"


def _build_config(**kwargs: Any) -> RunConfig:
    """RunConfig or exit 2 with the validation messages in red."""
    try:
        return RunConfig(**kwargs)
    except ValidationError as e:
        for error in e.errors():
            message = str(error["msg"]).removeprefix("Value error, ")
            console.print(f"Error: {message}", style="red", markup=False)
        sys.exit(EXIT_CONFIG)
    except BudgetExceededError as e:
        console.print(f"Error: {e}", style="red", markup=False)
        sys.exit(EXIT_CONFIG)


def _resolve_cache(cache_dir: Path | None, no_cache: bool) -> Path | None:
    if no_cache:
        return None
    return cache_dir or DEFAULT_CACHE_DIR


def _instances(
    q: int | None, n: int | None, suite: str | None, allow_slow: bool
) -> list[tuple[int, int]]:
    if suite:
        return suite_instances(suite, allow_slow)
    if q is None or n is None:
        console.print("[red]Error: --q and --n are required unless --suite is given[/red]")
        sys.exit(EXIT_CONFIG)
    return [(n, q)]


def _output_path(out: Path | None, command: str, n: int, q: int, many: bool) -> Path:
    default_name = f"fgamma-{command}-n{n}-q{q}.json"
    if out is None:
        return Path(default_name)
    if many or out.is_dir():
        return out / default_name
    return out


def _write_report(
    report: VerificationReport | TableReport | DecompositionReport, path: Path
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    console.print(f"Report saved to {path}")


def _run(service_call: Callable[[], Any]) -> Any:
    try:
        return service_call()
    except BudgetExceededError as e:
        console.print(f"Error: {e}", style="red", markup=False)
        sys.exit(EXIT_CONFIG)
    except CacheError as e:
        console.print(f"Cache error: {e}", style="red", markup=False)
        sys.exit(EXIT_CONFIG)


def _gamma_table(title: str, records: list[GammaReport]) -> Table:
    table = Table(title=title)
    table.add_column("pi", style="green")
    table.add_column("tau", style="green")
    table.add_column("gamma_GK", style="yellow")
    table.add_column("gamma_JPSS", style="yellow")
    table.add_column("|diff|", style="blue")
    table.add_column("Status")
    for record in records:
        gk = _format_complex(record.gamma_gk.value) if record.gamma_gk else "-"
        jpss = _format_complex(record.gamma_jpss.value) if record.gamma_jpss else "-"
        diff = f"{record.difference:.2e}" if record.difference is not None else "-"
        status = "✅" if record.passed else f"❌ {record.error or 'deviation above tolerance'}"
        table.add_row(record.pi_id, record.tau_id, gk, jpss, diff, Text(status))
    return table


def _component_table(title: str, records: list[ComponentRecord]) -> Table:
    table = Table(title=title)
    table.add_column("Component", style="green")
    table.add_column("Dim", style="magenta")
    table.add_column("Cuspidal")
    table.add_column("omega(-1)", style="yellow")
    table.add_column("Contragredient", style="blue")
    for record in records:
        table.add_row(
            record.label,
            str(record.dim),
            "yes" if record.cuspidal else "no",
            _format_complex(record.central_character[-1]),
            record.contragredient or "-",
        )
    return table


def common_options(func: F) -> F:
    """Options shared by every subcommand."""
    options = [
        click.option("--q", "q", type=int, help="Prime q (2, 3, 5 or 7)"),
        click.option("--n", "n", type=int, help="Rank n of the GL_n side"),
        click.option("--seed", type=int, default=0, show_default=True, help="Random seed"),
        click.option("--tol", type=float, default=1e-8, show_default=True, help="Tolerance"),
        click.option(
            "--cache-dir",
            type=click.Path(file_okay=False, path_type=Path),
            envvar=CACHE_DIR_ENV,
            help=f"Component cache root (default: {DEFAULT_CACHE_DIR})",
        ),
        click.option("--no-cache", is_flag=True, help="Do not read or write the cache"),
        click.option("--out", type=click.Path(path_type=Path), help="Report file or directory"),
        click.option("--allow-slow", is_flag=True, help="Allow the slow (n=3, q=3) instance"),
        click.option("--psi-conjugate", is_flag=True, help="Use the conjugate character"),
        click.option("--verbose", is_flag=True, help="DEBUG logging"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.version_option(package_name="finite-gamma")
def main() -> None:
    """Gelfand-Kazhdan and JPSS gamma factors over small finite fields."""


@click.command("verify")
@common_options
@click.option(
    "--suite",
    type=click.Choice(["fast", "full"]),
    help="Run every instance of a suite, one report per instance",
)
@click.option("--with-timings", is_flag=True, help="Record per-pair timings")
def verify(
    q: int | None,
    n: int | None,
    seed: int,
    tol: float,
    cache_dir: Path | None,
    no_cache: bool,
    out: Path | None,
    allow_slow: bool,
    psi_conjugate: bool,
    verbose: bool,
    suite: str | None,
    with_timings: bool,
) -> None:
    """Check gamma_GK = gamma_JPSS for every cuspidal pi and generic tau."""
    configure_logging(verbose)
    instances = _instances(q, n, suite, allow_slow)
    failed = False
    for rank, prime in instances:
        config = _build_config(
            q=prime,
            n=rank,
            seed=seed,
            tolerance=tol,
            cache_dir=_resolve_cache(cache_dir, no_cache),
            out=out,
            command="verify",
            allow_slow=allow_slow,
            psi_conjugate=psi_conjugate,
            with_timings=with_timings,
        )
        report = _run(GammaService(config).verify)
        console.print(_gamma_table(f"GL_{rank} x GL_{rank - 1} over F_{prime}", report.records))
        _write_report(report, _output_path(out, "verify", rank, prime, len(instances) > 1))
        if report.passed:
            console.print(f"✅ {len(report.records)} pairs agree (n={rank}, q={prime})")
        else:
            failed = True
            console.print(
                f"❌ {len(report.failures)} of {len(report.records)} pairs failed "
                f"(n={rank}, q={prime})"
            )
    sys.exit(EXIT_THEOREM_FAILURE if failed else EXIT_OK)


@click.command("table")
@common_options
def table(
    q: int | None,
    n: int | None,
    seed: int,
    tol: float,
    cache_dir: Path | None,
    no_cache: bool,
    out: Path | None,
    allow_slow: bool,
    psi_conjugate: bool,
    verbose: bool,
) -> None:
    """Component inventories and the gamma table for one instance."""
    configure_logging(verbose)
    ((rank, prime),) = _instances(q, n, None, allow_slow)
    config = _build_config(
        q=prime,
        n=rank,
        seed=seed,
        tolerance=tol,
        cache_dir=_resolve_cache(cache_dir, no_cache),
        out=out,
        command="table",
        allow_slow=allow_slow,
        psi_conjugate=psi_conjugate,
    )
    report = _run(GammaService(config).table)
    title = f"Generic components of GL_{rank}(F_{prime})"
    console.print(_component_table(title, report.components))
    if report.lower_components:
        console.print(
            _component_table(
                f"Generic components of GL_{rank - 1}(F_{prime})", report.lower_components
            )
        )
    if report.gamma_table:
        console.print(_gamma_table("Gamma factors", report.gamma_table))
    _write_report(report, _output_path(out, "table", rank, prime, False))
    failed = any(not record.passed for record in report.gamma_table)
    sys.exit(EXIT_THEOREM_FAILURE if failed else EXIT_OK)


@click.command("decompose")
@common_options
@click.option(
    "--direction",
    type=click.Choice(["1", "-1"]),
    default="1",
    show_default=True,
    help="Gelfand-Graev direction: 1 for theta, -1 for its conjugate",
)
def decompose_command(
    q: int | None,
    n: int | None,
    seed: int,
    tol: float,
    cache_dir: Path | None,
    no_cache: bool,
    out: Path | None,
    allow_slow: bool,
    psi_conjugate: bool,
    verbose: bool,
    direction: str,
) -> None:
    """Decompose one Gelfand-Graev space and warm the cache."""
    configure_logging(verbose)
    ((rank, prime),) = _instances(q, n, None, allow_slow)
    config = _build_config(
        q=prime,
        n=rank,
        seed=seed,
        tolerance=tol,
        cache_dir=_resolve_cache(cache_dir, no_cache),
        out=out,
        command="decompose",
        allow_slow=allow_slow,
        psi_conjugate=psi_conjugate,
        direction=int(direction),
    )
    report = _run(GammaService(config).decompose)
    console.print(
        _component_table(
            f"GL_{rank}(F_{prime}): order {report.group_order}, space dimension {report.space_dim}",
            report.components,
        )
    )
    _write_report(report, _output_path(out, "decompose", rank, prime, False))


main.add_command(verify)
main.add_command(table)
main.add_command(decompose_command)


if __name__ == "__main__":
    main()
