"""``faf-kit`` command line interface.

Exit codes: 0 success, 1 failed invariant or acceptance check, 2 configuration error.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path
from typing import Any, Callable

import click

from . import __version__
from .harness import ConfigError, ExperimentConfig, InvariantFailure, render_csv, run, verify_suite

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2


def _log(message: str) -> None:
    click.echo(message, err=True)


def _common(func: Callable[..., Any]) -> Callable[..., Any]:
    """Attach the flags shared by every experiment subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), help="JSON config; command-line flags override its params."),
        click.option("--seed", type=int, default=None, help="Master seed (64-bit)."),
        click.option("--workers", type=int, default=None, help="Worker processes."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="CSV output path (stdout if omitted)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _execute(experiment: str, config_path: Path | None, seed: int | None, workers: int | None, out: Path | None, **params: Any) -> None:
    overrides = {k: v for k, v in params.items() if v is not None and v != ()}
    try:
        if config_path is not None:
            try:
                text = config_path.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            base = ExperimentConfig.from_json(text)
            if base.experiment != experiment:
                raise ConfigError(f"config is for {base.experiment!r}, not {experiment!r}")
            merged = {**base.params, **overrides}
            config = ExperimentConfig(
                experiment,
                merged,
                seed=base.seed if seed is None else seed,
                out=str(out) if out is not None else base.out,
                workers=base.workers if workers is None else workers,
            )
        else:
            config = ExperimentConfig(
                experiment,
                overrides,
                seed=0 if seed is None else seed,
                out=None if out is None else str(out),
                workers=1 if workers is None else workers,
            )
        records, path = run(config, log=_log)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        sys.exit(EXIT_CONFIG)
    except InvariantFailure as exc:
        _log(f"invariant failure: {exc}")
        sys.exit(EXIT_INVARIANT)
    if path is None:
        click.echo(render_csv(records, config), nl=False)
    else:
        _log(f"wrote {path}")


def _experiment(name: str, rename: dict[str, str] | None = None) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Register ``func`` (whose options define the schema overrides) as subcommand ``name``."""
    def decorate(func: Callable[..., Any]) -> Callable[..., Any]:
        @functools.wraps(func)
        def wrapper(**kwargs: Any) -> None:
            for old, new in (rename or {}).items():
                kwargs[new] = kwargs.pop(old)
            _execute(name, **kwargs)

        return main.command(name)(_common(wrapper))

    return decorate


@click.group()
@click.version_option(version=__version__, prog_name="faf-kit")
def main() -> None:
    """Fermionic antiflatness toolkit."""


def _lists(*names: str) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Comma-separated list options, passed through as strings for the schema to parse."""
    def decorate(func: Callable[..., Any]) -> Callable[..., Any]:
        for name in reversed(names):
            func = click.option(f"--{name}", f"{name.replace('-', '_').lower()}_list", type=str, default=None, help="Comma-separated values.")(func)
        return func

    return decorate


@_experiment("named-states")
@click.option("--theta-grid", "theta_grid", type=str, default=None, help="start:stop:count, e.g. 0:pi:32.")
def named_states(**kwargs: Any) -> None:
    """F_1, F_2 and NGE_inf along the four-qubit theta family."""


@_experiment("circuit-faf")
@click.option("--N", "N", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--symmetry", type=click.Choice(["generic", "z2"]), default=None)
def circuit_faf(**kwargs: Any) -> None:
    """Brickwall Clifford average of F_1 at every depth."""


@_experiment("rmps-faf", rename={"r_list": "r"})
@click.option("--N", "N", type=int, default=None)
@_lists("r")
@click.option("--samples", type=int, default=None)
@click.option("--layers", type=int, default=None)
@click.option("--symmetry", type=click.Choice(["generic", "z2"]), default=None)
def rmps_faf(**kwargs: Any) -> None:
    """Staircase (RMPS) average of F_1 versus bond dimension."""


@_experiment("tfim-correlators", rename={"n_list": "N"})
@_lists("N")
@click.option("--h-z", "h_z", type=float, default=None)
@click.option("--bc", type=click.Choice(["open", "periodic"]), default=None)
def tfim_correlators(**kwargs: Any) -> None:
    """Ground-state Majorana correlators of the Ising chain."""


@_experiment("pe-check", rename={"n_list": "N"})
@_lists("N")
@click.option("--lam", type=float, default=None)
def pe_check(**kwargs: Any) -> None:
    """Peschel-Emery ground states against the closed form."""


@_experiment("commutant-check", rename={"n_list": "N", "specs_list": "specs"})
@_lists("specs", "N")
@click.option("--trials", type=int, default=None)
@click.option("--tol", type=float, default=None)
def commutant_check(**kwargs: Any) -> None:
    """Gaussian invariance of replica overlaps (specs like 1-1,2-2)."""


@_experiment("gs-scan", rename={"n_list": "N", "h_z_list": "h_z", "k_list": "k"})
@click.option("--model", type=click.Choice(["tfim", "impurity", "annni"]), default=None)
@_lists("N", "h-z", "k")
@click.option("--lam", type=float, default=None)
@click.option("--bc", type=click.Choice(["open", "periodic"]), default=None)
def gs_scan(**kwargs: Any) -> None:
    """Ground-state F_k over a field grid (h-z accepts start:stop:count)."""


@_experiment("spectrum-scan", rename={"n_list": "N", "k_list": "k"})
@click.option("--model", type=click.Choice(["tfim", "impurity", "annni"]), default=None)
@_lists("N", "k")
@click.option("--h-z", "h_z", type=float, default=None)
@click.option("--lam", type=float, default=None)
@click.option("--bc", type=click.Choice(["open", "periodic"]), default=None)
def spectrum_scan(**kwargs: Any) -> None:
    """F_k of every even-sector eigenstate."""


@_experiment("dynamics", rename={"k_list": "k"})
@click.option("--model", type=click.Choice(["tfim", "impurity", "annni"]), default=None)
@click.option("--N", "N", type=int, default=None)
@click.option("--h-z", "h_z", type=float, default=None)
@click.option("--lam", type=float, default=None)
@click.option("--bc", type=click.Choice(["open", "periodic"]), default=None)
@_lists("k")
@click.option("--t-max", "t_max", type=float, default=None)
@click.option("--eps", type=float, default=None)
def dynamics(**kwargs: Any) -> None:
    """F_k(t) after a quench plus saturation summary rows."""


@main.command("verify")
@click.option("--suite", type=click.Choice(["fast", "full", "paper-goldens"]), default="fast", show_default=True)
def verify(suite: str) -> None:
    """Run the acceptance battery and print a pass/fail table."""
    results = verify_suite(suite, log=_log)
    for result in results:
        click.echo(result.report())
    failed = [r for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} passed")
    sys.exit(EXIT_INVARIANT if failed else EXIT_OK)


if __name__ == "__main__":  # pragma: no cover
    main()
