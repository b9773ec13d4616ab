"""Command-line interface: ``ehmec solve|compare|validate|sweep|gen``.

Exit codes: 0 success, 1 usage or input error, 2 solver did not converge,
3 validation ran but a check failed.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, NoReturn, Optional

import attr
import click

from ehmec import RateMaximizer
from ehmec.config import Settings
from ehmec.core.baselines import SchemeId
from ehmec.core.model import Instance
from ehmec.core.oracle import OracleMethod
from ehmec.errors import ConfigError, EhmecError, InputError
from ehmec.experiments.export import export
from ehmec.experiments.generation import GenParams
from ehmec.experiments.sweep import load_sweep_config
from ehmec.io.files import load_instance, save_instance, write_json
from ehmec.utils.fields import drop_none
from ehmec.utils.logs import configure_logging
from ehmec.version import SUPPORTED_SCHEMES, __version__

logger = logging.getLogger("ehmec.cli")

EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_VALIDATION_FAILED = 3

SCHEMES = click.Choice(SUPPORTED_SCHEMES)


@attr.s
class CliState:
    """Objects shared by every sub-command."""

    settings: Settings = attr.ib()
    maximizer: RateMaximizer = attr.ib()
    seed: Optional[int] = attr.ib(default=None)


def _fail(message: str, code: int = EXIT_INPUT) -> NoReturn:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> Instance:
    instance = load_instance(path)
    logger.debug("Loaded %s with K=%d N=%d", path, *instance.shape)
    return instance


def _write(path: str, data: Any) -> None:
    try:
        write_json(path, data)
    except OSError as e:
        raise InputError(f"cannot write output: {e.strerror or e}", path=path) from e


def _solver_overrides(**options: Any) -> Dict[str, Any]:
    renamed = {
        "eps": options.get("eps"),
        "max_iters": options.get("max_iters"),
        "step_rule": options.get("step_rule"),
        "eta0": options.get("step"),
        "polish": options.get("polish"),
    }
    return drop_none(renamed)


def solver_options(func: Any) -> Any:
    """Options shared by commands that run the dual solver."""
    decorators = [
        click.option("--eps", type=float, default=None, help="Relative dual change that counts as converged."),
        click.option("--max-iters", type=int, default=None, help="Subgradient iteration budget."),
        click.option("--step", type=float, default=None, help="Initial step size eta0."),
        click.option(
            "--step-rule",
            type=click.Choice(["diminishing", "constant", "polyak"]),
            default=None,
            help="Step-size schedule.",
        ),
        click.option("--polish/--no-polish", default=None, help="Exactly polish the final dual point."),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


@click.group()
@click.version_option(__version__, prog_name="ehmec")
@click.option("--seed", type=int, default=None, help="Base seed for generation and sweeps.")
@click.option("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING, ERROR or CRITICAL.")
@click.option("--workers", type=int, default=None, help="Worker threads for users and sweep trials.")
@click.pass_context
def cli(ctx: click.Context, seed: Optional[int], log_level: Optional[str], workers: Optional[int]) -> None:
    """Offline weighted computation-rate maximization for energy-harvesting MEC."""
    try:
        settings = Settings(**drop_none({"seed": seed, "log_level": log_level, "workers": workers}))
    except ValueError as e:
        _fail(f"invalid settings: {e}")
    configure_logging(settings)
    ctx.obj = CliState(settings=settings, maximizer=RateMaximizer(settings), seed=seed)


@cli.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False), help="Instance JSON file.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Report JSON file.")
@click.option("--scheme", type=SCHEMES, default=SchemeId.PROPOSED.value, show_default=True)
@click.option("--verbose", is_flag=True, help="Include the dual trace in the report.")
@solver_options
@click.pass_obj
def solve(state: CliState, instance_path: str, out_path: str, scheme: str, verbose: bool, **options: Any) -> None:
    """Solve one instance with one scheme and write its report."""
    try:
        instance = _load(instance_path)
        outcome = state.maximizer.run_scheme(instance, SchemeId(scheme), **_solver_overrides(**options))
        _write(out_path, outcome.to_dict(verbose=verbose))
    except (InputError, ConfigError) as e:
        _fail(str(e))
    click.echo(f"{scheme}: objective={outcome.objective:.6g} converged={outcome.converged}")
    if not outcome.converged:
        _fail("solver did not converge", EXIT_NOT_CONVERGED)


@cli.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False), help="Instance JSON file.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Optional JSON summary.")
@solver_options
@click.pass_obj
def compare(state: CliState, instance_path: str, out_path: Optional[str], **options: Any) -> None:
    """Run every scheme on one instance and print their objectives."""
    try:
        instance = _load(instance_path)
        outcomes = state.maximizer.compare(instance, **_solver_overrides(**options))
        if out_path:
            summary = {s.value: {"objective": o.objective, "converged": o.converged} for s, o in outcomes.items()}
            _write(out_path, summary)
    except (InputError, ConfigError) as e:
        _fail(str(e))
    for scheme, outcome in outcomes.items():
        click.echo(f"{scheme.value:>14}  {outcome.objective:.6e}  converged={outcome.converged}")
    if not all(o.converged for o in outcomes.values()):
        _fail("a solver-based scheme did not converge", EXIT_NOT_CONVERGED)


@cli.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False), help="Instance JSON file.")
@click.option("--tol", type=float, default=5e-3, show_default=True, help="Allowed relative disagreement.")
@click.option("--method", type=click.Choice([m.value for m in OracleMethod]), default=None, help="Oracle to use.")
@click.option("--scheme", type=click.Choice([s.value for s in SchemeId if s is not SchemeId.EQUAL_ENERGY]),
              default=SchemeId.PROPOSED.value, show_default=True)
@click.option("--grid-points", type=click.IntRange(min=2), default=None, help="Grid oracle points per axis.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Optional JSON summary.")
@solver_options
@click.pass_obj
def validate(
    state: CliState,
    instance_path: str,
    tol: float,
    method: Optional[str],
    scheme: str,
    out_path: Optional[str],
    grid_points: Optional[int],
    **options: Any,
) -> None:
    """Compare the solver against an independent oracle and check KKT conditions."""
    try:
        instance = _load(instance_path)
        outcome, check = state.maximizer.validate(
            instance,
            method=OracleMethod(method) if method else None,
            tol=tol,
            scheme=SchemeId(scheme),
            grid_points=grid_points,
            **_solver_overrides(**options),
        )
        if out_path:
            _write(out_path, check.to_dict())
    except (InputError, ConfigError) as e:
        _fail(str(e))
    click.echo(
        f"{check.method.value}: solver={check.solver_objective:.6e} oracle={check.oracle_objective:.6e} "
        f"agreement={check.agreement:.2e} kkt={check.kkt:.2e} gap={check.gap:.2e} converged={check.converged}"
    )
    if not outcome.converged:
        _fail("solver did not converge", EXIT_NOT_CONVERGED)
    if not check.passed:
        _fail("validation failed", EXIT_VALIDATION_FAILED)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Sweep JSON file.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for CSV and JSON.")
@click.option("--trials", type=int, default=None, help="Override the number of trials.")
@click.pass_obj
def sweep(state: CliState, config_path: str, out_dir: str, trials: Optional[int]) -> None:
    """Run a seeded parameter sweep and export the results."""
    overrides: Dict[str, Any] = {}
    if trials is not None:
        overrides["sweep"] = {"trials": trials}
    if state.seed is not None:
        overrides["generator"] = {"seed": state.seed}
    try:
        config = load_sweep_config(config_path, overrides)
        result = state.maximizer.sweep(config.sweep, config.generator)
        csv_path, json_path = export(result, out_dir, stem=Path(config_path).stem)
    except (InputError, ConfigError) as e:
        _fail(str(e))
    except OSError as e:
        _fail(f"{out_dir}: cannot write output: {e.strerror or e}")
    click.echo(f"wrote {csv_path} and {json_path}")
    if SchemeId.FULL_OFFLOAD in result.schemes and SchemeId.LOCAL_ONLY in result.schemes:
        crossover = result.crossover(SchemeId.FULL_OFFLOAD, SchemeId.LOCAL_ONLY)
        click.echo(f"full_offload overtakes local_only at: {crossover if crossover is not None else 'never'}")


@cli.command()
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Instance JSON file.")
@click.option("--users", "num_users", type=int, required=True, help="Number of users K.")
@click.option("--slots", "num_slots", type=int, required=True, help="Number of slots N.")
@click.option("--tau", type=float, default=None, help="Slot length in seconds (default horizon/N).")
@click.option("--distance", type=float, default=None, help="User distance in metres.")
@click.option("--harvest-max", type=float, default=None, help="Upper bound of harvested energy per slot.")
@click.pass_obj
def gen(
    state: CliState,
    out_path: str,
    num_users: int,
    num_slots: int,
    tau: Optional[float],
    distance: Optional[float],
    harvest_max: Optional[float],
) -> None:
    """Generate a random instance file."""
    try:
        params = GenParams(
            **drop_none({"seed": state.settings.seed, "distance": distance, "harvest_max": harvest_max})
        )
        instance = state.maximizer.generate(num_users, num_slots, tau, params)
    except (ValueError, EhmecError) as e:
        _fail(str(e))
    try:
        save_instance(instance, out_path)
    except OSError as e:
        _fail(f"{out_path}: cannot write output: {e.strerror or e}")
    click.echo(f"wrote {out_path} (K={num_users}, N={num_slots}, tau={instance.config.slot_seconds:g})")


def main() -> None:
    """Console entry point; usage errors exit with code 1."""
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except click.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(EXIT_INPUT)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    main()
