"""hamilton-run: perturbed-graph trials for the k-th power of a Hamilton cycle."""

import csv
import io
import logging
from collections.abc import Callable
from pathlib import Path

import click

from app.commands.common import (
    INPUT_PATH,
    emit,
    get_container,
    out_option,
    params_option,
    read_document,
    read_params,
    root_rng,
    seed_option,
)
from app.config import Settings
from app.exceptions import DomainException
from app.models.hamilton import HamiltonSetup
from app.models.rng_state import RngState
from app.schemas.blowup_schema import ParamSet
from app.schemas.instance_schema import HamiltonHostDocument
from app.schemas.trial_schema import TrialOutcome
from app.services.hamilton_service import HamiltonService
from app.services.trial_runner import TrialRunner

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("trial", "p", "tries_used", "success", "max_pin_estimate")


def _trial_job(
    service: HamiltonService, setup: HamiltonSetup, params: ParamSet, p: float, tries: int, stream: RngState
) -> Callable[[int], TrialOutcome]:
    def job(index: int) -> TrialOutcome:
        outcome = service.perturbed_trial(
            setup.host, setup.refined, setup.blueprint, p, tries, stream.child(index), params
        )
        return outcome.model_copy(update={"trial": index})

    return job


def _format_rows(rows: list[TrialOutcome]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.trial,
                row.p,
                row.tries_used,
                "true" if row.success else "false",
                "" if row.max_pin_estimate is None else f"{row.max_pin_estimate:.4f}",
            ]
        )
    return buffer.getvalue()


@click.command("hamilton-run")
@click.option("--host", "host_path", type=INPUT_PATH, required=True, help="Host JSON from gen --kind hamilton-host")
@click.option("--k", type=int, default=None, help="Cycle power; must match the host when given")
@click.option("--p", "ps", type=click.FloatRange(0, 1), multiple=True, required=True, help="Edge probability (repeatable)")
@click.option("--tries", type=click.IntRange(min=1), default=200, show_default=True, help="ξ-good draws per trial")
@click.option("--trials", type=click.IntRange(min=1), default=1, show_default=True, help="Trials per probability")
@click.option("--jobs", type=click.IntRange(min=1), default=None, help="Concurrent trials (TASK_MAX_WORKERS when omitted)")
@click.option(
    "--spread-samples",
    type=click.IntRange(min=0),
    default=0,
    show_default=True,
    help="ξ-good draws for the max_pin_estimate column (0 leaves it empty)",
)
@params_option
@seed_option
@out_option
@click.pass_context
def hamilton_run_command(
    ctx: click.Context,
    host_path: Path,
    k: int | None,
    ps: tuple[float, ...],
    tries: int,
    trials: int,
    jobs: int | None,
    spread_samples: int,
    params_path: Path | None,
    seed: int | None,
    out: Path | None,
) -> None:
    """Writes CSV rows trial, p, tries_used, success, max_pin_estimate."""
    container = get_container(ctx)
    settings: Settings = container.config()
    hamilton_service = container.hamilton_service()
    host = read_document(host_path, HamiltonHostDocument).to_host()
    if k is not None and k != host.k:
        raise DomainException(f"--k {k} does not match the host, which was generated for k = {host.k}")

    rng = root_rng(ctx, seed)
    setup = hamilton_service.prepare(host, rng.spawn("prepare"))
    params = read_params(params_path) or ParamSet.hamilton_defaults(max_degree=2 * host.k, alpha=host.alpha)

    pin_estimate: float | None = None
    if spread_samples:
        report = container.spread_service().estimate_vertex_spread(
            lambda r: hamilton_service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, r).phi,
            host.n,
            host.n,
            spread_samples,
            0,
            rng.spawn("pin-spread"),
        )
        pin_estimate = report.c1

    runner = TrialRunner(max_workers=jobs or settings.task_max_workers)
    rows: list[TrialOutcome] = []
    for p in ps:
        job = _trial_job(hamilton_service, setup, params, p, tries, rng.spawn(f"p={p!r}"))
        results = runner.run(job, trials, f"trials at p={p}")
        for result in results:
            if result.ok and result.value is not None:
                rows.append(result.value.model_copy(update={"max_pin_estimate": pin_estimate}))
            else:
                logger.warning(f"Trial {result.index} at p={p} failed: {result.error}")
                rows.append(
                    TrialOutcome(
                        trial=result.index,
                        p=p,
                        tries_used=tries,
                        success=False,
                        random_edges=0,
                        failures=tries,
                        max_pin_estimate=pin_estimate,
                    )
                )
        successes = sum(1 for row in rows if row.p == p and row.success)
        logger.info(f"p={p}: {successes}/{trials} trials found the cycle power")

    emit(_format_rows(rows), out)
