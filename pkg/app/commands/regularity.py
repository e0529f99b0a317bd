"""check-regularity and extract: regularity tests and exact-density extraction on edge lists."""

import logging
from pathlib import Path

import click

from app.commands.common import (
    INPUT_PATH,
    emit,
    emit_json,
    get_container,
    out_option,
    read_pair,
    root_rng,
    seed_option,
)
from app.exceptions import DomainException
from app.schemas.regularity_schema import ExtractionParams, ExtractionSummary
from app.utils.graph_io import format_pair

logger = logging.getLogger(__name__)


@click.command("check-regularity")
@click.option("--pair", "pair_path", type=INPUT_PATH, required=True, help="Bipartite edge list")
@click.option("--mx", type=int, default=None, help="X side size when the file has no bipartite header")
@click.option("--xi", type=float, default=0.05, show_default=True, help="Slack of the second-moment test")
@click.option("--d0", type=float, default=None, help="Density floor; the test refuses sparser pairs")
@click.option("--eps", type=float, default=None, help="Also search for an ε-irregularity witness")
@click.option("--delta", type=float, default=None, help="With --eps, also check (ε, δ)-super-regularity")
@click.option("--budget", type=int, default=None, help="Witness candidates (WITNESS_BUDGET when omitted)")
@seed_option
@out_option
@click.pass_context
def check_regularity_command(
    ctx: click.Context,
    pair_path: Path,
    mx: int | None,
    xi: float,
    d0: float | None,
    eps: float | None,
    delta: float | None,
    budget: int | None,
    seed: int | None,
    out: Path | None,
) -> None:
    """Second-moment quasirandomness verdict of a pair, with optional witness search."""
    if delta is not None and eps is None:
        raise click.UsageError("--delta needs --eps")
    service = get_container(ctx).regularity_service()
    pair = read_pair(pair_path, mx)

    verdict = service.is_quasirandom(pair, xi, d0) if d0 is not None else service.quasirandom_verdict(pair, xi)
    if eps is not None:
        rng = root_rng(ctx, seed).spawn("witness")
        verdict.witness = service.witness_irregularity(pair, eps, budget or service.witness_budget, rng)
    payload = verdict.model_dump()
    if eps is not None and delta is not None:
        payload["super_regular"] = service.check_super_regular(pair, eps, delta)

    logger.info(f"Pair {pair!r}: second-moment test {'passed' if verdict.passed else 'failed'}")
    emit_json(payload, out)


@click.command("extract")
@click.option("--pair", "pair_path", type=INPUT_PATH, required=True, help="Bipartite edge list")
@click.option("--mx", type=int, default=None, help="X side size when the file has no bipartite header")
@click.option("--density", type=float, required=True, help="Target density d̄")
@click.option("--eps", type=float, required=True, help="Regularity parameter ε of the input pair")
@click.option("--slack", type=float, default=None, help="Constant C of d̄ + Cε (EXTRACTION_SLACK_C when omitted)")
@click.option("--removal-cap", type=int, default=None, help="Per-vertex removal budget of the final stage")
@click.option("--xi", type=float, default=0.05, show_default=True, help="Slack of the verdict's quasirandom test")
@click.option("--verify-hypothesis", is_flag=True, help="Require the input to be ε-super-regular")
@seed_option
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="Output edge list")
@click.pass_context
def extract_command(
    ctx: click.Context,
    pair_path: Path,
    mx: int | None,
    density: float,
    eps: float,
    slack: float | None,
    removal_cap: int | None,
    xi: float,
    verify_hypothesis: bool,
    seed: int | None,
    out: Path,
) -> None:
    """Spanning subgraph with exactly round(d̄N²) edges; prints its JSON verdict."""
    service = get_container(ctx).regularity_service()
    pair = read_pair(pair_path, mx)
    try:
        params = ExtractionParams(
            target_density=density,
            epsilon=eps,
            slack_constant=service.slack_constant if slack is None else slack,
            removal_cap=removal_cap,
        )
    except ValueError as e:
        raise DomainException(f"Invalid extraction parameters: {e}") from e

    rng = root_rng(ctx, seed).spawn("extract")
    subgraph = service.extract_exact_density_subgraph(pair, params, rng, verify_hypothesis=verify_hypothesis)
    emit(format_pair(subgraph), out)

    degrees = [*subgraph.row_degrees().tolist(), *subgraph.col_degrees().tolist()]
    summary = ExtractionSummary(
        edges=subgraph.edge_count,
        min_degree=min(degrees, default=0),
        max_degree=max(degrees, default=0),
        quasirandom_pass=service.quasirandom_verdict(subgraph, xi).passed,
    )
    emit_json(summary, None)
