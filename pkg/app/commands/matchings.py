"""match-sample: perfect matchings of a pair, exact or by MCMC."""

import logging
from enum import StrEnum
from pathlib import Path

import click

from app.commands.common import INPUT_PATH, emit, emit_json, get_container, out_option, read_pair, root_rng, seed_option
from app.exceptions import DomainException

logger = logging.getLogger(__name__)


class SampleMode(StrEnum):
    EXACT = "exact"
    MCMC = "mcmc"


@click.command("match-sample")
@click.option("--pair", "pair_path", type=INPUT_PATH, required=True, help="Bipartite edge list")
@click.option("--mx", type=int, default=None, help="X side size when the file has no bipartite header")
@click.option("--samples", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--mode", type=click.Choice([mode.value for mode in SampleMode]), default="exact", show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=None, help="MCMC steps per sample")
@seed_option
@out_option
@click.pass_context
def match_sample_command(
    ctx: click.Context,
    pair_path: Path,
    mx: int | None,
    samples: int,
    mode: str,
    steps: int | None,
    seed: int | None,
    out: Path | None,
) -> None:
    """One matching per line as space-separated partner positions, then a JSON summary.

    With --out the matchings go to the file and only the summary to stdout.
    """
    container = get_container(ctx)
    matching_service = container.matching_service()
    spread_service = container.spread_service()
    pair = read_pair(pair_path, mx)
    if pair.mx != pair.my:
        raise DomainException(f"Matchings need equal sides (got {pair.mx} and {pair.my})")
    m = pair.mx
    rng = root_rng(ctx, seed).spawn("match-sample")

    if SampleMode(mode) is SampleMode.EXACT:
        matchings = matching_service.sample_many_exact(pair, samples, rng)
    else:
        chain_steps = steps or matching_service.default_mcmc_steps(m)
        stream = rng.spawn("mcmc")
        matchings = [matching_service.sample_matching_mcmc(pair, chain_steps, stream.child(i)) for i in range(samples)]

    partners = [matching.partners.tolist() for matching in matchings]
    lines = "\n".join(" ".join(str(j) for j in row) for row in partners)

    report = spread_service.tally(
        partners, m, m, spread_service.register_probes(m, m, 0, rng), attempts=len(partners)
    )
    summary = {"count": len(partners), "max_pin_freq": report.k1_max_freq, "spread_constant": report.c1}
    logger.info(f"Sampled {len(partners)} {mode} matchings of a {m}x{m} pair")

    if out is not None:
        emit(lines, out)
    elif lines:
        click.echo(lines)
    emit_json(summary, None)
