"""stars: partition a reduced graph into stars with at most k leaves."""

from pathlib import Path

import click

from app.commands.common import INPUT_PATH, emit_json, get_container, out_option, root_rng, seed_option
from app.models.star_system import ReducedGraph
from app.utils.graph_io import read_edge_list


@click.command("stars")
@click.option("--reduced", "reduced_path", type=INPUT_PATH, required=True, help="Edge list of R")
@click.option("--k", type=click.IntRange(min=1), required=True, help="Largest number of leaves per star")
@click.option("--alpha", type=float, required=True, help="Minimum-degree surplus α")
@click.option("--no-hypothesis", is_flag=True, help="Skip the (1/(k+1) + α/4)m minimum-degree check")
@seed_option
@out_option
@click.pass_context
def stars_command(
    ctx: click.Context,
    reduced_path: Path,
    k: int,
    alpha: float,
    no_hypothesis: bool,
    seed: int | None,
    out: Path | None,
) -> None:
    """Writes the partition as [{"center": c, "leaves": [...]}, ...]."""
    service = get_container(ctx).reduced_graph_service()
    graph = ReducedGraph.from_graph(read_edge_list(reduced_path).to_graph())
    partition = service.star_partition(
        graph, k, alpha, root_rng(ctx, seed).spawn("stars"), check_hypothesis=not no_hypothesis
    )
    emit_json(partition.to_dict(), out)
