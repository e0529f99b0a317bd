"""gen: synthetic instances for every stage of the pipeline."""

import logging
from pathlib import Path
from typing import Any

import click

from app.commands.common import emit, emit_json, get_container, out_option, root_rng, seed_option
from app.schemas.instance_schema import (
    ClassSystemDocument,
    HamiltonHostDocument,
    InstanceKind,
    TargetDocument,
)
from app.utils.graph_io import format_pair

logger = logging.getLogger(__name__)

_REQUIRED: dict[InstanceKind, tuple[str, ...]] = {
    InstanceKind.BIPARTITE: ("m", "p"),
    InstanceKind.CLASS_SYSTEM: ("r", "size", "d"),
    InstanceKind.TARGET_FACTOR: ("r", "size", "max_degree"),
    InstanceKind.HAMILTON_HOST: ("n", "k", "alpha"),
}


@click.command("gen")
@click.option("--kind", type=click.Choice([kind.value for kind in InstanceKind]), required=True)
@click.option("--m", type=int, default=None, help="bipartite: X side size")
@click.option("--my", type=int, default=None, help="bipartite: Y side size (defaults to --m)")
@click.option("--p", type=float, default=None, help="bipartite: edge probability")
@click.option("--r", type=int, default=None, help="class-system, target-factor: number of classes")
@click.option("--size", type=int, default=None, help="class-system, target-factor: class size N")
@click.option("--d", type=float, default=None, help="class-system, hamilton-host: pair density")
@click.option("--max-degree", type=int, default=None, help="target-factor: degree bound Δ")
@click.option("--fragment", type=int, default=0, show_default=True, help="target-factor: path-power blocks")
@click.option("--restricted", type=int, default=0, show_default=True, help="target-factor: vertices with W_x")
@click.option("--restriction-fraction", type=float, default=0.5, show_default=True)
@click.option("--n", type=int, default=None, help="hamilton-host: vertex count")
@click.option("--k", type=int, default=None, help="hamilton-host: cycle power")
@click.option("--alpha", type=float, default=None, help="hamilton-host: minimum-degree surplus α")
@click.option("--exceptional", type=int, default=0, show_default=True, help="hamilton-host: |V₀|")
@click.option("--exceptional-density", type=float, default=0.8, show_default=True)
@seed_option
@out_option
@click.pass_context
def gen_command(ctx: click.Context, kind: str, seed: int | None, out: Path | None, **options: Any) -> None:
    """Generate a deterministic instance: an edge list for bipartite, JSON otherwise."""
    instance_kind = InstanceKind(kind)
    missing = [name for name in _REQUIRED[instance_kind] if options[name] is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise click.UsageError(f"--kind {kind} needs {flags}")

    service = get_container(ctx).instance_service()
    rng = root_rng(ctx, seed).spawn(instance_kind.value)

    match instance_kind:
        case InstanceKind.BIPARTITE:
            pair = service.bipartite(options["m"], options["p"], rng, my=options["my"])
            emit(format_pair(pair), out)
        case InstanceKind.CLASS_SYSTEM:
            system = service.class_system(options["r"], options["size"], options["d"], rng)
            emit_json(ClassSystemDocument.from_system(system, d=options["d"]), out)
        case InstanceKind.TARGET_FACTOR:
            target = service.target_factor(
                options["r"],
                options["size"],
                options["max_degree"],
                rng,
                fragment=options["fragment"],
                restricted=options["restricted"],
                restriction_fraction=options["restriction_fraction"],
            )
            emit_json(TargetDocument.from_target(target), out)
        case InstanceKind.HAMILTON_HOST:
            host = service.hamilton_host(
                options["n"],
                options["k"],
                options["alpha"],
                rng,
                exceptional=options["exceptional"],
                d=0.5 if options["d"] is None else options["d"],
                exceptional_density=options["exceptional_density"],
            )
            emit_json(HamiltonHostDocument.from_host(host), out)

    logger.info(f"Generated {kind} instance with seed {rng.seed}")
