"""embed: spanning embedding of a target into a super-regular class system."""

import logging
from pathlib import Path

import click
from pydantic import ValidationError

from app.commands.common import (
    INPUT_PATH,
    emit_json,
    get_container,
    out_option,
    params_option,
    read_document,
    read_params,
    root_rng,
    seed_option,
)
from app.exceptions import DomainException
from app.models.class_system import ClassSystem
from app.models.target_spec import TargetSpec
from app.schemas.blowup_schema import ParamSet
from app.schemas.instance_schema import ClassSystemDocument, TargetDocument

logger = logging.getLogger(__name__)


def default_params(system: ClassSystem, target: TargetSpec, d: float | None, max_degree: int) -> ParamSet:
    """Desk-scale chain with α taken from the narrowest W_x."""
    if d is None:
        densities = [system.pair(i, j).edge_count / system.N**2 for i, j in system.reduced_edges]
        d = min(densities, default=1.0)
    widths = [len(allowed) for allowed in target.w_sets.values()]
    alpha = min(widths) / system.N if widths and system.N else 1.0
    try:
        return ParamSet.desk_defaults(d=d, alpha=alpha, max_degree=max_degree)
    except ValidationError as e:
        raise DomainException(
            f"Default parameters do not fit this instance (d={d:.3f}, α={alpha:.3f}); pass --params"
        ) from e


@click.command("embed")
@click.option("--system", "system_path", type=INPUT_PATH, required=True, help="Class system JSON from gen")
@click.option("--target", "target_path", type=INPUT_PATH, required=True, help="Target JSON from gen")
@params_option
@click.option("--relaxed-p2", is_flag=True, help="Check (P2) on sampled pairs instead of exactly")
@click.option("--reduce-pairs", is_flag=True, help="Thin every reduced pair to exact density d first")
@seed_option
@out_option
@click.pass_context
def embed_command(
    ctx: click.Context,
    system_path: Path,
    target_path: Path,
    params_path: Path | None,
    relaxed_p2: bool,
    reduce_pairs: bool,
    seed: int | None,
    out: Path | None,
) -> None:
    """Embed the target; writes the vertex map and the run log as JSON."""
    container = get_container(ctx)
    system_document = read_document(system_path, ClassSystemDocument)
    target_document = read_document(target_path, TargetDocument)
    system = system_document.to_system()
    target = target_document.to_target()
    params = read_params(params_path) or default_params(
        system, target, system_document.d, target_document.max_degree
    )

    blowup_service = container.blowup_service(relaxed_p2=True) if relaxed_p2 else container.blowup_service()
    if relaxed_p2:
        logger.warning(f"Relaxed (P2): {blowup_service.relaxed_p2_pairs} sampled pairs per class")

    embedding = blowup_service.embed(target, system, params, root_rng(ctx, seed), reduce_pairs=reduce_pairs)
    payload = embedding.to_dict()
    payload["verified"] = blowup_service.verify_embedding(target, system, embedding)
    logger.info(f"Embedded {target.n} vertices, verified={payload['verified']}")
    emit_json(payload, out)
