"""spread-report: measured or exact vertex spread of the pipeline's samplers."""

import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click

from app.commands.blowup import default_params
from app.commands.common import (
    INPUT_PATH,
    emit_json,
    get_container,
    out_option,
    params_option,
    read_document,
    read_pair,
    read_params,
    root_rng,
    seed_option,
)
from app.exceptions import DomainException, ValidationException
from app.models.rng_state import RngState
from app.schemas.blowup_schema import ParamSet
from app.schemas.instance_schema import ClassSystemDocument, HamiltonHostDocument, TargetDocument
from app.services.container import ServiceContainer
from app.services.spread_service import Injection

logger = logging.getLogger(__name__)


def parse_phi_lines(text: str, source: str) -> list[Injection]:
    """One injection per line: a JSON list, a {"x": y} object or a {"phi": [...]} record."""
    samples: list[Injection] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            value: Any = json.loads(line)
            if isinstance(value, dict) and "phi" in value:
                value = value["phi"]
            if isinstance(value, list):
                samples.append([int(y) for y in value])
            elif isinstance(value, dict):
                samples.append({int(x): int(y) for x, y in value.items()})
            else:
                raise ValueError("expected a list or an object")
        except (ValueError, TypeError) as e:
            raise ValidationException(f"{source}:{line_number}: not an injection ({e})") from e
    return samples


def _extent(injection: Injection) -> tuple[int, int]:
    """Domain size implied by one sample and its largest image."""
    if isinstance(injection, dict):
        return max(injection, default=-1) + 1, max(injection.values(), default=-1)
    return len(injection), max(injection, default=-1)


def _blowup_sampler(
    container: ServiceContainer, system_path: Path, target_path: Path, params: ParamSet | None
) -> tuple[Callable[[RngState], Injection], int, int]:
    """Embedding sampler with images written as positions inside their class, so N is the codomain."""
    system_document = read_document(system_path, ClassSystemDocument)
    target_document = read_document(target_path, TargetDocument)
    system = system_document.to_system()
    target = target_document.to_target()
    params = params or default_params(system, target, system_document.d, target_document.max_degree)
    position = {v: t for part in system.classes for t, v in enumerate(part)}
    blowup_service = container.blowup_service()

    def sample(rng: RngState) -> Injection:
        embedding = blowup_service.embed(target, system, params, rng)
        return [position[embedding.mapping[x]] for x in range(target.n)]

    return sample, target.n, system.N


def _hamilton_sampler(
    container: ServiceContainer, host_path: Path, params: ParamSet | None, rng: RngState
) -> tuple[Callable[[RngState], Injection], int, int]:
    host = read_document(host_path, HamiltonHostDocument).to_host()
    hamilton_service = container.hamilton_service()
    setup = hamilton_service.prepare(host, rng.spawn("prepare"))
    params = params or ParamSet.hamilton_defaults(max_degree=2 * host.k, alpha=host.alpha)

    def sample(draw: RngState) -> Injection:
        return hamilton_service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, draw).phi

    return sample, host.n, host.n


@click.command("spread-report")
@click.option("--phi-file", type=INPUT_PATH, default=None, help="Stored samples, one JSON injection per line")
@click.option("--codomain", type=click.IntRange(min=1), default=None, help="Codomain size for --phi-file")
@click.option("--pair", "pair_path", type=INPUT_PATH, default=None, help="Uniform perfect matchings of this pair")
@click.option("--mx", type=int, default=None, help="X side size when the pair file has no bipartite header")
@click.option("--exact", is_flag=True, help="With --pair: exact pin probabilities instead of sampling")
@click.option("--kmax", type=click.IntRange(1, 2), default=2, show_default=True, help="Pins for --exact")
@click.option("--system", "system_path", type=INPUT_PATH, default=None, help="With --target: blow-up embeddings")
@click.option("--target", "target_path", type=INPUT_PATH, default=None)
@click.option("--host", "host_path", type=INPUT_PATH, default=None, help="ξ-good bijections of this host")
@click.option("--samples", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--probes", type=click.IntRange(min=0), default=1000, show_default=True, help="Pre-registered pin pairs")
@params_option
@seed_option
@out_option
@click.pass_context
def spread_report_command(
    ctx: click.Context,
    phi_file: Path | None,
    codomain: int | None,
    pair_path: Path | None,
    mx: int | None,
    exact: bool,
    kmax: int,
    system_path: Path | None,
    target_path: Path | None,
    host_path: Path | None,
    samples: int,
    probes: int,
    params_path: Path | None,
    seed: int | None,
    out: Path | None,
) -> None:
    """Writes the SpreadReport (or the exact report for --exact) as JSON."""
    sources = [phi_file is not None, pair_path is not None, system_path is not None, host_path is not None]
    if sum(sources) != 1:
        raise click.UsageError("Give exactly one of --phi-file, --pair, --system/--target or --host")
    if (system_path is None) != (target_path is None):
        raise click.UsageError("--system and --target go together")
    if exact and pair_path is None:
        raise click.UsageError("--exact needs --pair")

    container = get_container(ctx)
    spread_service = container.spread_service()
    rng = root_rng(ctx, seed)

    if phi_file is not None:
        injections = parse_phi_lines(phi_file.read_text(encoding="utf-8"), str(phi_file))
        if not injections:
            raise DomainException(f"{phi_file} holds no samples")
        extents = [_extent(injection) for injection in injections]
        domain = max(length for length, _ in extents)
        size = codomain or max(top for _, top in extents) + 1
        emit_json(spread_service.spread_from_samples(injections, domain, size, probes, rng), out)
        return

    if pair_path is not None:
        pair = read_pair(pair_path, mx)
        if exact:
            emit_json(spread_service.exact_spread_uniform_matching(pair, kmax), out)
            return
        matching_service = container.matching_service()

        def sample_matching(draw: RngState) -> Injection:
            return matching_service.sample_uniform_matching_exact(pair, draw).partners.tolist()

        report = spread_service.estimate_vertex_spread(sample_matching, pair.mx, pair.my, samples, probes, rng)
        emit_json(report, out)
        return

    params = read_params(params_path)
    if system_path is not None and target_path is not None:
        sampler, domain, size = _blowup_sampler(container, system_path, target_path, params)
    else:
        assert host_path is not None
        sampler, domain, size = _hamilton_sampler(container, host_path, params, rng)
    report = spread_service.estimate_vertex_spread(sampler, domain, size, samples, probes, rng)
    logger.info(f"Spread report: c1 ≤ {report.c1_upper:.2f} at 95%, c2 = {report.c2:.2f}")
    emit_json(report, out)
