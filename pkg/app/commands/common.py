"""Options and helpers shared by the subcommands."""

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
from pydantic import BaseModel

from app.config import Settings
from app.models.graph import BipartitePair
from app.models.rng_state import RngState
from app.schemas.blowup_schema import ParamSet
from app.services.container import ServiceContainer
from app.utils.graph_io import read_edge_list

ModelT = TypeVar("ModelT", bound=BaseModel)
F = TypeVar("F", bound=Callable[..., Any])

INPUT_PATH = click.Path(dir_okay=False, path_type=Path)


def seed_option(fn: F) -> F:
    return click.option(
        "--seed",
        type=click.IntRange(0, 2**64 - 1),
        default=None,
        help="64-bit seed; DEFAULT_SEED when omitted",
    )(fn)


def out_option(fn: F) -> F:
    return click.option(
        "--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output file (stdout when omitted)"
    )(fn)


def params_option(fn: F) -> F:
    return click.option("--params", "params_path", type=INPUT_PATH, default=None, help="ParamSet JSON file")(fn)


def get_container(ctx: click.Context) -> ServiceContainer:
    container: ServiceContainer = ctx.obj["container"]
    return container


def root_rng(ctx: click.Context, seed: int | None) -> RngState:
    """Root stream of a command; every stage spawns its own labelled child."""
    if seed is None:
        settings: Settings = get_container(ctx).config()
        seed = settings.default_seed
    return RngState(seed)


def read_document(path: Path, model: type[ModelT]) -> ModelT:
    return model.model_validate_json(path.read_text(encoding="utf-8"))


def read_params(path: Path | None) -> ParamSet | None:
    return read_document(path, ParamSet) if path is not None else None


def read_pair(path: Path, mx: int | None = None) -> BipartitePair:
    return read_edge_list(path).to_pair(mx)


def emit(text: str, out: Path | None) -> None:
    """Write machine-readable output to --out, or to stdout."""
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")


def emit_json(payload: BaseModel | dict[str, Any] | list[Any], out: Path | None) -> None:
    if isinstance(payload, BaseModel):
        emit(payload.model_dump_json(indent=2), out)
    else:
        emit(json.dumps(payload, indent=2), out)
