"""CLI entry point for the spread blow-up pipeline."""

import logging
import sys
from typing import Any

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from app import create_pipeline
from app.app_config import AppSettings
from app.config import Settings
from app.exceptions import ConfigurationError
from app.utils.cli_error_handlers import EXIT_USAGE, report_error

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class PipelineGroup(click.Group):
    """Click group mapping pipeline exceptions to exit codes.

    Usage errors exit with 1 instead of click's default 2, which is reserved
    for failed preconditions.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as e:
            code = report_error(e)
            if code is None:
                raise
            sys.exit(code)

    def main(self, *args: Any, standalone_mode: bool = True, **kwargs: Any) -> Any:
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            code = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(code if isinstance(code, int) else 0)


@click.group(cls=PipelineGroup)
@click.pass_context
def cli(ctx: click.Context) -> None:
    """spread-blowup CLI: regularity, matchings, blow-up embeddings and cycle powers."""
    ctx.ensure_object(dict)
    if "container" not in ctx.obj:
        ctx.obj["container"] = create_pipeline(ctx.obj.get("settings"), ctx.obj.get("app_settings"))


def main() -> None:
    """Main CLI entry point."""
    # Load environment variables from .env file if present
    load_dotenv()

    try:
        settings = Settings.load()
        settings.validate_config()
        app_settings = AppSettings.load(run_env=settings.run_env)
    except (ConfigurationError, ValidationError) as e:
        sys.exit(report_error(e) or EXIT_USAGE)

    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT, stream=sys.stderr)

    # Register app-specific commands via hook
    from app.startup import register_cli_commands

    register_cli_commands(cli)

    cli(obj={"settings": settings, "app_settings": app_settings})


if __name__ == "__main__":
    main()
