"""Startup hooks for the spread blow-up pipeline.

Hook points called by the CLI entry point:
  - create_container()
  - register_cli_commands()
"""

from __future__ import annotations

import click

from app.app_config import AppSettings
from app.config import Settings
from app.services.container import ServiceContainer


def create_container(settings: Settings, app_settings: AppSettings) -> ServiceContainer:
    """Create and configure the application's service container."""
    container = ServiceContainer()
    container.config.override(settings)
    container.app_config.override(app_settings)
    return container


def register_cli_commands(cli: click.Group) -> None:
    """Register the pipeline subcommands."""
    from app.commands.blowup import embed_command
    from app.commands.hamilton import hamilton_run_command
    from app.commands.instances import gen_command
    from app.commands.matchings import match_sample_command
    from app.commands.regularity import check_regularity_command, extract_command
    from app.commands.spread import spread_report_command
    from app.commands.stars import stars_command

    for command in (
        gen_command,
        check_regularity_command,
        extract_command,
        match_sample_command,
        embed_command,
        stars_command,
        hamilton_run_command,
        spread_report_command,
    ):
        if command.name not in cli.commands:
            cli.add_command(command)
