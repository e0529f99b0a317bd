"""Spread blow-up pipeline factory."""

import logging

from app.app_config import AppSettings
from app.config import Settings
from app.services.container import ServiceContainer


def create_pipeline(
    settings: "Settings | None" = None, app_settings: "AppSettings | None" = None
) -> ServiceContainer:
    """Load and validate configuration, then build the service container.

    App-specific wiring is injected through app/startup.py:
    - create_container(): builds the DI container with the pipeline services
    - register_cli_commands(): adds the subcommands to the click group
    """
    if settings is None:
        settings = Settings.load()
    settings.validate_config()

    # Algorithm defaults load alongside infrastructure settings
    if app_settings is None:
        app_settings = AppSettings.load(run_env=settings.run_env)
    app_settings.validate_config()

    from app.startup import create_container

    container = create_container(settings, app_settings)

    if app_settings.relaxed_p2:
        logging.getLogger(__name__).warning(
            f"Relaxed (P2) checks are on: {app_settings.relaxed_p2_pairs} sampled pairs per class"
        )
    if app_settings.check_invariants:
        logging.getLogger(__name__).info("Invariant checking is on")

    return container
