"""Infrastructure settings for the pipeline commands.

Two layers, as in app/app_config.py:

- ``Environment`` reads raw UPPER_CASE variables from the process
  environment and ``.env``.
- ``Settings`` holds the resolved lowercase values the container and the
  commands consume. Tests build it directly, for example
  ``Settings(run_env="testing", default_seed=7)``.

Only run mode, logging, the default seed and worker count live here; the
algorithm constants are AppSettings.
"""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

_PROJECT_ROOT = Path(__file__).resolve().parent.parent

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

RunEnv = Literal["development", "testing", "production"]


class Environment(BaseSettings):
    """Raw values from the environment; no derivation happens here."""

    model_config = SettingsConfigDict(
        env_file=_PROJECT_ROOT / ".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    RUN_ENV: RunEnv = Field(default="development", description="development, testing or production")
    LOG_LEVEL: str = Field(default="INFO", description="Root log level of the stderr log")
    DEFAULT_SEED: int = Field(default=0, description="Root seed when a command runs without --seed")
    TASK_MAX_WORKERS: int = Field(
        default=4, description="Threads used to fan out independent trials and samples"
    )


class Settings(BaseModel):
    """Resolved infrastructure settings."""

    model_config = ConfigDict(from_attributes=True)

    run_env: RunEnv = "development"
    log_level: str = "INFO"
    default_seed: int = 0
    task_max_workers: int = 4

    def validate_config(self) -> None:
        """Collect every out-of-range value and raise them together.

        Raises:
            ConfigurationError: if any value is unusable
        """
        from app.exceptions import ConfigurationError

        problems: list[str] = []
        if self.log_level not in _LOG_LEVELS:
            problems.append(f"LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)} (got {self.log_level})")
        if self.task_max_workers < 1:
            problems.append(f"TASK_MAX_WORKERS must be at least 1 (got {self.task_max_workers})")
        if not 0 <= self.default_seed < 2**64:
            problems.append(f"DEFAULT_SEED must fit in 64 unsigned bits (got {self.default_seed})")
        if problems:
            raise ConfigurationError("Invalid configuration:\n  - " + "\n  - ".join(problems))

    @classmethod
    def load(cls, env: Environment | None = None) -> "Settings":
        """Resolve settings from the environment, or from ``env`` when given."""
        env = env or Environment()
        return cls(
            run_env=env.RUN_ENV,
            log_level=env.LOG_LEVEL.upper(),
            default_seed=env.DEFAULT_SEED,
            task_max_workers=env.TASK_MAX_WORKERS,
        )
