"""Application-specific configuration for the spread blow-up pipeline.

This module holds the algorithm defaults (budgets, sampler limits, slack
constants) separately from the infrastructure configuration in config.py.
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

_PROJECT_ROOT = Path(__file__).resolve().parent.parent


class AppEnvironment(BaseSettings):
    """Raw environment variable loading for app-specific settings."""

    model_config = SettingsConfigDict(
        env_file=_PROJECT_ROOT / ".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # ── Regularity ─────────────────────────────────────────────────────

    EXTRACTION_SLACK_C: float = Field(
        default=8.0,
        description="Absolute constant C in the extraction slack d̄ + Cε"
    )
    WITNESS_BUDGET: int = Field(
        default=10_000,
        description="Candidate subset pairs tried by the randomized irregularity search"
    )

    # ── Matchings ──────────────────────────────────────────────────────

    EXACT_MATCHING_LIMIT: int = Field(
        default=24,
        description="Largest side size handled by the subset-DP counter"
    )
    MCMC_STEP_FACTOR: int = Field(
        default=50,
        description="MCMC steps per m·log m when sampling above the exact limit"
    )

    # ── Blow-up ────────────────────────────────────────────────────────

    HYPOTHESIS_EPS: float = Field(
        default=0.2,
        description="ε used when checking super-regularity of reduced pairs before embedding"
    )
    PHASE_TWO_EPS: float = Field(
        default=0.5,
        description="ε handed to the spread matching sampler in Phase II"
    )
    RELAXED_P2: bool = Field(
        default=False,
        description="Check (P2) on a sampled subset of pairs instead of exactly"
    )
    RELAXED_P2_PAIRS: int = Field(
        default=10_000,
        description="Sampled pair budget for relaxed (P2) checks"
    )
    CHECK_INVARIANTS: bool = Field(
        default=False,
        description="Recompute and assert embedding invariants after every step"
    )
    P1_SAMPLE_FRACTION: float = Field(
        default=0.05,
        description="Fraction of unembedded vertices sampled for (P1) recomputation"
    )

    # ── Reduced graph / Hamilton ───────────────────────────────────────

    STAR_RESTARTS: int = Field(
        default=16,
        description="Maximal matchings tried before a star partition is declared infeasible"
    )
    STAR_EXHAUSTIVE_LIMIT: int = Field(
        default=10,
        description="Reduced graphs up to this size fall back to exhaustive star search"
    )
    REJECTION_BUDGET: int = Field(
        default=10_000,
        description="Rejection attempts for A′_S before the exact sequential sampler"
    )


class AppSettings(BaseModel):
    """Application-specific settings for the spread blow-up pipeline."""

    model_config = ConfigDict(from_attributes=True)

    extraction_slack_c: float = 8.0
    witness_budget: int = 10_000
    exact_matching_limit: int = 24
    mcmc_step_factor: int = 50
    hypothesis_eps: float = 0.2
    phase_two_eps: float = 0.5
    relaxed_p2: bool = False
    relaxed_p2_pairs: int = 10_000
    check_invariants: bool = False
    p1_sample_fraction: float = 0.05
    star_restarts: int = 16
    star_exhaustive_limit: int = 10
    rejection_budget: int = 10_000

    def validate_config(self) -> None:
        """Validate budgets and fractions.

        Raises:
            ConfigurationError: If any setting is out of range
        """
        from app.exceptions import ConfigurationError

        errors: list[str] = []

        for name in ("witness_budget", "mcmc_step_factor", "relaxed_p2_pairs",
                     "star_restarts", "rejection_budget"):
            if getattr(self, name) < 1:
                errors.append(f"{name.upper()} must be at least 1")
        if not 1 <= self.exact_matching_limit <= 24:
            errors.append("EXACT_MATCHING_LIMIT must lie in [1, 24]")
        if self.extraction_slack_c <= 0:
            errors.append("EXTRACTION_SLACK_C must be positive")
        for name in ("hypothesis_eps", "phase_two_eps", "p1_sample_fraction"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                errors.append(f"{name.upper()} must lie in (0, 1] (got {value})")

        if errors:
            raise ConfigurationError(
                "Invalid configuration:\n  - " + "\n  - ".join(errors)
            )

    @classmethod
    def load(cls, env: "AppEnvironment | None" = None, run_env: str = "development") -> "AppSettings":
        """Load app settings from environment variables."""
        if env is None:
            env = AppEnvironment()

        check_invariants = env.CHECK_INVARIANTS
        if run_env == "testing" and "CHECK_INVARIANTS" not in env.model_fields_set:
            check_invariants = True

        return cls(
            extraction_slack_c=env.EXTRACTION_SLACK_C,
            witness_budget=env.WITNESS_BUDGET,
            exact_matching_limit=env.EXACT_MATCHING_LIMIT,
            mcmc_step_factor=env.MCMC_STEP_FACTOR,
            hypothesis_eps=env.HYPOTHESIS_EPS,
            phase_two_eps=env.PHASE_TWO_EPS,
            relaxed_p2=env.RELAXED_P2,
            relaxed_p2_pairs=env.RELAXED_P2_PAIRS,
            check_invariants=check_invariants,
            p1_sample_fraction=env.P1_SAMPLE_FRACTION,
            star_restarts=env.STAR_RESTARTS,
            star_exhaustive_limit=env.STAR_EXHAUSTIVE_LIMIT,
            rejection_budget=env.REJECTION_BUDGET,
        )
