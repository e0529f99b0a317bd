"""Schemas for fanned-out seeded jobs and the hamilton-run trial records."""

from enum import StrEnum

from pydantic import BaseModel, Field


class JobStatus(StrEnum):
    """Job execution status."""
    PENDING = "pending"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


class JobProgressUpdate(BaseModel):
    """Progress update data."""
    text: str = Field(..., description="Progress description text")
    value: float = Field(..., ge=0.0, le=1.0, description="Progress value from 0.0 to 1.0")


class TryRecord(BaseModel):
    """One ξ-good draw inside a perturbed trial."""
    attempt: int = Field(description="Zero-based draw index")
    success: bool = Field(description="Every C^k edge is present in G ∪ G(n,p) under this φ")
    random_cover: bool = Field(description="H_φ lies entirely inside the sampled G(n,p)")
    missing_edges: int = Field(description="C^k edges absent from G ∪ G(n,p) under this φ")
    error: str | None = Field(default=None, description="Pipeline failure for this draw, if any")


class TrialOutcome(BaseModel):
    """Outcome of one perturbed-graph trial.

    Finitely many φ-draws give a lower bound on, not the value of, the
    probability that some ξ-good φ has H_φ inside the random graph.
    """
    trial: int = Field(default=0, description="Trial index within the sweep")
    p: float = Field(ge=0, le=1, description="Edge probability of the random graph")
    tries_used: int = Field(description="Draws made before stopping")
    success: bool = Field(description="Some draw succeeded")
    random_edges: int = Field(description="Edge count of the sampled G(n,p)")
    failures: int = Field(default=0, description="Draws that raised a pipeline error")
    tries: list[TryRecord] = Field(default_factory=list)
    max_pin_estimate: float | None = Field(
        default=None, description="n times the largest single-pin frequency of the ξ-good sampler"
    )
