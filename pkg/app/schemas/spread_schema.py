"""Pydantic schemas for empirical and exact vertex-spread reports."""

from pydantic import BaseModel, Field


class PinFrequency(BaseModel):
    """Empirical frequency of the pin φ(x) = y."""

    x: int
    y: int
    count: int = Field(ge=0)
    frequency: float = Field(ge=0, le=1)


class SpreadReport(BaseModel):
    """Measured one- and two-pin spread of an injection sampler.

    Frequencies are taken over all attempted samples, so for a sampler
    defined on every x the k1 frequencies of one x sum to the success rate.
    """

    samples: int = Field(description="Attempted samples")
    successes: int = Field(description="Samples that produced an injection")
    failures: int = Field(default=0, description="Samples that raised a pipeline error")
    domain_size: int
    codomain_size: int = Field(description="N in the reported constants")
    k1_table: list[PinFrequency] = Field(
        default_factory=list, description="Most frequent single pins, highest first"
    )
    k1_max_freq: float = Field(ge=0, le=1, description="Largest single-pin frequency")
    wilson_upper: float = Field(ge=0, le=1, description="95% Wilson upper bound on k1_max_freq")
    c1: float = Field(ge=0, description="N · k1_max_freq")
    c1_upper: float = Field(ge=0, description="N · wilson_upper")
    pair_probes: int = Field(ge=0, description="Pre-registered (x1, x2, y1, y2) probes")
    k2_max_freq: float = Field(default=0.0, ge=0, le=1, description="Largest joint frequency over the probes")
    k2_wilson_upper: float = Field(default=0.0, ge=0, le=1)
    c2: float = Field(default=0.0, ge=0, description="N · k2_max_freq^(1/2)")
    c2_upper: float = Field(default=0.0, ge=0, description="N · k2_wilson_upper^(1/2)")
    consistent: bool = Field(description="Every x has total pin frequency equal to the success rate")


class ExactPin(BaseModel):
    """Exact pin probability under the uniform perfect-matching law."""

    x: int
    y: int
    probability: str = Field(description="Exact value as a fraction string")
    value: float


class ExactSpreadReport(BaseModel):
    """Exact spread constants of the uniform perfect matching of a small pair."""

    m: int = Field(description="Side size of the pair")
    kmax: int = Field(ge=1, le=2)
    total_matchings: int = Field(ge=1)
    pins: list[ExactPin] = Field(default_factory=list, description="Every single pin with nonzero probability")
    max_k1: str = Field(description="Largest single-pin probability as a fraction")
    c1: float = Field(description="m · max_k1")
    max_k2: str | None = Field(default=None, description="Largest two-pin probability as a fraction")
    c2: float | None = Field(default=None, description="m · max_k2^(1/2)")
