"""Pydantic schemas for regularity checks and extraction."""

from pydantic import BaseModel, Field, model_validator


class IrregularityWitness(BaseModel):
    """Pair of subsets whose density deviates from the pair density by more than ε."""

    x_subset: list[int] = Field(description="Vertices of the X-side subset")
    y_subset: list[int] = Field(description="Vertices of the Y-side subset")
    subset_density: float = Field(description="Density between the two subsets")
    pair_density: float = Field(description="Density of the whole pair")
    deviation: float = Field(description="Absolute difference of the two densities")


class RegularityVerdict(BaseModel):
    """Outcome of the codegree second-moment test."""

    stat: int = Field(description="Second-moment sum S of squared codegrees")
    threshold: float = Field(description="d⁴|X|²|Y|² + ξ|X|²|Y|² (comparison itself is exact)")
    density: float = Field(description="Pair density d")
    xi: float = Field(description="Slack ξ used for the threshold")
    passed: bool = Field(description="Whether S is at most the threshold")
    witness: IrregularityWitness | None = Field(
        default=None, description="Violating subsets, when a witness search was run and found one"
    )


class ExtractionParams(BaseModel):
    """Parameters of the exact-density spanning subgraph extraction."""

    target_density: float = Field(gt=0, le=1, description="Target density d̄")
    epsilon: float = Field(gt=0, lt=1, description="Regularity parameter ε")
    slack_constant: float = Field(default=8.0, gt=0, description="Absolute constant C in d̄ + Cε")
    removal_cap: int | None = Field(
        default=None,
        ge=0,
        description="Per-vertex removal budget in the final greedy stage; ⌈(C+4)εN⌉ when omitted",
    )

    @model_validator(mode="after")
    def _check_slack(self) -> "ExtractionParams":
        if self.target_density + self.slack_constant * self.epsilon > 1:
            raise ValueError("target_density + slack_constant * epsilon must not exceed 1")
        return self


class ExtractionSummary(BaseModel):
    """Machine-readable verdict written by the extract command."""

    edges: int = Field(description="Edge count of the extracted subgraph")
    min_degree: int = Field(description="Minimum degree over both sides")
    max_degree: int = Field(description="Maximum degree over both sides")
    quasirandom_pass: bool = Field(description="Whether the output passes the quasirandom test")
