"""Pydantic schemas for the embedding algorithm parameters and run log."""

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, model_validator

# Chain order, smallest first; every entry must be strictly below the next
_CHAIN = ("eps", "eps_p", "eps_pp", "beta", "delta3", "delta2", "delta1", "delta0")


class ParamSet(BaseModel):
    """Constant chain ε < ε′ < ε″ < β < δ₃ < δ₂ < δ₁ < δ₀ < min(d, α) and the degree bound Δ."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    eps: float = Field(gt=0, lt=1, description="Regularity parameter ε of the host pairs")
    eps_p: float = Field(
        gt=0, lt=1, validation_alias=AliasChoices("eps_p", "epsP"), description="ε′, (P2) allowance"
    )
    eps_pp: float = Field(
        gt=0, lt=1, validation_alias=AliasChoices("eps_pp", "epsPP"), description="ε″, bound on |E_i| / N"
    )
    beta: float = Field(gt=0, lt=1, description="β, size of D_i and of W relative to N")
    delta3: float = Field(gt=0, lt=1, description="δ₃, low-set size scale")
    delta2: float = Field(gt=0, lt=1, description="δ₂, checkpoint spacing s = ⌈δ₂N⌉")
    delta1: float = Field(gt=0, lt=1, description="δ₁, low-set threshold")
    delta0: float = Field(gt=0, lt=1, description="δ₀, size of B_i and minimum-degree ratio of the pairs")
    d: float = Field(gt=0, le=1, description="Pair density d")
    alpha: float = Field(gt=0, le=1, description="α, lower bound on |W_x| / N")
    max_degree: int = Field(
        ge=0,
        validation_alias=AliasChoices("max_degree", "Delta"),
        description="Maximum degree Δ of the target graph",
    )

    @model_validator(mode="after")
    def _check_chain(self) -> "ParamSet":
        chain = [(name, getattr(self, name)) for name in _CHAIN]
        chain.append(("min(d, alpha)", min(self.d, self.alpha)))
        for (low_name, low), (high_name, high) in zip(chain, chain[1:], strict=False):
            if not low < high:
                raise ValueError(f"Parameter chain requires {low_name} < {high_name} (got {low} >= {high})")
        return self

    @classmethod
    def desk_defaults(cls, d: float, alpha: float, max_degree: int) -> "ParamSet":
        """Default chain for N between 40 and 200."""
        return cls(
            eps=0.01,
            eps_p=0.02,
            eps_pp=0.04,
            beta=0.05,
            delta3=0.08,
            delta2=0.12,
            delta1=0.2,
            delta0=0.3,
            d=d,
            alpha=alpha,
            max_degree=max_degree,
        )

    @classmethod
    def hamilton_defaults(cls, max_degree: int, alpha: float = 0.1) -> "ParamSet":
        """Sparse chain for the cycle-power targets: one B and one D vertex per class at N below 100.

        d + ε = 1, so (P2) holds on the complete star pairs of a planted host.
        """
        return cls(
            eps=0.001,
            eps_p=0.002,
            eps_pp=0.003,
            beta=0.004,
            delta3=0.005,
            delta2=0.01,
            delta1=0.015,
            delta0=0.02,
            d=0.999,
            alpha=alpha,
            max_degree=max_degree,
        )


class ReorderEvent(BaseModel):
    """Low-set vertices moved forward at a checkpoint."""

    j: int = Field(description="Embedded prefix length at the checkpoint")
    moved: list[int] = Field(description="Target vertices moved forward, in their new order")


class EmbeddingRunLog(BaseModel):
    """Diagnostics collected during one embedding run."""

    reorder_events: list[ReorderEvent] = Field(default_factory=list)
    moved_total: int = Field(default=0, description="Vertices moved forward over the whole run")
    admissible_sizes: list[int] = Field(
        default_factory=list, description="|A| for every regular Phase I step, in order"
    )
    min_admissible: int | None = Field(default=None, description="Smallest |A| seen")
    exceptional_sizes: dict[int, int] = Field(
        default_factory=dict, description="|E_i| per class at the exceptional step"
    )
    phase_one_end: int | None = Field(default=None, description="T, prefix length after Phase I")
    phase_two_sizes: dict[int, int] = Field(
        default_factory=dict, description="Matching size per class in Phase II"
    )
    unthinned_classes: list[int] = Field(
        default_factory=list,
        description="Phase II classes whose matching was drawn from the unthinned pair",
    )
    bound_violations: list[str] = Field(
        default_factory=list,
        description="Asymptotic bounds observed to fail at this scale (invariant-check mode only)",
    )
    added_edges: int = Field(default=0, description="Edges added to the target during pre-processing")
