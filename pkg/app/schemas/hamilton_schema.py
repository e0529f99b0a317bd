"""Pydantic schemas for the completion-graph reports."""

from pydantic import BaseModel, Field


class SubgraphSizeRow(BaseModel):
    """Densest connected subgraph of H_φ on v vertices, against both edge bounds."""

    v: int = Field(ge=1, description="Vertex count v(T)")
    max_edges: int = Field(ge=0, description="Largest |E(T)| over connected T with v(T) = v")
    formula_bound: int = Field(description="Closed-form bound evaluated at (v, k)")
    relaxed_bound: int = Field(description="v(k-1) - (k-1)")
    formula_ok: bool
    relaxed_ok: bool


class EdgeCountReport(BaseModel):
    """Edge counts of small connected subgraphs of a completion graph."""

    k: int
    vmax: int = Field(description="Largest subgraph order enumerated")
    subgraphs: int = Field(ge=0, description="Connected vertex sets enumerated")
    rows: list[SubgraphSizeRow] = Field(default_factory=list)
    violations: list[str] = Field(default_factory=list, description="One line per violated bound")

    @property
    def passed(self) -> bool:
        return not self.violations


class EdgeSpreadReport(BaseModel):
    """Decay of the probability that H_φ shares t edges with a probe subgraph."""

    n: int
    k: int
    samples: int = Field(description="Draws that produced a completion graph")
    failures: int = Field(default=0, description="Draws that raised a pipeline error")
    probe: list[tuple[int, int]] = Field(description="Probe edges as host-vertex pairs, in nesting order")
    prefix_frequencies: list[float] = Field(
        description="Index t: fraction of draws containing the first t probe edges"
    )
    exact_frequencies: list[float] = Field(
        description="Index t: fraction of draws sharing exactly t edges with the whole probe"
    )
    log_frequencies: list[float | None] = Field(description="Natural log of exact_frequencies; None for zero")
    c_prime: float = Field(description="Constant C′ of the reference line")
    reference: list[float] = Field(description="Index t: t·log(C′/n)/(k-1)")
    monotone: bool = Field(description="exact_frequencies never increase with t")
    within_bound: bool = Field(description="Every exact frequency for t >= 1 is at most (C′/n)^(t/(k-1))")
    partial: bool = Field(description="No draw shared the whole probe")
