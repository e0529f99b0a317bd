"""Pydantic documents for generated instances, as written by ``gen`` and read back by the commands."""

from enum import StrEnum

from pydantic import BaseModel, Field

from app.models.class_system import ClassSystem
from app.models.graph import Graph
from app.models.hamilton import HamiltonHost
from app.models.target_spec import TargetSpec


class InstanceKind(StrEnum):
    """Generator kinds accepted by ``gen --kind``."""

    BIPARTITE = "bipartite"
    CLASS_SYSTEM = "class-system"
    TARGET_FACTOR = "target-factor"
    HAMILTON_HOST = "hamilton-host"


class ClassSystemDocument(BaseModel):
    """Host graph with r equal classes and the reduced graph on them."""

    n: int = Field(ge=0, description="Host vertex count")
    classes: list[list[int]] = Field(description="Classes V_1..V_r as host-vertex lists")
    reduced_edges: list[tuple[int, int]] = Field(description="Edges of the reduced graph R on [r]")
    edges: list[tuple[int, int]] = Field(description="Host edges, each listed once")
    d: float | None = Field(default=None, description="Pair density the generator aimed for")

    @classmethod
    def from_system(cls, system: ClassSystem, d: float | None = None) -> "ClassSystemDocument":
        return cls(
            n=system.host.n,
            classes=system.classes,
            reduced_edges=system.reduced_edges,
            edges=system.host.edges(),
            d=d,
        )

    def to_system(self) -> ClassSystem:
        return ClassSystem(self.classes, self.reduced_edges, Graph.from_edges(self.n, self.edges))


class TargetDocument(BaseModel):
    """Target graph H with its class map and image restrictions."""

    n: int = Field(ge=0, description="Target vertex count")
    edges: list[tuple[int, int]] = Field(description="Target edges, each listed once")
    h: list[int] = Field(description="Class of every target vertex")
    w_sets: dict[int, list[int]] = Field(default_factory=dict, description="W_x for the restricted vertices")
    max_degree: int = Field(ge=0, description="Maximum degree of H")

    @classmethod
    def from_target(cls, target: TargetSpec) -> "TargetDocument":
        degrees = target.graph.degrees()
        return cls(
            n=target.n,
            edges=target.graph.edges(),
            h=target.h.tolist(),
            w_sets=target.w_sets,
            max_degree=int(degrees.max()) if target.n else 0,
        )

    def to_target(self) -> TargetSpec:
        return TargetSpec(Graph.from_edges(self.n, self.edges), self.h, self.w_sets)


class HamiltonHostDocument(BaseModel):
    """Host for the cycle-power pipeline with its planted template."""

    n: int = Field(ge=1, description="Host vertex count")
    k: int = Field(ge=1, description="Power of the Hamilton cycle")
    alpha: float = Field(gt=0, lt=1, description="Minimum-degree excess α over n/(k+1)")
    classes: list[list[int]] = Field(description="Planted template classes")
    template_edges: list[tuple[int, int]] = Field(description="Reduced template on the classes")
    exceptional: list[int] = Field(default_factory=list, description="Vertices outside every class")
    edges: list[tuple[int, int]] = Field(description="Host edges, each listed once")

    @classmethod
    def from_host(cls, host: HamiltonHost) -> "HamiltonHostDocument":
        return cls(
            n=host.n,
            k=host.k,
            alpha=host.alpha,
            classes=host.classes,
            template_edges=host.template_edges,
            exceptional=host.exceptional,
            edges=host.graph.edges(),
        )

    def to_host(self) -> HamiltonHost:
        graph = Graph.from_edges(self.n, self.edges)
        return HamiltonHost(graph, self.k, self.alpha, self.classes, self.template_edges, self.exceptional)
