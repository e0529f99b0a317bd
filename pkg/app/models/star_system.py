"""Reduced graphs, star partitions and the refined star systems built from them."""

from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np

from app.exceptions import InvariantViolationException, ValidationException
from app.models.class_system import ClassSystem
from app.models.graph import BoolMatrix, Graph


class ReducedGraph(Graph):
    """Cluster-level graph R on [m] with an optional declared minimum degree."""

    def __init__(self, n: int, adjacency: BoolMatrix | None = None, min_degree_floor: int | None = None) -> None:
        super().__init__(n, adjacency)
        if min_degree_floor is not None and n and int(self._degrees.min()) < min_degree_floor:
            raise ValidationException(
                f"Reduced graph has minimum degree {int(self._degrees.min())}, "
                f"below the declared floor {min_degree_floor}"
            )
        self.min_degree_floor = min_degree_floor

    @classmethod
    def from_graph(cls, graph: Graph, min_degree_floor: int | None = None) -> "ReducedGraph":
        return cls(graph.n, graph.adjacency, min_degree_floor)

    @property
    def m(self) -> int:
        return self.n

    def min_degree(self) -> int:
        return int(self._degrees.min()) if self.n else 0

    def __repr__(self) -> str:
        return f"ReducedGraph(m={self.m}, edges={self.edge_count}, floor={self.min_degree_floor})"


class Star:
    """A star K_{1,ℓ}: one center and ℓ leaves."""

    def __init__(self, center: int, leaves: Iterable[int]) -> None:
        self.center = int(center)
        self.leaves = [int(v) for v in leaves]

    @property
    def vertices(self) -> list[int]:
        return [self.center, *self.leaves]

    def to_dict(self) -> dict[str, Any]:
        return {"center": self.center, "leaves": self.leaves}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Star) and self.center == other.center and self.leaves == other.leaves

    def __hash__(self) -> int:
        return hash((self.center, tuple(self.leaves)))

    def __repr__(self) -> str:
        return f"Star({self.center}, {self.leaves})"


class StarPartition:
    """Vertex-disjoint stars covering a reduced graph.

    ``method`` records how the partition was found: ``"flow"`` for the
    matching and max-flow construction, ``"exhaustive"`` for the search
    fallback.
    """

    def __init__(self, stars: Sequence[Star], method: str = "flow") -> None:
        self.stars = list(stars)
        self.method = method

    def leaf_counts(self) -> list[int]:
        return [len(star.leaves) for star in self.stars]

    def validate(self, graph: Graph, k: int) -> None:
        """Assert disjointness, coverage, leaf counts and star edges."""
        seen: set[int] = set()
        for star in self.stars:
            if not 1 <= len(star.leaves) <= k:
                raise InvariantViolationException(
                    "star-leaves", f"{star!r} has {len(star.leaves)} leaves, expected 1..{k}"
                )
            for v in star.vertices:
                if v in seen:
                    raise InvariantViolationException("star-disjoint", f"vertex {v} lies in two stars")
                seen.add(v)
            for leaf in star.leaves:
                if not graph.has_edge(star.center, leaf):
                    raise InvariantViolationException(
                        "star-edges", f"({star.center}, {leaf}) is not an edge of the reduced graph"
                    )
        if seen != set(range(graph.n)):
            missing = sorted(set(range(graph.n)) - seen)
            raise InvariantViolationException("star-cover", f"vertices {missing} are in no star")

    def to_dict(self) -> list[dict[str, Any]]:
        return [star.to_dict() for star in self.stars]

    def __repr__(self) -> str:
        return f"StarPartition(stars={len(self.stars)}, leaves={self.leaf_counts()}, method={self.method!r})"


class RefinedSystem:
    """Equal-size parts grouped into K_{1,k} stars, plus the exceptional set V₀.

    Stars refer to parts by index; ``parts[p]`` lists the host vertices of
    part p and ``part_origin[p]`` the reduced vertex it was cut from.
    ``assignment`` maps exceptional vertices to the leaf part they were
    assigned to, and stays empty until exceptional vertices are assigned.
    """

    def __init__(
        self,
        k: int,
        parts: Sequence[Sequence[int]],
        part_origin: Sequence[int],
        stars: Sequence[Star],
        exceptional: Iterable[int] = (),
        assignment: dict[int, int] | None = None,
    ) -> None:
        self.k = k
        self.parts = [[int(v) for v in part] for part in parts]
        self.part_origin = [int(i) for i in part_origin]
        self.stars = list(stars)
        self.exceptional = sorted(int(v) for v in exceptional)
        self.assignment = dict(assignment or {})

    @property
    def part_size(self) -> int:
        return len(self.parts[0]) if self.parts else 0

    @property
    def n(self) -> int:
        return sum(len(part) for part in self.parts) + len(self.exceptional)

    def centers(self) -> list[int]:
        return [star.center for star in self.stars]

    def leaf_parts(self) -> list[int]:
        return [leaf for star in self.stars for leaf in star.leaves]

    def star_of_part(self) -> dict[int, int]:
        return {p: index for index, star in enumerate(self.stars) for p in star.vertices}

    def assigned_to(self, part: int) -> list[int]:
        """A_x: exceptional vertices assigned to the given part."""
        return sorted(v for v, x in self.assignment.items() if x == part)

    def star_exceptional(self, index: int) -> list[int]:
        """A_S: exceptional vertices assigned to any part of the star."""
        members = set(self.stars[index].vertices)
        return sorted(v for v, x in self.assignment.items() if x in members)

    def star_vertices(self, index: int) -> list[int]:
        """V_S: host vertices in the parts of the star."""
        return [v for p in self.stars[index].vertices for v in self.parts[p]]

    def with_assignment(self, assignment: dict[int, int]) -> "RefinedSystem":
        return RefinedSystem(self.k, self.parts, self.part_origin, self.stars, self.exceptional, assignment)

    def star_edges(self) -> list[tuple[int, int]]:
        return [(star.center, leaf) for star in self.stars for leaf in star.leaves]

    def class_system(self, host: Graph) -> ClassSystem:
        """Parts as classes, star edges as the reduced graph, host cut down to the star pairs."""
        adjacency = np.zeros_like(host.adjacency)
        for center, leaf in self.star_edges():
            block = np.ix_(self.parts[center], self.parts[leaf])
            adjacency[block] = host.adjacency[block]
            adjacency[np.ix_(self.parts[leaf], self.parts[center])] = host.adjacency[block].T
        return ClassSystem(self.parts, self.star_edges(), Graph(host.n, adjacency))

    def validate(self, max_exceptional: int | None = None) -> None:
        """Assert star shape, equal part sizes, single use of every part and the V₀ budget."""
        for star in self.stars:
            if len(star.leaves) != self.k:
                raise InvariantViolationException(
                    "refined-star-shape", f"{star!r} has {len(star.leaves)} leaves, expected {self.k}"
                )
        sizes = {len(part) for part in self.parts}
        if len(sizes) > 1:
            raise InvariantViolationException("refined-part-sizes", f"part sizes {sorted(sizes)}")
        used = sorted(p for star in self.stars for p in star.vertices)
        if used != list(range(len(self.parts))):
            raise InvariantViolationException("refined-part-use", "some part is used twice or not at all")
        in_parts = {v for part in self.parts for v in part}
        if in_parts & set(self.exceptional):
            raise InvariantViolationException("refined-exceptional", "V₀ meets a part")
        if max_exceptional is not None and len(self.exceptional) > max_exceptional:
            raise InvariantViolationException(
                "refined-exceptional-budget",
                f"|V₀| = {len(self.exceptional)} exceeds the budget {max_exceptional}",
            )
        leaves = set(self.leaf_parts())
        for v, x in self.assignment.items():
            if v not in self.exceptional or x not in leaves:
                raise InvariantViolationException(
                    "refined-assignment", f"vertex {v} is assigned to part {x}, which is not a leaf part"
                )

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "parts": self.parts,
            "part_origin": self.part_origin,
            "stars": [star.to_dict() for star in self.stars],
            "exceptional": self.exceptional,
            "assignment": {str(v): x for v, x in sorted(self.assignment.items())},
        }

    def __repr__(self) -> str:
        return (
            f"RefinedSystem(k={self.k}, stars={len(self.stars)}, parts={len(self.parts)}, "
            f"part_size={self.part_size}, exceptional={len(self.exceptional)})"
        )
