"""Class system model: a host graph partitioned along a reduced graph."""

from collections.abc import Sequence
from fractions import Fraction
from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.exceptions import ValidationException
from app.models.graph import BipartitePair, Graph


def _pair_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class ClassSystem:
    """Host graph G with r disjoint classes V_1..V_r of size N and reduced graph R.

    Host edges may only join classes that are adjacent in R. Vertices of the
    host that belong to no class are allowed and must be isolated in G.
    """

    def __init__(
        self,
        classes: Sequence[Sequence[int]],
        reduced_edges: Sequence[tuple[int, int]],
        host: Graph,
    ) -> None:
        self.classes = [[int(v) for v in part] for part in classes]
        self.reduced_edges = sorted({_pair_key(int(i), int(j)) for i, j in reduced_edges})
        self.host = host

        sizes = {len(part) for part in self.classes}
        if len(sizes) > 1:
            raise ValidationException(f"Classes must all have the same size (got {sorted(sizes)})")

        class_of = np.full(host.n, -1, dtype=np.int64)
        for index, part in enumerate(self.classes):
            for v in part:
                if not 0 <= v < host.n:
                    raise ValidationException(f"Class {index} contains vertex {v} outside the host")
                if class_of[v] != -1:
                    raise ValidationException(f"Vertex {v} belongs to more than one class")
                class_of[v] = index
        self.class_of: NDArray[np.int64] = class_of

        for i, j in self.reduced_edges:
            if i == j or not (0 <= i < self.r and 0 <= j < self.r):
                raise ValidationException(f"Reduced edge ({i}, {j}) is not an edge on [{self.r}]")

        allowed = np.zeros((self.r + 1, self.r + 1), dtype=bool)
        for i, j in self.reduced_edges:
            allowed[i, j] = allowed[j, i] = True
        rows, cols = np.nonzero(np.triu(host.adjacency, k=1))
        labels_u = class_of[rows]
        labels_v = class_of[cols]
        bad = ~allowed[labels_u, labels_v]
        if np.any(bad):
            u, v = int(rows[bad][0]), int(cols[bad][0])
            raise ValidationException(
                f"Host edge ({u}, {v}) joins classes {int(class_of[u])} and {int(class_of[v])} "
                "which are not adjacent in the reduced graph"
            )

        self.densities: dict[tuple[int, int], Fraction] = {}
        for i, j in self.reduced_edges:
            block = host.adjacency[np.ix_(self.classes[i], self.classes[j])]
            self.densities[(i, j)] = Fraction(int(block.sum()), max(1, self.N * self.N))

    @property
    def r(self) -> int:
        return len(self.classes)

    @property
    def N(self) -> int:
        return len(self.classes[0]) if self.classes else 0

    def is_reduced_edge(self, i: int, j: int) -> bool:
        return _pair_key(i, j) in self.densities

    def reduced_neighbors(self, i: int) -> list[int]:
        return sorted(b if a == i else a for a, b in self.reduced_edges if i in (a, b))

    def pair(self, i: int, j: int) -> BipartitePair:
        return BipartitePair.from_graph(self.host, self.classes[i], self.classes[j])

    def reduced_graph(self) -> Graph:
        return Graph.from_edges(self.r, self.reduced_edges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "classes": self.classes,
            "reduced_edges": [list(edge) for edge in self.reduced_edges],
        }

    def __repr__(self) -> str:
        return f"ClassSystem(r={self.r}, N={self.N}, reduced_edges={len(self.reduced_edges)})"
