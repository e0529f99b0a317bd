"""Graph and bipartite pair models."""

from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.exceptions import DomainException, ValidationException

BoolMatrix = NDArray[np.bool_]


def _frozen(matrix: BoolMatrix) -> BoolMatrix:
    matrix = np.array(matrix, dtype=bool, copy=True)
    matrix.flags.writeable = False
    return matrix


class Graph:
    """Simple undirected graph on vertices 0..n-1 with a dense adjacency matrix.

    Instances are immutable after construction.
    """

    def __init__(self, n: int, adjacency: BoolMatrix | None = None) -> None:
        if n < 0:
            raise DomainException(f"Vertex count must be non-negative (got {n})")
        if adjacency is None:
            adjacency = np.zeros((n, n), dtype=bool)
        if adjacency.shape != (n, n):
            raise ValidationException(
                f"Adjacency matrix has shape {adjacency.shape}, expected ({n}, {n})"
            )
        if np.any(np.diagonal(adjacency)):
            raise ValidationException("Graph adjacency contains a self-loop")
        if not np.array_equal(adjacency, adjacency.T):
            raise ValidationException("Graph adjacency is not symmetric")
        self.n = n
        self.adjacency = _frozen(adjacency)
        self._degrees: NDArray[np.int64] = self.adjacency.sum(axis=1).astype(np.int64)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adjacency = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationException(f"Edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise ValidationException(f"Self-loop at vertex {u}")
            adjacency[u, v] = adjacency[v, u] = True
        return cls(n, adjacency)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        adjacency = np.ones((n, n), dtype=bool)
        np.fill_diagonal(adjacency, False)
        return cls(n, adjacency)

    @property
    def edge_count(self) -> int:
        return int(self._degrees.sum()) // 2

    def degree(self, v: int) -> int:
        return int(self._degrees[v])

    def degrees(self) -> NDArray[np.int64]:
        return self._degrees.copy()

    def neighbors(self, v: int) -> NDArray[np.intp]:
        return np.flatnonzero(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v])

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) with u < v, in lexicographic order."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(u), int(v)) for u, v in zip(rows, cols, strict=True)]

    def union(self, other: "Graph") -> "Graph":
        if other.n != self.n:
            raise DomainException(f"Cannot union graphs on {self.n} and {other.n} vertices")
        return Graph(self.n, self.adjacency | other.adjacency)

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "edges": [list(edge) for edge in self.edges()]}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


class BipartitePair:
    """Bipartite pair (X, Y) with its biadjacency matrix.

    Rows of ``matrix`` follow the order of ``x_side`` and columns the order of
    ``y_side``; vertex labels are arbitrary distinct integers.
    """

    def __init__(self, x_side: Sequence[int], y_side: Sequence[int], matrix: BoolMatrix) -> None:
        self.x_side = [int(x) for x in x_side]
        self.y_side = [int(y) for y in y_side]
        if set(self.x_side) & set(self.y_side):
            raise ValidationException("Bipartite pair sides must be disjoint")
        if len(set(self.x_side)) != len(self.x_side) or len(set(self.y_side)) != len(self.y_side):
            raise ValidationException("Bipartite pair sides must not repeat vertices")
        if matrix.shape != (len(self.x_side), len(self.y_side)):
            raise ValidationException(
                f"Biadjacency shape {matrix.shape} does not match sides "
                f"({len(self.x_side)}, {len(self.y_side)})"
            )
        self.matrix = _frozen(matrix)
        self._x_index = {x: i for i, x in enumerate(self.x_side)}
        self._y_index = {y: i for i, y in enumerate(self.y_side)}

    @classmethod
    def from_edges(
        cls, x_side: Sequence[int], y_side: Sequence[int], edges: Iterable[tuple[int, int]]
    ) -> "BipartitePair":
        x_index = {x: i for i, x in enumerate(x_side)}
        y_index = {y: i for i, y in enumerate(y_side)}
        matrix = np.zeros((len(x_side), len(y_side)), dtype=bool)
        for a, b in edges:
            if a in x_index and b in y_index:
                matrix[x_index[a], y_index[b]] = True
            elif b in x_index and a in y_index:
                matrix[x_index[b], y_index[a]] = True
            else:
                raise ValidationException(f"Edge ({a}, {b}) does not join the two sides")
        return cls(x_side, y_side, matrix)

    @classmethod
    def from_graph(cls, graph: Graph, x_side: Sequence[int], y_side: Sequence[int]) -> "BipartitePair":
        matrix = graph.adjacency[np.ix_(list(x_side), list(y_side))]
        return cls(x_side, y_side, matrix)

    @classmethod
    def complete(cls, mx: int, my: int) -> "BipartitePair":
        return cls(range(mx), range(mx, mx + my), np.ones((mx, my), dtype=bool))

    @property
    def mx(self) -> int:
        return len(self.x_side)

    @property
    def my(self) -> int:
        return len(self.y_side)

    @property
    def edge_count(self) -> int:
        return int(self.matrix.sum())

    def row_degrees(self) -> NDArray[np.int64]:
        return self.matrix.sum(axis=1).astype(np.int64)

    def col_degrees(self) -> NDArray[np.int64]:
        return self.matrix.sum(axis=0).astype(np.int64)

    def x_position(self, x: int) -> int:
        if x not in self._x_index:
            raise DomainException(f"Vertex {x} is not on the X side of the pair")
        return self._x_index[x]

    def y_position(self, y: int) -> int:
        if y not in self._y_index:
            raise DomainException(f"Vertex {y} is not on the Y side of the pair")
        return self._y_index[y]

    def has_edge(self, x: int, y: int) -> bool:
        return bool(self.matrix[self.x_position(x), self.y_position(y)])

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.matrix)
        return [(self.x_side[i], self.y_side[j]) for i, j in zip(rows, cols, strict=True)]

    def with_matrix(self, matrix: BoolMatrix) -> "BipartitePair":
        """Same sides, different edge set."""
        return BipartitePair(self.x_side, self.y_side, matrix)

    def delete(self, xs: Sequence[int], ys: Sequence[int]) -> "BipartitePair":
        """Pair with the given X and Y vertices removed."""
        drop_x = {self.x_position(x) for x in xs}
        drop_y = {self.y_position(y) for y in ys}
        keep_x = [i for i in range(self.mx) if i not in drop_x]
        keep_y = [j for j in range(self.my) if j not in drop_y]
        return BipartitePair(
            [self.x_side[i] for i in keep_x],
            [self.y_side[j] for j in keep_y],
            self.matrix[np.ix_(keep_x, keep_y)],
        )

    def transpose(self) -> "BipartitePair":
        return BipartitePair(self.y_side, self.x_side, self.matrix.T)

    def to_graph(self) -> Graph:
        """Graph on 0..max label containing the pair's edges."""
        n = max(self.x_side + self.y_side, default=-1) + 1
        return Graph.from_edges(n, self.edges())

    def to_dict(self) -> dict[str, Any]:
        return {
            "x_side": self.x_side,
            "y_side": self.y_side,
            "edges": [list(edge) for edge in self.edges()],
        }

    def __repr__(self) -> str:
        return f"BipartitePair(mx={self.mx}, my={self.my}, edges={self.edge_count})"
