"""Edge-list reading and writing.

Format: one ``u v`` pair per line, 0-indexed, whitespace-separated,
undirected edges listed once. Blank lines and ``#`` comments are ignored,
except for two optional header comments:

- ``# n <count>`` fixes the vertex count (isolated trailing vertices).
- ``# bipartite <mx> <my>`` marks a pair whose X side is 0..mx-1 and whose
  Y side is mx..mx+my-1.
"""

from pathlib import Path

from app.exceptions import ValidationException
from app.models.graph import BipartitePair, Graph


class EdgeList:
    """Parsed edge-list file."""

    def __init__(self, edges: list[tuple[int, int]], n: int, bipartite: tuple[int, int] | None) -> None:
        self.edges = edges
        self.n = n
        self.bipartite = bipartite

    def to_graph(self) -> Graph:
        return Graph.from_edges(self.n, self.edges)

    def to_pair(self, mx: int | None = None) -> BipartitePair:
        """Interpret the edges as a bipartite pair.

        The split comes from the ``# bipartite`` header, else from ``mx``
        with Y taking the remaining vertices.
        """
        if self.bipartite is not None:
            size_x, size_y = self.bipartite
        elif mx is not None:
            size_x, size_y = mx, self.n - mx
        else:
            raise ValidationException(
                "Edge list has no '# bipartite' header; pass the X side size explicitly"
            )
        return BipartitePair.from_edges(
            range(size_x), range(size_x, size_x + size_y), self.edges
        )

    def __repr__(self) -> str:
        return f"EdgeList(n={self.n}, edges={len(self.edges)}, bipartite={self.bipartite})"


def parse_edge_list(text: str, source: str = "<text>") -> EdgeList:
    edges: list[tuple[int, int]] = []
    declared_n = 0
    bipartite: tuple[int, int] | None = None

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split()
            try:
                if len(words) == 2 and words[0] == "n":
                    declared_n = int(words[1])
                elif len(words) == 3 and words[0] == "bipartite":
                    bipartite = (int(words[1]), int(words[2]))
            except ValueError as e:
                raise ValidationException(f"{source}:{line_number}: malformed header '{line}'") from e
            continue
        content = line.split("#", 1)[0].split()
        if len(content) != 2:
            raise ValidationException(f"{source}:{line_number}: expected 'u v', got '{line}'")
        try:
            u, v = int(content[0]), int(content[1])
        except ValueError as e:
            raise ValidationException(f"{source}:{line_number}: vertex ids must be integers") from e
        if u < 0 or v < 0:
            raise ValidationException(f"{source}:{line_number}: vertex ids must be non-negative")
        edges.append((u, v))

    n = max([declared_n] + [max(u, v) + 1 for u, v in edges])
    if bipartite is not None:
        n = max(n, bipartite[0] + bipartite[1])
    return EdgeList(edges, n, bipartite)


def read_edge_list(path: Path) -> EdgeList:
    return parse_edge_list(path.read_text(encoding="utf-8"), source=str(path))


def format_graph(graph: Graph) -> str:
    lines = [f"# n {graph.n}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def format_pair(pair: BipartitePair) -> str:
    """Write a pair relabelled to X = 0..mx-1 and Y = mx..mx+my-1."""
    lines = [f"# bipartite {pair.mx} {pair.my}"]
    rows, cols = pair.matrix.nonzero()
    lines.extend(f"{i} {pair.mx + j}" for i, j in zip(rows.tolist(), cols.tolist(), strict=True))
    return "\n".join(lines) + "\n"
