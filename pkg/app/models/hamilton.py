"""Blueprints, ξ-good bijections and completion graphs for k-th powers of Hamilton cycles."""

from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.models.graph import Graph
from app.models.star_system import RefinedSystem
from app.schemas.blowup_schema import EmbeddingRunLog


def cyclic_distance(i: int, j: int, n: int) -> int:
    """Length of the shorter arc between positions i and j on the n-cycle."""
    forward = (j - i) % n
    return min(forward, n - forward)


def power_cycle_pairs(n: int, k: int) -> list[tuple[int, int]]:
    """Edges {i, i+δ mod n}, 1 ≤ δ ≤ k, of C^k as sorted index pairs."""
    pairs = {tuple(sorted((i, (i + delta) % n))) for i in range(n) for delta in range(1, k + 1)}
    return sorted((a, b) for a, b in pairs if a != b)


class Blueprint:
    """Labelling ξ: [n] → {0, 1} with one contiguous segment I_S per star.

    ``segments[s]`` is the (start, length) of I_S; segments are laid out
    in star order and cover [n]. ``expected_ones[s]`` is |A_S ∪ Z_S|.
    """

    def __init__(
        self,
        n: int,
        k: int,
        labels: Sequence[int],
        segments: Sequence[tuple[int, int]],
        expected_ones: Sequence[int],
        max_gap: int | None = None,
    ) -> None:
        self.n = n
        self.k = k
        self.labels: NDArray[np.int8] = np.asarray(labels, dtype=np.int8)
        self.segments = [(int(start), int(length)) for start, length in segments]
        self.expected_ones = [int(c) for c in expected_ones]
        self.max_gap = k if max_gap is None else max_gap
        self.segment_of: NDArray[np.int64] = np.empty(n, dtype=np.int64)
        for s, (start, length) in enumerate(self.segments):
            self.segment_of[start : start + length] = s

    def positions(self, s: int) -> range:
        start, length = self.segments[s]
        return range(start, start + length)

    def ones(self, s: int) -> list[int]:
        return [i for i in self.positions(s) if self.labels[i] == 1]

    def zeros(self, s: int) -> list[int]:
        return [i for i in self.positions(s) if self.labels[i] == 0]

    def distance(self, i: int, j: int) -> int:
        return cyclic_distance(i, j, self.n)

    def same_segment_pairs(self) -> list[tuple[int, int]]:
        """C^k pairs whose two positions lie in the same segment."""
        return [(i, j) for i, j in power_cycle_pairs(self.n, self.k) if self.segment_of[i] == self.segment_of[j]]

    def violations(self) -> list[str]:
        """Names of the violated blueprint conditions, empty when ξ is valid."""
        problems: list[str] = []
        covered = sum(length for _, length in self.segments)
        if covered != self.n or len(self.labels) != self.n:
            return ["segment-cover"]
        for s in range(len(self.segments)):
            ones = self.ones(s)
            positions = list(self.positions(s))
            if len(ones) != self.expected_ones[s] and "one-count" not in problems:
                problems.append("one-count")
            gaps = [b - a for a, b in zip(ones, ones[1:], strict=False)]
            if any(gap > self.max_gap for gap in gaps) and "consecutive-ones" not in problems:
                problems.append("consecutive-ones")
            zeros = self.zeros(s)
            lonely = any(all(self.distance(i, z) > self.k for z in zeros) for i in ones)
            if lonely and "zero-nearby" not in problems:
                problems.append("zero-nearby")
            tail = positions[len(positions) - (self.k - 1) :] if self.k > 1 else []
            shape_ok = (
                bool(positions)
                and self.labels[positions[0]] == 1
                and len(positions) >= self.k
                and all(self.labels[i] == 0 for i in tail)
            )
            if not shape_ok and "segment-shape" not in problems:
                problems.append("segment-shape")
        return problems

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "max_gap": self.max_gap,
            "labels": self.labels.tolist(),
            "segments": [list(segment) for segment in self.segments],
            "expected_ones": self.expected_ones,
        }

    def __repr__(self) -> str:
        return f"Blueprint(n={self.n}, k={self.k}, segments={len(self.segments)}, ones={int(self.labels.sum())})"


class XiGoodEmbedding:
    """Bijection φ: [n] → V(G) with the choices that produced it.

    ``a_prime[s]`` lists the positions A′_S mapped onto the exceptional
    vertices of star s; ``log`` is the run log of the blow-up call.
    """

    def __init__(self, phi: Sequence[int], a_prime: dict[int, list[int]], log: EmbeddingRunLog | None = None) -> None:
        self.phi = [int(v) for v in phi]
        self.a_prime = {int(s): sorted(int(i) for i in positions) for s, positions in a_prime.items()}
        self.log = log or EmbeddingRunLog()

    @property
    def n(self) -> int:
        return len(self.phi)

    def inverse(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.phi)}

    def to_dict(self) -> dict[str, Any]:
        return {
            "phi": self.phi,
            "a_prime": {str(s): positions for s, positions in sorted(self.a_prime.items())},
        }

    def __repr__(self) -> str:
        return f"XiGoodEmbedding(n={self.n}, exceptional_positions={sum(len(p) for p in self.a_prime.values())})"


class CompletionGraph:
    """H_φ: the C^k edges not guaranteed by the host under φ.

    Edges are index pairs (i, j) with i < j; ``excluded`` holds H̄_φ in the
    same form. ``image_edges()`` maps either set onto V(G) through φ.
    """

    def __init__(
        self,
        n: int,
        k: int,
        edges: Sequence[tuple[int, int]],
        excluded: Sequence[tuple[int, int]],
        phi: Sequence[int],
    ) -> None:
        self.n = n
        self.k = k
        self.edges = sorted((min(a, b), max(a, b)) for a, b in edges)
        self.excluded = sorted((min(a, b), max(a, b)) for a, b in excluded)
        self.phi = [int(v) for v in phi]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def graph(self) -> Graph:
        """H_φ on the index set [n]."""
        return Graph.from_edges(self.n, self.edges)

    def image_edges(self, excluded: bool = False) -> set[tuple[int, int]]:
        pairs = self.excluded if excluded else self.edges
        return {(min(self.phi[a], self.phi[b]), max(self.phi[a], self.phi[b])) for a, b in pairs}

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "edges": [list(edge) for edge in self.edges],
            "excluded": [list(edge) for edge in self.excluded],
        }

    def __repr__(self) -> str:
        return f"CompletionGraph(n={self.n}, k={self.k}, edges={len(self.edges)}, excluded={len(self.excluded)})"


class HamiltonHost:
    """Host graph G with the planted partition it was generated from.

    ``classes`` are the planted template classes, ``template_edges`` the
    reduced graph on them and ``exceptional`` the vertices outside every
    class.
    """

    def __init__(
        self,
        graph: Graph,
        k: int,
        alpha: float,
        classes: Sequence[Sequence[int]],
        template_edges: Sequence[tuple[int, int]],
        exceptional: Sequence[int],
    ) -> None:
        self.graph = graph
        self.k = k
        self.alpha = alpha
        self.classes = [[int(v) for v in part] for part in classes]
        self.template_edges = sorted((min(a, b), max(a, b)) for a, b in template_edges)
        self.exceptional = sorted(int(v) for v in exceptional)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def class_size(self) -> int:
        return len(self.classes[0]) if self.classes else 0

    def template(self) -> Graph:
        return Graph.from_edges(len(self.classes), self.template_edges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "classes": self.classes,
            "template_edges": [list(edge) for edge in self.template_edges],
            "exceptional": self.exceptional,
            "edges": [list(edge) for edge in self.graph.edges()],
        }

    def __repr__(self) -> str:
        return (
            f"HamiltonHost(n={self.n}, k={self.k}, classes={len(self.classes)}, "
            f"exceptional={len(self.exceptional)}, edges={self.graph.edge_count})"
        )


class HamiltonSetup:
    """Everything sample_xi_good needs, built once per host."""

    def __init__(self, host: Graph, refined: RefinedSystem, blueprint: Blueprint) -> None:
        self.host = host
        self.refined = refined
        self.blueprint = blueprint

    def __repr__(self) -> str:
        return f"HamiltonSetup(n={self.host.n}, {self.refined!r}, {self.blueprint!r})"
