"""Pre-processed instances, the mutable embedding state and finished embeddings."""

from typing import Any

import numpy as np
from numpy.typing import NDArray

from app.models.class_system import ClassSystem
from app.models.graph import Graph
from app.models.target_spec import TargetSpec
from app.schemas.blowup_schema import EmbeddingRunLog, ParamSet
from app.utils.exact import as_fraction, ceil_fraction, floor_fraction

BoolArray = NDArray[np.bool_]


class Thresholds:
    """Integer forms of the (P1), (P2) and low-set bounds for one class size N.

    All values are derived from exact rationals, so comparisons against
    integer counts never depend on float rounding.
    """

    def __init__(self, params: ParamSet, size: int) -> None:
        self.size = size
        self.lower = as_fraction(params.d) - as_fraction(params.eps)
        self.upper = as_fraction(params.d) + as_fraction(params.eps)
        self.eps_p = as_fraction(params.eps_p)
        # exponents reach 2(Δ+1) after augmentation, plus 2 for a trial extension
        top = 2 * params.max_degree + 6
        self.codegree_max: NDArray[np.int64] = np.array(
            [min(size, floor_fraction(self.upper**k * size)) for k in range(top + 1)],
            dtype=np.int64,
        )
        self.low_free = ceil_fraction(as_fraction(params.delta1) * size)
        self._p1: dict[tuple[int, int], int] = {}

    def p1_min(self, ell: int, allowed: int) -> int:
        """Smallest |C_φ(x)| allowed by (P1) with ℓ embedded neighbours."""
        key = (ell, allowed)
        if key not in self._p1:
            self._p1[key] = ceil_fraction(self.lower**ell * allowed)
        return self._p1[key]

    def allowance(self, j: int) -> int:
        """Largest per-class (P2) exception count with j embedded vertices."""
        return floor_fraction(self.eps_p * j * self.size)

    def dense_enough(self, hits: NDArray[np.int64], total: int) -> NDArray[np.bool_]:
        """hits ≥ (d − ε)·total, elementwise."""
        return hits * self.lower.denominator >= self.lower.numerator * total


class PreparedInstance:
    """Padded and augmented target ready for Phase I.

    Host vertices are addressed by their position inside their class, so
    ``allowed[x]`` and every candidate row are boolean vectors of length N.
    """

    def __init__(
        self,
        spec: TargetSpec,
        system: ClassSystem,
        params: ParamSet,
        graph: Graph,
        h: NDArray[np.int64],
        allowed: BoolArray,
        buffers: dict[int, list[int]],
        reserves: dict[int, list[int]],
        added_edges: list[tuple[int, int]],
        ordering: list[int],
    ) -> None:
        self.spec = spec
        self.system = system
        self.params = params
        self.graph = graph
        self.h = h
        self.allowed = allowed
        self.buffers = buffers
        self.reserves = reserves
        self.added_edges = added_edges
        self.ordering = ordering
        self.s = max(1, ceil_fraction(as_fraction(params.delta2) * system.N))
        self.thresholds = Thresholds(params, system.N)

        self.in_buffer = np.zeros(graph.n, dtype=bool)
        self.in_reserve = np.zeros(graph.n, dtype=bool)
        for members in buffers.values():
            self.in_buffer[members] = True
        for members in reserves.values():
            self.in_reserve[members] = True
        adjacency = graph.adjacency
        self.buffer_neighborhood: BoolArray = adjacency[self.in_buffer].any(axis=0)
        self.reserve_neighborhood: BoolArray = adjacency[self.in_reserve].any(axis=0)
        self.restricted = np.zeros(graph.n, dtype=bool)
        self.restricted[spec.restricted] = True

        # host biadjacency blocks between classes, by ordered reduced edge
        self.blocks: dict[tuple[int, int], BoolArray] = {}
        for i, j in system.reduced_edges:
            block = system.host.adjacency[np.ix_(system.classes[i], system.classes[j])]
            self.blocks[(i, j)] = block
            self.blocks[(j, i)] = block.T

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def N(self) -> int:
        return self.system.N

    def class_members(self, i: int) -> NDArray[np.intp]:
        return np.flatnonzero(self.h == i)

    def allowed_size(self, x: int) -> int:
        return int(self.allowed[x].sum())

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "buffers": {str(i): members for i, members in self.buffers.items()},
            "reserves": {str(i): members for i, members in self.reserves.items()},
            "added_edges": [list(edge) for edge in self.added_edges],
            "ordering": self.ordering,
            "s": self.s,
        }

    def __repr__(self) -> str:
        return (
            f"PreparedInstance(n={self.n}, N={self.N}, "
            f"B={int(self.in_buffer.sum())}, D={int(self.in_reserve.sum())}, "
            f"added_edges={len(self.added_edges)})"
        )


class EmbedState:
    """Partial embedding φ of the prepared target with its bookkeeping.

    ``phi[x]`` is the position of φ(x) in V_{h(x)}, or -1 while x is
    unembedded. ``candidates[x]`` is C_φ(x) as a position mask; rows of
    embedded vertices are frozen at the moment of embedding.
    ``violations[i]`` counts ordered pairs of distinct tracked vertices of
    class i breaking the codegree bound.
    """

    def __init__(self, instance: PreparedInstance) -> None:
        self.instance = instance
        n, size = instance.n, instance.N
        self.ordering: list[int] = list(instance.ordering)
        self.j = 0
        self.phi: NDArray[np.int64] = np.full(n, -1, dtype=np.int64)
        self.candidates: BoolArray = instance.allowed.copy()
        self.embedded_neighbors: NDArray[np.int64] = np.zeros(n, dtype=np.int64)
        self.used: BoolArray = np.zeros((instance.system.r, size), dtype=bool)
        self.violations: NDArray[np.int64] = np.zeros(instance.system.r, dtype=np.int64)
        self.phase_one_end: int | None = None
        self.exceptional_done = False
        self.next_checkpoint = 0
        self.log = EmbeddingRunLog(added_edges=len(instance.added_edges))

    @property
    def embedded(self) -> BoolArray:
        return self.phi >= 0

    def free_candidates(self, x: int) -> BoolArray:
        """C_φ(x) ∖ φ(X_j) as a position mask."""
        return self.candidates[x] & ~self.used[self.instance.h[x]]

    def tracked(self, i: int) -> NDArray[np.intp]:
        """Unembedded vertices of class i outside N_H(D), in index order."""
        instance = self.instance
        mask = (instance.h == i) & ~self.embedded & ~instance.reserve_neighborhood
        return np.flatnonzero(mask)

    def host_vertex(self, x: int) -> int:
        return self.instance.system.classes[int(self.instance.h[x])][int(self.phi[x])]

    def diagnostics(self) -> dict[str, Any]:
        return {
            "j": self.j,
            "embedded": int(self.embedded.sum()),
            "n": self.instance.n,
            "violations": self.violations.tolist(),
            "moved_total": self.log.moved_total,
            "min_admissible": self.log.min_admissible,
        }

    def __repr__(self) -> str:
        return f"EmbedState(j={self.j}, embedded={int(self.embedded.sum())}/{self.instance.n})"


class Embedding:
    """Finished embedding of a target into the host, with its run log."""

    def __init__(
        self, mapping: dict[int, int], padded_mapping: dict[int, int], log: EmbeddingRunLog
    ) -> None:
        self.mapping = mapping
        self.padded_mapping = padded_mapping
        self.log = log

    def to_dict(self) -> dict[str, Any]:
        return {
            "mapping": {str(x): v for x, v in sorted(self.mapping.items())},
            "log": self.log.model_dump(),
        }

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Embedding) and self.padded_mapping == other.padded_mapping

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.padded_mapping.items())))

    def __repr__(self) -> str:
        return f"Embedding(vertices={len(self.mapping)}, T={self.log.phase_one_end})"
