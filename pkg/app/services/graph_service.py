"""Graph primitives: exact densities, codegrees and seeded random generators."""

import logging
from fractions import Fraction

import numpy as np

from app.exceptions import DomainException
from app.models.graph import BipartitePair, Graph
from app.models.rng_state import RngState

logger = logging.getLogger(__name__)


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainException(f"Edge probability must lie in [0, 1] (got {p})")


class GraphService:
    """Service for the graph-level primitives every other module builds on."""

    def density(self, pair: BipartitePair) -> Fraction:
        """Exact density e(X, Y) / (|X||Y|)."""
        if pair.mx == 0 or pair.my == 0:
            raise DomainException("Density is undefined for a pair with an empty side")
        return Fraction(pair.edge_count, pair.mx * pair.my)

    def codegree(self, pair: BipartitePair, x: int, x_other: int) -> int:
        """Number of common Y-neighbors of two X-vertices."""
        row = pair.matrix[pair.x_position(x)]
        other = pair.matrix[pair.x_position(x_other)]
        return int(np.count_nonzero(row & other))

    def sample_gnp(self, n: int, p: float, rng: RngState) -> Graph:
        """Erdős–Rényi G(n, p) under the given stream."""
        _check_probability(p)
        if n < 0:
            raise DomainException(f"Vertex count must be non-negative (got {n})")
        rows, cols = np.triu_indices(n, k=1)
        keep = rng.generator().random(rows.size) < p
        adjacency = np.zeros((n, n), dtype=bool)
        adjacency[rows[keep], cols[keep]] = True
        adjacency |= adjacency.T
        graph = Graph(n, adjacency)
        logger.debug(f"Sampled G({n}, {p}) with {graph.edge_count} edges")
        return graph

    def sample_bipartite(self, mx: int, my: int, p: float, rng: RngState) -> BipartitePair:
        """Random bipartite pair with X = 0..mx-1 and Y = mx..mx+my-1."""
        _check_probability(p)
        if mx < 0 or my < 0:
            raise DomainException(f"Side sizes must be non-negative (got {mx}, {my})")
        matrix = rng.generator().random((mx, my)) < p
        return BipartitePair(range(mx), range(mx, mx + my), matrix)
