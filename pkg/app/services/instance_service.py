"""Seeded generators for the synthetic instances the commands and tests run on."""

import logging
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from app.exceptions import DomainException, InfeasibleException, InvariantViolationException
from app.models.class_system import ClassSystem
from app.models.graph import BipartitePair, BoolMatrix, Graph
from app.models.hamilton import HamiltonHost
from app.models.rng_state import RngState
from app.models.target_spec import TargetSpec
from app.services.graph_service import GraphService
from app.utils.exact import as_fraction, ceil_fraction

logger = logging.getLogger(__name__)


def complete_reduced_edges(r: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(r) for j in range(i + 1, r)]


class InstanceService:
    """Service for generating bipartite pairs, class systems, targets and Hamilton hosts."""

    def __init__(self, graph_service: GraphService) -> None:
        self.graph_service = graph_service
        self.logger = logging.getLogger(__name__)

    def bipartite(self, m: int, p: float, rng: RngState, my: int | None = None) -> BipartitePair:
        """G(m, my, p) with X = 0..m-1; my defaults to m."""
        return self.graph_service.sample_bipartite(m, m if my is None else my, p, rng)

    def class_system(
        self,
        r: int,
        size: int,
        d: float,
        rng: RngState,
        reduced_edges: Sequence[tuple[int, int]] | None = None,
    ) -> ClassSystem:
        """r classes of N vertices, each reduced pair an independent G(N, N, d)."""
        if r < 1 or size < 1:
            raise DomainException(f"Need at least one class of at least one vertex (got r={r}, N={size})")
        edges = list(reduced_edges) if reduced_edges is not None else complete_reduced_edges(r)
        classes = [list(range(i * size, (i + 1) * size)) for i in range(r)]
        adjacency = np.zeros((r * size, r * size), dtype=bool)
        pairs = rng.spawn("pairs")
        for index, (i, j) in enumerate(edges):
            pair = self.graph_service.sample_bipartite(size, size, d, pairs.child(index))
            adjacency[np.ix_(classes[i], classes[j])] = pair.matrix
            adjacency[np.ix_(classes[j], classes[i])] = pair.matrix.T
        system = ClassSystem(classes, edges, Graph(r * size, adjacency))
        self.logger.info(f"Generated {system!r} at density {d}")
        return system

    def target_factor(
        self,
        r: int,
        size: int,
        max_degree: int,
        rng: RngState,
        fragment: int = 0,
        restricted: int = 0,
        restriction_fraction: float = 0.5,
    ) -> TargetSpec:
        """K_r-factor on r·N vertices, the last ``fragment`` rows replaced by a path power.

        Vertex t of the fragment lies in class t mod r and is joined to
        t+1..t+r−1, so for r = 3 the fragment is the square of a path.
        ``restricted`` random vertices get W_x, a random subset of their
        class of ⌈restriction_fraction·N⌉ vertices.

        Raises:
            DomainException: if the target's maximum degree exceeds max_degree
                or the counts do not fit in N
        """
        if r < 2 or size < 1:
            raise DomainException(f"A K_r-factor needs r >= 2 and N >= 1 (got r={r}, N={size})")
        if not 0 <= fragment <= size:
            raise DomainException(f"Fragment rows must lie in 0..{size} (got {fragment})")
        if not 0 <= restricted <= r * size:
            raise DomainException(f"Restricted vertex count must lie in 0..{r * size} (got {restricted})")
        edges: list[tuple[int, int]] = []
        cliques = size - fragment
        for t in range(cliques):
            block = range(t * r, (t + 1) * r)
            edges.extend((a, b) for a in block for b in block if a < b)
        offset = cliques * r
        length = fragment * r
        for t in range(length):
            edges.extend((offset + t, offset + u) for u in range(t + 1, min(t + r, length)))
        graph = Graph.from_edges(r * size, edges)
        degree = int(graph.degrees().max())
        if degree > max_degree:
            raise DomainException(f"Generated target has maximum degree {degree}, above the requested {max_degree}")

        h = [v % r for v in range(r * size)]
        w_sets: dict[int, list[int]] = {}
        if restricted:
            generator = rng.spawn("restrictions").generator()
            width = min(size, ceil_fraction(as_fraction(restriction_fraction) * size))
            for x in sorted(int(v) for v in generator.choice(r * size, size=restricted, replace=False)):
                home = h[x]
                picks = generator.choice(size, size=width, replace=False)
                w_sets[x] = sorted(home * size + int(i) for i in picks)
        target = TargetSpec(graph, h, w_sets)
        self.logger.info(f"Generated {target!r} with maximum degree {degree}")
        return target

    def hamilton_host(
        self,
        n: int,
        k: int,
        alpha: float,
        rng: RngState,
        exceptional: int = 0,
        d: float = 0.5,
        exceptional_density: float = 0.8,
    ) -> HamiltonHost:
        """Planted host with minimum degree at least (1/(k+1) + α)n.

        k+1 classes of ⌊(n − exceptional)/(k+1)⌋ vertices follow a template
        on K_{k+1}, minus the edge between the last two classes when k ≥ 3.
        Template pairs are complete; every other pair, inside classes too,
        has density d. The exceptional vertices and the rounding remainder
        take the highest indices and see every class vertex with
        probability exceptional_density. Low-degree vertices are then topped
        up with random edges.

        Raises:
            DomainException: for k < 1, α outside (0, 1) or too few vertices
            InfeasibleException: if the degree target exceeds n − 1
        """
        if k < 1:
            raise DomainException(f"Cycle power must be at least 1 (got {k})")
        if not 0 < alpha < 1:
            raise DomainException(f"α must lie in (0, 1) (got {alpha})")
        size = (n - exceptional) // (k + 1)
        if exceptional < 0 or size < 1:
            raise DomainException(f"{n} vertices leave no room for {k + 1} classes beside {exceptional} exceptional")
        target = ceil_fraction((Fraction(1, k + 1) + as_fraction(alpha)) * n)
        if target > n - 1:
            raise InfeasibleException(f"Minimum degree {target} is impossible on {n} vertices")

        classes = [list(range(c * size, (c + 1) * size)) for c in range(k + 1)]
        outside = list(range((k + 1) * size, n))
        template = complete_reduced_edges(k + 1)
        if k >= 3:
            template.remove((k - 1, k))

        generator = rng.spawn("edges").generator()
        upper = np.triu(generator.random((n, n)) < d, k=1)
        adjacency = upper | upper.T
        for i, j in template:
            adjacency[np.ix_(classes[i], classes[j])] = True
            adjacency[np.ix_(classes[j], classes[i])] = True
        inside = (k + 1) * size
        if outside:
            links = generator.random((len(outside), inside)) < exceptional_density
            adjacency[inside:, :inside] = links
            adjacency[:inside, inside:] = links.T

        added = self._top_up(adjacency, target, rng.spawn("top-up"))
        graph = Graph(n, adjacency)
        minimum = int(graph.degrees().min())
        if minimum < target:
            raise InvariantViolationException("host-min-degree", f"minimum degree {minimum} is below {target}")
        host = HamiltonHost(graph, k, alpha, classes, template, outside)
        self.logger.info(f"Generated {host!r}; minimum degree {minimum} >= {target}, {added} top-up edges")
        return host

    def _top_up(self, adjacency: BoolMatrix, target: int, rng: RngState) -> int:
        generator = rng.generator()
        n = adjacency.shape[0]
        added = 0
        for v in range(n):
            missing = target - int(adjacency[v].sum())
            if missing <= 0:
                continue
            candidates = [u for u in range(n) if u != v and not adjacency[v, u]]
            for u in generator.choice(candidates, size=missing, replace=False):
                adjacency[v, int(u)] = adjacency[int(u), v] = True
                added += 1
        return added
