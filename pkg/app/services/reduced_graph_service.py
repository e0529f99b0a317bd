"""Star partitions of reduced graphs, refinement to K_{1,k} stars and exceptional-vertex assignment."""

import itertools
import logging
from collections.abc import Sequence
from fractions import Fraction

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp

from app.exceptions import (
    CapabilityException,
    DomainException,
    InfeasibleException,
    InvariantViolationException,
    PreconditionException,
)
from app.models.graph import Graph
from app.models.rng_state import RngState
from app.models.star_system import ReducedGraph, RefinedSystem, Star, StarPartition
from app.utils.exact import as_fraction, floor_fraction

logger = logging.getLogger(__name__)

# Subset enumeration in cut_violations is exponential in |H| + |Ũ|
CUT_ENUMERATION_LIMIT = 20


class ReducedGraphService:
    """Service for the reduced-graph side of the Hamilton-power pipeline."""

    def __init__(self, star_restarts: int = 16, exhaustive_limit: int = 10) -> None:
        self.star_restarts = star_restarts
        self.exhaustive_limit = exhaustive_limit
        self.logger = logging.getLogger(__name__)

    # ── Star partition ─────────────────────────────────────────────────

    def degree_bound(self, m: int, k: int, alpha: float) -> Fraction:
        """(1/(k+1) + α/4)·m."""
        return (Fraction(1, k + 1) + as_fraction(alpha) / 4) * m

    def star_partition(
        self,
        graph: ReducedGraph,
        k: int,
        alpha: float,
        rng: RngState,
        check_hypothesis: bool = True,
        exhaustive_fallback: bool = True,
    ) -> StarPartition:
        """Cover R with vertex-disjoint stars of at most k leaves.

        Runs the matching and max-flow construction up to star_restarts
        times with fresh random matchings, then falls back to exhaustive
        search for graphs of at most exhaustive_limit vertices.

        Raises:
            DomainException: if k < 1
            PreconditionException: if the minimum degree is below (1/(k+1) + α/4)m
            InfeasibleException: if no partition was found
        """
        if k < 1:
            raise DomainException(f"Stars need at least one leaf (got k = {k})")
        m = graph.m
        if check_hypothesis and m:
            bound = self.degree_bound(m, k, alpha)
            if graph.min_degree() < bound:
                low = int(np.argmin(graph.degrees()))
                raise PreconditionException(
                    f"Reduced vertex {low} has degree {graph.degree(low)}, "
                    f"below (1/(k+1) + α/4)m = {float(bound):.2f}"
                )
        if m == 0:
            return StarPartition([])

        for attempt in range(self.star_restarts):
            partition = self._construct(graph, k, rng.child(attempt))
            if partition is not None:
                partition.validate(graph, k)
                self.logger.debug(f"Star partition found on attempt {attempt + 1}: {partition!r}")
                return partition

        if exhaustive_fallback and m <= self.exhaustive_limit:
            partition = self.exhaustive_star_partition(graph, k)
            if partition is not None:
                partition.validate(graph, k)
                self.logger.info(f"Star partition found by exhaustive search: {partition!r}")
                return partition
        raise InfeasibleException(
            f"No partition of the {m}-vertex reduced graph into stars with at most {k} leaves was found"
        )

    def _construct(self, graph: ReducedGraph, k: int, rng: RngState) -> StarPartition | None:
        generator = rng.generator()
        adjacency = graph.adjacency
        matching = self._maximal_matching(graph, generator)
        matched = {v for edge in matching for v in edge}
        unmatched = [v for v in range(graph.m) if v not in matched]
        if k == 1 and unmatched:
            return None
        unmatched_mask = np.zeros(graph.m, dtype=bool)
        unmatched_mask[unmatched] = True
        if np.any(adjacency[np.ix_(unmatched_mask, unmatched_mask)]):
            raise InvariantViolationException("matching-maximal", "unmatched vertices are not independent")

        def u_neighbors(v: int) -> list[int]:
            return [int(u) for u in np.flatnonzero(adjacency[v] & unmatched_mask)]

        # edges whose endpoints both see exactly the same single unmatched vertex
        stars: list[Star] = []
        used_edges: set[tuple[int, int]] = set()
        absorbed: set[int] = set()
        for a, b in matching:
            na, nb = u_neighbors(a), u_neighbors(b)
            if len(na) == 1 and len(nb) == 1 and na == nb and na[0] not in absorbed:
                absorbed.add(na[0])
                used_edges.add((a, b))
                stars.append(Star(a, [b, na[0]]))

        remaining_u = [u for u in unmatched if u not in absorbed]
        remaining_edges = [edge for edge in matching if edge not in used_edges]
        remaining_mask = np.zeros(graph.m, dtype=bool)
        remaining_mask[remaining_u] = True
        hubs: list[int] = []
        hub_edge: dict[int, tuple[int, int]] = {}
        for a, b in remaining_edges:
            for v in (a, b):
                if np.any(adjacency[v] & remaining_mask):
                    if any(edge == (a, b) for edge in hub_edge.values()):
                        raise InvariantViolationException(
                            "matching-augmenting", f"both endpoints of ({a}, {b}) see unmatched vertices"
                        )
                    hubs.append(v)
                    hub_edge[v] = (a, b)

        value, assignment = self.assign_leaves(graph, k, hubs, remaining_u)
        if value < len(remaining_u):
            return None

        leaves_of: dict[int, list[int]] = {h: [] for h in hubs}
        for u, h in assignment.items():
            leaves_of[h].append(u)
        for a, b in remaining_edges:
            if a in leaves_of:
                stars.append(Star(a, [b, *sorted(leaves_of[a])]))
            elif b in leaves_of:
                stars.append(Star(b, [a, *sorted(leaves_of[b])]))
            else:
                stars.append(Star(a, [b]))
        return StarPartition(self._consolidate(graph, stars, k), method="flow")

    def _maximal_matching(self, graph: ReducedGraph, generator: np.random.Generator) -> list[tuple[int, int]]:
        """Greedy maximal matching over a random edge order, without length-3 augmenting paths."""
        edges = graph.edges()
        partner = np.full(graph.m, -1, dtype=np.int64)
        for index in generator.permutation(len(edges)):
            a, b = edges[int(index)]
            if partner[a] < 0 and partner[b] < 0:
                partner[a], partner[b] = b, a

        improved = True
        while improved:
            improved = False
            free = partner < 0
            for a in range(graph.m):
                b = int(partner[a])
                if b < a:
                    continue
                left = np.flatnonzero(graph.adjacency[a] & free)
                right = np.flatnonzero(graph.adjacency[b] & free)
                pick = next(
                    ((int(u), int(w)) for u in left for w in right if u != w),
                    None,
                )
                if pick is not None:
                    u, w = pick
                    partner[u], partner[a] = a, u
                    partner[w], partner[b] = b, w
                    improved = True
                    break
        return sorted((a, int(partner[a])) for a in range(graph.m) if a < partner[a])

    def _consolidate(self, graph: ReducedGraph, stars: list[Star], k: int) -> list[Star]:
        """Merge K_{1,1} stars into stars whose center sees both of their vertices."""
        stars = list(stars)
        merged = True
        while merged:
            merged = False
            for single in [s for s in stars if len(s.leaves) == 1]:
                u, v = single.center, single.leaves[0]
                for host in stars:
                    if host is single:
                        continue
                    centers = [host.center] + (host.leaves if len(host.leaves) == 1 else [])
                    for c in centers:
                        if len(host.leaves) + 2 > k:
                            break
                        if graph.has_edge(c, u) and graph.has_edge(c, v):
                            rest = [w for w in host.vertices if w != c]
                            stars.remove(host)
                            stars.remove(single)
                            stars.append(Star(c, sorted([*rest, u, v])))
                            merged = True
                            break
                    if merged:
                        break
                if merged:
                    break
        return sorted(stars, key=lambda star: star.center)

    def assign_leaves(
        self, graph: Graph, k: int, hubs: Sequence[int], unmatched: Sequence[int]
    ) -> tuple[int, dict[int, int]]:
        """Max flow giving every hub at most k−1 unmatched leaves.

        Returns:
            The flow value and the leaf-to-hub assignment it induces
        """
        network = nx.DiGraph()
        network.add_node("source")
        network.add_node("sink")
        for h in hubs:
            network.add_edge("source", ("h", h), capacity=k - 1)
        for u in unmatched:
            network.add_edge(("u", u), "sink", capacity=1)
            for h in hubs:
                if graph.has_edge(h, u):
                    network.add_edge(("h", h), ("u", u), capacity=1)
        value, flow = nx.maximum_flow(network, "source", "sink", flow_func=edmonds_karp)
        assignment: dict[int, int] = {}
        for h in hubs:
            for node, amount in flow[("h", h)].items():
                if amount > 0:
                    assignment[node[1]] = h
        return int(value), assignment

    def cut_violations(
        self, graph: Graph, k: int, hubs: Sequence[int], unmatched: Sequence[int]
    ) -> list[tuple[list[int], list[int]]]:
        """Pairs (H′, U′) with (k−1)|H′| + e(H ∖ H′, U′) < |U′|.

        These are exactly the source-sink cuts of the leaf-assignment
        network with capacity below |Ũ|, so the list is empty iff the
        maximum flow saturates Ũ.
        """
        if len(hubs) + len(unmatched) > CUT_ENUMERATION_LIMIT:
            raise CapabilityException(
                f"Cut enumeration is limited to |H| + |Ũ| <= {CUT_ENUMERATION_LIMIT} "
                f"(got {len(hubs) + len(unmatched)})"
            )
        hub_list, u_list = list(hubs), list(unmatched)
        block = graph.adjacency[np.ix_(hub_list, u_list)].astype(np.int64)
        violations: list[tuple[list[int], list[int]]] = []
        for h_mask in itertools.product((False, True), repeat=len(hub_list)):
            h_in = np.array(h_mask, dtype=bool)
            outside = block[~h_in].sum(axis=0) if len(hub_list) else np.zeros(len(u_list), dtype=np.int64)
            base = (k - 1) * int(h_in.sum())
            for u_mask in itertools.product((False, True), repeat=len(u_list)):
                u_in = np.array(u_mask, dtype=bool)
                if base + int(outside[u_in].sum()) < int(u_in.sum()):
                    violations.append(
                        (
                            [h for h, keep in zip(hub_list, h_mask, strict=True) if keep],
                            [u for u, keep in zip(u_list, u_mask, strict=True) if keep],
                        )
                    )
        return violations

    def exhaustive_star_partition(self, graph: Graph, k: int) -> StarPartition | None:
        """First star partition in search order, or None if none exists."""
        if graph.n > self.exhaustive_limit:
            raise CapabilityException(
                f"Exhaustive star search is limited to m <= {self.exhaustive_limit} (got {graph.n})"
            )
        neighbors = [set(int(u) for u in graph.neighbors(v)) for v in range(graph.n)]

        def search(free: frozenset[int]) -> list[Star] | None:
            if not free:
                return []
            v = min(free)
            # v as a center
            options = sorted(neighbors[v] & free)
            for size in range(1, min(k, len(options)) + 1):
                for leaves in itertools.combinations(options, size):
                    rest = search(free - {v, *leaves})
                    if rest is not None:
                        return [Star(v, leaves), *rest]
            # v as a leaf of a neighbouring center
            for c in options:
                others = sorted((neighbors[c] & free) - {v})
                for size in range(0, min(k - 1, len(others)) + 1):
                    for leaves in itertools.combinations(others, size):
                        rest = search(free - {c, v, *leaves})
                        if rest is not None:
                            return [Star(c, sorted([v, *leaves])), *rest]
            return None

        stars = search(frozenset(range(graph.n)))
        if stars is None:
            return None
        return StarPartition(sorted(stars, key=lambda star: star.center), method="exhaustive")

    # ── Refinement ─────────────────────────────────────────────────────

    def refine_to_k_stars(
        self,
        partition: StarPartition,
        class_size: int,
        k: int,
        classes: Sequence[Sequence[int]] | None = None,
        exceptional: Sequence[int] = (),
        max_exceptional: int | None = None,
        rng: RngState | None = None,
    ) -> RefinedSystem:
        """Split classes so that every star becomes a union of K_{1,k} stars over equal parts.

        A star with 1 < k′ < k leaves has every class cut into k−1 blocks;
        k′−1 center blocks take k leaf blocks each and the k−k′ leftover leaf
        blocks pair with the leftover center blocks. Every one-leaf star is
        then cut into k+1 pieces per side and rearranged into two K_{1,k}.
        All blocks are finally cut to one common part size; vertices left
        over by rounding join V₀.

        Raises:
            InfeasibleException: if the classes are too small to split, or V₀
                outgrows max_exceptional
        """
        if k < 1:
            raise DomainException(f"Stars need at least one leaf (got k = {k})")
        counts = partition.leaf_counts()
        if any(not 1 <= c <= k for c in counts):
            raise PreconditionException(f"Star leaf counts {counts} are not all within 1..{k}")
        vertices = sorted(v for star in partition.stars for v in star.vertices)
        if classes is None:
            classes = [range(v * class_size, (v + 1) * class_size) for v in range(len(vertices))]
        classes = [list(part) for part in classes]
        if any(len(part) != class_size for part in classes):
            raise PreconditionException(f"Every class must have exactly {class_size} vertices")

        if any(1 < c < k for c in counts):
            blocks, pieces = k - 1, k + 1
        elif any(c == 1 for c in counts) and k > 1:
            blocks, pieces = 1, k + 1
        else:
            blocks, pieces = 1, 1
        part_size = class_size // (blocks * pieces)
        if part_size == 0:
            raise InfeasibleException(
                f"Classes of size {class_size} cannot be cut into {blocks * pieces} nonempty parts"
            )

        parts: list[list[int]] = []
        part_origin: list[int] = []
        leftover: list[int] = list(exceptional)
        # grid[v][b][t]: part index of piece t of block b of reduced vertex v
        grid: dict[int, list[list[int]]] = {}
        for v in vertices:
            members = classes[v]
            if rng is not None:
                members = [members[i] for i in rng.spawn(f"class-{v}").generator().permutation(len(members))]
            used = blocks * pieces * part_size
            leftover.extend(members[used:])
            grid[v] = []
            for b in range(blocks):
                row = []
                for t in range(pieces):
                    start = (b * pieces + t) * part_size
                    row.append(len(parts))
                    parts.append(members[start : start + part_size])
                    part_origin.append(v)
                grid[v].append(row)

        stars: list[Star] = []
        for star in partition.stars:
            if len(star.leaves) == k or k == 1:
                for b in range(blocks):
                    stars.extend(self._expand(grid, star.center, b, star.leaves, [b] * len(star.leaves), pieces))
                continue
            if len(star.leaves) == 1:
                for b in range(blocks):
                    stars.extend(self._subdivide(grid, star.center, b, star.leaves[0], b))
                continue
            # 1 < k′ < k: regroup blocks lexicographically
            k_prime = len(star.leaves)
            regrouped = [(leaf, b) for leaf in star.leaves for b in range(blocks)]
            for c in range(k_prime - 1):
                chosen = regrouped[c * k : (c + 1) * k]
                stars.extend(
                    self._expand(grid, star.center, c, [x for x, _ in chosen], [b for _, b in chosen], pieces)
                )
            rest = regrouped[(k_prime - 1) * k :]
            for offset, (leaf, b) in enumerate(rest):
                stars.extend(self._subdivide(grid, star.center, k_prime - 1 + offset, leaf, b))

        refined = RefinedSystem(k, parts, part_origin, stars, leftover)
        refined.validate()
        if max_exceptional is not None and len(refined.exceptional) > max_exceptional:
            raise InfeasibleException(
                f"Refinement leaves |V₀| = {len(refined.exceptional)}, above the budget {max_exceptional}"
            )
        self.logger.info(
            f"Refined {len(partition.stars)} stars into {len(stars)} K_1,{k} stars "
            f"over {len(parts)} parts of size {part_size}"
        )
        return refined

    def _expand(
        self,
        grid: dict[int, list[list[int]]],
        center: int,
        center_block: int,
        leaves: list[int],
        leaf_blocks: list[int],
        pieces: int,
    ) -> list[Star]:
        """A star over blocks becomes one star per piece index."""
        return [
            Star(
                grid[center][center_block][t],
                [grid[leaf][b][t] for leaf, b in zip(leaves, leaf_blocks, strict=True)],
            )
            for t in range(pieces)
        ]

    def _subdivide(
        self,
        grid: dict[int, list[list[int]]],
        center: int,
        center_block: int,
        leaf: int,
        leaf_block: int,
    ) -> list[Star]:
        """A one-leaf star over k+1 pieces per side becomes two K_{1,k} stars."""
        first = grid[center][center_block]
        second = grid[leaf][leaf_block]
        return [Star(first[0], second[1:]), Star(second[0], first[1:])]

    # ── Exceptional vertices ───────────────────────────────────────────

    def assign_exceptional(
        self,
        host: Graph,
        refined: RefinedSystem,
        delta_p: float,
        cap_constant: float,
        eps: float,
    ) -> dict[int, int]:
        """Assign each exceptional vertex to a leaf part where it has ≥ δ′|V_x|/2 neighbours.

        Vertices with the fewest eligible parts go first, each to its least
        loaded eligible part; no part takes more than
        max(1, ⌊cap_constant·ε·|V_x|/δ′⌋) vertices.

        Raises:
            PreconditionException: listing vertices with fewer than δ′n neighbours in the leaf parts
            InfeasibleException: listing vertices left without an eligible part
        """
        if not refined.exceptional:
            return {}
        d_p = as_fraction(delta_p)
        leaf_parts = refined.leaf_parts()
        leaf_mask = np.zeros(host.n, dtype=bool)
        for x in leaf_parts:
            leaf_mask[refined.parts[x]] = True

        poor = [
            v for v in refined.exceptional
            if int((host.adjacency[v] & leaf_mask).sum()) < d_p * host.n
        ]
        if poor:
            raise PreconditionException(
                f"Exceptional vertices {poor} have fewer than δ′n = {float(d_p * host.n):.2f} "
                "neighbours in the leaf parts"
            )

        size = refined.part_size
        cap = max(1, floor_fraction(as_fraction(cap_constant) * as_fraction(eps) * size / d_p))
        eligible: dict[int, list[int]] = {}
        for v in refined.exceptional:
            eligible[v] = [
                x for x in leaf_parts
                if 2 * int(host.adjacency[v, refined.parts[x]].sum()) >= d_p * len(refined.parts[x])
            ]

        load = {x: 0 for x in leaf_parts}
        assignment: dict[int, int] = {}
        stuck: list[int] = []
        for v in sorted(refined.exceptional, key=lambda u: (len(eligible[u]), u)):
            open_parts = [x for x in eligible[v] if load[x] < cap]
            if not open_parts:
                stuck.append(v)
                continue
            x = min(open_parts, key=lambda p: (load[p], p))
            assignment[v] = x
            load[x] += 1
        if stuck:
            raise InfeasibleException(
                f"Exceptional vertices {stuck} have no eligible part with room (cap {cap} per part)"
            )
        self.logger.info(
            f"Assigned {len(assignment)} exceptional vertices; max load {max(load.values())} of cap {cap}"
        )
        return assignment
