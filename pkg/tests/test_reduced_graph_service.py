"""Tests for ReducedGraphService."""

import networkx as nx
import pytest

from app.exceptions import (
    CapabilityException,
    DomainException,
    InfeasibleException,
    InvariantViolationException,
    PreconditionException,
    ValidationException,
)
from app.models.graph import Graph
from app.models.rng_state import RngState
from app.models.star_system import ReducedGraph, RefinedSystem, Star, StarPartition
from app.services.graph_service import GraphService
from app.services.reduced_graph_service import ReducedGraphService


def reduced(nx_graph: nx.Graph) -> ReducedGraph:
    return ReducedGraph.from_graph(Graph.from_edges(nx_graph.number_of_nodes(), nx_graph.edges()))


def atlas(max_nodes: int = 7) -> list[nx.Graph]:
    """All graphs on 2..max_nodes vertices, up to isomorphism."""
    return [g for g in nx.graph_atlas_g() if 2 <= g.number_of_nodes() <= max_nodes]


class TestStarPartition:
    """Test cases for ReducedGraphService.star_partition."""

    @pytest.fixture
    def service(self) -> ReducedGraphService:
        return ReducedGraphService(star_restarts=16, exhaustive_limit=10)

    def test_five_cycle(self, service) -> None:
        graph = reduced(nx.cycle_graph(5))
        partition = service.star_partition(graph, k=2, alpha=0.2, rng=RngState(1))
        partition.validate(graph, 2)
        assert sorted(partition.leaf_counts()) == [1, 2]

    def test_complete_four_becomes_one_claw(self, service) -> None:
        graph = reduced(nx.complete_graph(4))
        partition = service.star_partition(graph, k=3, alpha=0.2, rng=RngState(2))
        assert partition.method == "flow"
        assert partition.leaf_counts() == [3]

    def test_complete_four_minus_edge_becomes_one_claw(self, service) -> None:
        g = nx.complete_graph(4)
        g.remove_edge(2, 3)
        graph = reduced(g)
        partition = service.star_partition(graph, k=3, alpha=0.1, rng=RngState(3), check_hypothesis=False)
        assert partition.leaf_counts() == [3]

    def test_isolated_vertex_fails_hypothesis(self, service) -> None:
        graph = ReducedGraph.from_graph(Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)]))
        with pytest.raises(PreconditionException):
            service.star_partition(graph, k=3, alpha=0.2, rng=RngState(0))

    def test_isolated_vertex_is_infeasible(self, service) -> None:
        graph = ReducedGraph.from_graph(Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)]))
        with pytest.raises(InfeasibleException):
            service.star_partition(graph, k=3, alpha=0.2, rng=RngState(0), check_hypothesis=False)

    def test_zero_leaves_rejected(self, service) -> None:
        with pytest.raises(DomainException):
            service.star_partition(reduced(nx.complete_graph(3)), k=0, alpha=0.2, rng=RngState(0))

    def test_empty_graph(self, service) -> None:
        partition = service.star_partition(ReducedGraph(0), k=2, alpha=0.2, rng=RngState(0))
        assert partition.stars == []

    def test_declared_floor_is_checked(self) -> None:
        with pytest.raises(ValidationException, match="below the declared floor"):
            ReducedGraph.from_graph(Graph.from_edges(3, [(0, 1)]), min_degree_floor=1)

    def test_degree_bound_is_exact(self, service) -> None:
        assert service.degree_bound(50, 3, 0.2) == 15

    @pytest.mark.parametrize("k", [2, 3])
    def test_construction_succeeds_above_degree_threshold(self, service, k) -> None:
        """Minimum degree at least m/(k+1) leaves no Hall deficiency for the flow."""
        checked = 0
        for g in atlas():
            m = g.number_of_nodes()
            if min(d for _, d in g.degree()) * (k + 1) < m:
                continue
            graph = reduced(g)
            partition = service.star_partition(
                graph, k=k, alpha=0.0, rng=RngState(m), check_hypothesis=False, exhaustive_fallback=False
            )
            assert partition.method == "flow"
            partition.validate(graph, k)
            checked += 1
        assert checked > 100

    def test_random_dense_reduced_graphs(self, service) -> None:
        graph_service = GraphService()
        for seed in range(20):
            graph = ReducedGraph.from_graph(graph_service.sample_gnp(50, 0.7, RngState(seed)))
            if graph.min_degree() < 15:
                continue
            partition = service.star_partition(graph, k=3, alpha=0.2, rng=RngState(seed, 1))
            partition.validate(graph, 3)
            assert partition.method == "flow"

    @pytest.mark.slow
    def test_random_dense_reduced_graphs_many(self, service) -> None:
        graph_service = GraphService()
        found = 0
        for seed in range(100):
            graph = ReducedGraph.from_graph(graph_service.sample_gnp(50, 0.7, RngState(seed)))
            if graph.min_degree() < 15:
                continue
            service.star_partition(graph, k=3, alpha=0.2, rng=RngState(seed, 1)).validate(graph, 3)
            found += 1
        assert found > 90


class TestExhaustiveStarPartition:
    """Test cases for ReducedGraphService.exhaustive_star_partition."""

    @pytest.fixture
    def service(self) -> ReducedGraphService:
        return ReducedGraphService(exhaustive_limit=10)

    def test_one_leaf_stars_are_perfect_matchings(self, service) -> None:
        for g in atlas():
            m = g.number_of_nodes()
            has_perfect = 2 * len(nx.max_weight_matching(g, maxcardinality=True)) == m
            partition = service.exhaustive_star_partition(reduced(g), 1)
            assert (partition is not None) == has_perfect

    def test_partitions_are_valid(self, service) -> None:
        for g in atlas(6):
            graph = reduced(g)
            partition = service.exhaustive_star_partition(graph, 3)
            if partition is not None:
                partition.validate(graph, 3)
                assert partition.method == "exhaustive"
            else:
                assert min(d for _, d in g.degree()) == 0 or max(d for _, d in g.degree()) >= 4

    def test_big_star_needs_enough_leaves(self, service) -> None:
        graph = reduced(nx.star_graph(4))
        assert service.exhaustive_star_partition(graph, 3) is None
        assert service.exhaustive_star_partition(graph, 4) is not None

    def test_size_limit(self, service) -> None:
        with pytest.raises(CapabilityException):
            service.exhaustive_star_partition(reduced(nx.complete_graph(11)), 3)


class TestLeafAssignment:
    """Test cases for ReducedGraphService.assign_leaves and cut_violations."""

    @pytest.fixture
    def service(self) -> ReducedGraphService:
        return ReducedGraphService()

    def test_overloaded_hub(self, service) -> None:
        graph = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        value, assignment = service.assign_leaves(graph, 3, [0], [1, 2, 3])
        assert value == 2
        assert set(assignment.values()) == {0}
        violations = service.cut_violations(graph, 3, [0], [1, 2, 3])
        assert ([0], [1, 2, 3]) in violations

    def test_enough_capacity(self, service) -> None:
        graph = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        value, assignment = service.assign_leaves(graph, 4, [0], [1, 2, 3])
        assert value == 3
        assert assignment == {1: 0, 2: 0, 3: 0}
        assert service.cut_violations(graph, 4, [0], [1, 2, 3]) == []

    def test_cuts_agree_with_flow(self, service) -> None:
        graph_service = GraphService()
        for seed in range(30):
            graph = graph_service.sample_gnp(10, 0.35, RngState(seed))
            hubs, unmatched = [0, 1, 2, 3], [4, 5, 6, 7, 8, 9]
            value, _ = service.assign_leaves(graph, 2, hubs, unmatched)
            violations = service.cut_violations(graph, 2, hubs, unmatched)
            assert (value == len(unmatched)) == (violations == [])

    def test_cut_enumeration_limit(self, service) -> None:
        graph = Graph(21)
        with pytest.raises(CapabilityException):
            service.cut_violations(graph, 3, list(range(10)), list(range(10, 21)))


class TestRefinement:
    """Test cases for ReducedGraphService.refine_to_k_stars."""

    @pytest.fixture
    def service(self) -> ReducedGraphService:
        return ReducedGraphService()

    def test_single_edge_is_subdivided(self, service) -> None:
        refined = service.refine_to_k_stars(StarPartition([Star(0, [1])]), class_size=8, k=3)
        assert len(refined.stars) == 2
        assert len(refined.parts) == 8
        assert refined.part_size == 2
        assert refined.exceptional == []
        assert all(len(star.leaves) == 3 for star in refined.stars)

    def test_two_leaf_star_with_three_leaf_target(self, service) -> None:
        refined = service.refine_to_k_stars(StarPartition([Star(0, [1, 2])]), class_size=8, k=3)
        assert len(refined.stars) == 6
        assert len(refined.parts) == 24
        assert refined.part_size == 1
        refined.validate()

    def test_rounding_leftovers_join_exceptional_set(self, service) -> None:
        refined = service.refine_to_k_stars(
            StarPartition([Star(0, [1, 2])]), class_size=10, k=3, exceptional=[30, 31]
        )
        assert len(refined.exceptional) == 2 + 3 * 2
        assert refined.n == 32

    def test_full_stars_keep_class_size(self, service) -> None:
        refined = service.refine_to_k_stars(StarPartition([Star(0, [1, 2, 3])]), class_size=5, k=3)
        assert len(refined.stars) == 1
        assert refined.part_size == 5

    def test_mixed_partition(self, service) -> None:
        partition = StarPartition([Star(0, [1, 2, 3]), Star(4, [5])])
        refined = service.refine_to_k_stars(partition, class_size=8, k=3)
        assert len(refined.stars) == 6
        assert refined.part_size == 2
        origins = {refined.part_origin[p] for star in refined.stars for p in star.vertices}
        assert origins == set(range(6))

    def test_star_edges_follow_reduced_edges(self, service) -> None:
        partition = StarPartition([Star(0, [1, 2]), Star(3, [4])])
        refined = service.refine_to_k_stars(partition, class_size=16, k=3, rng=RngState(4))
        reduced_edges = {(0, 1), (0, 2), (3, 4)}
        for center, leaf in refined.star_edges():
            a, b = sorted((refined.part_origin[center], refined.part_origin[leaf]))
            assert (a, b) in reduced_edges

    def test_classes_too_small(self, service) -> None:
        with pytest.raises(InfeasibleException):
            service.refine_to_k_stars(StarPartition([Star(0, [1, 2])]), class_size=7, k=3)

    def test_exceptional_budget(self, service) -> None:
        with pytest.raises(InfeasibleException):
            service.refine_to_k_stars(StarPartition([Star(0, [1, 2])]), class_size=10, k=3, max_exceptional=5)

    def test_leaf_count_above_target(self, service) -> None:
        with pytest.raises(PreconditionException):
            service.refine_to_k_stars(StarPartition([Star(0, [1, 2, 3])]), class_size=8, k=2)

    def test_validate_rejects_reused_part(self) -> None:
        refined = RefinedSystem(1, [[0], [1]], [0, 1], [Star(0, [1]), Star(1, [0])])
        with pytest.raises(InvariantViolationException):
            refined.validate()


class TestExceptionalAssignment:
    """Test cases for ReducedGraphService.assign_exceptional."""

    @pytest.fixture
    def service(self) -> ReducedGraphService:
        return ReducedGraphService()

    def refined(self, service: ReducedGraphService, exceptional: list[int]) -> RefinedSystem:
        """Two classes of 6 cut into parts of 2; leaf parts are {8,9}, {10,11}, {2,3}, {4,5}."""
        return service.refine_to_k_stars(
            StarPartition([Star(0, [1])]), class_size=6, k=2, exceptional=exceptional
        )

    def test_layout(self, service) -> None:
        refined = self.refined(service, [12])
        assert refined.stars == [Star(0, [4, 5]), Star(3, [1, 2])]
        assert refined.parts[4] == [8, 9]
        assert refined.parts[1] == [2, 3]

    def test_single_vertex(self, service) -> None:
        refined = self.refined(service, [12])
        host = Graph.from_edges(13, [(12, 8), (12, 9), (12, 10), (12, 11)])
        assert service.assign_exceptional(host, refined, 0.2, 1.0, 0.01) == {12: 4}

    def test_vertices_spread_over_parts(self, service) -> None:
        refined = self.refined(service, [12, 13])
        edges = [(v, w) for v in (12, 13) for w in (8, 9, 2)]
        host = Graph.from_edges(14, edges)
        assignment = service.assign_exceptional(host, refined, 0.2, 1.0, 0.01)
        assert assignment == {12: 1, 13: 4}
        refined.with_assignment(assignment).validate()

    def test_capacity_exhausted(self, service) -> None:
        refined = self.refined(service, [12, 13, 14])
        edges = [(v, w) for v in (12, 13, 14) for w in (8, 9, 2)]
        with pytest.raises(InfeasibleException):
            service.assign_exceptional(Graph.from_edges(15, edges), refined, 0.2, 1.0, 0.01)

    def test_poorly_connected_vertex(self, service) -> None:
        refined = self.refined(service, [12])
        with pytest.raises(PreconditionException, match=r"\[12\]"):
            service.assign_exceptional(Graph.from_edges(13, [(12, 8)]), refined, 0.2, 1.0, 0.01)

    def test_no_exceptional_vertices(self, service) -> None:
        refined = self.refined(service, [])
        assert service.assign_exceptional(Graph(12), refined, 0.2, 1.0, 0.01) == {}
