"""Tests for HamiltonService."""

from collections import Counter
from unittest.mock import patch

import pytest

from app.exceptions import (
    CapabilityException,
    DomainException,
    InfeasibleException,
    InvariantViolationException,
    SamplingAbortedException,
)
from app.models.graph import Graph
from app.models.hamilton import (
    Blueprint,
    CompletionGraph,
    HamiltonSetup,
    XiGoodEmbedding,
    cyclic_distance,
    power_cycle_pairs,
)
from app.models.rng_state import RngState
from app.models.star_system import RefinedSystem, Star
from app.schemas.blowup_schema import ParamSet
from app.services.blowup_service import BlowupService
from app.services.graph_service import GraphService
from app.services.hamilton_service import HamiltonService
from app.services.instance_service import InstanceService
from app.services.matching_service import MatchingService
from app.services.reduced_graph_service import ReducedGraphService
from app.services.regularity_service import RegularityService
from app.services.trial_runner import TrialRunner


def single_star(k: int, size: int, exceptional: dict[int, int] | None = None) -> RefinedSystem:
    """One K_{1,k} star over parts of the given size; exceptional maps vertex -> leaf part."""
    parts = [list(range(p * size, (p + 1) * size)) for p in range(k + 1)]
    assignment = exceptional or {}
    return RefinedSystem(k, parts, list(range(k + 1)), [Star(0, range(1, k + 1))], sorted(assignment), assignment)


def build_service(rejection_budget: int = 10_000) -> HamiltonService:
    graph_service = GraphService()
    regularity = RegularityService(graph_service, witness_budget=500)
    blowup = BlowupService(regularity, MatchingService(regularity, exact_limit=16))
    return HamiltonService(
        blowup,
        ReducedGraphService(),
        graph_service,
        TrialRunner(max_workers=1),
        rejection_budget=rejection_budget,
        check_invariants=True,
    )


class TestBlueprint:
    """Test cases for Blueprint class."""

    def test_valid_segment_has_no_violations(self) -> None:
        bp = Blueprint(8, 3, [1, 0, 0, 1, 0, 0, 0, 0], [(0, 8)], [2])
        assert bp.violations() == []
        assert bp.ones(0) == [0, 3]

    def test_all_ones_has_lonely_ones(self) -> None:
        bp = Blueprint(4, 1, [1, 1, 1, 1], [(0, 4)], [4])
        assert "zero-nearby" in bp.violations()

    def test_wrong_one_count(self) -> None:
        bp = Blueprint(8, 3, [1, 0, 0, 1, 0, 0, 0, 0], [(0, 8)], [3])
        assert bp.violations() == ["one-count"]

    def test_missing_trailing_zeros(self) -> None:
        bp = Blueprint(8, 3, [1, 0, 0, 1, 0, 0, 1, 0], [(0, 8)], [3])
        assert "segment-shape" in bp.violations()

    def test_uncovered_positions(self) -> None:
        bp = Blueprint(8, 3, [1, 0, 0, 1, 0, 0, 0, 0], [(0, 6)], [2])
        assert bp.violations() == ["segment-cover"]

    def test_same_segment_pairs_stay_inside_segments(self) -> None:
        bp = Blueprint(8, 1, [1, 0, 0, 0, 1, 0, 0, 0], [(0, 4), (4, 4)], [1, 1])
        pairs = bp.same_segment_pairs()
        assert (3, 4) not in pairs
        assert (0, 7) not in pairs
        assert (0, 1) in pairs

    def test_cyclic_distance(self) -> None:
        assert cyclic_distance(0, 7, 8) == 1
        assert cyclic_distance(2, 6, 8) == 4

    def test_power_cycle_pairs(self) -> None:
        assert len(power_cycle_pairs(10, 2)) == 20
        assert power_cycle_pairs(4, 3) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class TestHamiltonService:
    """Test cases for HamiltonService class."""

    @pytest.fixture
    def service(self) -> HamiltonService:
        return build_service()

    @pytest.fixture
    def instance_service(self) -> InstanceService:
        return InstanceService(GraphService())

    @pytest.fixture
    def setup(self, service, instance_service) -> HamiltonSetup:
        """n = 120, k = 3, no exceptional vertices: one star over classes of 30."""
        host = instance_service.hamilton_host(120, 3, 0.1, RngState(5))
        return service.prepare(host, RngState(6))

    @pytest.fixture
    def params(self) -> ParamSet:
        return ParamSet.hamilton_defaults(max_degree=6)

    # ── blueprint ──────────────────────────────────────────────────────

    def test_blueprint_packs_two_ones(self, service) -> None:
        bp = service.build_blueprint(single_star(3, 2), 3)
        assert bp.labels.tolist() == [1, 0, 0, 1, 0, 0, 0, 0]
        assert bp.violations() == []

    def test_blueprint_single_one(self, service) -> None:
        bp = service.build_blueprint(single_star(3, 1), 3)
        assert bp.labels.tolist() == [1, 0, 0, 0]
        assert bp.violations() == []

    def test_blueprint_segments_follow_star_order(self, service) -> None:
        parts = [list(range(p * 3, (p + 1) * 3)) for p in range(6)]
        refined = RefinedSystem(2, parts, list(range(6)), [Star(0, [1, 2]), Star(3, [4, 5])])
        bp = service.build_blueprint(refined, 2)
        assert bp.segments == [(0, 9), (9, 9)]
        assert bp.ones(0) == [0, 2, 4]
        assert bp.ones(1) == [9, 11, 13]
        assert bp.violations() == []

    def test_blueprint_counts_exceptional_vertices(self, service) -> None:
        bp = service.build_blueprint(single_star(2, 3, {9: 1, 10: 2}), 2, max_gap=3)
        assert bp.n == 11
        assert bp.ones(0) == [0, 2, 4, 6, 9]
        assert bp.expected_ones == [5]

    def test_blueprint_infeasible_names_segment(self, service) -> None:
        refined = single_star(1, 2, {4: 1, 5: 1})
        with pytest.raises(InfeasibleException, match="Segment 0"):
            service.build_blueprint(refined, 1)

    def test_blueprint_rejects_zero_power(self, service) -> None:
        with pytest.raises(DomainException):
            service.build_blueprint(single_star(3, 2), 0)

    def test_prepare_builds_valid_setup(self, setup) -> None:
        assert setup.host.n == 120
        assert all(len(star.leaves) == 3 for star in setup.refined.stars)
        assert setup.refined.part_size == 30
        assert setup.blueprint.n == 120
        assert setup.blueprint.max_gap == 4
        assert setup.blueprint.violations() == []

    # ── exceptional positions ──────────────────────────────────────────

    def test_exceptional_positions_empty_without_exceptional(self, service) -> None:
        refined = single_star(3, 2)
        bp = service.build_blueprint(refined, 3)
        assert service.sample_exceptional_positions(bp, refined, RngState(0)) == {}

    @pytest.mark.parametrize("budget", [10_000, 0])
    def test_exceptional_positions_admissible(self, budget) -> None:
        service = build_service(rejection_budget=budget)
        refined = single_star(2, 3, {9: 1, 10: 2})
        bp = service.build_blueprint(refined, 2, max_gap=3)
        for seed in range(20):
            chosen = service.sample_exceptional_positions(bp, refined, RngState(seed))
            assert sorted(chosen[0]) in ([0, 6], [4, 9])

    def test_counting_fallback_is_uniform(self) -> None:
        service = build_service(rejection_budget=0)
        refined = single_star(2, 3, {9: 1, 10: 2})
        bp = service.build_blueprint(refined, 2, max_gap=3)
        draws = Counter(
            tuple(service.sample_exceptional_positions(bp, refined, RngState(seed))[0]) for seed in range(400)
        )
        assert set(draws) == {(0, 6), (4, 9)}
        assert 160 <= draws[(0, 6)] <= 240

    def test_too_many_exceptional_for_segment(self, service) -> None:
        refined = single_star(3, 2, {8: 1, 9: 2, 10: 3})
        bp = Blueprint(11, 3, [1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0], [(0, 11)], [2])
        with pytest.raises(InfeasibleException):
            service.sample_exceptional_positions(bp, refined, RngState(0))

    # ── ξ-good sampling ────────────────────────────────────────────────

    def test_sample_without_exceptional_is_pure_blowup(self, service, setup, params) -> None:
        xi = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(1))
        assert xi.a_prime == {}
        assert sorted(xi.phi) == list(range(120))
        assert service.check_xi_good(setup.host, setup.refined, setup.blueprint, xi.phi) == []

    def test_sample_with_exceptional_vertices(self, service, instance_service, params) -> None:
        host = instance_service.hamilton_host(200, 3, 0.1, RngState(8), exceptional=4)
        setup = service.prepare(host, RngState(9))
        assert len(setup.refined.assignment) == 4
        xi = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(2))
        assert sum(len(positions) for positions in xi.a_prime.values()) == 4
        assert {xi.phi[i] for positions in xi.a_prime.values() for i in positions} == set(host.exceptional)
        assert service.check_xi_good(setup.host, setup.refined, setup.blueprint, xi.phi) == []

    def test_sample_is_deterministic(self, service, setup, params) -> None:
        first = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(3))
        second = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(3))
        assert first.phi == second.phi

    def test_check_detects_broken_bijection(self, service, setup) -> None:
        phi = list(range(120))
        phi[1] = phi[0]
        assert service.check_xi_good(setup.host, setup.refined, setup.blueprint, phi) == ["bijection"]

    def test_check_detects_swapped_labels(self, service, setup, params) -> None:
        xi = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(4))
        phi = list(xi.phi)
        phi[0], phi[1] = phi[1], phi[0]
        assert "label-classes" in service.check_xi_good(setup.host, setup.refined, setup.blueprint, phi)

    # ── completion graph ───────────────────────────────────────────────

    def test_completion_graph_partitions_power_edges(self, service, setup) -> None:
        bp = setup.blueprint
        graph = service.completion_graph(XiGoodEmbedding(list(range(120)), {}), bp, 3)
        assert graph.edge_count + len(graph.excluded) == len(power_cycle_pairs(120, 3))
        for i, j in graph.excluded:
            assert bp.labels[i] != bp.labels[j]
        for i, j in graph.edges:
            assert bp.labels[i] == bp.labels[j] or bp.segment_of[i] != bp.segment_of[j]

    def test_completion_graph_cross_segment_edges_kept(self, service) -> None:
        parts = [list(range(p * 3, (p + 1) * 3)) for p in range(6)]
        refined = RefinedSystem(2, parts, list(range(6)), [Star(0, [1, 2]), Star(3, [4, 5])])
        bp = service.build_blueprint(refined, 2)
        graph = service.completion_graph(XiGoodEmbedding(list(range(18)), {}), bp, 2)
        assert (8, 9) in graph.edges
        assert (0, 1) in graph.excluded
        assert (1, 3) in graph.edges

    def test_completion_graph_asserts_host_edges(self, service, setup, params) -> None:
        xi = service.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, RngState(5))
        graph = service.completion_graph(xi, setup.blueprint, 3, setup.host)
        assert graph.image_edges(excluded=True) <= set(setup.host.edges())
        with pytest.raises(InvariantViolationException):
            service.completion_graph(xi, setup.blueprint, 3, Graph(120))

    def test_completion_graph_rejects_other_power(self, service, setup) -> None:
        with pytest.raises(DomainException):
            service.completion_graph(XiGoodEmbedding(list(range(120)), {}), setup.blueprint, 2)

    # ── edge counts ────────────────────────────────────────────────────

    @pytest.mark.parametrize(("v", "k", "expected"), [(4, 3, 6), (2, 4, 4), (1, 3, 3), (5, 3, 8), (6, 3, 10)])
    def test_count_edges_bound(self, service, v, k, expected) -> None:
        assert service.count_edges_bound(v, k) == expected

    @pytest.mark.parametrize(("v", "k"), [(0, 3), (3, 2)])
    def test_count_edges_bound_domain(self, service, v, k) -> None:
        with pytest.raises(DomainException):
            service.count_edges_bound(v, k)

    def test_claim_on_edgeless_graph(self, service) -> None:
        report = service.check_claim_count_edge(Graph(5), 3, 4)
        assert report.passed
        assert [row.v for row in report.rows] == [1]
        assert report.subgraphs == 5

    def test_claim_negative_control(self, service) -> None:
        report = service.check_claim_count_edge(Graph.complete(5), 3, 5)
        assert report.subgraphs == 31
        assert not report.passed
        row = report.rows[4]
        assert row.max_edges == 10
        assert not row.relaxed_ok
        assert not row.formula_ok
        assert all(r.relaxed_ok and r.formula_ok for r in report.rows[:4])

    def test_claim_holds_on_completion_graph(self, service, setup) -> None:
        graph = service.completion_graph(XiGoodEmbedding(list(range(120)), {}), setup.blueprint, 3)
        report = service.check_claim_count_edge(graph, 3, 6)
        assert report.passed
        assert report.rows[-1].v == 6

    def test_claim_enumeration_limit(self, service) -> None:
        with pytest.raises(CapabilityException):
            service.check_claim_count_edge(Graph(3), 3, 13)

    @pytest.mark.slow
    def test_claim_holds_with_exceptional_vertices(self, service, instance_service, params) -> None:
        host = instance_service.hamilton_host(200, 3, 0.1, RngState(8), exceptional=4)
        setup = service.prepare(host, RngState(9))
        for seed in range(3):
            graph = service.draw_completion(setup, params, RngState(seed))
            assert service.check_claim_count_edge(graph, 3, 8).passed

    # ── edge spread ────────────────────────────────────────────────────

    def test_edge_spread_on_shuffled_images(self, service, setup) -> None:
        reference = service.completion_graph(XiGoodEmbedding(list(range(120)), {}), setup.blueprint, 3)
        probe = sorted(reference.image_edges())[:3]

        def sampler(state: RngState) -> CompletionGraph:
            phi = state.generator().permutation(120).tolist()
            return CompletionGraph(120, 3, reference.edges, reference.excluded, phi)

        report = service.estimate_edge_spread(sampler, probe, 3, 50, RngState(0), c_prime=120.0)
        assert report.samples == 50
        assert report.prefix_frequencies[0] == 1.0
        assert sum(report.exact_frequencies) == pytest.approx(1.0)
        assert report.exact_frequencies[0] >= 0.5
        assert report.reference == [0.0, 0.0, 0.0, 0.0]
        assert report.within_bound
        assert len(report.log_frequencies) == 4

    def test_edge_spread_flags_sampler_that_keeps_the_probe(self, service, setup) -> None:
        reference = service.completion_graph(XiGoodEmbedding(list(range(120)), {}), setup.blueprint, 3)
        probe = sorted(reference.image_edges())[:3]

        report = service.estimate_edge_spread(lambda state: reference, probe, 3, 20, RngState(0))
        assert report.exact_frequencies == [0.0, 0.0, 0.0, 1.0]
        assert report.c_prime == 1.0
        assert not report.monotone
        assert not report.within_bound
        assert not report.partial

    def test_edge_spread_rejects_long_tmax(self, service) -> None:
        with pytest.raises(DomainException):
            service.estimate_edge_spread(lambda state: None, [(0, 1)], 2, 10, RngState(0))

    def test_edge_spread_aborts_on_failures(self, service) -> None:
        def sampler(state: RngState) -> CompletionGraph:
            raise InfeasibleException("no draw")

        with pytest.raises(SamplingAbortedException):
            service.estimate_edge_spread(sampler, [(0, 1)], 1, 10, RngState(0))

    @pytest.mark.slow
    def test_edge_spread_single_edge_frequency(self, service, setup, params) -> None:
        reference = service.draw_completion(setup, params, RngState(100))
        probe = sorted(reference.image_edges())[:4]
        report = service.estimate_edge_spread(
            lambda state: service.draw_completion(setup, params, state), probe, 4, 200, RngState(1)
        )
        assert report.prefix_frequencies[1] <= 0.2
        assert sum(report.exact_frequencies) == pytest.approx(1.0)

    # ── perturbed trials ───────────────────────────────────────────────

    def test_perturbed_trial_complete_random_graph(self, service, setup, params) -> None:
        outcome = service.perturbed_trial(
            setup.host, setup.refined, setup.blueprint, 1.0, 5, RngState(0), params
        )
        assert outcome.success
        assert outcome.tries_used == 1
        assert outcome.tries[0].random_cover
        assert outcome.tries[0].missing_edges == 0

    def test_perturbed_trial_empty_random_graph(self, service, instance_service, params) -> None:
        host = instance_service.hamilton_host(120, 3, 0.1, RngState(5), d=0.0)
        setup = service.prepare(host, RngState(6))
        outcome = service.perturbed_trial(
            setup.host, setup.refined, setup.blueprint, 0.0, 2, RngState(0), params
        )
        assert not outcome.success
        assert outcome.tries_used == 2
        assert outcome.random_edges == 0
        assert all(not t.random_cover and t.missing_edges > 0 for t in outcome.tries)

    def test_perturbed_trial_all_draws_fail(self, service, setup) -> None:
        with patch.object(service, "sample_xi_good", side_effect=InfeasibleException("no A′")):
            with pytest.raises(SamplingAbortedException):
                service.perturbed_trial(setup.host, setup.refined, setup.blueprint, 0.5, 3, RngState(0))

    # ── verification ───────────────────────────────────────────────────

    def test_verify_complete_host(self, service) -> None:
        assert service.verify_power_ham(Graph.complete(10), [3, 1, 4, 0, 5, 9, 2, 6, 8, 7], 3)

    def test_verify_empty_host(self, service) -> None:
        assert not service.verify_power_ham(Graph(10), list(range(10)), 1)

    def test_verify_exact_image(self, service) -> None:
        phi = [3, 1, 4, 0, 5, 9, 2, 6, 8, 7]
        edges = [(phi[i], phi[j]) for i, j in power_cycle_pairs(10, 2)]
        assert service.verify_power_ham(Graph.from_edges(10, edges), phi, 2)
        assert not service.verify_power_ham(Graph.from_edges(10, edges[1:]), phi, 2)
        assert service.missing_power_edges(Graph.from_edges(10, edges[1:]), phi, 2) == 1

    def test_verify_rejects_non_bijection(self, service) -> None:
        with pytest.raises(DomainException):
            service.verify_power_ham(Graph.complete(4), [0, 0, 1, 2], 1)
