"""Tests for MatchingService."""

import itertools
from collections import Counter
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest
from scipy import stats

from app.exceptions import (
    CapabilityException,
    DomainException,
    InfeasibleException,
    InvalidOperationException,
    InvariantViolationException,
    PreconditionException,
)
from app.models.graph import BipartitePair
from app.models.matching import Matching
from app.models.rng_state import RngState
from app.services.graph_service import GraphService
from app.services.matching_service import MatchingService, uniform_below
from app.services.regularity_service import RegularityService


class TestMatchingService:
    """Test cases for MatchingService class."""

    @pytest.fixture
    def graph_service(self) -> GraphService:
        return GraphService()

    @pytest.fixture
    def service(self, graph_service) -> MatchingService:
        regularity = RegularityService(graph_service, witness_budget=1_000)
        return MatchingService(regularity, exact_limit=24, mcmc_step_factor=50)

    # ── counting ───────────────────────────────────────────────────────

    def test_count_complete(self, service) -> None:
        assert service.count_perfect_matchings(BipartitePair.complete(3, 3)) == 6

    def test_count_eight_cycle(self, service, eight_cycle_pair) -> None:
        assert service.count_perfect_matchings(eight_cycle_pair) == 2

    def test_count_derangements(self, service, derangement_pair) -> None:
        assert service.count_perfect_matchings(derangement_pair) == 9

    def test_count_matches_brute_force(self, service, graph_service) -> None:
        for seed in range(10):
            pair = graph_service.sample_bipartite(5, 5, 0.6, RngState(seed))
            brute = sum(
                all(pair.matrix[i, perm[i]] for i in range(5))
                for perm in itertools.permutations(range(5))
            )
            assert service.count_perfect_matchings(pair) == brute

    def test_count_large_uses_exact_integers(self, service) -> None:
        # 16^16 exceeds the int64-safe degree product, forcing object counts
        assert service.count_perfect_matchings(BipartitePair.complete(16, 16)) == 20922789888000

    def test_count_above_limit(self, graph_service) -> None:
        limited = MatchingService(RegularityService(graph_service), exact_limit=4)
        with pytest.raises(CapabilityException):
            limited.count_perfect_matchings(BipartitePair.complete(5, 5))

    def test_count_unequal_sides(self, service) -> None:
        with pytest.raises(DomainException):
            service.count_perfect_matchings(BipartitePair.complete(2, 3))

    # ── exact sampling ─────────────────────────────────────────────────

    def test_exact_single_edge(self, service) -> None:
        matching = service.sample_uniform_matching_exact(BipartitePair.complete(1, 1), RngState(0))
        assert matching.pairs() == [(0, 1)]

    def test_exact_empty_pair_raises(self, service) -> None:
        pair = BipartitePair(range(2), range(2, 4), np.zeros((2, 2), dtype=bool))
        with pytest.raises(InfeasibleException):
            service.sample_uniform_matching_exact(pair, RngState(0))

    def test_exact_uniform_on_complete(self, service, complete_pair) -> None:
        samples = service.sample_many_exact(complete_pair, 10_000, RngState(42))
        tally = Counter(m.key() for m in samples)
        assert len(tally) == 24
        observed = [tally[key] for key in sorted(tally)]
        _, p_value = stats.chisquare(observed)
        assert p_value > 0.001

    def test_exact_samples_are_valid(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(6, 6, 0.7, RngState(3))
        if service.count_perfect_matchings(pair) == 0:
            pytest.skip("fixture pair has no perfect matching")
        for i in range(50):
            service.sample_uniform_matching_exact(pair, RngState(9).child(i)).validate(pair)

    def test_exact_matches_pin_probability(self, service, derangement_pair) -> None:
        samples = service.sample_many_exact(derangement_pair, 4_000, RngState(1))
        hits = sum(1 for m in samples if m.partner_of(0) == 5)
        assert abs(hits / 4_000 - 1 / 3) < 0.03

    # ── MCMC ───────────────────────────────────────────────────────────

    def test_mcmc_two_by_two_balanced(self, service) -> None:
        pair = BipartitePair.complete(2, 2)
        tally = Counter(
            service.sample_matching_mcmc(pair, 200, RngState(5).child(i)).key() for i in range(2_000)
        )
        assert set(tally) == {(0, 1), (1, 0)}
        assert abs(tally[(0, 1)] / 2_000 - 0.5) < 0.05

    def test_mcmc_unique_matching(self, service) -> None:
        pair = BipartitePair(range(4), range(4, 8), np.tril(np.ones((4, 4), dtype=bool)))
        for i in range(5):
            matching = service.sample_matching_mcmc(pair, 300, RngState(2).child(i))
            assert matching.key() == (0, 1, 2, 3)

    def test_mcmc_isolated_vertex(self, service) -> None:
        matrix = np.ones((3, 3), dtype=bool)
        matrix[:, 1] = False
        pair = BipartitePair(range(3), range(3, 6), matrix)
        with pytest.raises(InfeasibleException):
            service.sample_matching_mcmc(pair, 10, RngState(0))

    def test_mcmc_returns_valid_matching(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(30, 30, 0.5, RngState(8))
        service.sample_matching_mcmc(pair, 2_000, RngState(1)).validate(pair)

    # ── spread sampler ─────────────────────────────────────────────────

    def test_spread_matching_complete(self, service) -> None:
        pair = BipartitePair.complete(8, 8)
        matching = service.sample_spread_matching(pair, 0.2, 0.3, RngState(3))
        matching.validate(pair)
        assert service.exact_pin_probability(pair, 0, 8) == Fraction(1, 8)

    def test_spread_matching_propagates_extraction_failure(self, service) -> None:
        pair = BipartitePair.complete(8, 8)
        failure = InvalidOperationException("reach the exact edge count", "the removal cap is exhausted")
        with patch.object(service.regularity_service, "extract_exact_density_subgraph", side_effect=failure):
            with pytest.raises(InvalidOperationException):
                service.sample_spread_matching(pair, 0.2, 0.3, RngState(3))

    def test_spread_matching_flags_unthinned_fallback(self, service) -> None:
        pair = BipartitePair.complete(8, 8)
        edgeless = pair.with_matrix(np.zeros((8, 8), dtype=bool))
        with patch.object(service.regularity_service, "extract_exact_density_subgraph", return_value=edgeless):
            matching = service.sample_spread_matching(pair, 0.2, 0.3, RngState(3))
        matching.validate(pair)
        assert not matching.thinned

    def test_spread_matching_flags_thinned_draw(self, service) -> None:
        pair = BipartitePair.complete(8, 8)
        with patch.object(service.regularity_service, "extract_exact_density_subgraph", return_value=pair):
            matching = service.sample_spread_matching(pair, 0.2, 0.3, RngState(3))
        assert matching.thinned

    def test_spread_matching_not_super_regular(self, service) -> None:
        matrix = np.ones((8, 8), dtype=bool)
        matrix[0] = False
        pair = BipartitePair(range(8), range(8, 16), matrix)
        with pytest.raises(PreconditionException):
            service.sample_spread_matching(pair, 0.2, 0.3, RngState(0))

    def test_spread_matching_above_exact_limit(self, graph_service) -> None:
        limited = MatchingService(RegularityService(graph_service, witness_budget=200), exact_limit=6)
        pair = BipartitePair.complete(10, 10)
        limited.sample_spread_matching(pair, 0.2, 0.5, RngState(4)).validate(pair)

    def test_spread_matching_deterministic(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(12, 12, 0.8, RngState(6))
        first = service.sample_spread_matching(pair, 0.4, 0.3, RngState(7))
        second = service.sample_spread_matching(pair, 0.4, 0.3, RngState(7))
        assert first == second

    # ── exact pins ─────────────────────────────────────────────────────

    def test_pin_complete(self, service, complete_pair) -> None:
        assert service.exact_pin_probability(complete_pair, 1, 6) == Fraction(1, 4)

    def test_pin_eight_cycle(self, service, eight_cycle_pair) -> None:
        for x, y in eight_cycle_pair.edges():
            assert service.exact_pin_probability(eight_cycle_pair, x, y) == Fraction(1, 2)

    def test_pin_derangements(self, service, derangement_pair) -> None:
        assert service.exact_pin_probability(derangement_pair, 0, 5) == Fraction(1, 3)

    def test_pin_non_edge_is_zero(self, service, derangement_pair) -> None:
        assert service.exact_pin_probability(derangement_pair, 0, 4) == 0

    def test_pins_sum_to_one(self, service, graph_service) -> None:
        for seed in range(6):
            m = 2 + seed % 5
            pair = graph_service.sample_bipartite(m, m, 0.7, RngState(seed))
            if service.count_perfect_matchings(pair) == 0:
                continue
            for x in pair.x_side:
                total = sum(service.exact_pin_probability(pair, x, y) for y in pair.y_side)
                assert total == 1

    def test_pin_pair_complete(self, service) -> None:
        for m in range(2, 6):
            pair = BipartitePair.complete(m, m)
            assert service.pin_pair_probability(pair, (0, m), (1, m + 1)) == Fraction(1, m * (m - 1))

    def test_pin_pair_conflicting(self, service, complete_pair) -> None:
        assert service.pin_pair_probability(complete_pair, (0, 4), (0, 5)) == 0
        assert service.pin_pair_probability(complete_pair, (0, 4), (1, 4)) == 0


class TestMatching:
    """Test cases for Matching class."""

    def test_validate_rejects_non_edge(self, perfect_matching_pair) -> None:
        matching = Matching.from_partners(perfect_matching_pair, [1, 0, 2, 3])
        with pytest.raises(InvariantViolationException):
            matching.validate(perfect_matching_pair)

    def test_validate_rejects_repeated_partner(self, complete_pair) -> None:
        matching = Matching.from_partners(complete_pair, [0, 0, 2, 3])
        with pytest.raises(InvariantViolationException):
            matching.validate(complete_pair)

    def test_pairs_use_labels(self, perfect_matching_pair) -> None:
        matching = Matching.from_partners(perfect_matching_pair, [0, 1, 2, 3])
        assert matching.pairs() == [(0, 4), (1, 5), (2, 6), (3, 7)]


def test_uniform_below_large_totals() -> None:
    generator = RngState(0).generator()
    total = 3 * (1 << 70)
    draws = [uniform_below(total, generator) for _ in range(200)]
    assert all(0 <= d < total for d in draws)
    assert max(draws) > total // 2
