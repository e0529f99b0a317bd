"""Tests for RegularityService."""

import numpy as np
import pytest

from app.exceptions import DomainException, PreconditionException
from app.models.graph import BipartitePair
from app.models.rng_state import RngState
from app.schemas.regularity_schema import ExtractionParams
from app.services.graph_service import GraphService
from app.services.regularity_service import RegularityService


def circulant_pair(size: int, width: int) -> BipartitePair:
    """Pair where x_i sees y_j iff (j - i) mod size < width; width-regular."""
    offsets = (np.arange(size)[None, :] - np.arange(size)[:, None]) % size
    return BipartitePair(range(size), range(size, 2 * size), offsets < width)


def residue_pair(p: int) -> BipartitePair:
    """Pair where x ~ y iff x + y is a non-zero square mod the prime p; (p-1)/2-biregular."""
    squares = np.zeros(p, dtype=bool)
    squares[(np.arange(1, p) ** 2) % p] = True
    sums = (np.arange(p)[:, None] + np.arange(p)[None, :]) % p
    return BipartitePair(range(p), range(p, 2 * p), squares[sums])


class TestRegularityService:
    """Test cases for RegularityService class."""

    @pytest.fixture
    def graph_service(self) -> GraphService:
        return GraphService()

    @pytest.fixture
    def service(self, graph_service) -> RegularityService:
        return RegularityService(graph_service, witness_budget=2_000, slack_constant=8.0)

    # ── second moment ──────────────────────────────────────────────────

    def test_second_moment_complete(self, service, complete_pair) -> None:
        assert service.second_moment_stat(complete_pair) == 256

    def test_second_moment_perfect_matching(self, service, perfect_matching_pair) -> None:
        assert service.second_moment_stat(perfect_matching_pair) == 4

    def test_second_moment_two_blocks(self, service, two_block_pair) -> None:
        assert service.second_moment_stat(two_block_pair) == 32

    @pytest.mark.parametrize("m", range(1, 9))
    def test_second_moment_complete_identity(self, service, m) -> None:
        assert service.second_moment_stat(BipartitePair.complete(m, m)) == m**4

    def test_square_sum_exceeds_int64(self, service) -> None:
        codegree = 3_037_000_499
        codegrees = np.full((4, 4), codegree, dtype=np.int64)
        total = service.square_sum(codegrees)
        assert total == 16 * codegree**2
        assert total > 2**63

    def test_second_moment_large_complete_pair(self, service) -> None:
        assert service.second_moment_stat(BipartitePair.complete(300, 300)) == 300**4

    # ── quasirandom ────────────────────────────────────────────────────

    def test_quasirandom_complete_passes(self, service, complete_pair) -> None:
        verdict = service.is_quasirandom(complete_pair, xi=0.01, d0=0.5)
        assert verdict.passed
        assert verdict.stat == 256

    def test_quasirandom_two_blocks_fails(self, service, two_block_pair) -> None:
        verdict = service.is_quasirandom(two_block_pair, xi=0.01, d0=0.5)
        assert not verdict.passed
        assert verdict.stat == 32
        assert verdict.threshold == pytest.approx(18.56)

    def test_quasirandom_perfect_matching_fails(self, service, perfect_matching_pair) -> None:
        verdict = service.is_quasirandom(perfect_matching_pair, xi=0.01, d0=0.2)
        assert not verdict.passed
        assert verdict.threshold == pytest.approx(3.56)

    def test_quasirandom_density_floor(self, service, perfect_matching_pair) -> None:
        with pytest.raises(PreconditionException):
            service.is_quasirandom(perfect_matching_pair, xi=0.01, d0=0.3)

    def test_quasirandom_rejects_zero_floor(self, service, complete_pair) -> None:
        with pytest.raises(DomainException):
            service.is_quasirandom(complete_pair, xi=0.01, d0=0.0)

    def test_quasirandom_monotone_in_xi(self, service, two_block_pair) -> None:
        outcomes = [
            service.is_quasirandom(two_block_pair, xi=xi, d0=0.5).passed
            for xi in (0.0, 0.2, 0.5, 0.8, 1.0)
        ]
        first_pass = outcomes.index(True)
        assert all(outcomes[first_pass:])

    def test_random_pair_is_quasirandom(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(50, 50, 0.5, RngState(7))
        assert service.is_quasirandom(pair, xi=0.05, d0=0.3).passed

    # ── witness ────────────────────────────────────────────────────────

    def test_witness_complete_none(self, service) -> None:
        assert service.witness_irregularity(BipartitePair.complete(3, 3), 0.1, 10, RngState(0)) is None

    def test_witness_empty_none(self, service) -> None:
        pair = BipartitePair(range(4), range(4, 8), np.zeros((4, 4), dtype=bool))
        assert service.witness_irregularity(pair, 0.5, 10, RngState(0)) is None

    def test_witness_two_blocks(self, service, two_block_pair) -> None:
        witness = service.witness_irregularity(two_block_pair, 0.4, 10, RngState(0))
        assert witness is not None
        assert witness.x_subset == [0, 1]
        assert witness.y_subset == [6, 7]
        assert witness.subset_density == 0
        assert witness.pair_density == 0.5
        assert witness.deviation == pytest.approx(0.5)

    def test_witness_none_when_eps_exceeds_any_deviation(self, service, two_block_pair) -> None:
        # densities lie in [0, 1] and the pair density is 1/2
        assert service.witness_irregularity(two_block_pair, 0.6, 10, RngState(0)) is None

    def test_witness_rejects_zero_budget(self, service, two_block_pair) -> None:
        with pytest.raises(DomainException):
            service.witness_irregularity(two_block_pair, 0.4, 0, RngState(0))

    def test_randomized_witness_finds_planted_blocks(self, service) -> None:
        matrix = np.zeros((20, 20), dtype=bool)
        matrix[:10, :10] = True
        matrix[10:, 10:] = True
        pair = BipartitePair(range(20), range(20, 40), matrix)
        witness = service.witness_irregularity(pair, 0.2, 500, RngState(3))
        assert witness is not None
        assert witness.deviation > 0.2

    def test_randomized_witness_random_pair(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(50, 50, 0.5, RngState(7))
        assert service.witness_irregularity(pair, 0.2, 2_000, RngState(1)) is None

    # ── super-regularity ───────────────────────────────────────────────

    def test_super_regular_complete(self, service) -> None:
        assert service.check_super_regular(BipartitePair.complete(6, 6), 0.1, 1.0)

    def test_super_regular_isolated_vertex(self, service) -> None:
        matrix = np.ones((6, 6), dtype=bool)
        matrix[0] = False
        pair = BipartitePair(range(6), range(6, 12), matrix)
        assert not service.check_super_regular(pair, 0.1, 0.1)

    def test_super_regular_random_pair(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(50, 50, 0.5, RngState(7))
        assert service.check_super_regular(pair, 0.2, 0.2)

    def test_super_regular_unequal_sides(self, service) -> None:
        with pytest.raises(PreconditionException):
            service.check_super_regular(BipartitePair.complete(3, 4), 0.1, 0.1)

    def test_eps_super_regular_complete(self, service) -> None:
        assert service.check_eps_super_regular(BipartitePair.complete(5, 5), 0.0)

    def test_eps_super_regular_perfect_matching(self, service, perfect_matching_pair) -> None:
        assert not service.check_eps_super_regular(perfect_matching_pair, 0.1)

    def test_eps_super_regular_biregular(self, service) -> None:
        pair = residue_pair(101)
        degrees = np.concatenate([pair.row_degrees(), pair.col_degrees()])
        assert set(degrees.tolist()) == {50}
        assert service.check_eps_super_regular(pair, 0.1)

    # ── extraction ─────────────────────────────────────────────────────

    def test_extract_complete_pair(self, service) -> None:
        pair = BipartitePair.complete(20, 20)
        params = ExtractionParams(target_density=0.5, epsilon=0.05)
        result = service.extract_exact_density_subgraph(pair, params, RngState(4))
        assert result.edge_count == 200
        assert result.x_side == pair.x_side
        assert result.y_side == pair.y_side

    def test_extract_is_subgraph_for_any_seed(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(30, 30, 0.8, RngState(2))
        params = ExtractionParams(target_density=0.3, epsilon=0.02)
        for seed in range(5):
            result = service.extract_exact_density_subgraph(pair, params, RngState(seed))
            assert result.edge_count == 270
            assert not np.any(result.matrix & ~pair.matrix)

    def test_extract_low_density_precondition(self, service) -> None:
        pair = circulant_pair(20, 6)
        params = ExtractionParams(target_density=0.5, epsilon=0.05)
        with pytest.raises(PreconditionException):
            service.extract_exact_density_subgraph(pair, params, RngState(0))

    def test_extract_unequal_sides(self, service) -> None:
        params = ExtractionParams(target_density=0.3, epsilon=0.01)
        with pytest.raises(PreconditionException):
            service.extract_exact_density_subgraph(BipartitePair.complete(4, 5), params, RngState(0))

    def test_extract_dense_random_pair(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(100, 100, 0.7, RngState(11))
        params = ExtractionParams(target_density=0.3, epsilon=0.01)
        result = service.extract_exact_density_subgraph(pair, params, RngState(12))
        degrees = np.concatenate([result.row_degrees(), result.col_degrees()])
        assert result.edge_count == 3000
        assert degrees.min() >= 25
        assert degrees.max() <= 35
        assert service.is_quasirandom(result, xi=0.05, d0=0.25).passed

    def test_extract_is_deterministic(self, service, graph_service) -> None:
        pair = graph_service.sample_bipartite(24, 24, 0.9, RngState(5))
        params = ExtractionParams(target_density=0.4, epsilon=0.02)
        first = service.extract_exact_density_subgraph(pair, params, RngState(8))
        second = service.extract_exact_density_subgraph(pair, params, RngState(8))
        assert np.array_equal(first.matrix, second.matrix)


class TestExtractionParams:
    """Test cases for ExtractionParams class."""

    def test_rejects_slack_above_one(self) -> None:
        with pytest.raises(ValueError):
            ExtractionParams(target_density=0.9, epsilon=0.05, slack_constant=8.0)
