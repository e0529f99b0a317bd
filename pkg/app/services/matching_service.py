"""Perfect matching counting and sampling for bipartite pairs."""

import logging
import math
from fractions import Fraction
from typing import Any

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from app.exceptions import (
    CapabilityException,
    DomainException,
    InfeasibleException,
    PreconditionException,
)
from app.models.graph import BipartitePair
from app.models.matching import Matching, MatchingCountTable
from app.models.rng_state import RngState
from app.schemas.regularity_schema import ExtractionParams
from app.services.regularity_service import RegularityService
from app.utils.exact import as_fraction

logger = logging.getLogger(__name__)

# Counts stay in int64 while the product of row degrees is below this bound
_INT64_SAFE = 1 << 62


def uniform_below(total: int, generator: np.random.Generator) -> int:
    """Uniform integer in [0, total) for arbitrarily large totals."""
    if total <= 0:
        raise DomainException(f"Cannot draw below {total}")
    if total < _INT64_SAFE:
        return int(generator.integers(total))
    width = (total.bit_length() + 7) // 8
    while True:
        value = int.from_bytes(generator.bytes(width), "big") >> (8 * width - total.bit_length())
        if value < total:
            return value


class MatchingService:
    """Service for the matching oracle and the samplers used by Phase II."""

    def __init__(
        self,
        regularity_service: RegularityService,
        exact_limit: int = 24,
        mcmc_step_factor: int = 50,
    ) -> None:
        self.regularity_service = regularity_service
        self.exact_limit = exact_limit
        self.mcmc_step_factor = mcmc_step_factor
        self.logger = logging.getLogger(__name__)

    # ── Counting ───────────────────────────────────────────────────────

    def _require_square(self, pair: BipartitePair) -> int:
        if pair.mx != pair.my:
            raise DomainException(
                f"Perfect matchings need equal sides (got {pair.mx} and {pair.my})"
            )
        return pair.mx

    def build_count_table(self, pair: BipartitePair) -> MatchingCountTable:
        m = self._require_square(pair)
        if m > self.exact_limit:
            raise CapabilityException(
                f"Exact matching counts are limited to m <= {self.exact_limit} (got {m}); "
                "use the MCMC sampler instead"
            )
        degree_product = math.prod(int(d) for d in pair.row_degrees())
        dtype: Any = np.int64 if degree_product < _INT64_SAFE else object
        counts = np.zeros(1 << m, dtype=dtype)
        counts[0] = 1
        masks = np.arange(1 << m, dtype=np.int64)
        popcounts = np.bitwise_count(masks)
        for row in range(m):
            layer = masks[popcounts == row]
            layer = layer[counts[layer] != 0]
            for column in np.flatnonzero(pair.matrix[row]):
                bit = 1 << int(column)
                sources = layer[(layer & bit) == 0]
                counts[sources | bit] += counts[sources]
        return MatchingCountTable(m, counts)

    def count_perfect_matchings(self, pair: BipartitePair) -> int:
        """Permanent of the biadjacency matrix."""
        if pair.mx == 0 and pair.my == 0:
            return 1
        return self.build_count_table(pair).total

    def has_perfect_matching(self, pair: BipartitePair) -> bool:
        return self.maximum_matching(pair) is not None

    def maximum_matching(self, pair: BipartitePair) -> NDArray[np.int64] | None:
        """Partner positions of a perfect matching found by Hopcroft–Karp, or None."""
        if pair.mx != pair.my:
            return None
        graph = nx.Graph()
        top = [("x", i) for i in range(pair.mx)]
        graph.add_nodes_from(top)
        graph.add_nodes_from(("y", j) for j in range(pair.my))
        rows, cols = np.nonzero(pair.matrix)
        graph.add_edges_from(
            (("x", int(i)), ("y", int(j))) for i, j in zip(rows, cols, strict=True)
        )
        matched = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
        partners = np.full(pair.mx, -1, dtype=np.int64)
        for node in top:
            if node in matched:
                partners[node[1]] = matched[node][1]
        if np.any(partners < 0):
            return None
        return partners

    # ── Exact sampling ─────────────────────────────────────────────────

    def sample_uniform_matching_exact(self, pair: BipartitePair, rng: RngState) -> Matching:
        """Exactly uniform perfect matching via self-reducible sampling."""
        table = self.build_count_table(pair)
        if table.total == 0:
            raise InfeasibleException("The pair has no perfect matching")
        return self._draw_from_table(pair, table, rng.generator())

    def _draw_from_table(
        self, pair: BipartitePair, table: MatchingCountTable, generator: np.random.Generator
    ) -> Matching:
        partners = np.empty(table.m, dtype=np.int64)
        mask = table.full_mask
        for row in range(table.m - 1, -1, -1):
            options = [int(c) for c in np.flatnonzero(pair.matrix[row]) if mask >> int(c) & 1]
            weights = [table.count(mask ^ (1 << c)) for c in options]
            pick = uniform_below(sum(weights), generator)
            for column, weight in zip(options, weights, strict=True):
                if pick < weight:
                    partners[row] = column
                    mask ^= 1 << column
                    break
                pick -= weight
        return Matching.from_partners(pair, partners)

    def sample_many_exact(self, pair: BipartitePair, count: int, rng: RngState) -> list[Matching]:
        """Several uniform matchings sharing one count table."""
        table = self.build_count_table(pair)
        if table.total == 0:
            raise InfeasibleException("The pair has no perfect matching")
        generator = rng.generator()
        return [self._draw_from_table(pair, table, generator) for _ in range(count)]

    # ── MCMC ───────────────────────────────────────────────────────────

    def default_mcmc_steps(self, m: int) -> int:
        return max(1, math.ceil(self.mcmc_step_factor * m * math.log(max(m, 2))))

    def sample_matching_mcmc(self, pair: BipartitePair, steps: int, rng: RngState) -> Matching:
        """Approximately uniform perfect matching from a switch chain.

        The chain walks over perfect and near-perfect matchings. Each step
        picks a uniform edge and, with equal chance, either a 4-cycle switch
        (perfect states only) or an add/remove/slide move on the hole pair.
        All moves are symmetric, so the perfect matchings are visited
        uniformly in the limit. After ``steps`` transitions the chain keeps
        going until it sits on a perfect matching, for at most 10·steps more;
        the last perfect matching seen is returned.
        """
        if steps < 1:
            raise DomainException(f"MCMC needs at least one step (got {steps})")
        start = self.maximum_matching(pair)
        if start is None:
            raise InfeasibleException("The pair has no perfect matching")
        m = pair.mx
        if m == 0:
            return Matching.from_partners(pair, start)
        rows, cols = np.nonzero(pair.matrix)
        matrix = pair.matrix
        x_partner = start.copy()
        y_partner = np.empty(m, dtype=np.int64)
        y_partner[x_partner] = np.arange(m)
        hole_x = hole_y = -1
        last_perfect = x_partner.copy()

        generator = rng.generator()
        limit = steps * 11
        picks = generator.integers(len(rows), size=limit)
        coins = generator.random(limit) < 0.5
        for step in range(limit):
            if step >= steps and hole_x < 0:
                break
            x = int(rows[picks[step]])
            y = int(cols[picks[step]])
            if coins[step]:
                if hole_x >= 0 or x_partner[x] == y:
                    continue
                other_x = int(y_partner[y])
                other_y = int(x_partner[x])
                if matrix[other_x, other_y]:
                    x_partner[x], x_partner[other_x] = y, other_y
                    y_partner[y], y_partner[other_y] = x, other_x
            elif hole_x < 0:
                if x_partner[x] == y:
                    x_partner[x] = -1
                    y_partner[y] = -1
                    hole_x, hole_y = x, y
            elif x == hole_x and y == hole_y:
                x_partner[x] = y
                y_partner[y] = x
                hole_x = hole_y = -1
            elif x == hole_x:
                displaced = int(y_partner[y])
                x_partner[x] = y
                y_partner[y] = x
                x_partner[displaced] = -1
                hole_x = displaced
            elif y == hole_y:
                displaced = int(x_partner[x])
                x_partner[x] = y
                y_partner[y] = x
                y_partner[displaced] = -1
                hole_y = displaced
            if hole_x < 0:
                last_perfect = x_partner.copy()

        if hole_x >= 0:
            self.logger.warning(
                f"MCMC chain ended on a near-perfect matching after {limit} steps; "
                "returning the last perfect state"
            )
        return Matching.from_partners(pair, last_perfect)

    # ── Spread sampler ─────────────────────────────────────────────────

    def sample_spread_matching(
        self, pair: BipartitePair, eps: float, delta: float, rng: RngState
    ) -> Matching:
        """Perfect matching for Phase II.

        Thins the pair to an exact-density subgraph at d̄ = δ/2 and samples a
        uniform perfect matching of it, exactly for small sides and by MCMC
        with mcmc_step_factor·m·log m steps otherwise. When the thinned
        subgraph has no perfect matching the input pair is sampled instead and
        the result carries ``thinned=False``.

        Raises:
            PreconditionException: if the pair is not super-regular
            InvalidOperationException: if extraction cannot reach the exact edge count
        """
        if not self.regularity_service.check_super_regular(pair, eps, delta):
            raise PreconditionException(
                f"Pair with {pair.mx} + {pair.my} vertices is not ({eps}, {delta})-super-regular"
            )
        m = pair.mx
        if m == 0:
            return Matching.from_partners(pair, [])
        if delta <= 0:
            raise DomainException(f"Minimum degree ratio δ must be positive (got {delta})")

        target = delta / 2
        # rounded down so that d̄ + Cε <= δ holds exactly
        exact_slack = (as_fraction(delta) - as_fraction(target)) / as_fraction(eps)
        slack = min(self.regularity_service.slack_constant, math.floor(exact_slack * 10**9) / 10**9)
        if slack <= 0:
            raise DomainException(f"No extraction slack is left for ε = {eps} and δ = {delta}")
        params = ExtractionParams(target_density=target, epsilon=eps, slack_constant=slack)
        thinned = self.regularity_service.extract_exact_density_subgraph(pair, params, rng.spawn("extract"))
        source, is_thinned = thinned, True
        if not self.has_perfect_matching(thinned):
            self.logger.warning(
                f"Extracted subgraph of a {m}x{m} pair has no perfect matching; sampling the input pair"
            )
            source, is_thinned = pair, False

        if m <= self.exact_limit:
            matching = self.sample_uniform_matching_exact(source, rng.spawn("exact"))
        else:
            matching = self.sample_matching_mcmc(source, self.default_mcmc_steps(m), rng.spawn("mcmc"))
        matching.validate(pair)
        matching.thinned = is_thinned
        return matching

    # ── Exact pin probabilities ────────────────────────────────────────

    def exact_pin_probability(self, pair: BipartitePair, x: int, y: int) -> Fraction:
        """Probability that a uniform perfect matching contains the edge xy."""
        total = self.count_perfect_matchings(pair)
        if total == 0:
            raise InfeasibleException("The pair has no perfect matching")
        if not pair.has_edge(x, y):
            return Fraction(0)
        return Fraction(self.count_perfect_matchings(pair.delete([x], [y])), total)

    def pin_pair_probability(
        self, pair: BipartitePair, first: tuple[int, int], second: tuple[int, int]
    ) -> Fraction:
        """Probability that a uniform perfect matching contains both pins."""
        (x1, y1), (x2, y2) = first, second
        if (x1, y1) == (x2, y2):
            return self.exact_pin_probability(pair, x1, y1)
        total = self.count_perfect_matchings(pair)
        if total == 0:
            raise InfeasibleException("The pair has no perfect matching")
        if x1 == x2 or y1 == y2:
            return Fraction(0)
        if not (pair.has_edge(x1, y1) and pair.has_edge(x2, y2)):
            return Fraction(0)
        return Fraction(self.count_perfect_matchings(pair.delete([x1, x2], [y1, y2])), total)
