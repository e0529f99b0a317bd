"""Regularity testing and exact-density super-regular extraction."""

import logging
import math
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

from app.exceptions import (
    DomainException,
    InvalidOperationException,
    PreconditionException,
)
from app.models.graph import BipartitePair
from app.models.rng_state import RngState
from app.schemas.regularity_schema import (
    ExtractionParams,
    IrregularityWitness,
    RegularityVerdict,
)
from app.services.graph_service import GraphService
from app.utils.exact import as_fraction, round_half_up

logger = logging.getLogger(__name__)

# Largest |X| + |Y| searched exhaustively for irregularity witnesses
EXHAUSTIVE_WITNESS_LIMIT = 16
_WITNESS_BATCH = 512


def _subset_masks(size: int, minimum: int) -> NDArray[np.bool_]:
    """All subsets of range(size) with at least `minimum` elements, by ascending mask."""
    codes = np.arange(1 << size, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(size)) & 1).astype(bool)
    return bits[bits.sum(axis=1) >= max(minimum, 1)]


class RegularityService:
    """Service for ε-regularity tests, super-regularity checks and exact-density extraction."""

    def __init__(
        self,
        graph_service: GraphService,
        witness_budget: int = 10_000,
        slack_constant: float = 8.0,
    ) -> None:
        self.graph_service = graph_service
        self.witness_budget = witness_budget
        self.slack_constant = slack_constant
        self.logger = logging.getLogger(__name__)

    # ── Second-moment criterion ────────────────────────────────────────

    def second_moment_stat(self, pair: BipartitePair) -> int:
        """Sum of squared codegrees over ordered X-pairs, including x = x′."""
        matrix = pair.matrix.astype(np.int64)
        return self.square_sum(matrix @ matrix.T)

    @staticmethod
    def square_sum(codegrees: NDArray[np.int64]) -> int:
        """Exact sum of squared entries; the total is accumulated in Python integers."""
        # each square is at most my², so only the running total can leave int64
        squares = codegrees * codegrees
        return int(squares.sum(dtype=object))

    def is_quasirandom(self, pair: BipartitePair, xi: float, d0: float) -> RegularityVerdict:
        d0_exact = as_fraction(d0)
        if d0_exact <= 0:
            raise DomainException(f"Density floor d0 must be positive (got {d0})")
        density = self.graph_service.density(pair)
        if density < d0_exact:
            raise PreconditionException(
                f"Pair density {float(density):.4f} is below the required floor {d0}"
            )
        return self.quasirandom_verdict(pair, xi)

    def quasirandom_verdict(self, pair: BipartitePair, xi: float | Fraction) -> RegularityVerdict:
        """Second-moment verdict without a density floor."""
        xi_exact = as_fraction(xi)
        if xi_exact < 0:
            raise DomainException(f"Slack ξ must be non-negative (got {xi})")
        density = self.graph_service.density(pair)
        scale = pair.mx * pair.mx * pair.my * pair.my
        threshold = density**4 * scale + xi_exact * scale
        stat = self.second_moment_stat(pair)
        return RegularityVerdict(
            stat=stat,
            threshold=float(threshold),
            density=float(density),
            xi=float(xi_exact),
            passed=stat <= threshold,
        )

    # ── Witness search ─────────────────────────────────────────────────

    def witness_irregularity(
        self, pair: BipartitePair, eps: float, budget: int, rng: RngState
    ) -> IrregularityWitness | None:
        """Search for subsets violating ε-regularity.

        Exhaustive when |X| + |Y| is at most 16, otherwise a randomized
        falsifier over `budget` candidates. Returning None is not a proof of
        regularity for the randomized search.
        """
        if budget < 1:
            raise DomainException(f"Witness budget must be at least 1 (got {budget})")
        if pair.mx == 0 or pair.my == 0:
            return None
        eps_exact = as_fraction(eps)
        min_x = math.ceil(eps_exact * pair.mx)
        min_y = math.ceil(eps_exact * pair.my)
        if min_x > pair.mx or min_y > pair.my:
            return None

        if pair.mx + pair.my <= EXHAUSTIVE_WITNESS_LIMIT:
            x_masks = _subset_masks(pair.mx, min_x)
            y_masks = _subset_masks(pair.my, min_y)
            return self._best_violation(pair, x_masks, y_masks, eps_exact, all_pairs=True)

        generator = rng.generator()
        best: IrregularityWitness | None = None
        for x_masks, y_masks in self._candidate_batches(pair, min_x, min_y, budget, generator):
            found = self._best_violation(pair, x_masks, y_masks, eps_exact, all_pairs=False)
            if found is not None and (best is None or found.deviation > best.deviation):
                best = found
        return best

    def _candidate_batches(
        self,
        pair: BipartitePair,
        min_x: int,
        min_y: int,
        budget: int,
        generator: np.random.Generator,
    ) -> list[tuple[NDArray[np.bool_], NDArray[np.bool_]]]:
        structured_x: list[NDArray[np.bool_]] = []
        structured_y: list[NDArray[np.bool_]] = []
        x_order = np.argsort(pair.row_degrees(), kind="stable")
        y_order = np.argsort(pair.col_degrees(), kind="stable")
        x_sizes = sorted({max(min_x, math.ceil(pair.mx / 2)), pair.mx})
        y_sizes = sorted({max(min_y, math.ceil(pair.my / 2)), pair.my})
        for x_desc in (False, True):
            for y_desc in (False, True):
                for size_x in x_sizes:
                    for size_y in y_sizes:
                        xs = (x_order[::-1] if x_desc else x_order)[:size_x]
                        ys = (y_order[::-1] if y_desc else y_order)[:size_y]
                        x_mask = np.zeros(pair.mx, dtype=bool)
                        y_mask = np.zeros(pair.my, dtype=bool)
                        x_mask[xs] = True
                        y_mask[ys] = True
                        structured_x.append(x_mask)
                        structured_y.append(y_mask)

        batches = [(np.array(structured_x), np.array(structured_y))]
        remaining = max(0, budget - len(structured_x))
        while remaining > 0:
            count = min(_WITNESS_BATCH, remaining)
            batches.append(
                (
                    self._random_masks(pair.mx, min_x, count, generator),
                    self._random_masks(pair.my, min_y, count, generator),
                )
            )
            remaining -= count
        return batches

    @staticmethod
    def _random_masks(
        size: int, minimum: int, count: int, generator: np.random.Generator
    ) -> NDArray[np.bool_]:
        sizes = generator.integers(max(minimum, 1), size + 1, size=count)
        keys = generator.random((count, size))
        ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
        return ranks < sizes[:, None]

    def _best_violation(
        self,
        pair: BipartitePair,
        x_masks: NDArray[np.bool_],
        y_masks: NDArray[np.bool_],
        eps: Fraction,
        all_pairs: bool,
    ) -> IrregularityWitness | None:
        """Most deviating violating candidate.

        With ``all_pairs`` every X-mask is combined with every Y-mask;
        otherwise masks are combined row by row. Ties prefer the lower subset
        density, then the earlier candidate.
        """
        matrix = pair.matrix.astype(np.int64)
        xm = x_masks.astype(np.int64)
        ym = y_masks.astype(np.int64)
        column_counts = xm @ matrix
        if all_pairs:
            edges = column_counts @ ym.T
            size_x = np.repeat(xm.sum(axis=1)[:, None], ym.shape[0], axis=1)
            size_y = np.repeat(ym.sum(axis=1)[None, :], xm.shape[0], axis=0)
        else:
            edges = (column_counts * ym).sum(axis=1)
            size_x = xm.sum(axis=1)
            size_y = ym.sum(axis=1)
        edges = edges.ravel()
        size_x = size_x.ravel()
        size_y = size_y.ravel()

        total = pair.edge_count
        full = pair.mx * pair.my
        products = size_x * size_y
        # |e/(ab) - E/full| > eps  <=>  |e*full - E*ab| * q > p * ab * full
        gap = np.abs(edges * full - total * products)
        violating = gap * eps.denominator > eps.numerator * products * full
        if not np.any(violating):
            return None

        candidates = np.flatnonzero(violating)
        deviation = gap[candidates] / (products[candidates] * full)
        subset_density = edges[candidates] / products[candidates]
        order = np.lexsort((candidates, subset_density, -deviation))
        best = int(candidates[order[0]])

        if all_pairs:
            x_row, y_row = divmod(best, ym.shape[0])
        else:
            x_row = y_row = best
        return IrregularityWitness(
            x_subset=[pair.x_side[i] for i in np.flatnonzero(x_masks[x_row])],
            y_subset=[pair.y_side[j] for j in np.flatnonzero(y_masks[y_row])],
            subset_density=float(edges[best] / products[best]),
            pair_density=total / full,
            deviation=float(gap[best] / (products[best] * full)),
        )

    # ── Super-regularity ───────────────────────────────────────────────

    def xi_for(self, eps: float | Fraction, density: Fraction) -> Fraction:
        """Slack used inside super-regularity checks: ξ = ε·d⁴."""
        return as_fraction(eps) * density**4

    def check_super_regular(self, pair: BipartitePair, eps: float, delta: float) -> bool:
        """(ε, δ)-super-regularity: min degree, quasirandomness and no witness found."""
        if pair.mx != pair.my:
            raise PreconditionException(
                f"Super-regularity needs equal sides (got {pair.mx} and {pair.my})"
            )
        size = pair.mx
        if size == 0:
            return True
        delta_exact = as_fraction(delta)
        min_degree = min(int(pair.row_degrees().min()), int(pair.col_degrees().min()))
        if min_degree < delta_exact * size:
            return False

        density = self.graph_service.density(pair)
        if density == 0:
            return False
        if not self.quasirandom_verdict(pair, self.xi_for(eps, density)).passed:
            return False

        witness = self.witness_irregularity(
            pair, eps, self.witness_budget, RngState(0).spawn("super-regular-witness")
        )
        return witness is None

    def check_eps_super_regular(self, pair: BipartitePair, eps: float) -> bool:
        """ε-super-regularity: every degree within εN of dN and quasirandomness."""
        if pair.mx != pair.my:
            raise PreconditionException(
                f"Super-regularity needs equal sides (got {pair.mx} and {pair.my})"
            )
        size = pair.mx
        if size == 0:
            return True
        eps_exact = as_fraction(eps)
        density = self.graph_service.density(pair)
        low = (density - eps_exact) * size
        high = (density + eps_exact) * size
        degrees = np.concatenate([pair.row_degrees(), pair.col_degrees()])
        if int(degrees.min()) < low or int(degrees.max()) > high:
            return False
        if density == 0:
            return False
        return self.quasirandom_verdict(pair, self.xi_for(eps_exact, density)).passed

    # ── Extraction ─────────────────────────────────────────────────────

    def extract_exact_density_subgraph(
        self,
        pair: BipartitePair,
        params: ExtractionParams,
        rng: RngState,
        verify_hypothesis: bool = False,
    ) -> BipartitePair:
        """Spanning subgraph with exactly round(d̄N²) edges and near-uniform degrees.

        Stages: random thinning to density d = d̄ + Cε, repair of low and
        high degree vertices against the middle set, then greedy removal of
        edges between the highest-degree endpoints down to the exact target
        while no vertex loses more than the removal cap.
        """
        if pair.mx != pair.my:
            raise PreconditionException(
                f"Extraction needs equal sides (got {pair.mx} and {pair.my})"
            )
        size = pair.mx
        if size == 0:
            raise DomainException("Extraction needs a non-empty pair")
        target_density = as_fraction(params.target_density)
        eps = as_fraction(params.epsilon)
        slack = as_fraction(params.slack_constant)
        d = target_density + slack * eps

        degrees = np.concatenate([pair.row_degrees(), pair.col_degrees()])
        delta = Fraction(int(degrees.min()), size)
        if d > delta:
            raise PreconditionException(
                f"Extraction needs d̄ + Cε = {float(d):.4f} at most the minimum degree "
                f"ratio δ = {float(delta):.4f}"
            )
        if verify_hypothesis and not self.check_super_regular(pair, params.epsilon, float(delta)):
            raise PreconditionException(
                f"Input pair is not ({params.epsilon}, {float(delta):.4f})-super-regular"
            )

        d0 = self.graph_service.density(pair)
        generator = rng.generator()
        original = np.array(pair.matrix, dtype=bool)

        # Stage 1: keep each edge with probability d / d0
        keep_probability = float(d / d0)
        work = original & (generator.random(original.shape) < keep_probability)

        # Stage 2: low and high degree sets, measured after thinning
        target_degree = round_half_up(d * size)
        low_cut = (d - 2 * eps) * size
        high_cut = (d + 2 * eps) * size
        row_deg = work.sum(axis=1)
        col_deg = work.sum(axis=0)
        low_x = [i for i in range(size) if row_deg[i] < low_cut]
        high_x = [i for i in range(size) if row_deg[i] > high_cut]
        low_y = [j for j in range(size) if col_deg[j] < low_cut]
        high_y = [j for j in range(size) if col_deg[j] > high_cut]
        middle_x = np.ones(size, dtype=bool)
        middle_x[low_x + high_x] = False
        middle_y = np.ones(size, dtype=bool)
        middle_y[low_y + high_y] = False
        self.logger.debug(
            f"Extraction thinning kept {int(work.sum())} edges; "
            f"low={len(low_x) + len(low_y)} high={len(high_x) + len(high_y)}"
        )

        # Stage 3: repair low and high vertices toward the middle set
        short = 0
        for i in low_x:
            short += self._top_up(work[i], original[i], middle_y, target_degree, generator)
        for j in low_y:
            short += self._top_up(work[:, j], original[:, j], middle_x, target_degree, generator)
        for i in high_x:
            self._trim(work[i], middle_y, target_degree, generator)
        for j in high_y:
            self._trim(work[:, j], middle_x, target_degree, generator)
        if short:
            self.logger.warning(f"Extraction repair was short by {short} edges toward the middle set")

        # Stage 4: greedy removal down to the exact edge count
        target_edges = round_half_up(target_density * size * size)
        cap = params.removal_cap
        if cap is None:
            cap = math.ceil((slack + 4) * eps * size)
        self._greedy_remove(work, target_edges, cap)

        result = pair.with_matrix(work)
        window = slack * eps * size
        degrees = np.concatenate([result.row_degrees(), result.col_degrees()])
        if degrees.min() < target_density * size - window or degrees.max() > target_density * size + window:
            self.logger.warning(
                f"Extracted degrees [{int(degrees.min())}, {int(degrees.max())}] leave the window "
                f"d̄N ± Cε N = {float(target_density * size):.1f} ± {float(window):.1f}"
            )
        self.logger.info(
            f"Extracted {result.edge_count} edges (target {target_edges}) from {pair.edge_count}"
        )
        return result

    @staticmethod
    def _top_up(
        line: NDArray[np.bool_],
        original: NDArray[np.bool_],
        middle: NDArray[np.bool_],
        target_degree: int,
        generator: np.random.Generator,
    ) -> int:
        """Add original edges toward the middle set until the line reaches the target degree."""
        missing = target_degree - int(line.sum())
        if missing <= 0:
            return 0
        options = np.flatnonzero(original & ~line & middle)
        chosen = generator.permutation(options)[:missing]
        line[chosen] = True
        return missing - len(chosen)

    @staticmethod
    def _trim(
        line: NDArray[np.bool_],
        middle: NDArray[np.bool_],
        target_degree: int,
        generator: np.random.Generator,
    ) -> None:
        excess = int(line.sum()) - target_degree
        if excess <= 0:
            return
        options = np.flatnonzero(line & middle)
        line[generator.permutation(options)[:excess]] = False

    def _greedy_remove(self, work: NDArray[np.bool_], target_edges: int, cap: int) -> None:
        current = int(work.sum())
        if current < target_edges:
            raise InvalidOperationException(
                "reach the exact edge count",
                f"only {current} edges remain after repair but {target_edges} are required",
            )
        row_deg = work.sum(axis=1).astype(np.int64)
        col_deg = work.sum(axis=0).astype(np.int64)
        row_removed = np.zeros(work.shape[0], dtype=np.int64)
        col_removed = np.zeros(work.shape[1], dtype=np.int64)
        lowest = np.iinfo(np.int64).min

        for _ in range(current - target_edges):
            eligible = work & (row_removed < cap)[:, None] & (col_removed < cap)[None, :]
            score = np.where(eligible, row_deg[:, None] + col_deg[None, :], lowest)
            flat = int(np.argmax(score))
            if score.flat[flat] == lowest:
                raise InvalidOperationException(
                    "reach the exact edge count",
                    f"the per-vertex removal cap of {cap} is exhausted",
                )
            i, j = divmod(flat, work.shape[1])
            work[i, j] = False
            row_deg[i] -= 1
            col_deg[j] -= 1
            row_removed[i] += 1
            col_removed[j] += 1
