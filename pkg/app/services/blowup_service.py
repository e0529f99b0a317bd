"""Randomized embedding of bounded-degree targets into super-regular class systems.

The run has three stages. Pre-processing pads the target, picks the
buffer sets B_i and reserve sets D_i and raises every buffer vertex to
degree Δ. Phase I embeds everything outside B one vertex at a time at a
uniform admissible target, keeping (P1) and (P2) true, moving low
vertices forward at checkpoints and injecting the exceptional host
vertices into D once N_H(B) is embedded. Phase II completes each class
with a perfect matching from the spread sampler.
"""

import logging
import math
from collections import deque
from collections.abc import Mapping
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

from app.exceptions import (
    BusinessLogicException,
    DomainException,
    EmbeddingFailureException,
    InfeasibleException,
    InvalidOperationException,
    InvariantViolationException,
    PreconditionException,
)
from app.models.class_system import ClassSystem
from app.models.embedding import EmbedState, Embedding, PreparedInstance
from app.models.graph import BipartitePair, Graph
from app.models.rng_state import RngState
from app.models.target_spec import TargetSpec
from app.schemas.blowup_schema import ParamSet, ReorderEvent
from app.schemas.regularity_schema import ExtractionParams
from app.services.matching_service import MatchingService
from app.services.regularity_service import RegularityService
from app.utils.exact import as_fraction, ceil_fraction

logger = logging.getLogger(__name__)


def _ball(adjacency: NDArray[np.bool_], sources: NDArray[np.bool_], radius: int) -> NDArray[np.bool_]:
    """Vertices within the given distance of any source."""
    reached = sources.copy()
    frontier = sources.copy()
    for _ in range(radius):
        if not frontier.any():
            break
        frontier = adjacency[frontier].any(axis=0) & ~reached
        reached |= frontier
    return reached


def _floor_ratio(numerator: int, denominator: int) -> float:
    """numerator / denominator rounded down to nine decimals."""
    return math.floor(Fraction(numerator * 10**9, denominator)) / 10**9


class BlowupService:
    """Service running pre-processing, Phase I and Phase II of the embedding."""

    def __init__(
        self,
        regularity_service: RegularityService,
        matching_service: MatchingService,
        hypothesis_eps: float = 0.2,
        phase_two_eps: float = 0.5,
        relaxed_p2: bool = False,
        relaxed_p2_pairs: int = 10_000,
        check_invariants: bool = False,
        p1_sample_fraction: float = 0.05,
    ) -> None:
        self.regularity_service = regularity_service
        self.matching_service = matching_service
        self.hypothesis_eps = hypothesis_eps
        self.phase_two_eps = phase_two_eps
        self.relaxed_p2 = relaxed_p2
        self.relaxed_p2_pairs = relaxed_p2_pairs
        self.check_invariants = check_invariants
        self.p1_sample_fraction = p1_sample_fraction
        self.logger = logging.getLogger(__name__)

    # ── Entry points ───────────────────────────────────────────────────

    def embed(
        self,
        spec: TargetSpec,
        system: ClassSystem,
        params: ParamSet,
        rng: RngState,
        reduce_pairs: bool = False,
        restriction_bound: bool = True,
    ) -> Embedding:
        """Embed the target into the host: preprocess, Phase I, Phase II.

        restriction_bound=False downgrades |W| > βN to a logged warning.
        """
        self.check_hypotheses(system, params)
        if reduce_pairs:
            system = self.reduce_pairs(system, params, rng.spawn("reduce"))
        instance = self.preprocess(spec, system, params, rng.spawn("preprocess"), restriction_bound)
        state = self.start(instance)
        self.phase_one(state, rng.spawn("phase-one"))
        return self.phase_two(state, rng.spawn("phase-two"))

    def check_hypotheses(self, system: ClassSystem, params: ParamSet) -> None:
        """Require every reduced pair to be super-regular with minimum degree ratio δ₀."""
        for i, j in system.reduced_edges:
            pair = system.pair(i, j)
            if not self.regularity_service.check_super_regular(pair, self.hypothesis_eps, params.delta0):
                raise PreconditionException(
                    f"Reduced pair ({i}, {j}) is not ({self.hypothesis_eps}, {params.delta0})-super-regular"
                )

    def reduce_pairs(self, system: ClassSystem, params: ParamSet, rng: RngState) -> ClassSystem:
        """Thin every reduced pair to exact density d."""
        adjacency = system.host.adjacency.copy()
        size = system.N
        d, eps = as_fraction(params.d), as_fraction(params.eps)
        for i, j in system.reduced_edges:
            pair = system.pair(i, j)
            min_degree = min(int(pair.row_degrees().min()), int(pair.col_degrees().min()))
            room = (Fraction(min_degree, size) - d) / eps
            slack = min(self.regularity_service.slack_constant, math.floor(room * 10**9) / 10**9)
            if slack <= 0:
                raise PreconditionException(
                    f"Reduced pair ({i}, {j}) has minimum degree {min_degree}, below dN = {float(d * size):.2f}"
                )
            extraction = ExtractionParams(target_density=params.d, epsilon=params.eps, slack_constant=slack)
            thinned = self.regularity_service.extract_exact_density_subgraph(
                pair, extraction, rng.spawn(f"pair-{i}-{j}")
            )
            block = np.ix_(system.classes[i], system.classes[j])
            adjacency[block] = thinned.matrix
            adjacency[np.ix_(system.classes[j], system.classes[i])] = thinned.matrix.T
        self.logger.info(f"Reduced {len(system.reduced_edges)} pairs to density {params.d}")
        return ClassSystem(system.classes, system.reduced_edges, Graph(system.host.n, adjacency))

    # ── Pre-processing ─────────────────────────────────────────────────

    def preprocess(
        self,
        spec: TargetSpec,
        system: ClassSystem,
        params: ParamSet,
        rng: RngState,
        restriction_bound: bool = True,
    ) -> PreparedInstance:
        spec.validate_against(system, params.beta, params.alpha, params.max_degree, restriction_bound)
        r, size, max_degree = system.r, system.N, params.max_degree
        n = r * size

        # pad every class to N with isolated vertices
        sizes = spec.class_sizes(r)
        h = np.concatenate(
            [spec.h, np.repeat(np.arange(r, dtype=np.int64), size - sizes)]
        ).astype(np.int64)
        adjacency = np.zeros((n, n), dtype=bool)
        adjacency[: spec.n, : spec.n] = spec.graph.adjacency

        position = np.full(system.host.n, -1, dtype=np.int64)
        for part in system.classes:
            position[part] = np.arange(size)
        allowed = np.ones((n, size), dtype=bool)
        for x, members in spec.w_sets.items():
            allowed[x] = False
            allowed[x, position[members]] = True

        generator = rng.generator()
        restricted = np.zeros(n, dtype=bool)
        restricted[spec.restricted] = True
        near_restricted = _ball(adjacency, restricted, 1)

        buffer_size = ceil_fraction(as_fraction(params.delta0) * size)
        reserve_size = ceil_fraction(as_fraction(params.beta) * size)
        picked = np.zeros(n, dtype=bool)
        near_picked = np.zeros(n, dtype=bool)
        buffers: dict[int, list[int]] = {}
        reserves: dict[int, list[int]] = {}
        order = generator.permutation(n)
        for i in range(r):
            buffers[i], reserves[i] = [], []
            for v in order:
                if len(reserves[i]) == reserve_size:
                    break
                if h[v] != i or near_restricted[v]:
                    continue
                if near_picked[v]:
                    continue
                target = buffers[i] if len(buffers[i]) < buffer_size else reserves[i]
                target.append(int(v))
                picked[v] = True
                single = np.zeros(n, dtype=bool)
                single[v] = True
                near_picked |= _ball(adjacency, single, 3)
            if len(reserves[i]) < reserve_size:
                raise InfeasibleException(
                    f"Class {i} has only {len(buffers[i]) + len(reserves[i])} vertices eligible for "
                    f"B and D; {buffer_size + reserve_size} are needed"
                )

        added_edges = self._augment(adjacency, h, system, buffers, picked, near_restricted, max_degree, generator)
        graph = Graph(n, adjacency)
        in_buffer = np.zeros(n, dtype=bool)
        for members in buffers.values():
            in_buffer[members] = True
        ordering = self._initial_ordering(graph, in_buffer, buffers)

        instance = PreparedInstance(
            spec, system, params, graph, h, allowed, buffers, reserves, added_edges, ordering
        )
        self.logger.info(
            f"Pre-processing done: n={n}, |B_i|={buffer_size}, |D_i|={reserve_size}, "
            f"added {len(added_edges)} edges, s={instance.s}"
        )
        return instance

    def _augment(
        self,
        adjacency: NDArray[np.bool_],
        h: NDArray[np.int64],
        system: ClassSystem,
        buffers: dict[int, list[int]],
        picked: NDArray[np.bool_],
        near_restricted: NDArray[np.bool_],
        max_degree: int,
        generator: np.random.Generator,
    ) -> list[tuple[int, int]]:
        """Raise every buffer vertex to degree exactly Δ, in place."""
        n = len(h)
        endpoint_used = np.zeros(n, dtype=bool)
        added: list[tuple[int, int]] = []
        for i, members in buffers.items():
            allowed_classes = np.zeros(system.r, dtype=bool)
            allowed_classes[system.reduced_neighbors(i)] = True
            for b in members:
                while int(adjacency[b].sum()) < max_degree:
                    others = picked.copy()
                    others[b] = False
                    blocked = (
                        near_restricted
                        | _ball(adjacency, picked, 1)
                        | _ball(adjacency, others, 2)
                        | endpoint_used
                        | adjacency[b]
                    )
                    blocked[b] = True
                    eligible = ~blocked & allowed_classes[h] & (adjacency.sum(axis=1) <= max_degree)
                    choices = np.flatnonzero(eligible)
                    if choices.size == 0:
                        raise InfeasibleException(
                            f"Cannot raise buffer vertex {b} of class {i} to degree Δ = {max_degree}"
                        )
                    u = int(generator.choice(choices))
                    adjacency[b, u] = adjacency[u, b] = True
                    endpoint_used[u] = True
                    added.append((min(b, u), max(b, u)))
        return added

    def _initial_ordering(
        self, graph: Graph, in_buffer: NDArray[np.bool_], buffers: dict[int, list[int]]
    ) -> list[int]:
        """N_H(B) first, the rest breadth first from it, B last."""
        neighborhood = graph.adjacency[in_buffer].any(axis=0) & ~in_buffer
        seen = in_buffer | neighborhood
        ordering: list[int] = []
        queue = deque(int(v) for v in np.flatnonzero(neighborhood))
        starts = iter(range(graph.n))
        while True:
            while queue:
                v = queue.popleft()
                ordering.append(v)
                for u in graph.neighbors(v):
                    if not seen[u]:
                        seen[u] = True
                        queue.append(int(u))
            start = next((v for v in starts if not seen[v]), None)
            if start is None:
                break
            seen[start] = True
            queue.append(start)
        return ordering + [b for members in buffers.values() for b in members]

    def check_prepared(self, instance: PreparedInstance) -> list[str]:
        """Violated pre-processing invariants, empty when all hold."""
        problems: list[str] = []
        adjacency = instance.graph.adjacency
        special = instance.in_buffer | instance.in_reserve
        max_degree = instance.params.max_degree
        if np.any(special & instance.restricted):
            problems.append("B ∪ D meets W")
        if np.any(adjacency[np.ix_(special, instance.restricted)]):
            problems.append("an edge joins B ∪ D and W")
        for v in np.flatnonzero(special):
            others = special.copy()
            others[v] = False
            single = np.zeros(instance.n, dtype=bool)
            single[v] = True
            if np.any(_ball(adjacency, single, 3) & others):
                problems.append(f"vertex {v} of B ∪ D is within distance 3 of another")
        degrees = instance.graph.degrees()
        if np.any(degrees[instance.in_buffer] != max_degree):
            problems.append("a buffer vertex does not have degree exactly Δ")
        if instance.n and int(degrees.max()) > max_degree + 1:
            problems.append("a vertex exceeds degree Δ + 1")
        for u, v in instance.added_edges:
            if not instance.system.is_reduced_edge(int(instance.h[u]), int(instance.h[v])):
                problems.append(f"added edge ({u}, {v}) does not follow the reduced graph")
        ordering = instance.ordering
        head = int(instance.buffer_neighborhood.sum())
        buffer_count = int(instance.in_buffer.sum())
        if sorted(ordering) != list(range(instance.n)):
            problems.append("ordering is not a permutation")
        elif set(ordering[:head]) != set(np.flatnonzero(instance.buffer_neighborhood).tolist()):
            problems.append("ordering does not start with N_H(B)")
        elif set(ordering[instance.n - buffer_count :]) != set(np.flatnonzero(instance.in_buffer).tolist()):
            problems.append("ordering does not end with B")
        return problems

    # ── State queries ──────────────────────────────────────────────────

    def start(self, instance: PreparedInstance) -> EmbedState:
        return EmbedState(instance)

    def candidate_set(self, state: EmbedState, x: int) -> list[int]:
        """C_φ(x) as host vertices."""
        if state.phi[x] >= 0:
            raise DomainException(f"Target vertex {x} is already embedded")
        home = state.instance.system.classes[int(state.instance.h[x])]
        return [home[p] for p in np.flatnonzero(state.candidates[x])]

    def recompute_low_set(self, state: EmbedState) -> list[int]:
        """Move the unembedded vertices with few free candidates to the front of the tail."""
        instance = state.instance
        tail = state.ordering[state.j :]
        low = [x for x in tail if int(state.free_candidates(x).sum()) < instance.thresholds.low_free]
        if low:
            low_set = set(low)
            state.ordering[state.j :] = low + [x for x in tail if x not in low_set]
            state.log.reorder_events.append(ReorderEvent(j=state.j, moved=low))
            state.log.moved_total += len(low)
            self.logger.debug(f"Moved {len(low)} low vertices forward at j={state.j}")
        return low

    def admissible_targets(self, state: EmbedState, x: int, rng: RngState | None = None) -> list[int]:
        """Host vertices at which x may be embedded next.

        Raises:
            EmbeddingFailureException: when no admissible target exists
        """
        if state.phi[x] >= 0:
            raise DomainException(f"Target vertex {x} is already embedded")
        generator = (rng or RngState(0).spawn("admissible")).generator()
        positions, _ = self._admissible(state, x, generator)
        if positions.size == 0:
            raise self._no_target(state, x)
        home = state.instance.system.classes[int(state.instance.h[x])]
        return [home[int(p)] for p in positions]

    def _no_target(self, state: EmbedState, x: int) -> EmbeddingFailureException:
        return EmbeddingFailureException(
            "phase_one",
            f"no admissible target for vertex {x} at j={state.j}",
            {**state.diagnostics(), "vertex": x, "free_candidates": int(state.free_candidates(x).sum())},
        )

    def _exceeding(self, state: EmbedState, x: int, others: NDArray[np.intp]) -> int:
        """Vertices z in others with |C(x) ∩ C(z)| above the codegree bound."""
        if others.size == 0:
            return 0
        table = state.instance.thresholds.codegree_max
        ell = state.embedded_neighbors
        shared = (state.candidates[others] & state.candidates[x]).sum(axis=1)
        return int(np.sum(shared > table[ell[x] + ell[others]]))

    def _admissible(
        self, state: EmbedState, x: int, generator: np.random.Generator
    ) -> tuple[NDArray[np.intp], NDArray[np.int64]]:
        """Admissible positions for x and the per-class (P2) counts after each choice."""
        instance = state.instance
        thresholds = instance.thresholds
        table = thresholds.codegree_max
        ell = state.embedded_neighbors
        cand = state.candidates
        i = int(instance.h[x])
        positions = np.flatnonzero(state.free_candidates(x))
        counts = np.tile(state.violations, (positions.size, 1))
        if positions.size == 0:
            return positions, counts

        ok = np.ones(positions.size, dtype=bool)
        if not instance.reserve_neighborhood[x]:
            rest = state.tracked(i)
            counts[:, i] -= 2 * self._exceeding(state, x, rest[rest != x])

        neighbors = [int(y) for y in instance.graph.neighbors(x) if state.phi[y] < 0]
        for y in neighbors:
            rows = instance.blocks[(i, int(instance.h[y]))][positions]
            free_y = state.free_candidates(y)
            ok &= thresholds.dense_enough((rows & free_y).sum(axis=1), int(free_y.sum()))
            new_size = (rows & cand[y]).sum(axis=1)
            ok &= new_size >= thresholds.p1_min(int(ell[y]) + 1, instance.allowed_size(y))

        by_class: dict[int, list[int]] = {}
        for y in neighbors:
            if not instance.reserve_neighborhood[y]:
                by_class.setdefault(int(instance.h[y]), []).append(y)
        for k, group in by_class.items():
            rows = instance.blocks[(i, k)][positions].astype(np.float32)
            others = np.setdiff1d(state.tracked(k), group)
            scale = 1.0
            if self.relaxed_p2 and others.size * len(group) > self.relaxed_p2_pairs:
                keep = max(1, self.relaxed_p2_pairs // len(group))
                sampled = np.sort(generator.choice(others, size=keep, replace=False))
                scale = others.size / sampled.size
                others = sampled
            change = np.zeros(positions.size, dtype=np.float64)
            for y in group:
                if others.size:
                    shared = (cand[y] & cand[others]).astype(np.float32)
                    after = rows @ shared.T
                    limit = table[ell[y] + 1 + ell[others]]
                    change += 2 * scale * (np.sum(after > limit, axis=1) - self._exceeding(state, y, others))
            for a, y in enumerate(group):
                for z in group[a + 1 :]:
                    both = cand[y] & cand[z]
                    before = int(both.sum()) > table[ell[y] + ell[z]]
                    after_yz = (rows @ both.astype(np.float32)) > table[ell[y] + ell[z] + 2]
                    change += 2 * (after_yz.astype(np.int64) - int(before))
            counts[:, k] += np.rint(change).astype(np.int64)

        ok &= np.all(counts <= thresholds.allowance(state.j + 1), axis=1)
        return positions[ok], counts[ok]

    def _place(self, state: EmbedState, x: int, position: int) -> None:
        """Set φ(x) and shrink the candidate sets of its unembedded neighbours."""
        instance = state.instance
        i = int(instance.h[x])
        state.phi[x] = position
        state.used[i, position] = True
        for y in instance.graph.neighbors(x):
            if state.phi[y] < 0:
                state.candidates[y] &= instance.blocks[(i, int(instance.h[y]))][position]
                state.embedded_neighbors[y] += 1
        state.j += 1

    def p2_violation_count(self, state: EmbedState, i: int) -> int:
        """Exact number of ordered tracked pairs of class i above the codegree bound."""
        tracked = state.tracked(i)
        if tracked.size < 2:
            return 0
        rows = state.candidates[tracked].astype(np.float32)
        shared = rows @ rows.T
        ell = state.embedded_neighbors[tracked]
        limit = state.instance.thresholds.codegree_max[ell[:, None] + ell[None, :]]
        exceeding = shared > limit
        np.fill_diagonal(exceeding, False)
        return int(exceeding.sum())

    # ── Phase I ────────────────────────────────────────────────────────

    def exceptional_step(self, state: EmbedState, rng: RngState) -> None:
        """Inject the host vertices that few buffer candidate sets contain into D."""
        instance = state.instance
        params = instance.params
        generator = rng.generator()
        chosen: list[tuple[int, int]] = []
        for i in range(instance.system.r):
            buffer = instance.buffers[i]
            pending = [b for b in buffer if state.phi[b] < 0]
            reserve = [x for x in instance.reserves[i] if state.phi[x] < 0]
            covered = state.candidates[pending].sum(axis=0) if pending else np.zeros(instance.N, dtype=np.int64)
            needed = ceil_fraction(as_fraction(params.delta1) * len(buffer))
            exceptional = np.flatnonzero(~state.used[i] & (covered < needed))
            state.log.exceptional_sizes[i] = int(exceptional.size)
            if self.check_invariants and exceptional.size > as_fraction(params.eps_pp) * instance.N:
                state.log.bound_violations.append(
                    f"exceptional-size: |E_{i}| = {exceptional.size} exceeds ε″N"
                )
            if exceptional.size > len(reserve):
                raise EmbeddingFailureException(
                    "exceptional_step",
                    f"|E_{i}| = {exceptional.size} exceeds the {len(reserve)} unembedded vertices of D_{i}",
                    {**state.diagnostics(), "class": i},
                )
            if exceptional.size:
                targets = generator.choice(reserve, size=exceptional.size, replace=False)
                chosen.extend(zip((int(t) for t in targets), (int(v) for v in exceptional), strict=True))

        moved = [x for x, _ in chosen]
        moved_set = set(moved)
        state.ordering[state.j :] = moved + [y for y in state.ordering[state.j :] if y not in moved_set]
        for x, position in chosen:
            if not state.candidates[x, position]:
                raise EmbeddingFailureException(
                    "exceptional_step",
                    f"reserve vertex {x} has embedded neighbours excluding its injected image",
                    state.diagnostics(),
                )
            self._place(state, x, position)

        thresholds = instance.thresholds
        for x in moved:
            for y in instance.graph.neighbors(x):
                if state.phi[y] < 0 and int(state.candidates[y].sum()) < thresholds.p1_min(
                    int(state.embedded_neighbors[y]), instance.allowed_size(int(y))
                ):
                    raise EmbeddingFailureException(
                        "exceptional_step",
                        f"(P1) fails for vertex {y} after injecting into D",
                        {**state.diagnostics(), "vertex": int(y)},
                    )
        state.violations = np.array(
            [self.p2_violation_count(state, i) for i in range(instance.system.r)], dtype=np.int64
        )
        if np.any(state.violations > thresholds.allowance(state.j)):
            raise EmbeddingFailureException(
                "exceptional_step", "(P2) allowance exceeded after injecting into D", state.diagnostics()
            )
        state.exceptional_done = True
        self.logger.info(
            f"Exceptional step at j={state.j}: |E_i| = {dict(state.log.exceptional_sizes)}"
        )

    def phase_one(self, state: EmbedState, rng: RngState) -> EmbedState:
        """Embed every vertex outside B."""
        instance = state.instance
        generator = rng.generator()
        audit = rng.spawn("invariants").generator()
        head = int(instance.buffer_neighborhood.sum())
        if self.relaxed_p2:
            self.logger.warning(
                f"Relaxed (P2) mode: codegree pairs are sampled ({self.relaxed_p2_pairs} per class and step)"
            )
        while True:
            if not state.exceptional_done and state.j >= head:
                self.exceptional_step(state, rng.spawn("exceptional"))
                continue
            if not np.any(~state.embedded & ~instance.in_buffer):
                break
            if state.j >= state.next_checkpoint:
                self.recompute_low_set(state)
                state.next_checkpoint = (state.j // instance.s + 1) * instance.s
                if self.relaxed_p2 or self.check_invariants:
                    self._resync_violations(state)
                if self.check_invariants:
                    self._check_checkpoint(state)

            x = state.ordering[state.j]
            positions, counts = self._admissible(state, x, generator)
            if positions.size == 0:
                raise self._no_target(state, x)
            pick = int(generator.integers(positions.size))
            self._place(state, x, int(positions[pick]))
            state.violations = counts[pick].copy()
            state.log.admissible_sizes.append(int(positions.size))
            if state.log.min_admissible is None or positions.size < state.log.min_admissible:
                state.log.min_admissible = int(positions.size)
            if self.check_invariants:
                self._check_step(state, audit)

        state.phase_one_end = state.j
        state.log.phase_one_end = state.j
        if self.check_invariants and state.log.min_admissible is not None:
            if state.log.min_admissible < as_fraction(instance.params.delta2) * instance.N:
                state.log.bound_violations.append(
                    f"admissible-size: min |A| = {state.log.min_admissible} is below δ₂N"
                )
        self.logger.info(
            f"Phase I done: T={state.j}, min |A|={state.log.min_admissible}, "
            f"moved forward {state.log.moved_total}"
        )
        return state

    # ── Phase II ───────────────────────────────────────────────────────

    def phase_two(self, state: EmbedState, rng: RngState) -> Embedding:
        """Complete every class with a spread perfect matching."""
        if state.phase_one_end is None:
            raise InvalidOperationException("run Phase II", "Phase I has not finished")
        instance = state.instance
        for i in range(instance.system.r):
            pending = [b for b in instance.buffers[i] if state.phi[b] < 0]
            free = np.flatnonzero(~state.used[i])
            if len(pending) != free.size:
                raise InvariantViolationException(
                    "phase-two-sizes", f"class {i} has {len(pending)} pending vertices and {free.size} free slots"
                )
            if not pending:
                continue
            m = len(pending)
            pair = BipartitePair(range(m), range(m, 2 * m), state.candidates[np.ix_(pending, free)])
            min_degree = min(int(pair.row_degrees().min()), int(pair.col_degrees().min()))
            if min_degree == 0:
                raise EmbeddingFailureException(
                    "phase_two", f"G_{i} has an isolated vertex", {**state.diagnostics(), "class": i}
                )
            try:
                matching = self.matching_service.sample_spread_matching(
                    pair, self.phase_two_eps, _floor_ratio(min_degree, m), rng.spawn(f"class-{i}")
                )
            except BusinessLogicException as e:
                raise EmbeddingFailureException(
                    "phase_two", f"class {i}: {e.message}", {**state.diagnostics(), "class": i}
                ) from e
            for x_label, y_label in matching.pairs():
                self._place(state, pending[x_label], int(free[y_label - m]))
            state.log.phase_two_sizes[i] = m
            if not matching.thinned:
                state.log.unthinned_classes.append(i)
            self.logger.info(f"Phase II matched {m} buffer vertices in class {i}")

        padded = {x: state.host_vertex(x) for x in range(instance.n)}
        embedding = Embedding(
            {x: padded[x] for x in range(instance.spec.n)}, padded, state.log
        )
        if self.check_invariants and not self.verify_embedding(instance.spec, instance.system, embedding):
            raise InvariantViolationException("embedding-contract", "the completed map is not an embedding")
        return embedding

    # ── Verification ───────────────────────────────────────────────────

    def verify_embedding(
        self, spec: TargetSpec, system: ClassSystem, embedding: Embedding | Mapping[int, int]
    ) -> bool:
        """True iff φ is injective, class-respecting, edge-preserving and respects W."""
        mapping = embedding.mapping if isinstance(embedding, Embedding) else dict(embedding)
        if set(mapping) != set(range(spec.n)):
            return False
        images = [mapping[x] for x in range(spec.n)]
        if len(set(images)) != len(images):
            return False
        if any(not 0 <= v < system.host.n for v in images):
            return False
        if any(system.class_of[v] != spec.h[x] for x, v in enumerate(images)):
            return False
        if any(not system.host.has_edge(images[u], images[v]) for u, v in spec.graph.edges()):
            return False
        return all(mapping[x] in set(allowed) for x, allowed in spec.w_sets.items())

    # ── Invariant checks ───────────────────────────────────────────────

    def check_state(self, state: EmbedState) -> None:
        """Full invariant audit of a Phase I state.

        Raises:
            InvariantViolationException: naming the first failing invariant
        """
        self._check_vertices(state, np.flatnonzero(~state.embedded))
        self._check_checkpoint(state)

    def _resync_violations(self, state: EmbedState) -> None:
        exact = np.array(
            [self.p2_violation_count(state, i) for i in range(state.instance.system.r)], dtype=np.int64
        )
        if self.check_invariants and not self.relaxed_p2 and not np.array_equal(exact, state.violations):
            raise InvariantViolationException(
                "P2-count",
                f"tracked counts {state.violations.tolist()} differ from recomputed {exact.tolist()}",
            )
        state.violations = exact

    def _check_step(self, state: EmbedState, generator: np.random.Generator) -> None:
        pending = np.flatnonzero(~state.embedded)
        if pending.size:
            size = max(1, math.ceil(self.p1_sample_fraction * pending.size))
            self._check_vertices(state, np.sort(generator.choice(pending, size=size, replace=False)))
        allowance = state.instance.thresholds.allowance(state.j)
        if not self.relaxed_p2 and np.any(state.violations > allowance):
            raise InvariantViolationException(
                "P2", f"exception counts {state.violations.tolist()} exceed ε′jN = {allowance}"
            )

    def _check_vertices(self, state: EmbedState, vertices: NDArray[np.intp]) -> None:
        """Recompute C_φ(x) from φ and check the cache and (P1) for each x."""
        instance = state.instance
        for x in (int(v) for v in vertices):
            expected = instance.allowed[x].copy()
            ell = 0
            for y in instance.graph.neighbors(x):
                if state.phi[y] >= 0:
                    expected &= instance.blocks[(int(instance.h[y]), int(instance.h[x]))][state.phi[y]]
                    ell += 1
            if ell != state.embedded_neighbors[x] or not np.array_equal(expected, state.candidates[x]):
                raise InvariantViolationException(
                    "candidate-cache", f"cached C({x}) disagrees with the common neighbourhood"
                )
            minimum = instance.thresholds.p1_min(ell, instance.allowed_size(x))
            if int(expected.sum()) < minimum:
                raise InvariantViolationException(
                    "P1", f"|C({x})| = {int(expected.sum())} is below {minimum} with ℓ = {ell}"
                )

    def _check_checkpoint(self, state: EmbedState) -> None:
        instance = state.instance
        params = instance.params
        thresholds = instance.thresholds
        size, r = instance.N, instance.system.r
        for i in range(r):
            count = self.p2_violation_count(state, i)
            if count > thresholds.allowance(state.j):
                raise InvariantViolationException(
                    "P2", f"class {i} has {count} exceptions, above ε′jN = {thresholds.allowance(state.j)}"
                )
        self._check_auxiliary(state)

        pending = np.flatnonzero(~state.embedded)
        floor = thresholds.lower ** (params.max_degree + 1) * as_fraction(params.delta1) * size - 2 * instance.s
        for x in pending:
            free = int(state.free_candidates(int(x)).sum())
            if free < floor:
                raise InvariantViolationException(
                    "free-candidates", f"vertex {x} has {free} free candidates, below {float(floor):.2f}"
                )
        moved_bound = (
            Fraction(1) / as_fraction(params.delta2) * r * (params.max_degree + 1) * as_fraction(params.delta3) * size
            + len(instance.spec.w_sets)
            + int(instance.reserve_neighborhood.sum())
        )
        if state.log.moved_total > moved_bound:
            raise InvariantViolationException(
                "reorder-bound", f"{state.log.moved_total} vertices moved, above {float(moved_bound):.2f}"
            )

    def _check_auxiliary(self, state: EmbedState) -> None:
        """Quasirandomness of the candidate graph on each uniform-ℓ group of δ₃N tracked vertices."""
        instance = state.instance
        params = instance.params
        thresholds = instance.thresholds
        size, r = instance.N, instance.system.r
        minimum = ceil_fraction(as_fraction(params.delta3) * size)
        for i in range(r):
            tracked = state.tracked(i)
            tracked = tracked[~instance.restricted[tracked]]
            levels = state.embedded_neighbors[tracked]
            for ell in np.unique(levels):
                group = tracked[levels == ell]
                if group.size < minimum:
                    continue
                u = group.size
                xi = (
                    thresholds.upper ** (4 * int(ell))
                    - thresholds.lower ** (4 * int(ell))
                    + as_fraction(params.eps_p) * r * Fraction(size * size, u * u)
                    + Fraction(1, u)
                )
                pair = BipartitePair(range(u), range(u, u + size), state.candidates[group])
                if not self.regularity_service.quasirandom_verdict(pair, xi).passed:
                    raise InvariantViolationException(
                        "auxiliary-quasirandom", f"class {i}, level {ell}, |U| = {u}"
                    )
