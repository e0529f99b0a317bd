"""k-th powers of Hamilton cycles in perturbed graphs: blueprints, ξ-good bijections and trials."""

import itertools
import logging
import math
from collections.abc import Callable, Sequence

import numpy as np

from app.exceptions import (
    BusinessLogicException,
    CapabilityException,
    DomainException,
    InfeasibleException,
    InvariantViolationException,
    PreconditionException,
    SamplingAbortedException,
)
from app.models.graph import Graph
from app.models.hamilton import (
    Blueprint,
    CompletionGraph,
    HamiltonHost,
    HamiltonSetup,
    XiGoodEmbedding,
    power_cycle_pairs,
)
from app.models.rng_state import RngState
from app.models.star_system import ReducedGraph, RefinedSystem
from app.models.target_spec import TargetSpec
from app.schemas.blowup_schema import ParamSet
from app.schemas.hamilton_schema import EdgeCountReport, EdgeSpreadReport, SubgraphSizeRow
from app.schemas.trial_schema import TrialOutcome, TryRecord
from app.services.blowup_service import BlowupService
from app.services.graph_service import GraphService
from app.services.matching_service import uniform_below
from app.services.reduced_graph_service import ReducedGraphService
from app.services.trial_runner import TrialRunner

logger = logging.getLogger(__name__)

# Connected-subgraph enumeration grows exponentially with the order
MAX_ENUMERATION_ORDER = 12


class HamiltonService:
    """Service for the cycle-power pipeline built on the star partition and the blow-up."""

    def __init__(
        self,
        blowup_service: BlowupService,
        reduced_graph_service: ReducedGraphService,
        graph_service: GraphService,
        trial_runner: TrialRunner,
        rejection_budget: int = 10_000,
        check_invariants: bool = False,
    ) -> None:
        self.blowup_service = blowup_service
        self.reduced_graph_service = reduced_graph_service
        self.graph_service = graph_service
        self.trial_runner = trial_runner
        self.rejection_budget = rejection_budget
        self.check_invariants = check_invariants
        self.logger = logging.getLogger(__name__)

    # ── Setup ──────────────────────────────────────────────────────────

    def prepare(
        self,
        host: HamiltonHost,
        rng: RngState,
        delta_p: float = 0.2,
        cap_constant: float = 10.0,
        max_gap: int | None = None,
    ) -> HamiltonSetup:
        """Star partition of the planted template, refinement, V₀ assignment and blueprint.

        max_gap defaults to k + 1, the spacing that lets q center positions
        spread evenly over segments of length (k+1)q.
        """
        k = host.k
        template = ReducedGraph.from_graph(host.template())
        partition = self.reduced_graph_service.star_partition(template, k, host.alpha, rng.spawn("stars"))
        refined = self.reduced_graph_service.refine_to_k_stars(
            partition, host.class_size, k, classes=host.classes, exceptional=host.exceptional
        )
        eps = ParamSet.hamilton_defaults(max_degree=2 * k, alpha=host.alpha).eps
        assignment = self.reduced_graph_service.assign_exceptional(host.graph, refined, delta_p, cap_constant, eps)
        refined = refined.with_assignment(assignment)
        refined.validate()
        blueprint = self.build_blueprint(refined, k, max_gap=k + 1 if max_gap is None else max_gap)
        setup = HamiltonSetup(host.graph, refined, blueprint)
        self.logger.info(f"Prepared {setup!r}")
        return setup

    def build_blueprint(self, refined: RefinedSystem, k: int, max_gap: int | None = None) -> Blueprint:
        """Segments in star order, each of length |V_S ∪ A_S| with |A_S ∪ Z_S| ones.

        Ones are spread evenly over the segment minus its trailing k−1
        zeros when that keeps consecutive ones within max_gap (default k),
        and packed max_gap apart from the segment start otherwise.

        Raises:
            InfeasibleException: naming a segment whose one-count cannot be placed
        """
        if k < 1:
            raise DomainException(f"Cycle power must be at least 1 (got {k})")
        gap = k if max_gap is None else max_gap
        if gap < 1:
            raise DomainException(f"Spacing between ones must be positive (got {gap})")
        labels: list[int] = []
        segments: list[tuple[int, int]] = []
        expected: list[int] = []
        for s, star in enumerate(refined.stars):
            extra = len(refined.star_exceptional(s))
            length = (len(star.leaves) + 1) * refined.part_size + extra
            ones = refined.part_size + extra
            segment = self._segment_labels(s, length, ones, k, gap)
            segments.append((len(labels), length))
            expected.append(ones)
            labels.extend(segment)
        blueprint = Blueprint(len(labels), k, labels, segments, expected, max_gap=gap)
        problems = blueprint.violations()
        if problems:
            raise InfeasibleException(f"Blueprint construction left violations {problems}")
        return blueprint

    def _segment_labels(self, s: int, length: int, ones: int, k: int, gap: int) -> list[int]:
        available = length - (k - 1)
        if ones < 1 or ones >= length or ones > available:
            raise InfeasibleException(f"Segment {s} of length {length} cannot hold {ones} ones with k = {k}")
        if ones == 1:
            positions = [0]
        else:
            spacing = math.ceil((available - 1) / (ones - 1))
            if spacing <= gap:
                positions = [i * (available - 1) // (ones - 1) for i in range(ones)]
            else:
                positions = [i * gap for i in range(ones)]
        segment = [0] * length
        for p in positions:
            segment[p] = 1
        if any(all(abs(p - z) > k for z in range(length) if segment[z] == 0) for p in positions):
            raise InfeasibleException(f"Segment {s}: some one has no zero within distance {k}")
        return segment

    # ── ξ-good sampling ────────────────────────────────────────────────

    def sample_exceptional_positions(
        self, bp: Blueprint, refined: RefinedSystem, rng: RngState
    ) -> dict[int, list[int]]:
        """A′_S for every star: |A_S| one-positions of I_S, pairwise more than 2k apart.

        Uniform over all admissible choices: rejection sampling first, then
        an exact counting walk when the budget runs out.
        """
        counts = {s: len(refined.star_exceptional(s)) for s in range(len(refined.stars))}
        counts = {s: c for s, c in counts.items() if c}
        if not counts:
            return {}
        candidates = {s: bp.ones(s) for s in counts}
        for s, c in counts.items():
            if c > len(candidates[s]):
                raise InfeasibleException(
                    f"Segment {s} has {len(candidates[s])} ones but {c} exceptional vertices to place"
                )
        generator = rng.generator()
        spacing = 2 * bp.k
        for _ in range(self.rejection_budget):
            chosen = {
                s: sorted(int(i) for i in generator.choice(candidates[s], size=c, replace=False))
                for s, c in counts.items()
            }
            flat = sorted(i for positions in chosen.values() for i in positions)
            if all(bp.distance(a, b) > spacing for a, b in itertools.combinations(flat, 2)):
                return chosen
        self.logger.info(f"Rejection budget {self.rejection_budget} exhausted; sampling A′ by exact counting")
        return self._sample_by_counting(bp, counts, candidates, generator)

    def _sample_by_counting(
        self,
        bp: Blueprint,
        counts: dict[int, int],
        candidates: dict[int, list[int]],
        generator: np.random.Generator,
    ) -> dict[int, list[int]]:
        """Sequential draw weighted by exact completion counts, conditioned on the first pick."""
        order = sorted(counts)
        following = {s: (order[t + 1] if t + 1 < len(order) else None) for t, s in enumerate(order)}
        points = [(i, s) for s in order for i in candidates[s]]
        min_gap = 2 * bp.k + 1
        n = bp.n
        memo: dict[tuple[int, int, int], int] = {}

        def options(first: int, index: int, taken: int) -> list[tuple[int, int, int]]:
            """(weight, next index, next taken) for every continuation; next index -1 ends the set."""
            position, segment = points[index]
            result: list[tuple[int, int, int]] = []
            if taken == counts[segment] and following[segment] is None:
                wrap = points[first][0] + n - position
                if index == first or wrap >= min_gap:
                    result.append((1, -1, 0))
            for j in range(index + 1, len(points)):
                other, other_segment = points[j]
                if other - position < min_gap:
                    continue
                if other_segment == segment and taken < counts[segment]:
                    result.append((completions(first, j, taken + 1), j, taken + 1))
                elif other_segment == following[segment] and taken == counts[segment]:
                    result.append((completions(first, j, 1), j, 1))
            return [option for option in result if option[0]]

        def completions(first: int, index: int, taken: int) -> int:
            key = (first, index, taken)
            if key not in memo:
                memo[key] = sum(weight for weight, _, _ in options(first, index, taken))
            return memo[key]

        starts = [t for t, (_, s) in enumerate(points) if s == order[0]]
        weights = [completions(f, f, 1) for f in starts]
        total = sum(weights)
        if total == 0:
            raise InfeasibleException("No placement of the exceptional positions keeps them more than 2k apart")
        draw = uniform_below(total, generator)
        first = starts[-1]
        for f, weight in zip(starts, weights, strict=True):
            if draw < weight:
                first = f
                break
            draw -= weight

        chosen: dict[int, list[int]] = {s: [] for s in order}
        index, taken = first, 1
        while index >= 0:
            chosen[points[index][1]].append(points[index][0])
            choices = options(first, index, taken)
            draw = uniform_below(sum(weight for weight, _, _ in choices), generator)
            for weight, next_index, next_taken in choices:
                if draw < weight:
                    index, taken = next_index, next_taken
                    break
                draw -= weight
        return chosen

    def sample_xi_good(
        self,
        host: Graph,
        refined: RefinedSystem,
        bp: Blueprint,
        params: ParamSet,
        rng: RngState,
    ) -> XiGoodEmbedding:
        """Draw one ξ-good bijection.

        Picks A′_S and a uniform bijection A′_S → A_S, then embeds the
        proximity graph on the remaining positions into the star system
        with the blow-up, restricting every zero near an A′ position to the
        neighbourhood of the exceptional vertex placed there.

        Raises:
            PreconditionException: if the blueprint is invalid
            InfeasibleException: if A′ or the class map cannot be chosen
            EmbeddingFailureException: if the blow-up fails
        """
        problems = bp.violations()
        if problems:
            raise PreconditionException(f"Blueprint violates {problems}")
        k, n = bp.k, bp.n
        if n != host.n:
            raise PreconditionException(f"Blueprint has {n} positions for a host on {host.n} vertices")

        a_prime = self.sample_exceptional_positions(bp, refined, rng.spawn("a-prime"))
        generator = rng.spawn("bijection").generator()
        owner: dict[int, int] = {}
        for s, positions in a_prime.items():
            vertices = refined.star_exceptional(s)
            for i, pick in zip(positions, generator.permutation(len(vertices)), strict=True):
                owner[i] = vertices[int(pick)]

        kept = [i for i in range(n) if i not in owner]
        index_of = {i: t for t, i in enumerate(kept)}
        labels = bp.labels
        edges = [
            (index_of[i], index_of[j])
            for i, j in bp.same_segment_pairs()
            if labels[i] != labels[j] and i in index_of and j in index_of
        ]

        h = np.full(len(kept), -1, dtype=np.int64)
        w_sets: dict[int, list[int]] = {}
        size = refined.part_size
        for s, star in enumerate(refined.stars):
            near = a_prime.get(s, [])
            quota = {x: size for x in star.leaves}
            forced: dict[int, int] = {}
            for i in bp.zeros(s):
                anchor = next((a for a in near if bp.distance(i, a) <= k), None)
                if anchor is not None:
                    forced[i] = owner[anchor]
                    quota[refined.assignment[owner[anchor]]] -= 1
            if any(q < 0 for q in quota.values()):
                raise InfeasibleException(
                    f"Star {s}: zeros near exceptional positions overfill a leaf part of size {size}"
                )
            centers = [i for i in bp.ones(s) if i not in owner]
            if len(centers) != size:
                raise InfeasibleException(f"Star {s} has {len(centers)} center positions for a part of size {size}")
            for i in centers:
                h[index_of[i]] = star.center
            leaves = iter(x for x in star.leaves for _ in range(quota[x]))
            for i in bp.zeros(s):
                if i in forced:
                    vertex = forced[i]
                    x = refined.assignment[vertex]
                    h[index_of[i]] = x
                    part = refined.parts[x]
                    w_sets[index_of[i]] = [v for v in part if host.has_edge(vertex, v)]
                else:
                    h[index_of[i]] = next(leaves)

        target = Graph.from_edges(len(kept), edges)
        spec = TargetSpec(target, h.tolist(), w_sets)
        max_degree = int(target.degrees().max()) if target.n else 0
        run_params = params.model_copy(update={"max_degree": max_degree})
        system = refined.class_system(host)
        embedding = self.blowup_service.embed(
            spec, system, run_params, rng.spawn("blow-up"), restriction_bound=False
        )

        phi = [0] * n
        for i in kept:
            phi[i] = embedding.mapping[index_of[i]]
        for i, vertex in owner.items():
            phi[i] = vertex
        result = XiGoodEmbedding(phi, a_prime, embedding.log)
        if self.check_invariants:
            problems = self.check_xi_good(host, refined, bp, phi)
            if problems:
                raise InvariantViolationException("xi-good", f"sampled bijection violates {problems}")
        return result

    def check_xi_good(
        self, host: Graph, refined: RefinedSystem, bp: Blueprint, phi: Sequence[int]
    ) -> list[str]:
        """Names of the violated ξ-good conditions, empty when φ is ξ-good."""
        n = bp.n
        if host.n != n or len(phi) != n or sorted(phi) != list(range(n)):
            return ["bijection"]
        problems: list[str] = []
        for s, star in enumerate(refined.stars):
            positions = bp.positions(s)
            exceptional = set(refined.star_exceptional(s))
            if {phi[i] for i in positions} != exceptional | set(refined.star_vertices(s)):
                if "segment-images" not in problems:
                    problems.append("segment-images")
            center = exceptional | set(refined.parts[star.center])
            if any((phi[i] in center) != (bp.labels[i] == 1) for i in positions):
                if "label-classes" not in problems:
                    problems.append("label-classes")
        exceptional_all = set(refined.exceptional)
        placed = [i for i in range(n) if phi[i] in exceptional_all]
        if any(bp.distance(a, b) <= 2 * bp.k for a, b in itertools.combinations(placed, 2)):
            problems.append("exceptional-spacing")
        for i, j in bp.same_segment_pairs():
            if bp.labels[i] != bp.labels[j] and not host.has_edge(phi[i], phi[j]):
                problems.append("cross-label-edges")
                break
        return problems

    # ── Completion graph ───────────────────────────────────────────────

    def completion_graph(
        self, xi: XiGoodEmbedding, bp: Blueprint, k: int, host: Graph | None = None
    ) -> CompletionGraph:
        """H_φ = E(C^k) minus the same-segment pairs with different labels.

        Raises:
            InvariantViolationException: if the two edge sets do not partition
                E(C^k), or an excluded pair is not a host edge
        """
        if k != bp.k:
            raise DomainException(f"Blueprint is for k = {bp.k}, not {k}")
        pairs = power_cycle_pairs(bp.n, k)
        excluded = [
            (i, j) for i, j in pairs if bp.segment_of[i] == bp.segment_of[j] and bp.labels[i] != bp.labels[j]
        ]
        excluded_set = set(excluded)
        kept = [pair for pair in pairs if pair not in excluded_set]
        if excluded_set | set(kept) != set(pairs) or excluded_set & set(kept):
            raise InvariantViolationException("completion-partition", "H̄_φ and H_φ do not partition E(C^k)")
        graph = CompletionGraph(bp.n, k, kept, excluded, xi.phi)
        if host is not None:
            missing = [pair for pair in graph.image_edges(excluded=True) if not host.has_edge(*pair)]
            if missing:
                raise InvariantViolationException(
                    "completion-host", f"{len(missing)} pairs of H̄_φ are not host edges, e.g. {missing[0]}"
                )
        return graph

    def count_edges_bound(self, v: int, k: int) -> int:
        """⌊(2k + (v−1)·2(k−1) − 2·Σ_{1≤i≤min(⌊v/2⌋,k)} (k−i)) / 2⌋."""
        if v < 1:
            raise DomainException(f"Subgraph order must be positive (got {v})")
        if k < 3:
            raise DomainException(f"The edge bound is stated for k >= 3 (got {k})")
        reduction = sum(k - i for i in range(1, min(v // 2, k) + 1))
        return (2 * k + (v - 1) * 2 * (k - 1) - 2 * reduction) // 2

    def check_claim_count_edge(self, graph: CompletionGraph | Graph, k: int, vmax: int) -> EdgeCountReport:
        """Densest connected subgraphs of each order up to vmax, against both bounds.

        Connected vertex sets are enumerated once each by extension from
        their smallest vertex; the densest subgraph on a vertex set is the
        induced one.
        """
        if vmax > MAX_ENUMERATION_ORDER:
            raise CapabilityException(
                f"Connected-subgraph enumeration is limited to order {MAX_ENUMERATION_ORDER} (got {vmax})"
            )
        if vmax < 1:
            raise DomainException(f"vmax must be positive (got {vmax})")
        plain = graph.graph() if isinstance(graph, CompletionGraph) else graph
        neighbors = [set(int(u) for u in plain.neighbors(v)) for v in range(plain.n)]
        best = [-1] * (vmax + 1)
        enumerated = 0

        def extend(members: list[int], frontier: list[int], root: int, covered: set[int], edges: int) -> None:
            nonlocal enumerated
            enumerated += 1
            size = len(members)
            if edges > best[size]:
                best[size] = edges
            if size == vmax:
                return
            pending = list(frontier)
            while pending:
                w = pending.pop()
                fresh = [u for u in neighbors[w] if u > root and u not in covered]
                gained = sum(1 for u in members if u in neighbors[w])
                extend(members + [w], pending + fresh, root, covered | neighbors[w] | {w}, edges + gained)

        for root in range(plain.n):
            start = [u for u in neighbors[root] if u > root]
            extend([root], start, root, neighbors[root] | {root}, 0)

        rows: list[SubgraphSizeRow] = []
        violations: list[str] = []
        for v in range(1, vmax + 1):
            if best[v] < 0:
                continue
            formula = self.count_edges_bound(v, k)
            relaxed = v * (k - 1) - (k - 1)
            row = SubgraphSizeRow(
                v=v,
                max_edges=best[v],
                formula_bound=formula,
                relaxed_bound=relaxed,
                formula_ok=best[v] <= formula,
                relaxed_ok=best[v] <= relaxed,
            )
            rows.append(row)
            if not row.relaxed_ok:
                violations.append(f"v={v}: {best[v]} edges > v(k-1)-(k-1) = {relaxed}")
            if not row.formula_ok:
                violations.append(f"v={v}: {best[v]} edges > formula bound {formula}")
        report = EdgeCountReport(k=k, vmax=vmax, subgraphs=enumerated, rows=rows, violations=violations)
        self.logger.info(f"Enumerated {enumerated} connected subgraphs up to order {vmax}: {len(violations)} violations")
        return report

    # ── Sampling experiments ───────────────────────────────────────────

    def draw_completion(self, setup: HamiltonSetup, params: ParamSet, rng: RngState) -> CompletionGraph:
        """One ξ-good draw turned into its completion graph."""
        xi = self.sample_xi_good(setup.host, setup.refined, setup.blueprint, params, rng)
        return self.completion_graph(xi, setup.blueprint, setup.blueprint.k, setup.host)

    def estimate_edge_spread(
        self,
        sampler: Callable[[RngState], CompletionGraph],
        probe: Sequence[tuple[int, int]],
        tmax: int,
        samples: int,
        rng: RngState,
        c_prime: float | None = None,
    ) -> EdgeSpreadReport:
        """Frequency that a fresh H_φ shares exactly t edges with the probe, for t = 0..tmax.

        Probe edges are host-vertex pairs. Without c_prime the reference
        constant is fitted to the exact t = 1 frequency. The report flags
        whether every t >= 1 frequency stays under (C'/n)^(t/(k-1)) and
        whether the frequencies never increase with t.

        Raises:
            DomainException: if tmax exceeds the probe or samples is not positive
            SamplingAbortedException: if more than half of the draws fail
        """
        if not 0 <= tmax <= len(probe):
            raise DomainException(f"tmax must lie in 0..{len(probe)} (got {tmax})")
        if samples < 1:
            raise DomainException(f"Sample count must be positive (got {samples})")
        probe_edges = [(min(a, b), max(a, b)) for a, b in probe[:tmax]]
        stream = rng.spawn("samples")
        results = self.trial_runner.run(lambda i: sampler(stream.child(i)), samples, "edge spread")
        graphs = [r.value for r in results if r.ok and r.value is not None]
        errors = [r.error for r in results if r.error is not None]
        if 2 * len(errors) > samples:
            raise SamplingAbortedException(len(errors), samples, str(errors[-1]) if errors else None)
        if not graphs:
            raise SamplingAbortedException(samples, samples, "no completion graph was produced")

        prefix = [0] * (tmax + 1)
        exact = [0] * (tmax + 1)
        for graph in graphs:
            present = graph.image_edges()
            depth = 0
            while depth < tmax and probe_edges[depth] in present:
                depth += 1
            for t in range(depth + 1):
                prefix[t] += 1
            exact[sum(1 for edge in probe_edges if edge in present)] += 1
        count = len(graphs)
        exact_freq = [c / count for c in exact]
        n, k = graphs[0].n, graphs[0].k
        if c_prime is None:
            c_prime = n * exact_freq[1] ** (k - 1) if tmax >= 1 and exact_freq[1] > 0 else 1.0
        slope = math.log(c_prime / n) / (k - 1)
        bounds = [(c_prime / n) ** (t / (k - 1)) for t in range(tmax + 1)]
        report = EdgeSpreadReport(
            n=n,
            k=k,
            samples=count,
            failures=len(errors),
            probe=probe_edges,
            prefix_frequencies=[c / count for c in prefix],
            exact_frequencies=exact_freq,
            log_frequencies=[math.log(f) if f > 0 else None for f in exact_freq],
            c_prime=c_prime,
            reference=[t * slope for t in range(tmax + 1)],
            monotone=all(a >= b for a, b in zip(exact_freq, exact_freq[1:], strict=False)),
            within_bound=all(f <= bound * (1 + 1e-9) for f, bound in zip(exact_freq[1:], bounds[1:], strict=True)),
            partial=tmax >= 1 and exact[tmax] == 0,
        )
        if report.partial:
            self.logger.warning(f"Edge spread: no draw shared all {tmax} probe edges in {count} samples")
        if not report.within_bound:
            self.logger.warning(f"Edge spread: exact frequencies exceed (C'/n)^(t/(k-1)) with C'={c_prime:.4g}")
        return report

    def perturbed_trial(
        self,
        host: Graph,
        refined: RefinedSystem,
        bp: Blueprint,
        p: float,
        phi_tries: int,
        rng: RngState,
        params: ParamSet | None = None,
    ) -> TrialOutcome:
        """Sample G(n, p) once, then draw ξ-good bijections until one gives C^k in G ∪ G(n, p).

        The draws are independent and not steered toward the sampled random
        graph, so the success rate lower-bounds the probability that some
        ξ-good φ has H_φ inside G(n, p).

        Raises:
            SamplingAbortedException: if every draw failed
        """
        if phi_tries < 1:
            raise DomainException(f"phi_tries must be positive (got {phi_tries})")
        k = bp.k
        params = params or ParamSet.hamilton_defaults(max_degree=2 * k)
        random_graph = self.graph_service.sample_gnp(host.n, p, rng.spawn("gnp"))
        union = host.union(random_graph)
        tries: list[TryRecord] = []
        failures = 0
        last_error: str | None = None
        success = False
        draws = rng.spawn("phi")
        for attempt in range(phi_tries):
            try:
                xi = self.sample_xi_good(host, refined, bp, params, draws.child(attempt))
            except BusinessLogicException as e:
                failures += 1
                last_error = str(e)
                tries.append(TryRecord(attempt=attempt, success=False, random_cover=False, missing_edges=-1, error=str(e)))
                continue
            completion = self.completion_graph(xi, bp, k, host)
            missing = self.missing_power_edges(union, xi.phi, k)
            cover = all(random_graph.has_edge(a, b) for a, b in completion.image_edges())
            tries.append(TryRecord(attempt=attempt, success=missing == 0, random_cover=cover, missing_edges=missing))
            if missing == 0:
                success = True
                break
        if failures == len(tries):
            raise SamplingAbortedException(failures, len(tries), last_error)
        outcome = TrialOutcome(
            p=p,
            tries_used=len(tries),
            success=success,
            random_edges=random_graph.edge_count,
            failures=failures,
            tries=tries,
        )
        self.logger.info(f"Perturbed trial at p={p}: success={success} after {len(tries)} draws")
        return outcome

    # ── Verification ───────────────────────────────────────────────────

    def missing_power_edges(self, host: Graph, phi: Sequence[int], k: int) -> int:
        """Number of C^k edges whose image under φ is not a host edge."""
        pairs = np.array(power_cycle_pairs(len(phi), k), dtype=np.int64).reshape(-1, 2)
        images = np.asarray(phi, dtype=np.int64)
        present = host.adjacency[images[pairs[:, 0]], images[pairs[:, 1]]]
        return int((~present).sum())

    def verify_power_ham(self, host: Graph, phi: Sequence[int], k: int) -> bool:
        """True iff {φ(i), φ(i+δ mod n)} is a host edge for every i and 1 ≤ δ ≤ k.

        Raises:
            DomainException: if φ is not a bijection onto V(host)
        """
        n = host.n
        if len(phi) != n or sorted(phi) != list(range(n)):
            raise DomainException("φ is not a bijection [n] → V(host)")
        images = np.asarray(phi, dtype=np.int64)
        for delta in range(1, min(k, n - 1) + 1):
            if not np.all(host.adjacency[images, np.roll(images, -delta)]):
                return False
        return True
