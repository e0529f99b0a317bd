"""Vertex-spread estimation for injection samplers and exact spread of uniform matchings."""

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from app.exceptions import CapabilityException, DomainException, InfeasibleException, SamplingAbortedException
from app.models.graph import BipartitePair
from app.models.rng_state import RngState
from app.schemas.spread_schema import ExactPin, ExactSpreadReport, PinFrequency, SpreadReport
from app.services.matching_service import MatchingService
from app.services.trial_runner import TrialRunner

logger = logging.getLogger(__name__)

Injection = Sequence[int] | Mapping[int, int]

MIN_SAMPLES = 100
EXACT_SPREAD_LIMIT = 12
TOP_PINS = 20


def wilson_upper(successes: int, trials: int, confidence: float = 0.95) -> float:
    """Upper end of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 1.0
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    denominator = 1 + z * z / trials
    centre = p + z * z / (2 * trials)
    margin = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return min(1.0, (centre + margin) / denominator)


def _pins(injection: Injection) -> Iterable[tuple[int, int]]:
    if isinstance(injection, Mapping):
        return ((int(x), int(y)) for x, y in injection.items())
    return ((x, int(y)) for x, y in enumerate(injection))


class SpreadService:
    """Service measuring how concentrated a sampler's pins are."""

    def __init__(self, matching_service: MatchingService, trial_runner: TrialRunner) -> None:
        self.matching_service = matching_service
        self.trial_runner = trial_runner
        self.logger = logging.getLogger(__name__)

    def register_probes(
        self, domain_size: int, codomain_size: int, count: int, rng: RngState
    ) -> NDArray[np.int64]:
        """count rows (x1, x2, y1, y2) with x1 ≠ x2 and y1 ≠ y2, drawn uniformly."""
        if count == 0:
            return np.zeros((0, 4), dtype=np.int64)
        if domain_size < 2 or codomain_size < 2:
            raise DomainException("Two-pin probes need at least two domain and two codomain elements")
        generator = rng.generator()
        xs = np.stack([generator.choice(domain_size, size=2, replace=False) for _ in range(count)])
        ys = np.stack([generator.choice(codomain_size, size=2, replace=False) for _ in range(count)])
        return np.concatenate([xs, ys], axis=1).astype(np.int64)

    def estimate_vertex_spread(
        self,
        sampler: Callable[[RngState], Injection],
        domain_size: int,
        codomain_size: int,
        samples: int,
        pair_probes: int,
        rng: RngState,
    ) -> SpreadReport:
        """Run the sampler on independent streams and measure its one- and two-pin spread.

        Probes are fixed from their own stream before any sample is drawn.

        Raises:
            DomainException: if samples < 100 or the sizes cannot hold a probe
            SamplingAbortedException: if more than half of the samples fail
        """
        if samples < MIN_SAMPLES:
            raise DomainException(f"Spread estimation needs at least {MIN_SAMPLES} samples (got {samples})")
        if pair_probes < 0:
            raise DomainException(f"Probe count must be non-negative (got {pair_probes})")
        probes = self.register_probes(domain_size, codomain_size, pair_probes, rng.spawn("probes"))
        stream = rng.spawn("samples")
        results = self.trial_runner.run(lambda i: sampler(stream.child(i)), samples, "spread samples")
        injections = [r.value for r in results if r.ok and r.value is not None]
        errors = [r.error for r in results if r.error is not None]
        if 2 * len(errors) > samples:
            raise SamplingAbortedException(len(errors), samples, str(errors[-1]))
        return self.tally(injections, domain_size, codomain_size, probes, attempts=samples, failures=len(errors))

    def spread_from_samples(
        self,
        injections: Sequence[Injection],
        domain_size: int,
        codomain_size: int,
        pair_probes: int,
        rng: RngState,
    ) -> SpreadReport:
        """Spread of stored samples, e.g. bijections read back from a file."""
        if not injections:
            raise DomainException("No samples to measure")
        probes = self.register_probes(domain_size, codomain_size, pair_probes, rng.spawn("probes"))
        return self.tally(injections, domain_size, codomain_size, probes, attempts=len(injections))

    def tally(
        self,
        injections: Sequence[Injection],
        domain_size: int,
        codomain_size: int,
        probes: NDArray[np.int64],
        attempts: int,
        failures: int = 0,
    ) -> SpreadReport:
        counts = np.zeros((domain_size, codomain_size), dtype=np.int64)
        joint = np.zeros(len(probes), dtype=np.int64)
        covered = np.zeros(domain_size, dtype=np.int64)
        for injection in injections:
            image = np.full(domain_size, -1, dtype=np.int64)
            for x, y in _pins(injection):
                if not (0 <= x < domain_size and 0 <= y < codomain_size):
                    raise DomainException(f"Pin ({x}, {y}) lies outside {domain_size} x {codomain_size}")
                image[x] = y
            mapped = image >= 0
            counts[np.flatnonzero(mapped), image[mapped]] += 1
            covered += mapped
            if len(probes):
                joint += (image[probes[:, 0]] == probes[:, 2]) & (image[probes[:, 1]] == probes[:, 3])

        successes = len(injections)
        peak = int(counts.max()) if counts.size else 0
        top = np.argsort(counts, axis=None, kind="stable")[::-1][:TOP_PINS]
        table = [
            PinFrequency(x=int(x), y=int(y), count=int(counts[x, y]), frequency=counts[x, y] / attempts)
            for x, y in (np.unravel_index(int(flat), counts.shape) for flat in top)
            if counts[x, y]
        ]
        k1 = peak / attempts
        upper = wilson_upper(peak, attempts)
        joint_peak = int(joint.max()) if len(joint) else 0
        k2 = joint_peak / attempts
        k2_upper = wilson_upper(joint_peak, attempts) if len(joint) else 0.0
        report = SpreadReport(
            samples=attempts,
            successes=successes,
            failures=failures,
            domain_size=domain_size,
            codomain_size=codomain_size,
            k1_table=table,
            k1_max_freq=k1,
            wilson_upper=upper,
            c1=codomain_size * k1,
            c1_upper=codomain_size * upper,
            pair_probes=len(probes),
            k2_max_freq=k2,
            k2_wilson_upper=k2_upper,
            c2=codomain_size * math.sqrt(k2),
            c2_upper=codomain_size * math.sqrt(k2_upper),
            consistent=bool(np.all(covered == successes)),
        )
        self.logger.info(
            f"Spread over {successes}/{attempts} samples: c1 = {report.c1:.2f} "
            f"(upper {report.c1_upper:.2f}), c2 = {report.c2:.2f}"
        )
        return report

    def exact_spread_uniform_matching(self, pair: BipartitePair, kmax: int = 2) -> ExactSpreadReport:
        """Exact pin and pin-pair probabilities of a uniform perfect matching.

        Raises:
            DomainException: if kmax is not 1 or 2
            CapabilityException: if the sides exceed twelve vertices
            InfeasibleException: if the pair has no perfect matching
        """
        if kmax not in (1, 2):
            raise DomainException(f"Exact spread is computed for one or two pins (got kmax = {kmax})")
        m = pair.mx
        if m != pair.my:
            raise DomainException(f"Exact spread needs equal sides (got {pair.mx} and {pair.my})")
        if m > EXACT_SPREAD_LIMIT:
            raise CapabilityException(f"Exact spread is limited to m <= {EXACT_SPREAD_LIMIT} (got {m})")
        total = self.matching_service.count_perfect_matchings(pair)
        if total == 0:
            raise InfeasibleException("The pair has no perfect matching")
        edges = pair.edges()
        pins: list[ExactPin] = []
        max_k1 = Fraction(0)
        for x, y in edges:
            probability = self.matching_service.exact_pin_probability(pair, x, y)
            max_k1 = max(max_k1, probability)
            if probability:
                pins.append(ExactPin(x=x, y=y, probability=str(probability), value=float(probability)))
        report = ExactSpreadReport(
            m=m, kmax=kmax, total_matchings=total, pins=pins, max_k1=str(max_k1), c1=float(m * max_k1)
        )
        if kmax == 2:
            max_k2 = Fraction(0)
            for index, first in enumerate(edges):
                for second in edges[index + 1 :]:
                    if first[0] == second[0] or first[1] == second[1]:
                        continue
                    max_k2 = max(max_k2, self.matching_service.pin_pair_probability(pair, first, second))
            report.max_k2 = str(max_k2)
            report.c2 = m * math.sqrt(max_k2)
        self.logger.info(f"Exact spread of a {m}x{m} pair over {total} matchings: c1 = {report.c1:.3f}")
        return report
