"""
Inference service: estimates Delta from branch frequencies, tests the
classical null Delta <= 0, and plans sample sizes.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .base_service import BaseService
from .protocol_service import ProtocolService
from src.config.config import DATA_TOLERANCE
from src.models.classical import closest_realizable, realize
from src.models.inference import DeltaEstimate, RejectionRate, SampleSizePlan, TestConfig, TestReport
from src.models.probability import ConditionalTriple, cond_bell_delta
from src.models.protocol import FrequencyTriple, HomogeneityResult, ProtocolResult
from src.utils.exceptions import InvalidConfig, InvalidTarget
from src.utils.rng import spawn_rngs

logger = logging.getLogger(__name__)

# Replications simulated per child stream in Monte Carlo runs
CHUNK_SIZE = 2000


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes: Number of +1 answers
        trials: Branch size, > 0
        confidence: Two-sided coverage

    Returns:
        (lower, upper) bounds within [0, 1]
    """
    if trials <= 0:
        raise InvalidConfig(f"trials must be positive, got {trials}")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    p = successes / trials
    denominator = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denominator
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denominator
    return max(0.0, center - half), min(1.0, center + half)


def _z_statistics(counts: np.ndarray, totals: np.ndarray,
                  confidence: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Delta estimates and standard errors for stacked count rows.

    Args:
        counts: (..., 3) successes per branch
        totals: (..., 3) or (3,) branch sizes
        confidence: Coverage of the Wilson interval used at the boundary

    Returns:
        (delta, plain std error, test std error, boundary flag). Where a branch
        proportion is 0 or 1 the test std error takes that branch's Wilson
        half-width divided by z instead of the zero binomial variance.
    """
    counts = np.asarray(counts, dtype=float)
    totals = np.broadcast_to(np.asarray(totals, dtype=float), counts.shape)
    p = counts / totals
    delta = p[..., 2] - p[..., 0] - p[..., 1]
    variance = p * (1.0 - p) / totals
    plain = np.sqrt(variance.sum(axis=-1))

    at_edge = (counts == 0) | (counts == totals)
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    z2n = z * z / totals
    wilson_half = z * np.sqrt(variance + z2n / (4.0 * totals)) / (1.0 + z2n)
    branch_variance = np.where(at_edge, (wilson_half / z) ** 2, variance)
    return delta, plain, np.sqrt(branch_variance.sum(axis=-1)), at_edge.any(axis=-1)


def _one_sided_p(delta: np.ndarray, se: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    safe = np.where(se > 0, se, 1.0)
    statistic = np.where(se > 0, delta / safe, 0.0)
    return statistic, stats.norm.sf(statistic)


def scaled_canonical_triple(target_delta: float) -> ConditionalTriple:
    """Point on x = y = (1 - D)/3, z = (2 + D)/3; (0.25, 0.25, 0.75) at D = 0.25."""
    side = (1.0 - target_delta) / 3.0
    return ConditionalTriple.from_values((side, side, (2.0 + target_delta) / 3.0))


class InferenceService(BaseService):
    """Service for the quantum-likeness decision procedure."""

    def default_config(self, **overrides) -> TestConfig:
        """TestConfig from configured defaults; None overrides are ignored."""
        values = {
            'delta_threshold': self.setting('delta_threshold', overrides.get('delta_threshold')),
            'alpha': self.setting('alpha', overrides.get('alpha')),
            'confidence': self.setting('confidence', overrides.get('confidence')),
            'method': self.setting('test_method', overrides.get('method')),
        }
        return TestConfig(**values)

    def delta_hat(self, f: FrequencyTriple) -> DeltaEstimate:
        """
        Delta = nu(a+|c+) - nu(a+|b+) - nu(c+|b-) with its delta-method std error.

        A proportion at 0 or 1 sets the boundary flag; the std error is then
        understated and interval methods take over in the test.
        """
        delta, plain, _, boundary = _z_statistics(f.numerators, f.denominators, self.setting('confidence'))
        return DeltaEstimate(value=float(delta), std_error=float(plain), boundary=bool(boundary))

    def test_quantum_like(self, f: FrequencyTriple, cfg: Optional[TestConfig] = None,
                          homogeneity: Optional[HomogeneityResult] = None) -> TestReport:
        """
        Test H0: Delta <= 0 against H1: Delta > 0.

        Args:
            f: Observed branch frequencies
            cfg: Test configuration; configured defaults when omitted
            homogeneity: Result of the first-answer balance check, if available.
                Without it the homogeneity premise is taken as given.

        Returns:
            TestReport: Estimate, statistic, p-value, verdict and certificates
        """
        cfg = cfg or self.default_config()
        delta, plain, se, boundary = _z_statistics(f.numerators, f.denominators, cfg.confidence)
        delta, plain, se, boundary = float(delta), float(plain), float(se), bool(boundary)
        if boundary:
            logger.warning("Boundary proportion in at least one branch; using Wilson score errors")

        fitted = None
        if cfg.method == 'z_test':
            statistic, p_value = (float(v) for v in _one_sided_p(np.array(delta), np.array(se)))
        else:
            fitted, statistic = closest_realizable(f.numerators, f.denominators)
            p_value = 1.0 if statistic <= DATA_TOLERANCE else float(stats.chi2.sf(statistic, 1))
        lower_bound = delta - float(stats.norm.ppf(cfg.confidence)) * se

        realizability = realize(f.as_triple())
        homogeneity_pass = True if homogeneity is None else homogeneity.passed

        if p_value < cfg.alpha and delta > 0 and homogeneity_pass and se > 0:
            verdict = 'quantum_like'
        elif realizability.feasible or p_value >= cfg.alpha:
            verdict = 'classical_consistent'
        else:
            verdict = 'inconclusive'
        if verdict == 'inconclusive' and not homogeneity_pass:
            logger.warning("Delta is significant but homogeneity failed; no quantum-like claim")

        logger.info(f"{cfg.method}: delta_hat={delta:.6f}, se={se:.6f}, p={p_value:.3g} -> {verdict}")
        return TestReport(
            delta_hat=delta,
            std_error=se,
            statistic=statistic,
            p_value=min(max(p_value, 0.0), 1.0),
            verdict=verdict,
            homogeneity_pass=homogeneity_pass,
            realizability=realizability,
            method=cfg.method,
            lower_bound=lower_bound,
            exceeds_threshold=lower_bound > cfg.delta_threshold,
            boundary=boundary,
            interval_method='wilson' if boundary else 'wald',
            frequencies=f,
            homogeneity=homogeneity,
            fitted_triple=fitted,
            config=cfg,
        )

    def analyze_result(self, result: ProtocolResult, cfg: Optional[TestConfig] = None) -> TestReport:
        """Homogeneity check, frequency estimation and the test, in one report."""
        cfg = cfg or self.default_config()
        homogeneity = ProtocolService(self.file_manager).homogeneity_check(result, cfg.alpha)
        return self.test_quantum_like(result.frequencies(), cfg, homogeneity)

    def rejection_rate(self, triple: ConditionalTriple, n_per_branch: Sequence[int],
                       cfg: Optional[TestConfig] = None, replications: Optional[int] = None,
                       seed: Optional[int] = None) -> RejectionRate:
        """
        Monte Carlo rejection rate of the z-test when the branches are
        binomial with the given conditionals.

        Args:
            triple: True conditionals
            n_per_branch: Branch sizes (n1, n2, n3), or one size for all three
            cfg: Test configuration
            replications: Number of simulated experiments
            seed: Root seed; each chunk of replications has its own child stream

        Returns:
            RejectionRate: Counted rejections over replications
        """
        cfg = cfg or self.default_config()
        replications = int(self.setting('monte_carlo_replications', replications))
        seed = int(self.setting('monte_carlo_seed', seed))
        if replications < 1:
            raise InvalidConfig(f"replications must be positive, got {replications}")
        sizes = np.broadcast_to(np.asarray(n_per_branch, dtype=np.int64), (3,))
        if (sizes < 1).any():
            raise InvalidConfig(f"branch sizes must be positive, got {sizes.tolist()}")

        probabilities = np.array(triple.as_tuple())
        chunks = math.ceil(replications / CHUNK_SIZE)
        rejections = 0
        for index, rng in enumerate(spawn_rngs(seed, chunks)):
            size = min(CHUNK_SIZE, replications - index * CHUNK_SIZE)
            counts = rng.binomial(sizes, probabilities, size=(size, 3))
            delta, _, se, _ = _z_statistics(counts, sizes, cfg.confidence)
            _, p_value = _one_sided_p(delta, se)
            rejections += int(np.count_nonzero((p_value < cfg.alpha) & (delta > 0) & (se > 0)))

        rate = rejections / replications
        logger.info(f"Rejection rate {rate:.4f} ({rejections}/{replications}) at n={sizes.tolist()}")
        return RejectionRate(rate=rate, rejections=rejections, replications=replications,
                             n_per_branch=tuple(int(n) for n in sizes), triple=triple)

    def required_sample_size(self, target_delta: float, cfg: Optional[TestConfig] = None,
                             power: float = 0.9, verify: bool = False,
                             replications: Optional[int] = None,
                             seed: Optional[int] = None) -> SampleSizePlan:
        """
        Per-branch size giving the one-sided z-test the requested power.

        n = ceil((z_{1-alpha} + z_power)^2 * sum p(1-p) / target_delta^2), at
        least 1, with p the canonical triple scaled to target_delta.

        Args:
            target_delta: True Delta to detect, in (0, 1]
            cfg: Test configuration (alpha is used)
            power: Desired rejection probability, in (0, 1)
            verify: Also estimate the achieved power by Monte Carlo

        Returns:
            SampleSizePlan: Size, flags and optional Monte Carlo power
        """
        cfg = cfg or self.default_config()
        if not isinstance(target_delta, (int, float)) or not 0 < target_delta <= 1:
            raise InvalidTarget(f"target_delta must lie in (0, 1], got {target_delta!r}")
        if not 0 < power < 1:
            raise InvalidConfig(f"power must lie in (0, 1), got {power!r}")

        triple = scaled_canonical_triple(float(target_delta))
        p = np.array(triple.as_tuple())
        variance_sum = float(np.sum(p * (1.0 - p)))
        z_total = float(stats.norm.ppf(1.0 - cfg.alpha) + stats.norm.ppf(power))
        analytic = max(z_total, 0.0) ** 2 * variance_sum / target_delta ** 2
        n = max(1, math.ceil(analytic - 1e-9))

        boundary = bool(np.any((p <= DATA_TOLERANCE) | (p >= 1.0 - DATA_TOLERANCE)))
        degenerate = z_total <= 0
        if boundary:
            logger.warning("Target triple sits on the boundary; its binomial variance vanishes")
        if degenerate:
            logger.warning(f"alpha={cfg.alpha} with power={power} needs no data; returning n=1")

        monte_carlo_power = None
        if verify:
            monte_carlo_power = self.rejection_rate(triple, n, cfg, replications, seed).rate
            if not boundary and not degenerate and abs(monte_carlo_power - power) > 0.1 * power:
                logger.warning(f"Monte Carlo power {monte_carlo_power:.3f} differs from {power} by more than 10%")

        logger.info(f"Required n per branch: {n} (analytic {analytic:.3f}, "
                    f"Delta={cond_bell_delta(triple).delta:.4f})")
        return SampleSizePlan(n_per_branch=n, analytic_n=analytic, target_delta=float(target_delta),
                              power=power, alpha=cfg.alpha, triple=triple, boundary=boundary,
                              degenerate=degenerate, monte_carlo_power=monte_carlo_power)
