"""
Protocol service: simulates the ensemble-splitting experiment and checks
its homogeneity premise.
"""
import logging
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .base_service import BaseService
from src.data_preparation.response_processor import ResponseProcessor
from src.models.agents import Agent
from src.models.probability import ObservableId
from src.models.protocol import FrequencyTriple, HomogeneityResult, ProtocolResult
from src.utils.exceptions import InvalidConfig, OddPopulation, ZeroBranch
from src.utils.rng import spawn_rngs, subject_uniforms

logger = logging.getLogger(__name__)


class ProtocolService(BaseService):
    """Service for running and checking the splitting protocol."""

    def __init__(self, *args, **kwargs):
        """Initialize the protocol service."""
        super().__init__(*args, **kwargs)
        self.processor = ResponseProcessor()

    def _simulate_arrays(self, agent: Agent, n_total: int, seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Answers of every subject, in subject index order.

        Returns:
            (branch_is_u, first_answers, second_answers); second answer 0 = not asked
        """
        if not isinstance(n_total, (int, np.integer)) or isinstance(n_total, bool):
            raise InvalidConfig(f"n_total must be an integer, got {n_total!r}")
        if n_total % 2:
            raise OddPopulation(f"n_total must be even for an equal U/V split, got {n_total}")
        if n_total < 4:
            raise InvalidConfig(f"n_total must be at least 4, got {n_total}")

        split_rng, answer_rng = spawn_rngs(seed, 2)
        # Subject i always reads row i, independent of the split.
        uniforms = subject_uniforms(answer_rng, n_total)
        order = split_rng.permutation(n_total)
        branch_is_u = np.zeros(n_total, dtype=bool)
        branch_is_u[order[: n_total // 2]] = True

        first_answers = np.zeros(n_total, dtype=int)
        second_answers = np.zeros(n_total, dtype=int)
        for in_u, question in ((True, ObservableId.B), (False, ObservableId.C)):
            members = np.flatnonzero(branch_is_u == in_u)
            first, second = agent.answer_branch(question, uniforms[members])
            first_answers[members] = first
            second_answers[members] = second
        return branch_is_u, first_answers, second_answers

    def simulate_responses(self, agent: Agent, n_total: int, seed: int) -> pd.DataFrame:
        """Per-subject response rows in the CSV schema."""
        return self.processor.build_frame(*self._simulate_arrays(agent, n_total, seed))

    def run_with_responses(self, agent: Agent, n_total: int, seed: int) -> Tuple[ProtocolResult, pd.DataFrame]:
        """One simulation yielding both the count table and its per-subject rows."""
        arrays = self._simulate_arrays(agent, n_total, seed)
        return self._tally(agent, arrays, n_total, seed), self.processor.build_frame(*arrays)

    def run_protocol(self, agent: Agent, n_total: int, seed: int) -> ProtocolResult:
        """
        Simulate one run of the experiment over n_total agents.

        Args:
            agent: Respondent model shared by the whole ensemble
            n_total: Ensemble size; even and at least 4
            seed: 64-bit seed; equal seeds give identical results

        Returns:
            ProtocolResult: The experimenter's count table
        """
        return self._tally(agent, self._simulate_arrays(agent, n_total, seed), n_total, seed)

    def _tally(self, agent: Agent, arrays: Tuple[np.ndarray, np.ndarray, np.ndarray],
               n_total: int, seed: int) -> ProtocolResult:
        branch_is_u, first, second = arrays
        u_plus = branch_is_u & (first == 1)
        u_minus = branch_is_u & (first == -1)
        v_plus = ~branch_is_u & (first == 1)
        result = ProtocolResult(
            n_total=n_total,
            n_U=int(branch_is_u.sum()),
            n_V=int((~branch_is_u).sum()),
            U_b_plus=int(u_plus.sum()),
            U_b_minus=int(u_minus.sum()),
            V_c_plus=int(v_plus.sum()),
            V_c_minus=int((~branch_is_u & (first == -1)).sum()),
            a_plus_given_b_plus=int((u_plus & (second == 1)).sum()),
            c_plus_given_b_minus=int((u_minus & (second == 1)).sum()),
            a_plus_given_c_plus=int((v_plus & (second == 1)).sum()),
            seed=seed,
        )
        empty = result.empty_branches()
        if empty:
            raise ZeroBranch(f"simulation left branch {', '.join(empty)} empty", branch=empty[0],
                             advised_n_total=2 * n_total)
        logger.info(f"Simulated {agent.kind} ensemble of {n_total} (seed {seed}): "
                    f"n1={result.n1}, n2={result.n2}, n3={result.n3}")
        return result

    def frequencies(self, r: ProtocolResult) -> FrequencyTriple:
        return r.frequencies()

    def homogeneity_check(self, r: ProtocolResult, alpha: Optional[float] = None) -> HomogeneityResult:
        """
        Pearson chi-square of the first answers against 50/50.

        One degree of freedom per branch (b asked in U, c asked in V), summed
        into a 2-dof statistic; passes below the (1 - alpha) quantile.
        """
        alpha = self.setting('alpha', alpha)
        if not 0 < alpha < 1:
            raise InvalidConfig(f"alpha must lie in (0, 1), got {alpha!r}")
        if r.n_U == 0 or r.n_V == 0:
            raise ZeroBranch("homogeneity needs subjects in both U and V", branch='U' if r.n_U == 0 else 'V')

        chi2_u = (2 * r.U_b_plus - r.n_U) ** 2 / r.n_U
        chi2_v = (2 * r.V_c_plus - r.n_V) ** 2 / r.n_V
        combined = chi2_u + chi2_v
        critical = float(stats.chi2.ppf(1.0 - alpha, 2))
        passed = combined < critical
        if not passed:
            logger.warning(f"Homogeneity rejected: chi2={combined:.3f} >= {critical:.3f}")
        return HomogeneityResult(chi2=combined, chi2_u=chi2_u, chi2_v=chi2_v, dof=2,
                                 critical_value=critical, alpha=alpha, passed=passed,
                                 nu_b_plus=r.U_b_plus / r.n_U, nu_c_plus=r.V_c_plus / r.n_V)
