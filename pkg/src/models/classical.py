"""
Classical (Kolmogorov) models of the three questions.

A conditional triple is *realizable* when some joint pmf with all three
marginals equal to 1/2 reproduces it. Under symmetric marginals each measured
conditional is twice a pair probability, so realizability is a linear
feasibility problem in the 8 atoms:

    sum p = 1,  P(a+) = P(b+) = P(c+) = 1/2,
    P(a+,b+) = x/2,  P(c+,b-) = y/2,  P(a+,c+) = z/2,  p >= 0.

The seven equations have full rank, so the solutions form a line
p(theta) = p_particular + theta * n (n spans the null space; it moves only
the unmeasured third-order correlation). Nonnegativity cuts that line to a
segment; an empty segment means the triple is quantum-like.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from src.config.config import DATA_TOLERANCE, EXACT_TOLERANCE
from src.models.probability import (OUTCOME_TABLE, ConditionalTriple, JointPMF, Outcome,
                                    cond_bell_delta, conditionals_from_joint, marginals)
from src.utils.rng import make_rng

logger = logging.getLogger(__name__)


class RealizabilityVerdict(BaseModel):
    """Outcome of the realizability decision; quantum-like iff not feasible."""

    model_config = ConfigDict(frozen=True)

    feasible: bool
    witness: Optional[JointPMF] = None
    max_violation: float = 0.0

    @model_validator(mode='after')
    def _check_certificate(self):
        if self.feasible and self.witness is None:
            raise ValueError("a feasible verdict must carry a witness")
        if not self.feasible and (self.witness is not None or self.max_violation <= 0.0):
            raise ValueError("an infeasible verdict has no witness and a positive max_violation")
        return self

    @property
    def quantum_like(self) -> bool:
        return not self.feasible


def _constraint_system() -> np.ndarray:
    a_plus = OUTCOME_TABLE[:, 0] == 1
    b_plus = OUTCOME_TABLE[:, 1] == 1
    c_plus = OUTCOME_TABLE[:, 2] == 1
    rows = [
        np.ones(8, dtype=bool),
        a_plus,
        b_plus,
        c_plus,
        a_plus & b_plus,
        c_plus & ~b_plus,
        a_plus & c_plus,
    ]
    return np.array(rows, dtype=float)


_EQUALITIES = _constraint_system()
_PSEUDO_INVERSE = np.linalg.pinv(_EQUALITIES)
_NULL_BASIS = null_space(_EQUALITIES)[:, 0]
# Orient the basis deterministically: first nonzero entry positive.
_NULL_BASIS = _NULL_BASIS * np.sign(_NULL_BASIS[np.flatnonzero(np.abs(_NULL_BASIS) > 1e-12)[0]])


def _right_hand_side(values: Sequence[float]) -> np.ndarray:
    x, y, z = values
    return np.array([1.0, 0.5, 0.5, 0.5, x / 2.0, y / 2.0, z / 2.0])


def _feasible_segment(particular: np.ndarray) -> Tuple[float, float]:
    """Range of theta keeping particular + theta * n nonnegative (lo > hi if empty)."""
    lo, hi = -np.inf, np.inf
    for base, step in zip(particular, _NULL_BASIS):
        if step > EXACT_TOLERANCE:
            lo = max(lo, -base / step)
        elif step < -EXACT_TOLERANCE:
            hi = min(hi, -base / step)
        elif base < -EXACT_TOLERANCE:
            return np.inf, -np.inf
    return lo, hi


def _relaxation_needed(rhs: np.ndarray) -> float:
    """Smallest uniform slack s with |A p - rhs| <= s, p >= 0 feasible."""
    n_rows, n_atoms = _EQUALITIES.shape
    cost = np.zeros(n_atoms + 1)
    cost[-1] = 1.0
    slack = -np.ones((n_rows, 1))
    a_ub = np.vstack([np.hstack([_EQUALITIES, slack]), np.hstack([-_EQUALITIES, slack])])
    b_ub = np.concatenate([rhs, -rhs])
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * (n_atoms + 1),
                     method='highs')
    if not result.success:
        logger.warning(f"Relaxation LP did not converge: {result.message}")
        return float('nan')
    return float(result.fun)


def realize(t: ConditionalTriple) -> RealizabilityVerdict:
    """
    Decide whether a symmetric-marginal joint pmf reproduces the triple.

    Returns the centre of the feasible segment as witness when one exists,
    otherwise the smallest uniform relaxation of the equalities that would
    admit a nonnegative solution.
    """
    rhs = _right_hand_side(t.as_tuple())
    particular = _PSEUDO_INVERSE @ rhs
    lo, hi = _feasible_segment(particular)

    if lo <= hi + EXACT_TOLERANCE:
        theta = 0.5 * (lo + hi) if lo <= hi else lo
        atoms = particular + theta * _NULL_BASIS
        witness = JointPMF.from_array(np.clip(atoms, 0.0, None))
        logger.debug(f"Triple {t.as_tuple()} realizable; segment [{lo:.6g}, {hi:.6g}]")
        return RealizabilityVerdict(feasible=True, witness=witness, max_violation=0.0)

    violation = _relaxation_needed(rhs)
    if not violation > 0.0:
        # round-off can leave the LP optimum at zero for barely infeasible input
        violation = float(lo - hi)
    logger.debug(f"Triple {t.as_tuple()} not realizable; relaxation {violation:.6g}")
    return RealizabilityVerdict(feasible=False, witness=None, max_violation=violation)


def random_symmetric_joint(seed: int) -> JointPMF:
    """
    Random pmf with all marginals 1/2.

    A Dirichlet draw over the four antipodal orbits {w, -w} is split equally
    between each orbit's two atoms, which forces every marginal to 1/2.
    """
    rng = make_rng(seed)
    orbit_mass = rng.dirichlet(np.ones(4))
    atoms = np.empty(8)
    # Atom 7 - i is the antipode of atom i.
    atoms[:4] = orbit_mass / 2.0
    atoms[7:3:-1] = orbit_mass / 2.0
    return JointPMF.from_array(atoms)


def random_joint(rng: np.random.Generator, boundary: bool = False) -> JointPMF:
    """
    Random pmf without marginal constraints.

    With boundary=True the draw is supported on a random subset of the atoms
    (a single atom about a third of the time), exercising faces of the simplex.
    """
    if not boundary:
        return JointPMF.from_array(rng.dirichlet(np.ones(8)))
    support_size = int(rng.integers(1, 4))
    support = rng.choice(8, size=support_size, replace=False)
    atoms = np.zeros(8)
    atoms[support] = rng.dirichlet(np.ones(support_size))
    return JointPMF.from_array(atoms)


def latent_indices(pmf: JointPMF, uniforms: np.ndarray) -> np.ndarray:
    """Atom indices drawn by inverse CDF from uniforms in [0, 1)."""
    atoms = pmf.array
    cumulative = np.cumsum(atoms)
    indices = np.searchsorted(cumulative, uniforms, side='right')
    # u beyond a cumulative total slightly below 1 falls back to the last atom with mass
    return np.minimum(indices, int(np.flatnonzero(atoms > 0)[-1]))


def sample_latent_triple(pmf: JointPMF, rng_stream: np.random.Generator) -> Tuple[Outcome, Outcome, Outcome]:
    """Pre-existing answers (a, b, c) of one classical agent."""
    index = int(latent_indices(pmf, np.array([rng_stream.random()]))[0])
    return tuple(Outcome(int(v)) for v in OUTCOME_TABLE[index])


def _pearson(counts: np.ndarray, totals: np.ndarray, q: np.ndarray) -> float:
    q = np.clip(q, 1e-9, 1.0 - 1e-9)
    expected = totals * q
    return float(np.sum((counts - expected) ** 2 / (expected * (1.0 - q))))


# Uniform pmf: strictly inside the realizable set.
_INTERIOR = np.array([0.5, 0.5, 0.5])


def _segment_nonempty(values: np.ndarray) -> bool:
    lo, hi = _feasible_segment(_PSEUDO_INVERSE @ _right_hand_side(values))
    return lo <= hi + EXACT_TOLERANCE


def _pull_inside(q: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Last realizable point on the chord from the interior towards q (the set is convex)."""
    q = np.clip(q, 0.0, 1.0)
    if _segment_nonempty(q):
        return q
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _segment_nonempty(_INTERIOR + mid * (q - _INTERIOR)):
            lo = mid
        else:
            hi = mid
    return _INTERIOR + lo * (q - _INTERIOR)


def closest_realizable(counts: Sequence[int], totals: Sequence[int]) -> Tuple[ConditionalTriple, float]:
    """
    Minimum Pearson chi-square projection of observed branch counts onto the
    realizable set.

    Args:
        counts: "+1" answers in the three branches (a|b+, c|b-, a|c+)
        totals: branch sizes n1, n2, n3

    Returns:
        (fitted triple, minimized statistic); the statistic is exactly 0 when
        the observed frequencies are themselves realizable, and the fitted
        triple is always realizable
    """
    counts = np.asarray(counts, dtype=float)
    totals = np.asarray(totals, dtype=float)
    observed = ConditionalTriple.from_values(counts / totals)
    if realize(observed).feasible:
        return observed, 0.0

    # atoms(q, theta) = P (b0 + B q) + theta n is linear in v = (q, theta)
    rhs_const = _right_hand_side((0.0, 0.0, 0.0))
    rhs_slope = np.zeros((7, 3))
    rhs_slope[4:, :] = 0.5 * np.eye(3)
    g_matrix = np.hstack([_PSEUDO_INVERSE @ rhs_slope, _NULL_BASIS[:, None]])
    h_vector = _PSEUDO_INVERSE @ rhs_const

    def fit_from(start_q: np.ndarray):
        start = realize(ConditionalTriple.from_values(start_q))
        particular = _PSEUDO_INVERSE @ _right_hand_side(start_q)
        start_theta = float(_NULL_BASIS @ (start.witness.array - particular))
        return minimize(
            lambda v: _pearson(counts, totals, v[:3]),
            x0=np.append(start_q, start_theta),
            method='SLSQP',
            bounds=[(1e-6, 1 - 1e-6)] * 3 + [(None, None)],
            constraints=[{'type': 'ineq', 'fun': lambda v: g_matrix @ v + h_vector,
                          'jac': lambda v: g_matrix}],
            options={'maxiter': 500, 'ftol': 1e-12},
        )

    # First start: the observed point pushed back onto the Delta = 0 plane.
    excess = max(cond_bell_delta(observed).delta, 0.0)
    starts = [np.clip(np.array(observed.as_tuple()) + np.array([1, 1, -1]) * excess / 3.0, 1e-6, 1 - 1e-6)]
    starts = [q for q in starts if _segment_nonempty(q)]
    starts.append(_INTERIOR)

    best_q, best_stat, converged = None, np.inf, False
    for start_q in starts:
        result = fit_from(start_q)
        if not result.success:
            logger.debug(f"Chi-square fit from {start_q.tolist()} stopped: {result.message}")
        q = _pull_inside(result.x[:3])
        statistic = _pearson(counts, totals, q)
        if statistic < best_stat:
            best_q, best_stat = q, statistic
        converged = converged or bool(result.success)
        if result.success:
            break
    if not converged:
        logger.warning("Minimum chi-square fit did not converge from any start; using the best realizable point")
    return ConditionalTriple.from_values(best_q), best_stat


def verify_witness(t: ConditionalTriple, verdict: RealizabilityVerdict) -> bool:
    """True when the witness reproduces the triple and symmetric marginals within data tolerance."""
    if not verdict.feasible:
        return False
    reproduced = conditionals_from_joint(verdict.witness)
    close = np.allclose(reproduced.as_tuple(), t.as_tuple(), atol=DATA_TOLERANCE, rtol=0.0)
    return close and marginals(verdict.witness).symmetric
