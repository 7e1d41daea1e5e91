"""
Qubit model of the three questions: spin-1/2 projections measured one after
another, with the Lüders update (project, then renormalize) in between.

Directions lie in the x-z great plane of the Bloch sphere; an observable at
angle theta measures sigma . (sin theta, 0, cos theta). Angles are degrees at
every interface and radians internally.
"""
import logging
import math
from typing import Tuple, Union

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, field_serializer, field_validator,
                      model_validator)

from src.config.config import DATA_TOLERANCE, EXACT_TOLERANCE
from src.models.probability import ConditionalTriple, MarginalVector, ObservableId, Outcome
from src.utils.exceptions import (InvalidConfig, InvalidDistribution, InvalidGridStep, SameObservable,
                                  ZeroConditioningEvent)

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _normalize_degrees(theta: float) -> float:
    if not math.isfinite(theta):
        raise InvalidDistribution(f"angle must be finite, got {theta!r}")
    theta = float(theta) % 360.0
    return 0.0 if theta >= 360.0 else theta


class PlanarObservable(BaseModel):
    """±1-valued spin projection along angle theta (degrees) in the x-z plane."""

    model_config = ConfigDict(frozen=True)

    theta: float

    @field_validator('theta')
    @classmethod
    def _normalize(cls, theta):
        return _normalize_degrees(theta)

    @property
    def radians(self) -> float:
        return math.radians(self.theta)


class DensityMatrix2(BaseModel):
    """2x2 density matrix stored as real and imaginary parts."""

    model_config = ConfigDict(frozen=True)

    real: Tuple[Tuple[float, float], Tuple[float, float]]
    imag: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))

    @model_validator(mode='after')
    def _check_state(self):
        rho = self.matrix
        if not np.allclose(rho, rho.conj().T, atol=EXACT_TOLERANCE, rtol=0.0):
            raise InvalidDistribution("density matrix must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > EXACT_TOLERANCE:
            raise InvalidDistribution(f"density matrix must have unit trace, got {np.trace(rho).real!r}")
        if np.linalg.eigvalsh(rho).min() < -EXACT_TOLERANCE:
            raise InvalidDistribution("density matrix must be positive semidefinite")
        return self

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.real, dtype=float) + 1j * np.array(self.imag, dtype=float)

    @property
    def bloch(self) -> Tuple[float, float, float]:
        rho = self.matrix
        return tuple(float(np.trace(rho @ sigma).real) for sigma in (SIGMA_X, SIGMA_Y, SIGMA_Z))

    @property
    def is_maximally_mixed(self) -> bool:
        return bool(np.allclose(self.bloch, 0.0, atol=EXACT_TOLERANCE))

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "DensityMatrix2":
        rho = np.asarray(rho, dtype=complex)
        return cls(real=tuple(map(tuple, rho.real.tolist())), imag=tuple(map(tuple, rho.imag.tolist())))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix2":
        return cls(real=((0.5, 0.0), (0.0, 0.5)))

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float) -> "DensityMatrix2":
        length = math.sqrt(x * x + y * y + z * z)
        if length > 1.0 + DATA_TOLERANCE:
            raise InvalidDistribution(f"Bloch vector must have length <= 1, got {length!r}")
        if length > 1.0:
            x, y, z = x / length, y / length, z / length
        return cls.from_matrix((IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z) / 2.0)


StateSpec = Union[str, dict, DensityMatrix2]


class QubitExperiment(BaseModel):
    """Angles (degrees) assigned to questions a, b, c plus the initial state."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    theta_a: float
    theta_b: float
    theta_c: float
    initial_state: DensityMatrix2 = Field(default_factory=DensityMatrix2.maximally_mixed, alias='state')

    @field_validator('theta_a', 'theta_b', 'theta_c')
    @classmethod
    def _normalize(cls, theta):
        return _normalize_degrees(theta)

    @field_validator('initial_state', mode='before')
    @classmethod
    def _parse_state(cls, state: StateSpec):
        if isinstance(state, str):
            if state.strip().lower() != 'mixed':
                raise InvalidDistribution(f"unknown state {state!r}; expected 'mixed' or {{'bloch': [x, y, z]}}")
            return DensityMatrix2.maximally_mixed()
        if isinstance(state, dict) and 'bloch' in state:
            x, y, z = (float(v) for v in state['bloch'])
            return DensityMatrix2.from_bloch(x, y, z)
        return state

    @field_serializer('initial_state')
    def _serialize_state(self, state: DensityMatrix2):
        if state.is_maximally_mixed:
            return 'mixed'
        return {'bloch': [round(v, 15) for v in state.bloch]}

    def observable(self, which: ObservableId) -> PlanarObservable:
        theta = {ObservableId.A: self.theta_a, ObservableId.B: self.theta_b,
                 ObservableId.C: self.theta_c}[which]
        return PlanarObservable(theta=theta)

    def rotated(self, shift: float) -> "QubitExperiment":
        """Same experiment with every direction turned by `shift` degrees."""
        return QubitExperiment(theta_a=self.theta_a + shift, theta_b=self.theta_b + shift,
                               theta_c=self.theta_c + shift, initial_state=self.initial_state)

    def to_json_dict(self) -> dict:
        return self.model_dump(mode='json', by_alias=True)


def projector(obs: PlanarObservable, outcome: Outcome) -> np.ndarray:
    """Rank-1 projector onto the eigenvector of sigma . n(theta) with eigenvalue `outcome`."""
    sign = int(Outcome.parse(outcome))
    spin = math.sin(obs.radians) * SIGMA_X + math.cos(obs.radians) * SIGMA_Z
    return (IDENTITY + sign * spin) / 2.0


def first_answer_probability(exp: QubitExperiment, which: ObservableId,
                             outcome: Outcome = Outcome.PLUS) -> float:
    """Born probability of `outcome` when `which` is the first question asked."""
    p = projector(exp.observable(which), outcome)
    return float(np.trace(p @ exp.initial_state.matrix).real)


def experiment_marginals(exp: QubitExperiment) -> MarginalVector:
    """First-question marginals; symmetric exactly when the homogeneity premise holds."""
    return MarginalVector(p_plus=tuple(first_answer_probability(exp, which)
                                       for which in (ObservableId.A, ObservableId.B, ObservableId.C)))


def sequential_conditional(exp: QubitExperiment, first: ObservableId, first_outcome: Outcome,
                           second: ObservableId, second_outcome: Outcome = Outcome.PLUS) -> float:
    """
    P(second = second_outcome | first = first_outcome) for questions asked in sequence.

    Tr(P2 P1 rho P1) / Tr(P1 rho): measure, keep the post-selected branch,
    update the state, measure again.
    """
    if first == second:
        raise SameObservable(f"sequential measurement needs two distinct questions, got {first.value} twice")
    p_first = projector(exp.observable(first), first_outcome)
    p_second = projector(exp.observable(second), second_outcome)
    rho = exp.initial_state.matrix

    branch = float(np.trace(p_first @ rho).real)
    if branch <= EXACT_TOLERANCE:
        raise ZeroConditioningEvent(
            f"first answer {first.value.lower()}={int(first_outcome):+d} has probability 0")
    updated = p_first @ rho @ p_first / branch
    value = float(np.trace(p_second @ updated).real)
    return min(max(value, 0.0), 1.0)


def exact_conditional_triple(exp: QubitExperiment) -> ConditionalTriple:
    a, b, c = ObservableId.A, ObservableId.B, ObservableId.C
    if not experiment_marginals(exp).symmetric:
        logger.warning("Initial state gives asymmetric marginals; the conditional inequality's premise fails")
    return ConditionalTriple(
        p_a_given_b_plus=sequential_conditional(exp, b, Outcome.PLUS, a),
        p_c_given_b_minus=sequential_conditional(exp, b, Outcome.MINUS, c),
        p_a_given_c_plus=sequential_conditional(exp, c, Outcome.PLUS, a),
    )


class ViolationSearchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta_a: PlanarObservable
    theta_b: PlanarObservable
    theta_c: PlanarObservable
    delta_max: float
    grid_delta_max: float
    grid_step: float
    refine_iterations: int

    def experiment(self) -> QubitExperiment:
        return QubitExperiment(theta_a=self.theta_a.theta, theta_b=self.theta_b.theta,
                               theta_c=self.theta_c.theta)


def _projector_stack(theta: np.ndarray, sign: int) -> np.ndarray:
    """Real projectors for an array of angles (radians), shape (..., 2, 2)."""
    s, c = np.sin(theta), np.cos(theta)
    out = np.empty(theta.shape + (2, 2))
    out[..., 0, 0] = (1 + sign * c) / 2
    out[..., 0, 1] = sign * s / 2
    out[..., 1, 0] = sign * s / 2
    out[..., 1, 1] = (1 - sign * c) / 2
    return out


def _conditional_stack(first: np.ndarray, sign: int, second: np.ndarray) -> np.ndarray:
    """Trace-formula conditionals for the maximally mixed state, vectorized."""
    rho = np.eye(2) / 2.0
    p1 = _projector_stack(first, sign)
    p2 = _projector_stack(second, +1)
    numerator = np.trace(p2 @ p1 @ rho @ p1, axis1=-2, axis2=-1)
    denominator = np.trace(p1 @ rho, axis1=-2, axis2=-1)
    return numerator / denominator


def _delta_surface(offset_a: np.ndarray, offset_c: np.ndarray) -> np.ndarray:
    """Delta with theta_b = 0 and the given a, c offsets (degrees)."""
    ta, tc = np.radians(offset_a), np.radians(offset_c)
    tb = np.zeros_like(ta)
    return (_conditional_stack(tc, +1, ta)
            - _conditional_stack(tb, +1, ta)
            - _conditional_stack(tb, -1, tc))


def _delta_at(offset_a: float, offset_c: float) -> float:
    return float(_delta_surface(np.array(offset_a, dtype=float), np.array(offset_c, dtype=float)))


def maximize_violation(grid_step: float, refine_iterations: int) -> ViolationSearchResult:
    """
    Largest Delta over planar directions with the maximally mixed state.

    Grid search over (theta_a - theta_b, theta_c - theta_b), ties going to the
    lexicographically smallest pair, then coordinate descent with step halving
    from the best cell.
    """
    if not (isinstance(grid_step, (int, float)) and 0 < grid_step <= 30):
        raise InvalidGridStep(f"grid_step must lie in (0, 30] degrees, got {grid_step!r}")
    integral = isinstance(refine_iterations, (int, np.integer)) and not isinstance(refine_iterations, bool)
    if not integral or refine_iterations < 0:
        raise InvalidConfig(f"refine_iterations must be a non-negative integer, got {refine_iterations!r}")

    axis = np.arange(0.0, 360.0, float(grid_step))
    offset_a, offset_c = np.meshgrid(axis, axis, indexing='ij')
    surface = _delta_surface(offset_a, offset_c)
    grid_best = float(surface.max())
    # argwhere walks row-major, i.e. lexicographic in (offset_a, offset_c)
    first_hit = np.argwhere(surface >= grid_best - EXACT_TOLERANCE)[0]
    point = [float(axis[first_hit[0]]), float(axis[first_hit[1]])]
    logger.debug(f"Grid ({axis.size}x{axis.size}) best {grid_best:.12f} at {point}")

    best = grid_best
    step = [grid_step / 2.0, grid_step / 2.0]
    for _ in range(refine_iterations):
        improved = False
        for i in range(2):
            for direction in (+1.0, -1.0):
                trial = list(point)
                trial[i] += direction * step[i]
                value = _delta_at(*trial)
                if value > best:
                    best, point, improved = value, trial, True
                    break
        if not improved:
            step = [s / 2.0 for s in step]

    logger.info(f"Maximal violation {best:.12f} at a-b={point[0] % 360:.6f}, c-b={point[1] % 360:.6f}")
    return ViolationSearchResult(
        theta_a=PlanarObservable(theta=point[0]),
        theta_b=PlanarObservable(theta=0.0),
        theta_c=PlanarObservable(theta=point[1]),
        delta_max=best,
        grid_delta_max=grid_best,
        grid_step=float(grid_step),
        refine_iterations=refine_iterations,
    )


def canonical_experiment() -> QubitExperiment:
    """Directions a=120, b=0, c=60 degrees on the maximally mixed state."""
    return QubitExperiment(theta_a=120.0, theta_b=0.0, theta_c=60.0)
