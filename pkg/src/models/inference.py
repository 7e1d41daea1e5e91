"""Configuration and result types of the quantum-likeness test."""
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.models.classical import RealizabilityVerdict
from src.models.probability import ConditionalTriple
from src.models.protocol import FrequencyTriple, HomogeneityResult
from src.utils.exceptions import InvalidConfig

METHODS = ('z_test', 'chi2_fit')
VERDICTS = ('classical_consistent', 'quantum_like', 'inconclusive')


class TestConfig(BaseModel):
    """delta threshold, significance alpha, confidence p and test method."""

    __test__ = False  # not a unittest case
    model_config = ConfigDict(frozen=True)

    delta_threshold: float = 0.01
    alpha: float = 0.05
    confidence: float = 0.95
    method: str = 'z_test'

    @field_validator('delta_threshold')
    @classmethod
    def _threshold(cls, value):
        if not value >= 0:
            raise InvalidConfig(f"delta_threshold must be >= 0, got {value!r}")
        return value

    @field_validator('alpha', 'confidence')
    @classmethod
    def _unit_interval(cls, value, info):
        if not 0 < value < 1:
            raise InvalidConfig(f"{info.field_name} must lie in (0, 1), got {value!r}")
        return value

    @field_validator('method')
    @classmethod
    def _method(cls, value):
        aliases = {'z': 'z_test', 'chi2': 'chi2_fit'}
        value = aliases.get(value, value)
        if value not in METHODS:
            raise InvalidConfig(f"method must be one of {', '.join(METHODS)}, got {value!r}")
        return value


class DeltaEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    std_error: float
    boundary: bool


class TestReport(BaseModel):
    """Everything the analysis concluded, with the configuration it ran under."""

    __test__ = False
    model_config = ConfigDict(frozen=True)

    delta_hat: float
    std_error: float
    statistic: float
    p_value: float
    verdict: str
    homogeneity_pass: bool
    realizability: RealizabilityVerdict
    method: str
    lower_bound: float
    exceeds_threshold: bool
    boundary: bool
    interval_method: str
    frequencies: FrequencyTriple
    homogeneity: Optional[HomogeneityResult] = None
    fitted_triple: Optional[ConditionalTriple] = None
    config: TestConfig

    @model_validator(mode='after')
    def _verdict_rules(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value must lie in [0, 1]")
        if self.verdict == 'quantum_like' and not (
                self.p_value < self.config.alpha and self.delta_hat > 0 and self.homogeneity_pass):
            raise ValueError("quantum_like needs p < alpha, delta_hat > 0 and homogeneity")
        if self.verdict == 'classical_consistent' and not (
                self.realizability.feasible or self.p_value >= self.config.alpha):
            raise ValueError("classical_consistent needs a realizable estimate or p >= alpha")
        return self


class SampleSizePlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_per_branch: int
    analytic_n: float
    target_delta: float
    power: float
    alpha: float
    triple: ConditionalTriple
    boundary: bool
    degenerate: bool
    monte_carlo_power: Optional[float] = None


class RejectionRate(BaseModel):
    model_config = ConfigDict(frozen=True)

    rate: float
    rejections: int
    replications: int
    n_per_branch: Tuple[int, int, int]
    triple: ConditionalTriple
