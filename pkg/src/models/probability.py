"""
Exact finite probability over three dichotomous questions a, b, c.

The sample space is the 8-point set {+1, -1}^3. Atoms are indexed
lexicographically over (a, b, c) with +1 before -1:

    0:(+,+,+) 1:(+,+,-) 2:(+,-,+) 3:(+,-,-) 4:(-,+,+) 5:(-,+,-) 6:(-,-,+) 7:(-,-,-)

All functions here are pure evaluations on immutable values.
"""
import itertools
import logging
import math
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, field_validator

from src.config.config import DATA_TOLERANCE, EXACT_TOLERANCE
from src.utils.exceptions import (AsymmetricMarginals, InvalidDistribution, InvalidOutcome,
                                  SameObservable, ZeroConditioningEvent)

logger = logging.getLogger(__name__)


class Outcome(IntEnum):
    """Answer to a dichotomous question, encoded +1 ("yes") / -1 ("no")."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "Outcome":
        """
        Strict conversion from user data.

        Accepts the integers 1 and -1 and the strings "+1" and "-1".
        Booleans, "yes"/"no" and every other encoding are rejected.
        """
        if isinstance(value, Outcome):
            return value
        if isinstance(value, bool):
            raise InvalidOutcome(f"outcome must be +1 or -1, got {value!r}")
        if isinstance(value, str):
            text = value.strip()
            if text == '+1':
                return cls.PLUS
            if text == '-1':
                return cls.MINUS
            raise InvalidOutcome(f"outcome must be encoded +1 or -1, got {value!r}")
        if isinstance(value, (int, np.integer)) and int(value) in (1, -1):
            return cls(int(value))
        raise InvalidOutcome(f"outcome must be +1 or -1, got {value!r}")

    def symbol(self) -> str:
        return '+' if self is Outcome.PLUS else '-'


class ObservableId(Enum):
    """The three questions; A < B < C fixes the atom index order."""

    A = 'A'
    B = 'B'
    C = 'C'

    @property
    def index(self) -> int:
        return _OBSERVABLE_ORDER.index(self)

    @classmethod
    def parse(cls, value) -> "ObservableId":
        if isinstance(value, ObservableId):
            return value
        try:
            return cls(str(value).strip())
        except ValueError:
            raise InvalidDistribution(f"unknown observable {value!r}; expected A, B or C") from None


_OBSERVABLE_ORDER = (ObservableId.A, ObservableId.B, ObservableId.C)

# Row i holds the (a, b, c) values of atom i.
ATOMS: Tuple[Tuple[int, int, int], ...] = tuple(itertools.product((1, -1), repeat=3))
OUTCOME_TABLE = np.array(ATOMS, dtype=int)


def atom_index(a: int, b: int, c: int) -> int:
    """Position of atom (a, b, c) in the fixed lexicographic order."""
    bits = [0 if Outcome.parse(v) is Outcome.PLUS else 1 for v in (a, b, c)]
    return 4 * bits[0] + 2 * bits[1] + bits[2]


def _clip_probability(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise InvalidDistribution(f"{name} must be finite, got {value!r}")
    if value < -DATA_TOLERANCE or value > 1.0 + DATA_TOLERANCE:
        raise InvalidDistribution(f"{name} must lie in [0, 1], got {value!r}")
    return min(max(float(value), 0.0), 1.0)


class JointPMF(BaseModel):
    """Probability mass function on the 8 atoms (a finite Kolmogorov space)."""

    model_config = ConfigDict(frozen=True)

    atoms: Tuple[float, float, float, float, float, float, float, float]

    @field_validator('atoms')
    @classmethod
    def _validate_atoms(cls, atoms):
        values = np.asarray(atoms, dtype=float)
        if not np.all(np.isfinite(values)):
            raise InvalidDistribution("atoms must be finite")
        if np.any(values < -DATA_TOLERANCE):
            raise InvalidDistribution(f"atoms must be nonnegative, got min {values.min()!r}")
        total = values.sum()
        if abs(total - 1.0) > DATA_TOLERANCE:
            raise InvalidDistribution(f"atoms must sum to 1, got {total!r}")
        # Atoms already normalized within EXACT_TOLERANCE are kept bit-for-bit.
        if np.any(values < 0.0) or abs(total - 1.0) > EXACT_TOLERANCE:
            values = np.clip(values, 0.0, None)
            values = values / values.sum()
        return tuple(float(v) for v in values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.atoms, dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "JointPMF":
        return cls(atoms=tuple(float(v) for v in values))

    @classmethod
    def uniform(cls) -> "JointPMF":
        return cls(atoms=(0.125,) * 8)

    @classmethod
    def point_mass(cls, a: int, b: int, c: int) -> "JointPMF":
        values = [0.0] * 8
        values[atom_index(a, b, c)] = 1.0
        return cls(atoms=tuple(values))

    @classmethod
    def from_mapping(cls, masses: Mapping[Tuple[int, int, int], float]) -> "JointPMF":
        """Build from {(a, b, c): mass}; unlisted atoms get zero mass."""
        values = [0.0] * 8
        for (a, b, c), mass in masses.items():
            values[atom_index(a, b, c)] += float(mass)
        return cls(atoms=tuple(values))


class ConditionalTriple(BaseModel):
    """The three conditionals of the inequality: P(a+|b+), P(c+|b-), P(a+|c+)."""

    model_config = ConfigDict(frozen=True)

    p_a_given_b_plus: float
    p_c_given_b_minus: float
    p_a_given_c_plus: float

    @field_validator('p_a_given_b_plus', 'p_c_given_b_minus', 'p_a_given_c_plus')
    @classmethod
    def _validate_probability(cls, value, info):
        return _clip_probability(value, info.field_name)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.p_a_given_b_plus, self.p_c_given_b_minus, self.p_a_given_c_plus)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "ConditionalTriple":
        x, y, z = (float(v) for v in values)
        return cls(p_a_given_b_plus=x, p_c_given_b_minus=y, p_a_given_c_plus=z)


class MarginalVector(BaseModel):
    """P(u=+1) for u = a, b, c."""

    model_config = ConfigDict(frozen=True)

    p_plus: Tuple[float, float, float]

    @field_validator('p_plus')
    @classmethod
    def _validate_entries(cls, p_plus):
        return tuple(_clip_probability(v, 'p_plus') for v in p_plus)

    @computed_field
    @property
    def symmetric(self) -> bool:
        return all(abs(p - 0.5) <= DATA_TOLERANCE for p in self.p_plus)

    def of(self, which: ObservableId) -> float:
        return self.p_plus[which.index]

    @classmethod
    def symmetric_default(cls) -> "MarginalVector":
        return cls(p_plus=(0.5, 0.5, 0.5))


class WignerCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float
    holds: bool


class BellDelta(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float
    violated: bool


Event = Tuple[ObservableId, Outcome]


def _event_mask(*events: Event) -> np.ndarray:
    mask = np.ones(8, dtype=bool)
    for which, value in events:
        mask &= OUTCOME_TABLE[:, which.index] == int(value)
    return mask


def marginal(pmf: JointPMF, which: ObservableId) -> float:
    """P(which = +1)."""
    return float(pmf.array[_event_mask((which, Outcome.PLUS))].sum())


def marginals(pmf: JointPMF) -> MarginalVector:
    return MarginalVector(p_plus=tuple(marginal(pmf, which) for which in _OBSERVABLE_ORDER))


def pair_probability(pmf: JointPMF, u: ObservableId, x: Outcome,
                     v: ObservableId, y: Outcome) -> float:
    """P(u = x, v = y) for two distinct observables."""
    if u == v:
        raise SameObservable(f"pair probability needs two distinct observables, got {u.value} twice")
    return float(pmf.array[_event_mask((u, Outcome.parse(x)), (v, Outcome.parse(y)))].sum())


def bayes_conditional(pmf: JointPMF, target: Event, given: Event) -> float:
    """P(target | given) by the Bayes formula."""
    target = (target[0], Outcome.parse(target[1]))
    given = (given[0], Outcome.parse(given[1]))
    atoms = pmf.array
    p_given = float(atoms[_event_mask(given)].sum())
    if p_given <= EXACT_TOLERANCE:
        raise ZeroConditioningEvent(
            f"P({given[0].value.lower()}={int(given[1]):+d}) = 0; conditional is undefined")
    p_joint = float(atoms[_event_mask(target, given)].sum())
    return min(max(p_joint / p_given, 0.0), 1.0)


def wigner_check(pmf: JointPMF) -> WignerCheck:
    """P(a+, b+) + P(b-, c+) >= P(a+, c+); holds for every valid pmf."""
    lhs = (pair_probability(pmf, ObservableId.A, Outcome.PLUS, ObservableId.B, Outcome.PLUS)
           + pair_probability(pmf, ObservableId.B, Outcome.MINUS, ObservableId.C, Outcome.PLUS))
    rhs = pair_probability(pmf, ObservableId.A, Outcome.PLUS, ObservableId.C, Outcome.PLUS)
    return WignerCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - EXACT_TOLERANCE)


def conditionals_from_joint(pmf: JointPMF) -> ConditionalTriple:
    a, b, c = _OBSERVABLE_ORDER
    return ConditionalTriple(
        p_a_given_b_plus=bayes_conditional(pmf, (a, Outcome.PLUS), (b, Outcome.PLUS)),
        p_c_given_b_minus=bayes_conditional(pmf, (c, Outcome.PLUS), (b, Outcome.MINUS)),
        p_a_given_c_plus=bayes_conditional(pmf, (a, Outcome.PLUS), (c, Outcome.PLUS)),
    )


def cond_bell_delta(t: ConditionalTriple) -> BellDelta:
    """
    Delta = P(a+|c+) - P(a+|b+) - P(c+|b-).

    Positive values violate the conditional-probability inequality.
    """
    delta = t.p_a_given_c_plus - t.p_a_given_b_plus - t.p_c_given_b_minus
    return BellDelta(delta=delta, violated=delta > EXACT_TOLERANCE)


def theorem2_identity_check(pmf: JointPMF) -> bool:
    """
    Under symmetric marginals every conditional equals twice the matching pair
    probability. Raises AsymmetricMarginals when the marginals are not all 1/2.

    The comparison allows EXACT_TOLERANCE plus twice the largest marginal
    deviation from 1/2: P(x|y) - 2 P(x,y) = P(x,y) (1 - 2 P(y)) / P(y), whose
    size is at most |1 - 2 P(y)|. Every pmf admitted by the symmetry check
    therefore passes, and exactly symmetric pmfs are held to EXACT_TOLERANCE.
    """
    vector = marginals(pmf)
    if not vector.symmetric:
        raise AsymmetricMarginals(f"marginals {vector.p_plus} are not all 1/2")
    tolerance = EXACT_TOLERANCE + 2.0 * max(abs(p - 0.5) for p in vector.p_plus)

    a, b, c = _OBSERVABLE_ORDER
    plus, minus = Outcome.PLUS, Outcome.MINUS
    triple = conditionals_from_joint(pmf)
    pairs = (
        (triple.p_a_given_b_plus, pair_probability(pmf, a, plus, b, plus)),
        (triple.p_c_given_b_minus, pair_probability(pmf, c, plus, b, minus)),
        (triple.p_a_given_c_plus, pair_probability(pmf, a, plus, c, plus)),
    )
    return all(abs(conditional - 2.0 * joint) <= tolerance for conditional, joint in pairs)


def relabel(pmf: JointPMF, order: Sequence[ObservableId]) -> JointPMF:
    """
    Reassign question roles: the returned pmf's a, b, c are the input's
    order[0], order[1], order[2]. Evaluating wigner_check on each of the six
    orders covers every permuted form of the inequality.
    """
    order = tuple(ObservableId.parse(o) for o in order)
    if sorted(o.index for o in order) != [0, 1, 2]:
        raise SameObservable(f"relabel order must be a permutation of A, B, C, got {order}")
    columns = [o.index for o in order]
    values = np.zeros(8)
    for source, row in enumerate(OUTCOME_TABLE):
        values[atom_index(*row[columns])] += pmf.atoms[source]
    return JointPMF.from_array(values)
