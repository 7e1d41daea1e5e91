"""
Count tables recorded by the splitting experiment.

S is split into equal halves U and V. U is asked b, V is asked c. Then
U_b+ and V_c+ are asked a, U_b- is asked c, and V_c- is asked nothing more.
"""
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, computed_field, model_validator

from src.models.agents import second_question_for
from src.models.probability import ConditionalTriple, ObservableId, Outcome
from src.utils.exceptions import SchemaViolation, ZeroBranch

CSV_COLUMNS = ['subject_id', 'branch', 'first_question', 'first_answer',
               'second_question', 'second_answer']

FIRST_QUESTION = {'U': ObservableId.B, 'V': ObservableId.C}

BRANCH_LABELS = ('a|b=+1 (U_b+)', 'c|b=-1 (U_b-)', 'a|c=+1 (V_c+)')


class ResponseRecord(BaseModel):
    """One subject's row in the response CSV."""

    model_config = ConfigDict(frozen=True)

    subject_id: str
    branch: str
    first_question: ObservableId
    first_answer: Outcome
    second_question: Optional[ObservableId] = None
    second_answer: Optional[Outcome] = None

    @model_validator(mode='after')
    def _protocol_shape(self):
        if self.branch not in FIRST_QUESTION:
            raise SchemaViolation(f"branch must be U or V, got {self.branch!r}")
        expected_first = FIRST_QUESTION[self.branch]
        if self.first_question is not expected_first:
            raise SchemaViolation(f"branch {self.branch} must be asked {expected_first.value} first, "
                                  f"got {self.first_question.value}")
        if (self.second_question is None) != (self.second_answer is None):
            raise SchemaViolation("second_question and second_answer must be both present or both empty")
        expected_second = second_question_for(self.first_question, self.first_answer)
        if self.second_question is not expected_second:
            expected = expected_second.value if expected_second else 'nothing'
            got = self.second_question.value if self.second_question else 'nothing'
            raise SchemaViolation(f"branch {self.branch} with first answer {int(self.first_answer):+d} "
                                  f"must be asked {expected} second, got {got}")
        return self


class FrequencyTriple(BaseModel):
    """Observed frequencies of the three post-selected branches, counts kept."""

    model_config = ConfigDict(frozen=True)

    numerators: Tuple[int, int, int]
    denominators: Tuple[int, int, int]

    @model_validator(mode='after')
    def _check_counts(self):
        for label, k, n in zip(BRANCH_LABELS, self.numerators, self.denominators):
            if n <= 0:
                raise ZeroBranch(f"branch {label} is empty", branch=label)
            if not 0 <= k <= n:
                raise SchemaViolation(f"branch {label}: count {k} outside [0, {n}]")
        return self

    @classmethod
    def from_counts(cls, numerators, denominators) -> "FrequencyTriple":
        return cls(numerators=tuple(int(k) for k in numerators),
                   denominators=tuple(int(n) for n in denominators))

    @computed_field
    @property
    def nu_a_given_b_plus(self) -> float:
        return self.numerators[0] / self.denominators[0]

    @computed_field
    @property
    def nu_c_given_b_minus(self) -> float:
        return self.numerators[1] / self.denominators[1]

    @computed_field
    @property
    def nu_a_given_c_plus(self) -> float:
        return self.numerators[2] / self.denominators[2]

    def values(self) -> Tuple[float, float, float]:
        return (self.nu_a_given_b_plus, self.nu_c_given_b_minus, self.nu_a_given_c_plus)

    def as_triple(self) -> ConditionalTriple:
        return ConditionalTriple.from_values(self.values())


class ProtocolResult(BaseModel):
    """Raw counts of one run of the splitting experiment."""

    model_config = ConfigDict(frozen=True)

    n_total: int
    n_U: int
    n_V: int
    U_b_plus: int
    U_b_minus: int
    V_c_plus: int
    V_c_minus: int
    a_plus_given_b_plus: int
    c_plus_given_b_minus: int
    a_plus_given_c_plus: int
    seed: Optional[int] = None

    @model_validator(mode='after')
    def _bookkeeping(self):
        counts = self.model_dump(exclude={'seed'})
        if any(value < 0 for value in counts.values()):
            raise SchemaViolation("counts must be nonnegative")
        if self.n_U + self.n_V != self.n_total:
            raise SchemaViolation(f"n_U + n_V = {self.n_U + self.n_V} differs from n_total = {self.n_total}")
        if self.U_b_plus + self.U_b_minus != self.n_U:
            raise SchemaViolation("U_b_plus + U_b_minus must equal n_U")
        if self.V_c_plus + self.V_c_minus != self.n_V:
            raise SchemaViolation("V_c_plus + V_c_minus must equal n_V")
        for count, denominator, name in ((self.a_plus_given_b_plus, self.U_b_plus, 'a_plus_given_b_plus'),
                                         (self.c_plus_given_b_minus, self.U_b_minus, 'c_plus_given_b_minus'),
                                         (self.a_plus_given_c_plus, self.V_c_plus, 'a_plus_given_c_plus')):
            if count > denominator:
                raise SchemaViolation(f"{name} = {count} exceeds its branch size {denominator}")
        return self

    @property
    def n1(self) -> int:
        return self.U_b_plus

    @property
    def n2(self) -> int:
        return self.U_b_minus

    @property
    def n3(self) -> int:
        return self.V_c_plus

    def empty_branches(self) -> Tuple[str, ...]:
        return tuple(label for label, n in zip(BRANCH_LABELS, (self.n1, self.n2, self.n3)) if n == 0)

    def frequencies(self) -> FrequencyTriple:
        """nu(a+|b+), nu(c+|b-), nu(a+|c+) with their denominators; ZeroBranch if any is empty."""
        empty = self.empty_branches()
        if empty:
            raise ZeroBranch(f"empty branch {', '.join(empty)}", branch=empty[0],
                             advised_n_total=max(4, 2 * self.n_total))
        return FrequencyTriple.from_counts(
            (self.a_plus_given_b_plus, self.c_plus_given_b_minus, self.a_plus_given_c_plus),
            (self.n1, self.n2, self.n3),
        )


class HomogeneityResult(BaseModel):
    """Pearson chi-square of first answers against 50/50 in U and V."""

    model_config = ConfigDict(frozen=True)

    chi2: float
    chi2_u: float
    chi2_v: float
    dof: int
    critical_value: float
    alpha: float
    passed: bool
    nu_b_plus: float
    nu_c_plus: float
