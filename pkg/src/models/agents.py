"""
Respondent models for the splitting protocol.

Model JSON forms:
    {"kind": "classical", "pmf": {"atoms": [8 numbers]}}
    {"kind": "quantum", "experiment": {"theta_a": 120, "theta_b": 0, "theta_c": 60, "state": "mixed"}}
    {"kind": "table", "triple": {...}, "marginals": {"p_plus": [0.5, 0.5, 0.5]}}
"""
import logging
from abc import ABC, abstractmethod
from typing import Annotated, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from src.models.classical import latent_indices
from src.models.probability import (OUTCOME_TABLE, ConditionalTriple, JointPMF, MarginalVector,
                                    ObservableId, Outcome, bayes_conditional, conditionals_from_joint,
                                    marginal, marginals)
from src.models.quantum import (QubitExperiment, exact_conditional_triple, experiment_marginals,
                                first_answer_probability, sequential_conditional)
from src.utils.exceptions import AsymmetricMarginals, SchemaViolation

logger = logging.getLogger(__name__)

# Question asked second, keyed by (first question, first answer); None = no second question.
SECOND_QUESTION = {
    (ObservableId.B, Outcome.PLUS): ObservableId.A,
    (ObservableId.B, Outcome.MINUS): ObservableId.C,
    (ObservableId.C, Outcome.PLUS): ObservableId.A,
    (ObservableId.C, Outcome.MINUS): None,
}


def second_question_for(first: ObservableId, answer: Outcome) -> Optional[ObservableId]:
    try:
        return SECOND_QUESTION[(first, Outcome.parse(answer))]
    except KeyError:
        raise SchemaViolation(f"question {first.value} is never asked first") from None


class Agent(BaseModel, ABC):
    """Respondent model; subclasses supply the exact answer probabilities."""

    model_config = ConfigDict(frozen=True)

    @abstractmethod
    def exact_triple(self) -> ConditionalTriple:
        ...

    @abstractmethod
    def exact_marginals(self) -> MarginalVector:
        ...

    @abstractmethod
    def first_probability(self, first: ObservableId) -> float:
        ...

    @abstractmethod
    def second_probability(self, first: ObservableId, answer: Outcome) -> float:
        ...

    def answer_branch(self, first: ObservableId, uniforms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Answers of one branch's subjects.

        Args:
            first: question asked first in this branch (B for U, C for V)
            uniforms: one row of three uniforms per subject

        Returns:
            (first answers, second answers) as ±1 arrays; 0 marks "not asked"
        """
        first_answers = np.where(uniforms[:, 1] < self.first_probability(first), 1, -1)
        second_answers = np.zeros(len(uniforms), dtype=int)
        for answer in (Outcome.PLUS, Outcome.MINUS):
            selected = first_answers == int(answer)
            if second_question_for(first, answer) is None or not selected.any():
                continue
            p_plus = self.second_probability(first, answer)
            second_answers[selected] = np.where(uniforms[selected, 2] < p_plus, 1, -1)
        return first_answers, second_answers


class ClassicalAgent(Agent):
    """Answers read off a latent (a, b, c) triple drawn once per subject."""

    kind: Literal['classical'] = 'classical'
    pmf: JointPMF

    @model_validator(mode='after')
    def _homogeneous(self):
        vector = marginals(self.pmf)
        if not vector.symmetric:
            raise AsymmetricMarginals(f"classical agent pmf has marginals {vector.p_plus}, not all 1/2")
        return self

    def exact_triple(self) -> ConditionalTriple:
        return conditionals_from_joint(self.pmf)

    def exact_marginals(self) -> MarginalVector:
        return marginals(self.pmf)

    def first_probability(self, first: ObservableId) -> float:
        return marginal(self.pmf, first)

    def second_probability(self, first: ObservableId, answer: Outcome) -> float:
        answer = Outcome.parse(answer)
        return bayes_conditional(self.pmf, (second_question_for(first, answer), Outcome.PLUS), (first, answer))

    def answer_branch(self, first: ObservableId, uniforms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        latent = OUTCOME_TABLE[latent_indices(self.pmf, uniforms[:, 0])]
        first_answers = latent[:, first.index].copy()
        second_answers = np.zeros(len(uniforms), dtype=int)
        for answer in (Outcome.PLUS, Outcome.MINUS):
            second = second_question_for(first, answer)
            if second is None:
                continue
            selected = first_answers == int(answer)
            second_answers[selected] = latent[selected, second.index]
        return first_answers, second_answers


class QuantumAgent(Agent):
    """Born rule for the first answer, Lüders-updated state for the second."""

    kind: Literal['quantum'] = 'quantum'
    experiment: QubitExperiment

    def exact_triple(self) -> ConditionalTriple:
        return exact_conditional_triple(self.experiment)

    def exact_marginals(self) -> MarginalVector:
        return experiment_marginals(self.experiment)

    def first_probability(self, first: ObservableId) -> float:
        return first_answer_probability(self.experiment, first)

    def second_probability(self, first: ObservableId, answer: Outcome) -> float:
        return sequential_conditional(self.experiment, first, answer, second_question_for(first, answer))

    @property
    def symmetric_marginals(self) -> bool:
        return self.exact_marginals().symmetric


class TableAgent(Agent):
    """Answers drawn from specified marginals and conditionals, realizable or not."""

    kind: Literal['table'] = 'table'
    triple: ConditionalTriple
    marginals: MarginalVector = Field(default_factory=MarginalVector.symmetric_default)

    @model_validator(mode='after')
    def _homogeneous(self):
        if not self.marginals.symmetric:
            raise AsymmetricMarginals(f"table agent marginals {self.marginals.p_plus} are not all 1/2")
        return self

    def exact_triple(self) -> ConditionalTriple:
        return self.triple

    def exact_marginals(self) -> MarginalVector:
        return self.marginals

    def first_probability(self, first: ObservableId) -> float:
        return self.marginals.of(first)

    def second_probability(self, first: ObservableId, answer: Outcome) -> float:
        answer = Outcome.parse(answer)
        if first is ObservableId.B:
            return self.triple.p_a_given_b_plus if answer is Outcome.PLUS else self.triple.p_c_given_b_minus
        return self.triple.p_a_given_c_plus


AgentModel = Annotated[Union[ClassicalAgent, QuantumAgent, TableAgent], Field(discriminator='kind')]
_AGENT_ADAPTER = TypeAdapter(AgentModel)


def load_agent(data: dict) -> Agent:
    """Validate a model JSON document into an agent."""
    return _AGENT_ADAPTER.validate_python(data)


def dump_agent(agent: Agent) -> dict:
    if isinstance(agent, QuantumAgent):
        return {'kind': 'quantum', 'experiment': agent.experiment.to_json_dict()}
    return agent.model_dump(mode='json')
