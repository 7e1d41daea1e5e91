"""Domain models: exact probability, classical and quantum generators, protocol counts."""
from .probability import ConditionalTriple, JointPMF, MarginalVector, ObservableId, Outcome
from .classical import RealizabilityVerdict
from .quantum import DensityMatrix2, PlanarObservable, QubitExperiment
from .agents import ClassicalAgent, QuantumAgent, TableAgent
from .protocol import FrequencyTriple, ProtocolResult, ResponseRecord
from .inference import TestConfig, TestReport

__all__ = ['ConditionalTriple', 'JointPMF', 'MarginalVector', 'ObservableId', 'Outcome',
           'RealizabilityVerdict', 'DensityMatrix2', 'PlanarObservable', 'QubitExperiment',
           'ClassicalAgent', 'QuantumAgent', 'TableAgent', 'FrequencyTriple', 'ProtocolResult',
           'ResponseRecord', 'TestConfig', 'TestReport']
