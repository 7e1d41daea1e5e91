"""
Unit tests for exact finite probability over three questions
"""
import sys
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

# Add project root to Python path
project_root = str(Path(__file__).resolve().parent.parent)
if project_root not in sys.path:
    sys.path.append(project_root)

from src.models.classical import random_joint, random_symmetric_joint  # noqa: E402
from src.models.probability import (ATOMS, ConditionalTriple, JointPMF, MarginalVector,  # noqa: E402
                                    ObservableId, Outcome, atom_index, bayes_conditional,
                                    cond_bell_delta, conditionals_from_joint, marginal, marginals,
                                    pair_probability, relabel, theorem2_identity_check, wigner_check)
from src.utils.exceptions import (AsymmetricMarginals, InvalidDistribution, InvalidOutcome,  # noqa: E402
                                  SameObservable, ZeroConditioningEvent)

A, B, C = ObservableId.A, ObservableId.B, ObservableId.C
PLUS, MINUS = Outcome.PLUS, Outcome.MINUS


def correlated():
    return JointPMF.from_mapping({(1, 1, 1): 0.5, (-1, -1, -1): 0.5})


def anti_b():
    return JointPMF.from_mapping({(1, -1, -1): 0.5, (-1, 1, 1): 0.5})


class TestOutcome(unittest.TestCase):
    """Test cases for the ±1 answer encoding."""

    def test_accepts_plus_minus_one(self):
        self.assertIs(Outcome.parse(1), PLUS)
        self.assertIs(Outcome.parse('-1'), MINUS)
        self.assertIs(Outcome.parse('+1'), PLUS)

    def test_rejects_other_encodings(self):
        for value in (0, 2, 'yes', 'no', '', '1', '+', True, 0.5):
            with self.assertRaises(InvalidOutcome):
                Outcome.parse(value)

    def test_atom_order(self):
        self.assertEqual(ATOMS[0], (1, 1, 1))
        self.assertEqual(ATOMS[7], (-1, -1, -1))
        self.assertEqual(atom_index(1, -1, 1), 2)
        self.assertEqual(atom_index(-1, 1, 1), 4)

    def test_observable_order(self):
        self.assertEqual([o.index for o in (A, B, C)], [0, 1, 2])
        self.assertIs(ObservableId.parse(' B '), B)
        for value in ('b', 'D', ''):
            with self.assertRaises(InvalidDistribution):
                ObservableId.parse(value)


class TestJointPMF(unittest.TestCase):
    """Test cases for JointPMF validation."""

    def test_rejects_negative_atom(self):
        with self.assertRaises(InvalidDistribution):
            JointPMF.from_array([-0.1, 0.3, 0.1, 0.1, 0.2, 0.2, 0.1, 0.1])

    def test_rejects_bad_sum(self):
        with self.assertRaises(InvalidDistribution):
            JointPMF.from_array([0.2] * 8)

    def test_rejects_nan(self):
        with self.assertRaises(InvalidDistribution):
            JointPMF.from_array([float('nan')] + [1 / 7] * 7)

    def test_renormalizes_within_data_tolerance(self):
        pmf = JointPMF.from_array([0.125 + 1e-10] + [0.125] * 7)
        self.assertAlmostEqual(sum(pmf.atoms), 1.0, delta=1e-12)

    def test_json_form(self):
        pmf = JointPMF.uniform()
        self.assertEqual(pmf.model_dump(mode='json'), {'atoms': [0.125] * 8})
        self.assertEqual(JointPMF.model_validate({'atoms': [0.125] * 8}), pmf)


class TestMarginals(unittest.TestCase):
    """Test cases for marginal and pair probabilities."""

    def test_marginal_examples(self):
        self.assertEqual(marginal(JointPMF.uniform(), A), 0.5)
        self.assertEqual(marginal(JointPMF.point_mass(1, 1, 1), B), 1.0)
        self.assertEqual(marginal(correlated(), C), 0.5)

    def test_marginal_vector_symmetric_flag(self):
        self.assertTrue(marginals(JointPMF.uniform()).symmetric)
        self.assertFalse(marginals(JointPMF.point_mass(1, 1, 1)).symmetric)
        self.assertTrue(MarginalVector(p_plus=(0.5 + 1e-10, 0.5, 0.5)).symmetric)
        self.assertFalse(MarginalVector(p_plus=(0.5 + 1e-6, 0.5, 0.5)).symmetric)

    def test_pair_probability_examples(self):
        self.assertEqual(pair_probability(JointPMF.uniform(), A, PLUS, B, PLUS), 0.25)
        self.assertEqual(pair_probability(correlated(), A, PLUS, C, PLUS), 0.5)
        self.assertEqual(pair_probability(anti_b(), B, MINUS, C, PLUS), 0.0)

    def test_pair_probability_same_observable(self):
        with self.assertRaises(SameObservable):
            pair_probability(JointPMF.uniform(), A, PLUS, A, MINUS)


class TestConditionals(unittest.TestCase):
    """Test cases for Bayes conditioning and the two inequalities."""

    def test_bayes_examples(self):
        self.assertEqual(bayes_conditional(JointPMF.uniform(), (A, PLUS), (B, PLUS)), 0.5)
        self.assertEqual(bayes_conditional(correlated(), (A, PLUS), (C, PLUS)), 1.0)
        with self.assertRaises(ZeroConditioningEvent):
            bayes_conditional(JointPMF.point_mass(1, 1, 1), (A, PLUS), (B, MINUS))

    def test_bayes_consistency(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            pmf = random_joint(rng)
            p_given = marginal(pmf, B)
            conditional = bayes_conditional(pmf, (A, PLUS), (B, PLUS))
            self.assertAlmostEqual(conditional * p_given, pair_probability(pmf, A, PLUS, B, PLUS), delta=1e-12)

    def test_conditionals_from_joint_examples(self):
        self.assertEqual(conditionals_from_joint(JointPMF.uniform()).as_tuple(), (0.5, 0.5, 0.5))
        self.assertEqual(conditionals_from_joint(correlated()).as_tuple(), (1.0, 0.0, 1.0))
        self.assertEqual(conditionals_from_joint(anti_b()).as_tuple(), (0.0, 0.0, 0.0))

    def test_wigner_examples(self):
        check = wigner_check(JointPMF.uniform())
        self.assertEqual((check.lhs, check.rhs, check.holds), (0.5, 0.25, True))
        check = wigner_check(correlated())
        self.assertEqual((check.lhs, check.rhs), (0.5, 0.5))
        self.assertTrue(check.holds)

    def test_cond_bell_delta_examples(self):
        result = cond_bell_delta(ConditionalTriple.from_values((0.5, 0.5, 0.5)))
        self.assertEqual((result.delta, result.violated), (-0.5, False))
        result = cond_bell_delta(ConditionalTriple.from_values((1.0, 0.0, 1.0)))
        self.assertEqual((result.delta, result.violated), (0.0, False))
        result = cond_bell_delta(ConditionalTriple.from_values((0.25, 0.25, 0.75)))
        self.assertAlmostEqual(result.delta, 0.25, delta=1e-15)
        self.assertTrue(result.violated)

    def test_theorem2_identity_examples(self):
        self.assertTrue(theorem2_identity_check(JointPMF.uniform()))
        self.assertTrue(theorem2_identity_check(correlated()))
        with self.assertRaises(AsymmetricMarginals):
            theorem2_identity_check(JointPMF.point_mass(1, 1, 1))

    def test_theorem2_identity_near_symmetric(self):
        eps = 5e-10
        atoms = np.full(8, 0.125)
        atoms[0] += eps
        atoms[2] -= eps
        pmf = JointPMF.from_array(atoms)
        self.assertTrue(marginals(pmf).symmetric)
        self.assertGreater(abs(conditionals_from_joint(pmf).p_a_given_b_plus
                               - 2 * pair_probability(pmf, A, PLUS, B, PLUS)), 1e-12)
        self.assertTrue(theorem2_identity_check(pmf))


class TestProperties(unittest.TestCase):
    """Property tests over seeded random pmfs."""

    def test_wigner_holds_for_random_pmfs(self):
        rng = np.random.default_rng(20240101)
        pmfs = [random_joint(rng) for _ in range(9900)]
        pmfs += [random_joint(rng, boundary=True) for _ in range(92)]
        pmfs += [JointPMF.from_array(np.eye(8)[i]) for i in range(8)]
        self.assertEqual(len(pmfs), 10000)
        for pmf in pmfs:
            self.assertTrue(wigner_check(pmf).holds)
            self.assertAlmostEqual(sum(pmf.atoms), 1.0, delta=1e-12)
            self.assertTrue(min(pmf.atoms) >= 0.0)

    def test_symmetric_joints_satisfy_conditional_inequality(self):
        for seed in range(10000):
            pmf = random_symmetric_joint(seed)
            self.assertLessEqual(cond_bell_delta(conditionals_from_joint(pmf)).delta, 1e-12)
            self.assertTrue(theorem2_identity_check(pmf))

    def test_relabel_covers_permuted_inequalities(self):
        rng = np.random.default_rng(5)
        orders = [(A, B, C), (A, C, B), (B, A, C), (B, C, A), (C, A, B), (C, B, A)]
        for _ in range(200):
            pmf = random_joint(rng)
            for order in orders:
                self.assertTrue(wigner_check(relabel(pmf, order)).holds)

    def test_relabel_moves_columns(self):
        pmf = JointPMF.point_mass(1, -1, -1)
        swapped = relabel(pmf, (B, A, C))
        assert_allclose(swapped.array, JointPMF.point_mass(-1, 1, -1).array)
        self.assertEqual(relabel(pmf, (A, B, C)), pmf)
        with self.assertRaises(SameObservable):
            relabel(pmf, (A, A, C))


if __name__ == '__main__':
    unittest.main()
