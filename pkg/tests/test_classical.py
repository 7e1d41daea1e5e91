"""
Unit tests for classical realizability and random classical models
"""
import itertools
import sys
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# Add project root to Python path
project_root = str(Path(__file__).resolve().parent.parent)
if project_root not in sys.path:
    sys.path.append(project_root)

from src.models.classical import (RealizabilityVerdict, closest_realizable, random_symmetric_joint,  # noqa: E402
                                  realize, sample_latent_triple, verify_witness)
from src.models.probability import (OUTCOME_TABLE, ConditionalTriple, JointPMF, cond_bell_delta,  # noqa: E402
                                    conditionals_from_joint, marginals)
from src.utils.rng import make_rng  # noqa: E402


def triple(x, y, z):
    return ConditionalTriple.from_values((x, y, z))


class TestRealize(unittest.TestCase):
    """Test cases for the realizability decision."""

    def test_independent_triple_is_feasible(self):
        verdict = realize(triple(0.5, 0.5, 0.5))
        self.assertTrue(verdict.feasible)
        self.assertEqual(verdict.max_violation, 0.0)
        self.assertTrue(verify_witness(triple(0.5, 0.5, 0.5), verdict))

    def test_perfect_correlation_has_unique_witness(self):
        verdict = realize(triple(1.0, 0.0, 1.0))
        self.assertTrue(verdict.feasible)
        expected = JointPMF.from_mapping({(1, 1, 1): 0.5, (-1, -1, -1): 0.5})
        assert_allclose(verdict.witness.array, expected.array, atol=1e-9)

    def test_canonical_quantum_triple_is_infeasible(self):
        verdict = realize(triple(0.25, 0.25, 0.75))
        self.assertFalse(verdict.feasible)
        self.assertTrue(verdict.quantum_like)
        self.assertIsNone(verdict.witness)
        self.assertGreater(verdict.max_violation, 0.0)

    def test_grid_search_finds_no_joint_for_canonical_triple(self):
        # every pmf on the 1/64 lattice of the 8-atom simplex with all marginals 1/2;
        # k0, k1, k2, k4 are free and the marginal equations fix the rest
        free = np.stack(np.meshgrid(*[np.arange(33)] * 4, indexing='ij'), axis=-1).reshape(-1, 4)
        k0, k1, k2, k4 = free.T
        k3 = 32 - k0 - k1 - k2
        k5 = 32 - k0 - k1 - k4
        k6 = 32 - k0 - k2 - k4
        k7 = 2 * k0 + k1 + k2 + k4 - 32
        atoms = np.stack([k0, k1, k2, k3, k4, k5, k6, k7], axis=1)
        atoms = atoms[(atoms >= 0).all(axis=1)] / 64.0
        # strictly more than the 6545 antipodally symmetric lattice points
        self.assertGreater(len(atoms), 6545)
        assert_allclose(atoms.sum(axis=1), 1.0, atol=1e-12)
        assert_allclose(atoms @ (OUTCOME_TABLE == 1), 0.5, atol=1e-12)

        b_plus = OUTCOME_TABLE[:, 1] == 1
        x = atoms[:, (OUTCOME_TABLE[:, 0] == 1) & b_plus].sum(axis=1) / 0.5
        y = atoms[:, (OUTCOME_TABLE[:, 2] == 1) & ~b_plus].sum(axis=1) / 0.5
        z = atoms[:, (OUTCOME_TABLE[:, 0] == 1) & (OUTCOME_TABLE[:, 2] == 1)].sum(axis=1) / 0.5
        self.assertLessEqual(float(np.max(z - x - y)), 1e-12)
        distance = np.abs(np.stack([x, y, z], axis=1) - (0.25, 0.25, 0.75)).max(axis=1)
        self.assertGreater(float(distance.min()), 0.05)

    def test_delta_positive_means_infeasible(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            t = triple(*rng.random(3))
            if cond_bell_delta(t).delta > 1e-9:
                self.assertFalse(realize(t).feasible)

    def test_random_symmetric_joints_are_feasible(self):
        for seed in range(1000):
            t = conditionals_from_joint(random_symmetric_joint(seed))
            verdict = realize(t)
            self.assertTrue(verdict.feasible)
            self.assertTrue(verify_witness(t, verdict))
            reproduced = conditionals_from_joint(verdict.witness).as_tuple()
            assert_allclose(reproduced, t.as_tuple(), atol=1e-9)

    def test_deterministic(self):
        t = triple(0.3, 0.4, 0.6)
        first, second = realize(t), realize(t)
        self.assertEqual(first, second)
        self.assertEqual(first.witness.atoms, second.witness.atoms)

    def test_verdict_json_form(self):
        data = realize(triple(0.25, 0.25, 0.75)).model_dump(mode='json')
        self.assertEqual(set(data), {'feasible', 'witness', 'max_violation'})
        self.assertIsNone(data['witness'])

    def test_verdict_certificate_rules(self):
        with self.assertRaises(ValueError):
            RealizabilityVerdict(feasible=True, witness=None)
        with self.assertRaises(ValueError):
            RealizabilityVerdict(feasible=False, witness=None, max_violation=0.0)


class TestRandomSymmetricJoint(unittest.TestCase):
    """Test cases for the orbit construction."""

    def test_marginals_are_half(self):
        for seed in (0, 1, 2**63 + 5, 123456789):
            assert_allclose(marginals(random_symmetric_joint(seed)).p_plus, (0.5, 0.5, 0.5), atol=1e-9)

    def test_same_seed_same_pmf(self):
        self.assertEqual(random_symmetric_joint(42), random_symmetric_joint(42))
        self.assertNotEqual(random_symmetric_joint(42), random_symmetric_joint(43))


class TestSampleLatentTriple(unittest.TestCase):
    """Test cases for drawing pre-existing answers."""

    def test_point_mass_always_same_triple(self):
        pmf = JointPMF.point_mass(1, -1, 1)
        rng = make_rng(9)
        for _ in range(50):
            self.assertEqual(sample_latent_triple(pmf, rng), (1, -1, 1))

    def test_uniform_frequencies(self):
        pmf = JointPMF.uniform()
        rng = make_rng(2024)
        draws = [sample_latent_triple(pmf, rng) for _ in range(80000)]
        sigma = np.sqrt(0.125 * 0.875 / 80000)
        counts = {atom: 0 for atom in itertools.product((1, -1), repeat=3)}
        for draw in draws:
            counts[tuple(int(v) for v in draw)] += 1
        for count in counts.values():
            self.assertLess(abs(count / 80000 - 0.125), 3 * sigma)

    def test_reproducible_sequence(self):
        pmf = JointPMF.from_array([0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1])
        rng_a, rng_b = make_rng(77), make_rng(77)
        seq_a = [sample_latent_triple(pmf, rng_a) for _ in range(100)]
        seq_b = [sample_latent_triple(pmf, rng_b) for _ in range(100)]
        self.assertEqual(seq_a, seq_b)


class TestClosestRealizable(unittest.TestCase):
    """Test cases for the minimum chi-square projection."""

    def test_realizable_observation_has_zero_statistic(self):
        fitted, statistic = closest_realizable((500, 500, 500), (1000, 1000, 1000))
        self.assertEqual(statistic, 0.0)
        self.assertEqual(fitted.as_tuple(), (0.5, 0.5, 0.5))

    def test_projection_lands_on_realizable_set(self):
        fitted, statistic = closest_realizable((250, 250, 750), (1000, 1000, 1000))
        self.assertGreater(statistic, 10.0)
        self.assertLessEqual(cond_bell_delta(fitted).delta, 1e-6)
        assert_array_equal(np.asarray(fitted.as_tuple()) >= 0, True)
        self.assertTrue(realize(fitted).feasible)

    def test_infeasible_counts_with_negative_delta(self):
        for counts in ((0, 1000, 0), (10, 990, 10), (100, 900, 100)):
            observed = triple(*(np.asarray(counts) / 1000))
            self.assertLess(cond_bell_delta(observed).delta, 0.0)
            self.assertFalse(realize(observed).feasible)
            fitted, statistic = closest_realizable(counts, (1000, 1000, 1000))
            self.assertTrue(realize(fitted).feasible)
            self.assertGreater(statistic, 0.0)
            self.assertTrue(np.isfinite(statistic))


if __name__ == '__main__':
    unittest.main()
