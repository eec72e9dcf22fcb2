import math
import unittest

import numpy as np

from lqg_feedback.errors import ConvergenceError, InvalidCovarianceError
from lqg_feedback.numerics import (
    GaussianSampler, circulant_from_eigenvalues, ctranspose, dft_matrix, fixed_point,
    hermitian_psd_sqrt, max_norm, numerical_rank, spectral_radius, trial_generator,
)


class MatrixTests(unittest.TestCase):

    def test_conjugate_transpose_involution(self):
        """
        Test that conjugate-transposing twice gives back the same bits.
        """
        rng = np.random.default_rng(3)
        matrix = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        self.assertTrue(np.array_equal(ctranspose(ctranspose(matrix)), matrix))

    def test_dft_unitary(self):
        """
        Test that F·F′ = I within 1e-12 for k up to 64.
        """
        for k in range(1, 65):
            F = dft_matrix(k)
            self.assertLessEqual(max_norm(F @ ctranspose(F) - np.eye(k)), 1e-12, k)

    def test_dft_entries(self):
        """
        Test the sign convention of the DFT matrix.
        """
        F = dft_matrix(4)
        self.assertAlmostEqual(F[1, 1], np.exp(-2j * np.pi / 4) / 2, delta=1e-15)

    def test_sqrt_identity(self):
        """
        Test the square root of the identity.
        """
        np.testing.assert_allclose(hermitian_psd_sqrt(np.eye(3)), np.eye(3), atol=1e-12)

    def test_sqrt_diagonal(self):
        """
        Test that diag(4, 0) has square root diag(2, 0).
        """
        np.testing.assert_allclose(
            hermitian_psd_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]), atol=1e-12)

    def test_sqrt_rank_one_circulant(self):
        """
        Test that the rank-one circulant covariance is reconstructed by its factor.
        """
        covariance = circulant_from_eigenvalues(np.array([0.0, 0.0, 3.0]))
        factor = hermitian_psd_sqrt(covariance)
        self.assertLessEqual(max_norm(factor @ ctranspose(factor) - covariance), 1e-10)
        self.assertEqual(numerical_rank(factor), 1)

    def test_sqrt_drops_round_off(self):
        """
        Test that round-off sized positive eigenvalues do not add to the rank.
        """
        factor = hermitian_psd_sqrt(np.diag([3.0, 1e-16, 0.0]))
        self.assertEqual(numerical_rank(factor), 1)
        np.testing.assert_allclose(factor, np.diag([math.sqrt(3.0), 0.0, 0.0]), atol=1e-15)

    def test_sqrt_clamps_tiny_negative(self):
        """
        Test that an eigenvalue slightly below zero is clamped.
        """
        factor = hermitian_psd_sqrt(np.diag([1.0, -1e-8]))
        np.testing.assert_allclose(factor @ ctranspose(factor), np.diag([1.0, 0.0]), atol=1e-12)

    def test_sqrt_rejects(self):
        """
        Test that non-Hermitian and indefinite inputs are rejected.
        """
        with self.assertRaises(InvalidCovarianceError):
            hermitian_psd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))
        with self.assertRaises(InvalidCovarianceError):
            hermitian_psd_sqrt(np.diag([1.0, -1e-3]))
        with self.assertRaises(InvalidCovarianceError):
            hermitian_psd_sqrt(np.ones((2, 3)))

    def test_circulant_examples(self):
        """
        Test the hand-expanded circulant examples.
        """
        np.testing.assert_allclose(circulant_from_eigenvalues(np.array([1.0, 1.0])), np.eye(2),
                                   atol=1e-15)
        np.testing.assert_allclose(circulant_from_eigenvalues(np.array([2.0, 0.0])),
                                   np.ones((2, 2)), atol=1e-15)
        rank_one = circulant_from_eigenvalues(np.array([0.0, 0.0, 3.0]))
        self.assertTrue(np.allclose(rank_one, ctranspose(rank_one), atol=1e-15))
        np.testing.assert_allclose(np.diag(rank_one), np.ones(3), atol=1e-12)
        self.assertEqual(numerical_rank(rank_one), 1)

    def test_circulant_round_trip(self):
        """
        Test that the eigenvalues of a circulant matrix recover its spectrum.
        """
        rng = np.random.default_rng(11)
        for k in (1, 2, 5, 9):
            spectrum = rng.uniform(-2, 5, size=k)
            matrix = circulant_from_eigenvalues(spectrum)
            np.testing.assert_allclose(
                np.sort(np.linalg.eigvalsh(matrix)), np.sort(spectrum), atol=1e-9)

    def test_spectral_radius(self):
        """
        Test the spectral radius of a diagonal matrix and of the scalar closed loop.
        """
        self.assertAlmostEqual(spectral_radius(np.diag([0.5, -0.5])), 0.5)
        a = 2.0
        self.assertAlmostEqual(spectral_radius(np.array([[a - (a ** 2 - 1) / a]])), 0.5)


class FixedPointTests(unittest.TestCase):

    def test_contraction(self):
        """
        Test that a contraction converges onto its round-off floor.
        """
        value, count = fixed_point(lambda x: x / 2 + 1, np.array([0.0]), 1e-12, 1000)
        self.assertEqual(value[0], 2.0)
        self.assertLess(count, 100)

    def test_cap(self):
        """
        Test that a drifting iteration raises once the cap is hit.
        """
        with self.assertRaises(ConvergenceError):
            fixed_point(lambda x: x + 1, np.array([0.0]), 1e-12, 50)

    def test_divergence(self):
        """
        Test that a non-finite iterate raises.
        """
        with self.assertRaises(ConvergenceError):
            fixed_point(lambda x: x * 1e200, np.array([1.0]), 1e-12, 10)


class SamplerTests(unittest.TestCase):
    covariance = np.array([[1.0, 0.5, 0.2j],
                           [0.5, 1.0, 0.3],
                           [-0.2j, 0.3, 1.0]])

    def test_factor(self):
        """
        Test that the sampler factor reproduces the covariance.
        """
        sampler = GaussianSampler(self.covariance, seed=1)
        self.assertLessEqual(
            max_norm(sampler.factor @ ctranspose(sampler.factor) - self.covariance), 1e-10)

    def test_whiteness(self):
        """
        Test the empirical mean and covariance of 10^5 complex samples.
        """
        count = 100000
        samples = GaussianSampler(self.covariance, seed=2).draw(count)
        empirical = samples.T @ samples.conj() / count
        tolerance = 5 * 3 / math.sqrt(count)
        self.assertLessEqual(max_norm(empirical - self.covariance), tolerance)
        self.assertLessEqual(max_norm(samples.mean(axis=0)), tolerance)
        # circular symmetry: the pseudo-covariance vanishes
        self.assertLessEqual(max_norm(samples.T @ samples / count), tolerance)

    def test_real_sampler(self):
        """
        Test that the real sampler draws real N(0, K) vectors.
        """
        covariance = np.array([[1.0, 0.4], [0.4, 1.0]])
        count = 100000
        samples = GaussianSampler(covariance, seed=5, complex_valued=False).draw(count)
        self.assertTrue(np.isrealobj(samples))
        empirical = samples.T @ samples / count
        self.assertLessEqual(max_norm(empirical - covariance), 10 / math.sqrt(count))
        with self.assertRaises(InvalidCovarianceError):
            GaussianSampler(self.covariance, seed=5, complex_valued=False)

    def test_streams(self):
        """
        Test that (seed, stream) pairs are reproducible and distinct.
        """
        first = GaussianSampler(np.eye(2), seed=7, stream=3).draw(5)
        again = GaussianSampler(np.eye(2), seed=7, stream=3).draw(5)
        other = GaussianSampler(np.eye(2), seed=7, stream=4).draw(5)
        self.assertTrue(np.array_equal(first, again))
        self.assertFalse(np.array_equal(first, other))
        self.assertEqual(trial_generator(7, 3).random(), trial_generator(7, 3).random())
