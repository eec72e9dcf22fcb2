import math
import unittest

import numpy as np

from lqg_feedback.codes import (
    BcDecoder, BcEncoder, OlCode, P2pCode, bc_decode_step, bc_encode_step, chebyshev_bound,
    complex_to_real_trace, grid_build, grid_decode, lqg_form_coefficient, ol_asymptotic_power,
    ol_optimal_b, ol_step, p2p_decode, p2p_step, sk_coefficient_limit, sk_coefficient_recursion,
    sk_coefficient_track,
)
from lqg_feedback.errors import GridCapacityError, InsufficientTrialsError
from lqg_feedback.solver import SystemSpec, solve

SQRT2 = math.sqrt(2.0)


class PointToPointTests(unittest.TestCase):

    def test_silent_without_message_and_noise(self):
        """
        Test that a zero message over a noiseless channel sends nothing.
        """
        code = P2pCode(2.0, 0.0)
        symbol = code.transmit()
        for _ in range(10):
            self.assertEqual(symbol, 0.0)
            symbol = p2p_step(code, symbol)

    def test_first_symbol(self):
        """
        Test the first symbol -c·Θ.
        """
        self.assertAlmostEqual(P2pCode(2.0, 0.5).transmit(), -0.75)

    def test_noiseless_decoding(self):
        """
        Test that without noise the error shrinks as Θ·a^{-2i}.
        """
        code = P2pCode(SQRT2, 0.3)
        symbol = code.transmit()
        for i in range(1, 30):
            symbol = p2p_step(code, symbol)
            self.assertAlmostEqual(p2p_decode(code, i), 0.3 * (1 - 2.0 ** (-i)), delta=1e-12)

    def test_error_identity(self):
        """
        Test Θ - Θ̂_i = a^{-i}·S_{i+1} along a noisy run.
        """
        rng = np.random.default_rng(4)
        code = P2pCode(2.0, 0.7)
        symbol = code.transmit()
        for _ in range(40):
            symbol = p2p_step(code, symbol + rng.standard_normal())
            self.assertLessEqual(code.identity_gap(), 1e-9)

    def test_decode_step_mismatch(self):
        """
        Test that decoding at the wrong step is refused.
        """
        code = P2pCode(2.0, 0.7)
        p2p_step(code, code.transmit())
        with self.assertRaises(ValueError):
            p2p_decode(code, 3)

    def test_coefficient(self):
        """
        Test the limit and the deterministic recursion of the MMSE coefficient.
        """
        self.assertAlmostEqual(sk_coefficient_limit(SQRT2), 0.5)
        self.assertAlmostEqual(sk_coefficient_limit(2.0), 0.75)
        for a in (SQRT2, 2.0):
            ratios = sk_coefficient_recursion(a, 200)
            self.assertAlmostEqual(ratios[-1], sk_coefficient_limit(a), delta=1e-12)
        # first step: c²E[Θ²]/(c²E[Θ²]+1)
        c_squared = (2.0 - 1.0) ** 2 / 2.0
        self.assertAlmostEqual(sk_coefficient_recursion(SQRT2, 1)[0],
                               c_squared / 3 / (c_squared / 3 + 1))

    def test_coefficient_track(self):
        """
        Test the empirical coefficient on synthetic traces.
        """
        x = np.ones((100, 3))
        self.assertTrue(np.allclose(sk_coefficient_track(x, 2 * x), 0.5))
        with self.assertRaises(InsufficientTrialsError):
            sk_coefficient_track(x[:99], x[:99])
        with self.assertRaises(ValueError):
            sk_coefficient_track(x, x[:, :2])


class BroadcastTests(unittest.TestCase):

    def setUp(self):
        self.spec = SystemSpec([SQRT2, -SQRT2], np.eye(2))
        self.solution = solve(self.spec)

    def run_code(self, theta, noise):
        encoder = BcEncoder(self.spec.modes, self.solution.C, theta)
        decoders = [BcDecoder(j, mode) for j, mode in enumerate(self.spec.modes)]
        symbol = encoder.transmit()
        history = []
        for z in noise:
            y = symbol + z
            estimates = np.array([bc_decode_step(decoder, y[j])
                                  for j, decoder in enumerate(decoders)])
            symbol = bc_encode_step(encoder, y)
            history.append((encoder.i, estimates, encoder.S.copy()))
        return history

    def test_silent_without_message_and_noise(self):
        """
        Test that Θ = 0 over a noiseless channel keeps the encoder silent.
        """
        encoder = BcEncoder(self.spec.modes, self.solution.C, np.zeros(2))
        symbol = encoder.transmit()
        for _ in range(10):
            self.assertEqual(symbol, 0)
            symbol = bc_encode_step(encoder, np.full(2, symbol))

    def test_first_step(self):
        """
        Test the first symbol and state update against the hand expansion.
        """
        theta = np.array([0.5, 0.5j])
        encoder = BcEncoder(self.spec.modes, self.solution.C, theta)
        first = encoder.transmit()
        self.assertAlmostEqual(first, -(self.solution.C @ theta), delta=1e-15)
        y = np.array([first + 0.1, first - 0.2])
        second = bc_encode_step(encoder, y)
        state = np.array(self.spec.modes) * theta + y
        np.testing.assert_allclose(encoder.S, state, atol=1e-15)
        self.assertAlmostEqual(second, -(self.solution.C @ state), delta=1e-15)

    def test_noiseless_decoding(self):
        """
        Test that without noise every receiver converges onto its message.
        """
        theta = np.array([0.25 + 0.75j, 0.6 + 0.1j])
        history = self.run_code(theta, np.zeros((60, 2)))
        errors = [np.abs(theta - estimates).max() for _, estimates, _ in history]
        self.assertLessEqual(errors[-1], 1e-12)

    def test_error_identity(self):
        """
        Test Θ - Θ̂_i = A^{-i}·S_{i+1} per receiver along a noisy run.
        """
        rng = np.random.default_rng(8)
        theta = np.array([0.2 + 0.4j, 0.9 + 0.3j])
        noise = (rng.standard_normal((40, 2)) + 1j * rng.standard_normal((40, 2))) / SQRT2
        modes = np.array(self.spec.modes)
        for i, estimates, state in self.run_code(theta, noise):
            gap = np.abs((theta - estimates) - modes ** (-i) * state)
            self.assertLessEqual(gap.max(), 1e-9)

    def test_shape_mismatch(self):
        """
        Test that mismatched lengths are rejected.
        """
        with self.assertRaises(ValueError):
            BcEncoder(self.spec.modes, self.solution.C, np.zeros(3))


class OlCodeTests(unittest.TestCase):

    def test_optimal_b(self):
        """
        Test the OL input scaling b = (a⁴-1)/(2a³).
        """
        self.assertAlmostEqual(ol_optimal_b(SQRT2), 3 / (4 * SQRT2))
        self.assertAlmostEqual(ol_optimal_b(2.0), 15 / 16)

    def test_lqg_coefficient_below_ol(self):
        """
        Test that the LQG coefficient in OL form stays below b/a.
        """
        for a in (1.1, SQRT2, 2.0, 5.0):
            b = ol_optimal_b(a)
            coefficient = lqg_form_coefficient(a, b)
            self.assertLess(coefficient, b / a)
            # same value written with (a²-1) factored out
            alternative = b * a ** 3 * (a ** 2 + 1) / ((a ** 2 - 1) * (a ** 2 + 1) ** 2 + 2 * a ** 2)
            self.assertAlmostEqual(coefficient, alternative, delta=1e-12)
        self.assertAlmostEqual(lqg_form_coefficient(SQRT2, 1.0), 6 * SQRT2 / 13)

    def test_silent_at_the_mean(self):
        """
        Test that messages at the known mean over a noiseless channel send nothing.
        """
        code = OlCode(SQRT2, [0.5, 0.5])
        symbol = code.transmit()
        for _ in range(10):
            self.assertEqual(symbol, 0.0)
            symbol = ol_step(code, symbol, symbol)

    def test_covariance_recursion(self):
        """
        Test that the covariance stays PSD and settles at the asymptotic power.
        """
        code = OlCode(SQRT2, [0.3, 0.8])
        rng = np.random.default_rng(1)
        symbol = code.transmit()
        for _ in range(300):
            symbol = ol_step(code, symbol + rng.standard_normal(), symbol + rng.standard_normal())
            self.assertGreaterEqual(np.linalg.eigvalsh(code.covariance).min(), -1e-12)
        self.assertAlmostEqual(code.predicted_power(), ol_asymptotic_power(SQRT2), delta=1e-6)

    def test_asymptotic_power(self):
        """
        Test the OL power against its quadratic fixed point and the LQG power.
        """
        self.assertAlmostEqual(ol_asymptotic_power(SQRT2), (1 + math.sqrt(13)) / 2, delta=1e-9)
        self.assertGreater(ol_asymptotic_power(SQRT2), 2.25)
        self.assertGreater(ol_asymptotic_power(2.0), 3 * 25 / 8)


class GridTests(unittest.TestCase):

    def test_small_grids(self):
        """
        Test the point layout of small grids.
        """
        grid = grid_build(math.log(4), 1)
        self.assertEqual(grid.per_dimension, 2)
        self.assertEqual(set(grid.points), {0.25 + 0.25j, 0.75 + 0.25j, 0.25 + 0.75j, 0.75 + 0.75j})
        single = grid_build(1e-4, 1)
        self.assertEqual(single.size, 1)
        self.assertEqual(single.point(0), 0.5 + 0.5j)

    def test_spacing(self):
        """
        Test size and minimum distance over random rates and horizons.
        """
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(1, 20))
            rate = rng.uniform(0.01, math.log(400)) / n
            grid = grid_build(rate, n)
            self.assertLessEqual(grid.size, math.exp(n * rate) * (1 + 1e-9))
            self.assertGreaterEqual(grid.spacing, math.exp(-n * rate / 2) * (1 - 1e-9))
            points = grid.points
            if points.size > 1:
                distances = np.abs(points[:, None] - points[None, :]) + np.eye(points.size)
                self.assertGreaterEqual(distances.min(), grid.spacing - 1e-12)

    def test_capacity(self):
        """
        Test that grids above 2^24 points are refused.
        """
        with self.assertRaises(GridCapacityError):
            grid_build(1.0, 17)
        with self.assertRaises(ValueError):
            grid_build(0.0, 5)

    def test_decoding(self):
        """
        Test exact decoding and decoding within half the spacing.
        """
        grid = grid_build(math.log(16), 1)
        points = grid.points
        np.testing.assert_array_equal(grid_decode(grid, points), np.arange(grid.size))
        rng = np.random.default_rng(9)
        for index, point in enumerate(points):
            offsets = rng.uniform(-1, 1, size=(50, 2)) * grid.spacing / 2 * 0.999
            noisy = point + offsets[:, 0] + 1j * offsets[:, 1]
            self.assertTrue(np.all(grid_decode(grid, noisy) == index))
        self.assertEqual(grid_decode(grid, 5 + 5j), grid.size - 1)
        self.assertEqual(grid_decode(grid, -5 - 5j), 0)

    def test_ties(self):
        """
        Test that ties break towards the lower index.
        """
        grid = grid_build(math.log(4), 1)
        self.assertEqual(grid_decode(grid, 0.5 + 0.25j), 0)
        self.assertEqual(grid_decode(grid, 0.75 + 0.5j), 1)

    def test_chebyshev_bound(self):
        """
        Test the Chebyshev bound 4·e^{2nR}·D.
        """
        self.assertAlmostEqual(chebyshev_bound(0.5, 2, 1e-3), 4 * math.e ** 2 * 1e-3)


class RealTraceTests(unittest.TestCase):

    def test_interleaving(self):
        """
        Test that complex symbols become consecutive real pairs.
        """
        trace, power = complex_to_real_trace([1 + 2j, 3 - 1j])
        np.testing.assert_array_equal(trace, [1.0, 2.0, 3.0, -1.0])
        self.assertAlmostEqual(power, 3.75)
