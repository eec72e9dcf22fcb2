# coding: utf-8

"""
Encoder and decoder state machines of the linear feedback codes.

Every code follows the same convention: the first symbol is sent from the
initial state ``S_1 = Θ``, and each ``*_step`` call consumes the previous
channel output, updates the state and returns the next symbol.
"""

import logging
import math

import numpy as np

from .errors import GridCapacityError, InsufficientTrialsError, InvalidCovarianceError
from .numerics import fixed_point, min_eigenvalue
from .settings import (
    DALE_MAX_ITER, DALE_STEP_TOL, EIGEN_REJECT_TOL, GRID_MAX_POINTS, MIN_TRACK_TRIALS,
    UNIFORM_VARIANCE,
)

logger = logging.getLogger(__name__)


class P2pCode:
    """
    Point-to-point LQG code with the optimal gain ``c = (a²-1)/a``.

    Encoder and decoder share the channel outputs, so ``S_{i+1} - Ŝ_{i+1} = a^i·Θ``.
    """

    def __init__(self, a, theta):
        if a <= 1.0:
            raise ValueError('a must exceed 1')
        self.a = float(a)
        self.c = (self.a ** 2 - 1.0) / self.a
        self.theta = theta
        self.S = theta
        self.S_hat = 0.0
        self.i = 0

    def transmit(self):
        return -self.c * self.S

    def estimate(self):
        return -self.a ** (-self.i) * self.S_hat

    def identity_gap(self):
        return abs((self.theta - self.estimate()) - self.a ** (-self.i) * self.S)


def p2p_step(code, y):
    """
    Feed output ``y`` to both ends of ``code`` and return the next symbol ``-c·S``.
    """
    code.S = code.a * code.S + y
    code.S_hat = code.a * code.S_hat + y
    code.i += 1
    return code.transmit()


def p2p_decode(code, i=None):
    """
    Estimate ``Θ̂_i = -a^{-i}·Ŝ_{i+1}`` after ``i`` outputs.
    """
    if i is not None and i != code.i:
        raise ValueError('decoder has consumed {0} outputs, not {1}'.format(code.i, i))
    return code.estimate()


def sk_coefficient_track(x, y):
    """
    Empirical ``E[X_i·Y_i] / E[|Y_i|²]`` per time step.

    Args:
        x (array): Transmitted symbols, one trace per row.
        y (array): Channel outputs, same shape as ``x``.

    Raises:
        InsufficientTrialsError: Fewer than 100 traces.
    """
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    if x.shape != y.shape:
        raise ValueError('x and y traces differ in shape')
    if x.shape[0] < MIN_TRACK_TRIALS:
        raise InsufficientTrialsError(
            'coefficient track needs at least {0} traces, got {1}'.format(
                MIN_TRACK_TRIALS, x.shape[0]))
    return np.mean(x * np.conj(y), axis=0).real / np.mean(np.abs(y) ** 2, axis=0)


def sk_coefficient_limit(a):
    return (a ** 2 - 1.0) / a ** 2


def sk_coefficient_recursion(a, n, message_power=1.0 / 3.0):
    """
    Exact ``E[X_i·Y_i] / E[Y_i²]`` for i = 1..n by second-moment propagation.

    ``message_power`` is ``E[Θ²]``; 1/3 for Θ uniform on (0, 1).
    """
    c = (a ** 2 - 1.0) / a
    second_moment = message_power
    ratios = np.empty(n)
    for index in range(n):
        signal = c ** 2 * second_moment
        ratios[index] = signal / (signal + 1.0)
        second_moment = (a - c) ** 2 * second_moment + 1.0
    return ratios


class BcEncoder:
    """
    Broadcast encoder: state ``S_{i+1} = A·S_i + Y_i`` and symbol ``X_i = -C·S_i``.
    """

    def __init__(self, modes, C, theta):
        self.modes = np.asarray(modes, dtype=complex)
        self.C = np.asarray(C, dtype=complex)
        self.S = np.array(theta, dtype=complex)
        if self.S.shape != self.modes.shape or self.C.shape != self.modes.shape:
            raise ValueError('modes, gain and message must have the same length')
        self.i = 0

    @property
    def k(self):
        return self.modes.size

    def transmit(self):
        return -(self.C @ self.S)


def bc_encode_step(enc, y):
    """
    Update the encoder with the full output vector ``y`` and return the next symbol.
    """
    enc.S = enc.modes * enc.S + y
    enc.i += 1
    return enc.transmit()


class BcDecoder:
    """
    Decoder of receiver ``j``; it only ever sees its own output stream.
    """

    def __init__(self, j, mode):
        self.j = j
        self.mode = complex(mode)
        self.S_hat = 0j
        self.i = 0

    def estimate(self):
        return -self.mode ** (-self.i) * self.S_hat


def bc_decode_step(dec, y_j):
    """
    Consume ``y_j`` and return ``Θ̂_{j,i} = -a_j^{-i}·Ŝ_{j,i+1}``.
    """
    dec.S_hat = dec.mode * dec.S_hat + y_j
    dec.i += 1
    return dec.estimate()


def ol_optimal_b(a):
    return (a ** 4 - 1.0) / (2.0 * a ** 3)


def lqg_form_coefficient(a, b):
    """
    Steady-state MMSE coefficient of the two-receiver LQG code written in OL form.

    Equals ``b·a³(a²+1)/(a⁶+a⁴+a²-1)``, which lies below the OL value ``b/a`` for all ``a > 1``.
    """
    return b * a ** 3 * (a ** 2 + 1.0) / (a ** 6 + a ** 4 + a ** 2 - 1.0)


def _ol_transition(covariance, modes, noise_cov):
    """
    Coefficients and state maps for one OL step from the state covariance.
    """
    ones = np.ones(2)
    signal = ones @ covariance @ ones
    beta = (covariance @ ones) / (signal + np.diag(noise_cov))
    drive = np.diag(modes)
    M = drive @ (np.eye(2) - np.outer(beta, ones))
    N = -drive @ np.diag(beta)
    return beta, M, N


def ol_covariance_step(covariance, modes, noise_cov):
    """
    One step ``K ↦ M·K·M′ + N·K_z·N′`` of the OL state covariance.
    """
    _, M, N = _ol_transition(covariance, modes, noise_cov)
    following = M @ covariance @ M.T + N @ noise_cov @ N.T
    return (following + following.T) / 2


class OlCode:
    """
    Two-receiver code with per-receiver MMSE updates on the real channel.

    The state ``S_j`` is receiver j's estimation error of its message scaled
    by ``a_j^i``, with modes ``(a, -a)``. Coefficients
    ``β_j = E[S_j·Y_j]/E[Y_j²]`` come from the exact covariance recursion of
    ``S``, never from sample averages.

    Args:
        a (float): Mode modulus, above 1.
        theta (array): Messages of both receivers in (0, 1).
        offset (float): Known message mean, subtracted before the first symbol.
        message_var (float): Message variance per receiver.
        noise_cov (array): Real 2×2 noise covariance; identity by default.
    """

    def __init__(self, a, theta, offset=0.5, message_var=UNIFORM_VARIANCE, noise_cov=None):
        if a <= 1.0:
            raise ValueError('a must exceed 1')
        self.a = float(a)
        self.modes = np.array([self.a, -self.a])
        self.theta = np.asarray(theta, dtype=float)
        self.offset = offset
        self.noise_cov = np.eye(2) if noise_cov is None else np.asarray(noise_cov, dtype=float)
        self.S = self.theta - offset
        self.S_hat = np.zeros(2)
        self.covariance = message_var * np.eye(2)
        self.i = 0

    def transmit(self):
        return float(self.S.sum())

    def predicted_power(self):
        return float(self.covariance.sum())

    def estimate(self):
        return self.offset - self.modes ** (-self.i) * self.S_hat


def ol_step(code, y1, y2):
    """
    Update both receivers with their outputs and return the next symbol ``S_1 + S_2``.

    Raises:
        InvalidCovarianceError: The covariance recursion left the PSD cone.
    """
    y = np.array([y1, y2], dtype=float)
    beta, _, _ = _ol_transition(code.covariance, code.modes, code.noise_cov)
    code.S = code.modes * (code.S - beta * y)
    code.S_hat = code.modes * (code.S_hat - beta * y)
    code.covariance = ol_covariance_step(code.covariance, code.modes, code.noise_cov)
    smallest = min_eigenvalue(code.covariance)
    if smallest < -EIGEN_REJECT_TOL * max(1.0, abs(code.covariance).max()):
        raise InvalidCovarianceError(
            'OL covariance recursion is not PSD at step {0} ({1:.3e})'.format(code.i + 1, smallest))
    code.i += 1
    return code.transmit()


def ol_asymptotic_power(a, message_var=UNIFORM_VARIANCE, noise_cov=None):
    """
    Power ``E[X²]`` of the OL code at the fixed point of its covariance recursion.
    """
    modes = np.array([float(a), -float(a)])
    noise_cov = np.eye(2) if noise_cov is None else np.asarray(noise_cov, dtype=float)
    covariance, _ = fixed_point(
        lambda current: ol_covariance_step(current, modes, noise_cov),
        message_var * np.eye(2), DALE_STEP_TOL, DALE_MAX_ITER, label='OL covariance')
    return float(covariance.sum())


class MessageGrid:
    """
    Square grid of ``m×m`` message points ``((l+½)/m) + i·((l'+½)/m)`` in the unit square.

    Point ``index = iy·m + ix``; ``spacing`` is the distance between neighbours
    along each real dimension.
    """

    def __init__(self, rate, n, per_dimension):
        self.rate = rate
        self.n = n
        self.per_dimension = per_dimension

    @property
    def spacing(self):
        return 1.0 / self.per_dimension

    @property
    def size(self):
        return self.per_dimension ** 2

    @property
    def coordinates(self):
        return (np.arange(self.per_dimension) + 0.5) / self.per_dimension

    @property
    def points(self):
        axis = self.coordinates
        return (axis[None, :] + 1j * axis[:, None]).reshape(-1)

    def point(self, index):
        iy, ix = divmod(int(index), self.per_dimension)
        axis = self.coordinates
        return complex(axis[ix], axis[iy])


def grid_build(rate, n):
    """
    Densest square grid with at most ``e^{nR}`` points, the rate split evenly over
    the real and imaginary parts.

    Raises:
        GridCapacityError: ``e^{nR}`` exceeds 2^24.
    """
    if rate <= 0 or n < 1:
        raise ValueError('grid needs a positive rate and n >= 1')
    if n * rate > math.log(GRID_MAX_POINTS):
        raise GridCapacityError(
            'grid with e^(nR) = e^{0:.3f} points exceeds the cap of {1}'.format(
                n * rate, GRID_MAX_POINTS))
    per_dimension = max(1, int(math.floor(math.exp(n * rate / 2.0) + 1e-9)))
    return MessageGrid(rate, n, per_dimension)


def grid_decode(grid, theta_hat):
    """
    Index of the grid point closest to ``theta_hat``; ties go to the lower index.

    Works elementwise on arrays.
    """
    theta_hat = np.asarray(theta_hat, dtype=complex)
    m = grid.per_dimension
    ix = np.clip(np.ceil(theta_hat.real * m) - 1, 0, m - 1).astype(int)
    iy = np.clip(np.ceil(theta_hat.imag * m) - 1, 0, m - 1).astype(int)
    index = iy * m + ix
    return int(index) if index.ndim == 0 else index


def chebyshev_bound(rate, n, mse):
    """
    Chebyshev bound ``4·e^{2nR}·D`` on the block error probability.
    """
    return 4.0 * math.exp(2.0 * n * rate) * mse


def complex_to_real_trace(x):
    """
    Send each complex symbol as two consecutive real ones.

    Returns:
        tuple: ``(real trace, power per real dimension)``
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    trace = np.empty(2 * x.size)
    trace[0::2] = x.real
    trace[1::2] = x.imag
    power = float(np.mean(trace ** 2)) if trace.size else 0.0
    return trace, power
