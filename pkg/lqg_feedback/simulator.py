# coding: utf-8

"""
Closed-loop Monte Carlo simulation of the feedback codes.

A trial is keyed by ``(base_seed, trial index)``: the index is the stream of a
counter-based generator, so a trial draws the same message and noise
whichever worker process runs it, and ensembles reduce in trial order.
"""

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import stats

from .codes import (
    BcDecoder, BcEncoder, OlCode, P2pCode, bc_decode_step, bc_encode_step, grid_decode,
    ol_asymptotic_power, ol_step, p2p_decode, p2p_step, sk_coefficient_track,
)
from .errors import (
    ConfigError, HorizonError, IdentityError, NonPositiveMseError, TrialError,
    UnstableClosedLoopError,
)
from .numerics import GaussianSampler, ctranspose
from .settings import HORIZON_LOG_LIMIT, IDENTITY_TOL, UNIFORM_VARIANCE
from .solver import SystemSpec, solve

logger = logging.getLogger(__name__)

CENTER = 0.5 + 0.5j


class ChannelInstance:
    """
    The broadcast channel ``Y_i = 1·X_i + Z_i`` with its own noise sampler.
    """

    def __init__(self, noise_cov, seed, stream=0, complex_valued=True):
        self.sampler = GaussianSampler(noise_cov, seed, stream, complex_valued=complex_valued)
        self.noise_cov = self.sampler.covariance

    @property
    def k(self):
        return self.sampler.k

    @property
    def rng(self):
        return self.sampler.rng

    def noise(self, n):
        return self.sampler.draw(n)

    @staticmethod
    def output(x, z):
        return x + z


@dataclass
class TrialMetrics:
    """
    Per-trial results.

    Attributes:
        sq_error: ``|Θ_j - Θ̂_{j,i}|²`` for i = 1..n, shape ``(n, k)``.
        mse: Squared error at the horizon, ``D_j^(n)`` of this trial.
        avg_power: Mean ``|X_i|²`` over the second half of the horizon.
        power: ``|X_i|²`` for i = 1..n.
        exponent_est: Per-receiver fitted exponent; NaN where an error vanished.
        grid_errors: Per-receiver decoding failures, or None without grids.
        identity_gap: Largest violation of ``Θ - Θ̂_i = A^{-i}·S_{i+1}``.
    """

    sq_error: np.ndarray
    mse: np.ndarray
    avg_power: float
    power: np.ndarray
    exponent_est: np.ndarray
    grid_errors: np.ndarray
    identity_gap: float


@dataclass(frozen=True, eq=False)
class TrialConfig:
    spec: SystemSpec
    solution: object
    n: int
    grids: tuple = None
    noiseless: bool = False
    center: bool = False


@dataclass
class EnsembleResult:
    """
    Trial-ordered aggregate of an ensemble.

    ``exponent_fit`` is :func:`mse_exponent_fit` on the ensemble mean error
    series; ``exponent_mean`` averages the per-trial estimates.
    """

    trials: int
    base_seed: int
    streams: tuple
    mse_mean: np.ndarray
    mse_stderr: np.ndarray
    mse_series: np.ndarray
    exponent_mean: np.ndarray
    exponent_stderr: np.ndarray
    exponent_fit: np.ndarray
    avg_power_mean: float
    avg_power_stderr: float
    power_series: np.ndarray
    grid_error_rate: np.ndarray
    identity_gap: float


def mean_and_stderr(values):
    """
    Mean and standard error along the trial axis, NaNs ignored.
    """
    values = np.asarray(values, dtype=float)
    with warnings.catch_warnings(), np.errstate(invalid='ignore', divide='ignore'):
        warnings.simplefilter('ignore', RuntimeWarning)
        mean = np.nanmean(values, axis=0)
        count = np.sum(~np.isnan(values), axis=0)
        if values.shape[0] < 2:
            return mean, np.zeros_like(mean)
        stderr = np.nanstd(values, axis=0, ddof=1) / np.sqrt(count)
    return mean, stderr


def second_half(n):
    return slice(n // 2, n)


def mse_exponent_fit(series):
    """
    Least-squares slope of ``-log D^(i)`` against ``2i`` over the last half of the horizon.

    Args:
        series (array): ``D^(1), …, D^(n)``.

    Raises:
        NonPositiveMseError: Some ``D^(i)`` in the window is not positive.
    """
    series = np.asarray(series, dtype=float)
    n = series.size
    window = second_half(n)
    steps = np.arange(1, n + 1)[window]
    values = series[window]
    if steps.size < 2:
        raise ValueError('exponent fit needs a horizon of at least 4')
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise NonPositiveMseError('squared error must be positive over the fitted window')
    return float(stats.linregress(2.0 * steps, -np.log(values)).slope)


def _exponent_estimates(sq_error):
    estimates = np.full(sq_error.shape[1], np.nan)
    for j in range(sq_error.shape[1]):
        try:
            estimates[j] = mse_exponent_fit(sq_error[:, j])
        except (NonPositiveMseError, ValueError):
            pass
    return estimates


def check_horizon(modes, n):
    """
    Raises:
        HorizonError: ``n·log|a_j| > 300`` for some mode.
    """
    if n < 1:
        raise ConfigError('n', 'horizon must be at least 1')
    worst = max(math.log(abs(mode)) for mode in modes)
    if n * worst > HORIZON_LOG_LIMIT:
        raise HorizonError(
            'n*log|a| = {0:.1f} exceeds {1}; |a|^(-2n) would underflow'.format(
                n * worst, HORIZON_LOG_LIMIT))


def draw_messages(rng, k, grids=None, complex_valued=True):
    """
    Uniform messages on the unit square (unit interval for a real channel), or
    uniformly chosen grid points.

    Returns:
        tuple: ``(theta, grid indices or None)``
    """
    if grids is not None:
        indices = np.array([rng.integers(grid.size) for grid in grids])
        theta = np.array([grid.point(index) for grid, index in zip(grids, indices)])
        return theta, indices
    if complex_valued:
        return rng.uniform(size=k) + 1j * rng.uniform(size=k), None
    return rng.uniform(size=k).astype(complex), None


def run_lqg_loop(modes, C, theta, noise, offset=0j):
    """
    Run the broadcast encoder and k decoders over ``noise`` (shape ``(n, k)``).

    Returns:
        tuple: ``(x, estimates, identity gaps)``, the last two of shape ``(n, k)``.
    """
    n, k = noise.shape
    modes = np.asarray(modes, dtype=complex)
    encoder = BcEncoder(modes, C, theta - offset)
    decoders = [BcDecoder(j, mode) for j, mode in enumerate(modes)]
    x = np.empty(n, dtype=complex)
    estimates = np.empty((n, k), dtype=complex)
    gaps = np.empty((n, k))
    symbol = encoder.transmit()
    for i in range(n):
        x[i] = symbol
        y = ChannelInstance.output(symbol, noise[i])
        for j, decoder in enumerate(decoders):
            estimates[i, j] = bc_decode_step(decoder, y[j]) + offset
        symbol = bc_encode_step(encoder, y)
        if not np.all(np.isfinite(encoder.S)):
            raise UnstableClosedLoopError('non-finite encoder state at step {0}'.format(i + 1))
        gaps[i] = np.abs((theta - estimates[i]) - modes ** (-(i + 1)) * encoder.S)
    return x, estimates, gaps


def run_trial(spec, solution, n, seed, stream=0, grids=None, noiseless=False, center=False,
              complex_valued=True):
    """
    One closed-loop run of the LQG broadcast code.

    With the ``lqg_feedback.simulator`` logger at DEBUG level, every step checks
    the error identity and raises :class:`IdentityError` on a violation.

    Raises:
        HorizonError: ``|a_j|^{-2n}`` would underflow.
        UnstableClosedLoopError: The encoder state became non-finite.
    """
    check_horizon(spec.modes, n)
    channel = ChannelInstance(spec.noise_cov, seed, stream, complex_valued=complex_valued)
    theta, indices = draw_messages(channel.rng, spec.k, grids, complex_valued)
    noise = np.zeros((n, spec.k), dtype=complex) if noiseless else channel.noise(n)
    offset = (CENTER if complex_valued else 0.5) if center else 0j
    C = solution.C if complex_valued else solution.C.real
    x, estimates, gaps = run_lqg_loop(spec.modes, C, theta, noise, offset)

    identity_gap = float(gaps.max())
    if identity_gap > IDENTITY_TOL and logger.isEnabledFor(logging.DEBUG):
        raise IdentityError('error identity violated by {0:.3e}'.format(identity_gap))

    sq_error = np.abs(theta[None, :] - estimates) ** 2
    power = np.abs(x) ** 2
    grid_errors = None
    if grids is not None:
        decoded = np.array([grid_decode(grid, estimates[-1, j]) for j, grid in enumerate(grids)])
        grid_errors = decoded != indices
    return TrialMetrics(
        sq_error=sq_error,
        mse=sq_error[-1].copy(),
        avg_power=float(np.mean(power[second_half(n)])),
        power=power,
        exponent_est=_exponent_estimates(sq_error),
        grid_errors=grid_errors,
        identity_gap=identity_gap,
    )


def _run_indexed(config, base_seed, index):
    try:
        return run_trial(
            config.spec, config.solution, config.n, base_seed, stream=index,
            grids=config.grids, noiseless=config.noiseless, center=config.center)
    except TrialError:
        raise
    except Exception as e:
        raise TrialError(index, e) from e


def map_trials(worker, trials, parallelism):
    """
    Map ``worker`` over trial indices, returning results in trial order.
    """
    if parallelism <= 1 or trials <= 1:
        return [worker(index) for index in range(trials)]
    chunksize = max(1, trials // (4 * parallelism))
    with ProcessPoolExecutor(max_workers=parallelism) as executor:
        return list(executor.map(worker, range(trials), chunksize=chunksize))


def run_ensemble(config, trials, base_seed, parallelism=1):
    """
    Run ``trials`` independent trials and aggregate them in trial order.

    The result depends only on ``config``, ``trials`` and ``base_seed``.

    Raises:
        TrialError: A trial failed; carries the trial index.
    """
    if trials < 1:
        raise ConfigError('trials', 'at least one trial is required')
    logger.info('Running %d trials (n=%d, k=%d, jobs=%d)',
                trials, config.n, config.spec.k, parallelism)
    results = map_trials(partial(_run_indexed, config, base_seed), trials, parallelism)

    sq_error = np.stack([result.sq_error for result in results])
    mse_mean, mse_stderr = mean_and_stderr([result.mse for result in results])
    exponent_mean, exponent_stderr = mean_and_stderr([result.exponent_est for result in results])
    power_mean, power_stderr = mean_and_stderr([result.avg_power for result in results])
    mse_series = sq_error.mean(axis=0)
    exponent_fit = np.full(config.spec.k, np.nan)
    for j in range(config.spec.k):
        try:
            exponent_fit[j] = mse_exponent_fit(mse_series[:, j])
        except (NonPositiveMseError, ValueError):
            logger.warning('No exponent fit for receiver %d', j + 1)
    grid_error_rate = None
    if config.grids is not None:
        grid_error_rate = np.mean([result.grid_errors for result in results], axis=0)
    return EnsembleResult(
        trials=trials,
        base_seed=base_seed,
        streams=tuple(range(trials)),
        mse_mean=mse_mean,
        mse_stderr=mse_stderr,
        mse_series=mse_series,
        exponent_mean=exponent_mean,
        exponent_stderr=exponent_stderr,
        exponent_fit=exponent_fit,
        avg_power_mean=float(power_mean),
        avg_power_stderr=float(power_stderr),
        power_series=np.mean([result.power for result in results], axis=0),
        grid_error_rate=grid_error_rate,
        identity_gap=max(result.identity_gap for result in results),
    )


def message_moment(k, center=False):
    """
    ``E[Θ·Θ′]`` for messages uniform on the unit square.
    """
    if center:
        return 2 * UNIFORM_VARIANCE * np.eye(k, dtype=complex)
    mean = 0.5 + 0.5j
    moment = np.full((k, k), abs(mean) ** 2, dtype=complex)
    np.fill_diagonal(moment, 2.0 / 3.0)
    return moment


def predicted_mse_series(spec, solution, n, center=False):
    """
    ``D_j^(i) = |a_j|^{-2i}·(K_{i+1})_{jj}`` with ``K_{i+1} = (A−BC)K_i(A−BC)′ + K_z``.

    Returns:
        array: shape ``(n, k)``
    """
    check_horizon(spec.modes, n)
    M = solution.closed_loop
    MH = ctranspose(M)
    moduli = np.abs(np.array(spec.modes)) ** 2
    covariance = message_moment(spec.k, center)
    series = np.empty((n, spec.k))
    for i in range(1, n + 1):
        covariance = M @ covariance @ MH + spec.noise_cov
        series[i - 1] = moduli ** (-i) * np.diag(covariance).real
    return series


@dataclass
class P2pTrace:
    x: np.ndarray
    y: np.ndarray
    sq_error: np.ndarray
    identity_gap: float


@dataclass
class P2pEnsemble:
    """
    Point-to-point traces, one row per trial.
    """

    x: np.ndarray
    y: np.ndarray
    mse_series: np.ndarray
    exponent_fit: float
    identity_gap: float

    def coefficient_track(self):
        return sk_coefficient_track(self.x, self.y)


def run_p2p_trial(a, n, seed, stream=0, noiseless=False):
    """
    One run of the point-to-point code over the real channel with unit noise.
    """
    check_horizon([a], n)
    channel = ChannelInstance(np.eye(1), seed, stream, complex_valued=False)
    theta = float(channel.rng.uniform())
    noise = np.zeros(n) if noiseless else channel.noise(n)[:, 0].real
    code = P2pCode(a, theta)
    x = np.empty(n)
    y = np.empty(n)
    sq_error = np.empty(n)
    gap = 0.0
    symbol = code.transmit()
    for i in range(n):
        x[i] = symbol
        y[i] = ChannelInstance.output(symbol, noise[i])
        symbol = p2p_step(code, y[i])
        sq_error[i] = (theta - p2p_decode(code, i + 1)) ** 2
        gap = max(gap, code.identity_gap())
    return P2pTrace(x=x, y=y, sq_error=sq_error, identity_gap=gap)


def _run_p2p_indexed(a, n, base_seed, index):
    try:
        return run_p2p_trial(a, n, base_seed, stream=index)
    except Exception as e:
        raise TrialError(index, e) from e


def run_p2p_ensemble(a, n, trials, base_seed, parallelism=1):
    if trials < 1:
        raise ConfigError('trials', 'at least one trial is required')
    results = map_trials(partial(_run_p2p_indexed, a, n, base_seed), trials, parallelism)
    mse_series = np.mean([result.sq_error for result in results], axis=0)
    try:
        exponent_fit = mse_exponent_fit(mse_series)
    except (NonPositiveMseError, ValueError):
        exponent_fit = math.nan
    return P2pEnsemble(
        x=np.stack([result.x for result in results]),
        y=np.stack([result.y for result in results]),
        mse_series=mse_series,
        exponent_fit=exponent_fit,
        identity_gap=max(result.identity_gap for result in results),
    )


@dataclass
class ComparisonResult:
    """
    Paired OL versus LQG powers on the real two-receiver channel.
    """

    trials: int
    lqg_power: float
    lqg_stderr: float
    ol_power: float
    ol_stderr: float
    difference: float
    difference_stderr: float
    lqg_predicted: float
    ol_predicted: float

    @property
    def separation_sigma(self):
        if self.difference_stderr == 0:
            return math.inf if self.difference > 0 else 0.0
        return self.difference / self.difference_stderr


def two_receiver_spec(a):
    return SystemSpec((a, -a), np.eye(2))


def _compare_trial(a, n, C, base_seed, index):
    """
    Drive both codes with the same messages and noise; return their average powers.
    """
    try:
        channel = ChannelInstance(np.eye(2), base_seed, index, complex_valued=False)
        theta = channel.rng.uniform(size=2)
        noise = channel.noise(n).real
        x, _, _ = run_lqg_loop((a, -a), C, theta.astype(complex), noise.astype(complex), 0.5)
        lqg_power = float(np.mean(np.abs(x[second_half(n)]) ** 2))

        code = OlCode(a, theta)
        symbols = np.empty(n)
        symbol = code.transmit()
        for i in range(n):
            symbols[i] = symbol
            symbol = ol_step(code, symbol + noise[i, 0], symbol + noise[i, 1])
        ol_power = float(np.mean(symbols[second_half(n)] ** 2))
    except Exception as e:
        raise TrialError(index, e) from e
    return lqg_power, ol_power


def compare_ol(a, n, trials, base_seed, parallelism=1):
    """
    Compare the OL code against the LQG code at the rate pair ``(log a, log a)``.
    """
    if trials < 2:
        raise ConfigError('trials', 'a paired comparison needs at least two trials')
    check_horizon([a], n)
    solution = solve(two_receiver_spec(a))
    worker = partial(_compare_trial, a, n, solution.C.real, base_seed)
    powers = np.array(map_trials(worker, trials, parallelism))
    (lqg_power, ol_power), (lqg_stderr, ol_stderr) = mean_and_stderr(powers)
    difference, difference_stderr = mean_and_stderr(powers[:, 1] - powers[:, 0])
    return ComparisonResult(
        trials=trials,
        lqg_power=float(lqg_power),
        lqg_stderr=float(lqg_stderr),
        ol_power=float(ol_power),
        ol_stderr=float(ol_stderr),
        difference=float(difference),
        difference_stderr=float(difference_stderr),
        lqg_predicted=solution.power,
        ol_predicted=ol_asymptotic_power(a),
    )
