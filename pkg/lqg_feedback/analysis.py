# coding: utf-8

"""
Closed forms and root finding: power gain and sum rate, MAC duality and the
pre-log experiments with rank-deficient noise covariances.

All rates are in nats.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .errors import BracketError, ConfigError, InvalidCovarianceError, SolverInconsistencyError
from .numerics import circulant_from_eigenvalues, numerical_rank
from .settings import PHI_XTOL, POWER_REL_TOL
from .solver import SystemSpec, solve

logger = logging.getLogger(__name__)


def _check(k, power):
    if int(k) != k or k < 1:
        raise ConfigError('k', 'receiver count must be a positive integer')
    if not power > 0:
        raise ConfigError('power', 'power must be positive')


def _bisect(residual, k, label):
    low, high = residual(1.0), residual(float(k))
    if low == 0.0:
        return 1.0
    if high == 0.0:
        return float(k)
    if low * high > 0:
        raise BracketError('{0} residual has no sign change on [1, {1}]'.format(label, k))
    return float(optimize.bisect(residual, 1.0, float(k), xtol=PHI_XTOL))


def phi_residual(k, power, value):
    """
    ``(k-1)·log(1+Pφ) - k·log(1+(P/k)·φ(k-φ))``, zero at the power gain.
    """
    return ((k - 1) * math.log1p(power * value)
            - k * math.log1p(power / k * value * (k - value)))


def phi(k, power):
    """
    Power gain: the root in ``[1, k]`` of ``(1+Pφ)^{k-1} = (1+(P/k)φ(k-φ))^k``.

    Raises:
        BracketError: The residual does not change sign on ``[1, k]``.
    """
    _check(k, power)
    if k == 1:
        return 1.0
    return _bisect(lambda value: phi_residual(k, power, value), k, 'phi')


def sum_rate(k, power):
    return 0.5 * math.log1p(power * phi(k, power))


def mac_phi(k, power):
    """
    Root in ``[1, k]`` of ``(1+kPφ)^{k-1} = (1+Pφ(k-φ))^k``.
    """
    _check(k, power)
    if k == 1:
        return 1.0

    def residual(value):
        return ((k - 1) * math.log1p(k * power * value)
                - k * math.log1p(power * value * (k - value)))

    return _bisect(residual, k, 'MAC phi')


def mac_sum_rate(k, power):
    return 0.5 * math.log1p(k * power * mac_phi(k, power))


def duality_check(k, power):
    """
    ``|R_BC(k, P) - R_MAC(k, P/k)|``.
    """
    return abs(sum_rate(k, power) - mac_sum_rate(k, power / k))


@dataclass(frozen=True)
class SumRatePoint:
    k: int
    power: float
    phi: float
    rate: float

    @property
    def rate_no_feedback(self):
        return 0.5 * math.log1p(self.power)

    @property
    def gain(self):
        return self.phi

    @property
    def relative_residual(self):
        """
        Residual of the defining equation relative to ``(1+Pφ)^{k-1}``.
        """
        return abs(math.expm1(-phi_residual(self.k, self.power, self.phi)))


def sum_rate_point(k, power):
    value = phi(k, power)
    return SumRatePoint(k=k, power=power, phi=value, rate=0.5 * math.log1p(power * value))


def sweep(k, powers):
    """
    One :class:`SumRatePoint` per power.

    Raises:
        ConfigError: Powers are not positive and strictly ascending.
    """
    powers = [float(power) for power in powers]
    if not powers or any(power <= 0 for power in powers):
        raise ConfigError('powers', 'powers must be positive')
    if any(later <= earlier for earlier, later in zip(powers, powers[1:])):
        raise ConfigError('powers', 'powers must be strictly ascending')
    return [sum_rate_point(k, power) for power in powers]


def rank_one_circulant_cov(k):
    """
    ``F·diag(0, …, 0, k)·F′``: circulant, rank one, unit diagonal.
    """
    if k < 1:
        raise ConfigError('k', 'receiver count must be positive')
    eigenvalues = np.zeros(k)
    eigenvalues[-1] = k
    return circulant_from_eigenvalues(eigenvalues)


def rank_r_cov(k, r):
    """
    Rank-``r`` covariance: a rank-one circulant block of size ``k-r+1`` followed
    by an identity block of size ``r-1``.
    """
    if not 1 <= r <= k:
        raise ConfigError('rank', 'rank must lie in [1, {0}], got {1}'.format(k, r))
    blocks = [rank_one_circulant_cov(k - r + 1)]
    if r > 1:
        blocks.append(np.eye(r - 1))
    return linalg.block_diag(*blocks).astype(complex)


def simo_upper_bound(covariance, power):
    """
    ``½·log(1 + P·‖K^{-1/2}·1‖²)``, the capacity with all receivers cooperating.

    Raises:
        InvalidCovarianceError: ``covariance`` is singular.
    """
    covariance = np.atleast_2d(np.asarray(covariance, dtype=complex))
    size = covariance.shape[0]
    if numerical_rank(covariance) < size:
        raise InvalidCovarianceError('SIMO bound needs an invertible covariance')
    ones = np.ones(size)
    gain = float(np.vdot(ones, np.linalg.solve(covariance, ones)).real)
    return 0.5 * math.log1p(power * gain)


def prelog_upper_bound(noise_cov, power):
    """
    Sum-rate upper bound for a rank-``r`` covariance: ``r`` independent
    receivers, picked by pivoted QR, cooperate; each of the other ``k-r``
    contributes at most ``½·log(1+P)``.
    """
    noise_cov = np.asarray(noise_cov, dtype=complex)
    k = noise_cov.shape[0]
    r = numerical_rank(noise_cov)
    _, _, pivots = linalg.qr(noise_cov, pivoting=True)
    chosen = np.sort(pivots[:r])
    block = noise_cov[np.ix_(chosen, chosen)]
    return (k - r) * 0.5 * math.log1p(power) + simo_upper_bound(block, power)


def prelog_power(k, a):
    """
    ``(a^{2k}-1)/a^{2(k-1)}``, the power of the LQG code with rank-one circulant noise.
    """
    return math.expm1(2 * k * math.log(a)) / a ** (2 * (k - 1))


@dataclass(frozen=True, eq=False)
class PrelogExperiment:
    """
    Achieved sum rates and powers of the LQG code for a rank-``r`` noise covariance.

    ``ratios`` are ``R / ½log(1+P)``, approaching ``limit = k-r+1`` as ``a`` grows.
    """

    k: int
    r: int
    noise_cov: np.ndarray
    a_grid: tuple
    rates: tuple
    powers: tuple
    solver_powers: tuple
    ratios: tuple
    upper_bound_ratios: tuple

    @property
    def limit(self):
        return self.k - self.r + 1

    def rows(self):
        return zip(self.a_grid, self.rates, self.powers, self.solver_powers, self.ratios,
                   self.upper_bound_ratios)


def prelog_achieved(k, r, a_grid):
    """
    Run the LQG code on the effective ``k-r+1`` receivers of :func:`rank_r_cov`.

    Raises:
        SolverInconsistencyError: The solver power differs from the closed form
            by more than 1e-8 relative.
    """
    a_grid = tuple(float(a) for a in a_grid)
    if not a_grid or any(a <= 1.0 for a in a_grid):
        raise ConfigError('a_grid', 'every grid value must exceed 1')
    noise_cov = rank_r_cov(k, r)
    rank = numerical_rank(noise_cov)
    if rank != r:
        raise SolverInconsistencyError('constructed covariance has rank {0}, not {1}'.format(rank, r))
    effective = k - r + 1
    block = rank_one_circulant_cov(effective)
    rates, powers, solver_powers, ratios, bounds = [], [], [], [], []
    for a in a_grid:
        power = prelog_power(effective, a)
        solver_power = solve(SystemSpec.symmetric(effective, a, block)).power
        if abs(solver_power - power) > POWER_REL_TOL * power:
            raise SolverInconsistencyError(
                'a={0}: solver power {1:.12g} differs from closed form {2:.12g}'.format(
                    a, solver_power, power))
        rate = effective * math.log(a)
        reference = 0.5 * math.log1p(power)
        logger.debug('a=%g rate=%.6g power=%.6g', a, rate, power)
        rates.append(rate)
        powers.append(power)
        solver_powers.append(solver_power)
        ratios.append(rate / reference)
        bounds.append(prelog_upper_bound(noise_cov, power) / reference)
    return PrelogExperiment(
        k=k, r=r, noise_cov=noise_cov, a_grid=a_grid, rates=tuple(rates), powers=tuple(powers),
        solver_powers=tuple(solver_powers), ratios=tuple(ratios),
        upper_bound_ratios=tuple(bounds))
