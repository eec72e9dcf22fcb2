# coding: utf-8

"""
Cost-free LQG problem of the broadcast feedback code.

For the system ``S_{i+1} = A·S_i + B·X_i + Z_i`` with diagonal ``A`` and
``B = 1``, the minimum-power stabilizing control ``X_i = -C·S_i`` is given
by the stabilizing solution ``G`` of the discrete algebraic Riccati equation

    G = A′GA − A′GB(B′GB + 1)⁻¹B′GA

and uses power ``P = C·K_s·C′ = trace(G·K_z)``, where ``K_s`` solves the
Lyapunov equation ``K = (A−BC)K(A−BC)′ + K_z``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSystemError, SolverInconsistencyError, UnstableClosedLoopError
from .numerics import (
    circulant_from_eigenvalues, ctranspose, fixed_point, hermitize, is_hermitian,
    max_norm, min_eigenvalue, spectral_radius,
)
from .settings import (
    DALE_MAX_ITER, DALE_STEP_TOL, DARE_MAX_ITER, DARE_RESIDUAL_TOL, DARE_STEP_TOL,
    DISTINCT_MODES_TOL, EIGEN_REJECT_TOL, HERMITIAN_TOL, POWER_REL_TOL, UNIT_DIAGONAL_TOL,
)

logger = logging.getLogger(__name__)

#: Closed loops with a spectral radius above this get a warning.
MARGIN_WARNING = 1e-3


def symmetric_modes(k, a):
    """
    Modes ``a·exp(-2πi(j-1)/k)``, j = 1..k, evenly spread on the circle of radius ``a``.

    With this labelling the DFT matrix diagonalizes the Riccati solution with
    eigenvalues in decreasing order.
    """
    return tuple(complex(mode) for mode in a * np.exp(-2j * np.pi * np.arange(k) / k))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """
    One broadcast instance: open-loop modes, input map and noise covariance.

    Args:
        modes (sequence): Complex modes ``a_1..a_k``, pairwise distinct, ``|a_j| > 1``.
        noise_cov (array): ``k×k`` Hermitian PSD noise covariance with unit diagonal.
        input_map (array): Input column ``B``; all ones when omitted.

    Raises:
        InvalidSystemError: An invariant does not hold.
    """

    modes: tuple
    noise_cov: np.ndarray
    input_map: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, 'modes', tuple(complex(mode) for mode in self.modes))
        object.__setattr__(self, 'noise_cov', np.array(self.noise_cov, dtype=complex))
        if self.input_map is None:
            input_map = np.ones(len(self.modes), dtype=complex)
        else:
            input_map = np.array(self.input_map, dtype=complex).reshape(-1)
        object.__setattr__(self, 'input_map', input_map)
        self.validate()

    @classmethod
    def symmetric(cls, k, a, noise_cov=None):
        """
        Spec with :func:`symmetric_modes`; identity noise covariance by default.
        """
        if noise_cov is None:
            noise_cov = np.eye(k)
        return cls(symmetric_modes(k, a), noise_cov)

    @property
    def k(self):
        return len(self.modes)

    @property
    def A(self):
        return np.diag(np.array(self.modes, dtype=complex))

    @property
    def B(self):
        return self.input_map

    def validate(self):
        k = self.k
        if k < 1:
            raise InvalidSystemError('modes', 'at least one mode is required')
        modes = np.array(self.modes)
        if not np.all(np.isfinite(modes)):
            raise InvalidSystemError('modes', 'modes must be finite')
        inside = [mode for mode in self.modes if abs(mode) <= 1.0]
        if inside:
            raise InvalidSystemError(
                'modes', 'every mode needs |a_j| > 1, got {0}'.format(inside[0]))
        gaps = np.abs(modes[:, None] - modes[None, :])
        np.fill_diagonal(gaps, np.inf)
        if k > 1 and gaps.min() <= DISTINCT_MODES_TOL:
            raise InvalidSystemError('modes', 'modes must be pairwise distinct')
        if self.input_map.shape != (k,) or np.any(self.input_map == 0):
            raise InvalidSystemError('input_map', 'input map needs {0} nonzero entries'.format(k))
        cov = self.noise_cov
        if cov.shape != (k, k):
            raise InvalidSystemError(
                'cov', 'noise covariance must be {0}x{0}, got {1}'.format(k, cov.shape))
        if not np.all(np.isfinite(cov)) or not is_hermitian(cov, HERMITIAN_TOL):
            raise InvalidSystemError('cov', 'noise covariance must be Hermitian')
        if max_norm(np.diag(cov) - 1.0) > UNIT_DIAGONAL_TOL:
            raise InvalidSystemError('cov', 'noise covariance must have unit diagonal')
        if min_eigenvalue(cov) < -EIGEN_REJECT_TOL:
            raise InvalidSystemError('cov', 'noise covariance must be positive semidefinite')


def riccati_step(G, A, B):
    """
    One step ``G ↦ A′GA − A′GB(B′GB+1)⁻¹B′GA`` of the Riccati recursion.
    """
    AH = ctranspose(A)
    GB = G @ B
    AGB = AH @ GB
    scale = (np.vdot(B, GB)).real + 1.0
    return hermitize(AH @ G @ A - np.outer(AGB, np.conj(AGB)) / scale)


def dare_residual(G, A, B):
    return max_norm(G - riccati_step(G, A, B))


def information_step(X, A, B):
    """
    One step ``X ↦ A⁻¹(X + BB′)A⁻′`` of the Riccati recursion for ``X = G⁻¹``.
    """
    inner = X + np.outer(B, np.conj(B))
    left = np.linalg.solve(A, inner)
    return hermitize(ctranspose(np.linalg.solve(A, ctranspose(left))))


def solve_riccati(A, B, tol=DARE_STEP_TOL, max_iter=DARE_MAX_ITER):
    """
    Iterate the Riccati recursion from ``G_0 = I`` to its fixed point.

    Raises:
        ConvergenceError: No fixed point within ``max_iter`` steps.
        SolverInconsistencyError: The fixed point leaves a DARE residual above tolerance.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(-1)
    G, count = fixed_point(
        lambda current: riccati_step(current, A, B),
        np.eye(A.shape[0], dtype=complex), tol, max_iter, label='DARE')
    residual = dare_residual(G, A, B)
    logger.debug('DARE solved in %d iterations, residual %.3e', count, residual)
    if residual > DARE_RESIDUAL_TOL * max(1.0, max_norm(G)):
        raise SolverInconsistencyError('DARE residual {0:.3e} above tolerance'.format(residual))
    return G


def solve_information(A, B, tol=DARE_STEP_TOL, max_iter=DARE_MAX_ITER):
    """
    Iterate the information-form recursion from ``X_0 = I``; the limit is ``G⁻¹``.

    The information form is a stable Lyapunov recursion, so small eigenvalues
    of ``G`` stay accurate when ``|a_j|^{2k}`` is large.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(-1)
    X, count = fixed_point(
        lambda current: information_step(current, A, B),
        np.eye(A.shape[0], dtype=complex), tol, max_iter, label='information DARE')
    logger.debug('Information form solved in %d iterations', count)
    return X


def gain(G, A, B):
    """
    Optimal gain row ``C = (B′GB + 1)⁻¹B′GA``.
    """
    G = np.asarray(G, dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(-1)
    scale = (np.vdot(B, G @ B)).real + 1.0
    return (np.conj(B) @ G @ np.asarray(A, dtype=complex)) / scale


def closed_loop(A, B, C):
    return np.asarray(A, dtype=complex) - np.outer(np.asarray(B).reshape(-1), C)


def solve_dare(spec):
    """
    Stabilizing solution ``G`` of the DARE for ``spec``.

    Raises:
        ConvergenceError: The iteration did not settle (|a_j| close to 1 or
            near-duplicate modes).
        UnstableClosedLoopError: ``A − BC`` is not stable.
    """
    G = solve_riccati(spec.A, spec.B)
    radius = spectral_radius(closed_loop(spec.A, spec.B, gain(G, spec.A, spec.B)))
    if radius >= 1.0:
        raise UnstableClosedLoopError('closed loop spectral radius {0:.6f} >= 1'.format(radius))
    return G


def solve_dale(closed_loop_matrix, noise_cov, tol=DALE_STEP_TOL, max_iter=DALE_MAX_ITER):
    """
    Steady-state covariance: the fixed point of ``K ↦ M·K·M′ + K_z`` from ``K_z``.

    Raises:
        UnstableClosedLoopError: ``M`` has spectral radius >= 1.
    """
    M = np.asarray(closed_loop_matrix, dtype=complex)
    noise_cov = np.asarray(noise_cov, dtype=complex)
    radius = spectral_radius(M)
    if radius >= 1.0:
        raise UnstableClosedLoopError(
            'DALE needs a stable closed loop, spectral radius is {0:.6f}'.format(radius))
    MH = ctranspose(M)
    K_s, _ = fixed_point(
        lambda current: hermitize(M @ current @ MH + noise_cov),
        noise_cov, tol, max_iter, label='DALE')
    return K_s


@dataclass(frozen=True, eq=False)
class LqgSolution:
    """
    Solution of the LQG problem for one :class:`SystemSpec`.

    Attributes:
        G: Riccati solution.
        C: Gain row.
        K_s: Steady-state state covariance under ``K_z``.
        power: Asymptotic power ``trace(G·K_z)``.
        information: ``G⁻¹`` from the information-form iteration.
        closed_loop: ``A − BC``.
        spectral_radius: Spectral radius of the closed loop.
        noise_cov: The ``K_z`` that ``K_s`` and ``power`` refer to.
    """

    G: np.ndarray
    C: np.ndarray
    K_s: np.ndarray
    power: float
    information: np.ndarray
    closed_loop: np.ndarray
    spectral_radius: float
    noise_cov: np.ndarray

    @property
    def stability_margin(self):
        return 1.0 - self.spectral_radius


def information_power(information, noise_cov):
    """
    ``trace(G·K_z)`` evaluated as ``trace(X⁻¹·K_z)`` for ``X = G⁻¹``.
    """
    return float(np.trace(np.linalg.solve(information, noise_cov)).real)


def solve(spec):
    """
    Solve the DARE and the DALE for ``spec`` and check the power identity.
    """
    A, B = spec.A, spec.B
    G = solve_riccati(A, B)
    C = gain(G, A, B)
    M = closed_loop(A, B, C)
    radius = spectral_radius(M)
    if radius >= 1.0:
        raise UnstableClosedLoopError('closed loop spectral radius {0:.6f} >= 1'.format(radius))
    if radius > 1.0 - MARGIN_WARNING:
        logger.warning('Closed loop spectral radius %.6f is close to the unit circle', radius)
    information = solve_information(A, B)
    K_s = solve_dale(M, spec.noise_cov)
    solution = LqgSolution(
        G=G, C=C, K_s=K_s,
        power=information_power(information, spec.noise_cov),
        information=information, closed_loop=M, spectral_radius=radius,
        noise_cov=spec.noise_cov)
    asymptotic_power(solution, spec.noise_cov)
    logger.debug('k=%d power=%.12g spectral radius=%.6f', spec.k, solution.power, radius)
    return solution


def asymptotic_power(sol, noise_cov):
    """
    Return ``trace(G·K_z)`` after checking it against ``C·K_s·C′``.

    Raises:
        SolverInconsistencyError: The two disagree by more than ``1e-8·(1 + P)``.
    """
    noise_cov = np.asarray(noise_cov, dtype=complex)
    power = information_power(sol.information, noise_cov)
    if noise_cov.shape == sol.noise_cov.shape and np.array_equal(noise_cov, sol.noise_cov):
        K_s = sol.K_s
    else:
        K_s = solve_dale(sol.closed_loop, noise_cov)
    control_power = float((sol.C @ K_s @ np.conj(sol.C)).real)
    if abs(control_power - power) > POWER_REL_TOL * (1.0 + power):
        raise SolverInconsistencyError(
            'trace(G K_z) = {0:.12g} but C K_s C\' = {1:.12g}'.format(power, control_power))
    return power


@dataclass(frozen=True)
class CirculantSpectrum:
    """
    Eigenvalues of the symmetric-configuration Riccati solution and its diagonal entry.
    """

    eigenvalues: tuple
    diag_value: float

    @property
    def k(self):
        return len(self.eigenvalues)

    @property
    def largest(self):
        return self.eigenvalues[0]


def solve_symmetric(k, a):
    """
    Closed-form Riccati solution for the symmetric modes of radius ``a``.

    ``λ_1 = (a^{2k} − 1)/k``, ``λ_i = λ_1·a^{-2(i-1)}`` and ``G = F·diag(λ)·F′``.
    """
    if k < 1:
        raise ValueError('k must be positive')
    if a <= 1.0:
        raise ValueError('a must exceed 1')
    largest = math.expm1(2 * k * math.log(a)) / k
    eigenvalues = largest * a ** (-2.0 * np.arange(k))
    G = circulant_from_eigenvalues(eigenvalues)
    spectrum = CirculantSpectrum(
        eigenvalues=tuple(float(value) for value in eigenvalues),
        diag_value=float(eigenvalues.sum() / k))
    return spectrum, G


def two_receiver_power(a1, a2, rho):
    """
    Power of the LQG code for two receivers with modes ``a1``, ``a2`` and noise correlation ``rho``.

    Raises:
        InvalidSystemError: Coincident modes, ``|a_j| <= 1`` or ``|rho| >= 1``.
    """
    a1, a2 = complex(a1), complex(a2)
    if abs(a1) <= 1.0 or abs(a2) <= 1.0:
        raise InvalidSystemError('modes', 'both modes need modulus above 1')
    if abs(a1 - a2) <= DISTINCT_MODES_TOL:
        raise InvalidSystemError('modes', 'modes coincide')
    if not -1.0 < rho < 1.0:
        raise InvalidSystemError('cov', 'correlation must lie in (-1, 1)')
    s1, s2 = abs(a1) ** 2, abs(a2) ** 2
    cross = a1 * a2.conjugate()
    value = (abs(cross - 1.0) ** 2 * (s1 + s2 - 2.0)
             - 2.0 * rho * (s1 - 1.0) * (s2 - 1.0) * (cross.real - 1.0))
    return value / abs(a1 - a2) ** 2


def scaled_input_system(a, b):
    """
    Two-receiver system ``A = diag(a, −a)`` with input map ``(−b, b)′``.

    Returns:
        tuple: ``(A, B)``
    """
    return np.diag([complex(a), complex(-a)]), np.array([-b, b], dtype=complex)
