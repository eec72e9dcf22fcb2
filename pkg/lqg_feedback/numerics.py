# coding: utf-8

"""
Dense complex matrix helpers shared by the solver, the codes and the simulator.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; ``M′`` in the
docstrings is the conjugate transpose.
"""

import logging
import math

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, InvalidCovarianceError, NumericalError
from .settings import EIGEN_CLAMP_TOL, EIGEN_REJECT_TOL, HERMITIAN_TOL, RANK_TOL

logger = logging.getLogger(__name__)

UINT64 = 2 ** 64


def ctranspose(matrix):
    return np.conj(np.asarray(matrix)).T


def max_norm(matrix):
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix)))


def hermitize(matrix):
    """
    Return the Hermitian part ``(M + M′) / 2``.
    """
    matrix = np.asarray(matrix, dtype=complex)
    return (matrix + ctranspose(matrix)) / 2


def is_hermitian(matrix, tol=HERMITIAN_TOL):
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return max_norm(matrix - ctranspose(matrix)) <= tol


def _square(matrix, name):
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidCovarianceError('{0} must be square, got shape {1}'.format(name, matrix.shape))
    return matrix


def hermitian_psd_sqrt(covariance):
    """
    Hermitian square root ``L`` of a PSD matrix, so that ``L·L′ = K``.

    Eigenvalues in ``[-1e-6, 1e-10·max(1, λ_max)]`` are set to zero, so rank
    deficient covariances (e.g. the rank-one circulant) keep their rank.

    Raises:
        InvalidCovarianceError: ``K`` is not Hermitian or has an eigenvalue below -1e-6.
    """
    covariance = _square(covariance, 'covariance')
    if not is_hermitian(covariance):
        raise InvalidCovarianceError('covariance is not Hermitian')
    eigenvalues, vectors = np.linalg.eigh(hermitize(covariance))
    smallest = float(eigenvalues.min()) if eigenvalues.size else 0.0
    if smallest < -EIGEN_REJECT_TOL:
        raise InvalidCovarianceError(
            'covariance has eigenvalue {0:.3e}, not positive semidefinite'.format(smallest))
    if smallest < -EIGEN_CLAMP_TOL:
        logger.warning('Clamping negative covariance eigenvalue %.3e to zero', smallest)
    floor = EIGEN_CLAMP_TOL * max(1.0, float(eigenvalues.max()) if eigenvalues.size else 0.0)
    roots = np.sqrt(np.where(eigenvalues > floor, eigenvalues, 0.0))
    return (vectors * roots) @ ctranspose(vectors)


def dft_matrix(k):
    """
    Unitary k-point DFT matrix, ``F[j, l] = exp(-2πi·j·l/k) / √k``.
    """
    return linalg.dft(k, scale='sqrtn')


def circulant_from_eigenvalues(eigenvalues):
    """
    Build ``F·diag(λ)·F′``.

    With real ``λ`` the result is Hermitian and circulant.
    """
    eigenvalues = np.asarray(eigenvalues)
    if eigenvalues.ndim != 1 or eigenvalues.size < 1:
        raise ValueError('eigenvalues must be a non-empty vector')
    dft = dft_matrix(eigenvalues.size)
    matrix = (dft * eigenvalues) @ ctranspose(dft)
    if np.isrealobj(eigenvalues):
        matrix = hermitize(matrix)
    return matrix


def spectral_radius(matrix):
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError('spectral radius needs a square matrix')
    try:
        eigenvalues = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalError('eigensolver failed: {0}'.format(e)) from e
    return float(np.max(np.abs(eigenvalues)))


def numerical_rank(matrix, tol=RANK_TOL):
    return int(np.linalg.matrix_rank(np.asarray(matrix, dtype=complex), tol=tol, hermitian=True))


def min_eigenvalue(matrix):
    return float(np.linalg.eigvalsh(hermitize(matrix)).min())


def fixed_point(step, start, tol, max_iter, label='iteration'):
    """
    Iterate ``x <- step(x)`` from ``start``.

    The iteration is converged once the max-norm step is at most
    ``tol·max(1, ‖x‖max)``; it then keeps going while the step still shrinks,
    so the returned iterate sits on the round-off floor.

    Returns:
        tuple: ``(iterate, iteration count)``

    Raises:
        ConvergenceError: The step never got below tolerance within ``max_iter``
            iterations, or the iterate became non-finite.
    """
    current = start
    previous = math.inf
    converged = False
    for count in range(1, max_iter + 1):
        following = step(current)
        if not np.all(np.isfinite(following)):
            raise ConvergenceError('{0} diverged after {1} iterations'.format(label, count))
        change = max_norm(following - current)
        current = following
        if change <= tol * max(1.0, max_norm(current)):
            converged = True
            if change == 0.0 or change >= previous:
                break
        previous = change
    if not converged:
        raise ConvergenceError(
            '{0} did not converge in {1} iterations (last step {2:.3e})'.format(
                label, max_iter, previous))
    logger.debug('%s converged after %d iterations', label, count)
    return current, count


def trial_generator(seed, stream=0):
    """
    Counter-based generator for one (seed, stream) pair.

    ``Philox`` keyed by both numbers gives every trial an independent,
    reproducible stream regardless of which worker runs it.
    """
    key = np.array([int(seed) % UINT64, int(stream) % UINT64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class GaussianSampler:
    """
    Draws i.i.d. noise vectors with a fixed covariance.

    In the complex case the vectors are circularly symmetric, ``CN(0, K)``:
    ``Z = L·w`` where ``w`` has independent real and imaginary parts of
    variance 1/2 each, so ``E[Z·Z′] = K``. In the real case ``w ~ N(0, I)``.

    A sampler owns its generator; give each trial its own sampler.
    """

    def __init__(self, covariance, seed, stream=0, complex_valued=True):
        self.covariance = _square(covariance, 'covariance')
        self.factor = hermitian_psd_sqrt(self.covariance)
        self.complex_valued = complex_valued
        if not complex_valued:
            if max_norm(self.covariance.imag) > HERMITIAN_TOL:
                raise InvalidCovarianceError('a real sampler needs a real covariance')
            self.factor = self.factor.real
        self.seed = seed
        self.stream = stream
        self.rng = trial_generator(seed, stream)

    @property
    def k(self):
        return self.covariance.shape[0]

    def draw(self, count):
        """
        Return ``count`` noise vectors as the rows of a ``(count, k)`` array.
        """
        shape = (count, self.k)
        if self.complex_valued:
            white = (self.rng.standard_normal(shape)
                     + 1j * self.rng.standard_normal(shape)) * math.sqrt(0.5)
        else:
            white = self.rng.standard_normal(shape)
        return white @ self.factor.T
