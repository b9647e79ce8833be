import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from spectriple.constants import (DEFAULT_SEED_INT, DISTANCE_MAX_ITER_INT,
                                  DISTANCE_PATIENCE_INT,
                                  DISTANCE_RESTART_AGREEMENT,
                                  DISTANCE_RESTARTS_INT, DISTANCE_STOP_DELTA)
from spectriple.core.exceptions import (DistanceConvergenceError,
                                        InvalidInputError,
                                        UnsupportedRepresentationError)
from spectriple.core.linalg import commutator, spectral_norm
from spectriple.core.triple import FiniteTriple

logger = logging.getLogger("spectriple")

UNBOUNDED = "UNBOUNDED"


@dataclass
class DistanceResult:
    """
    Connes distance between two points of a commutative finite triple.

    Attributes
    ----------
    value : float
        The distance, ``math.inf`` when unbounded.
    certificate : np.ndarray
        Real point values a(x_r) of an element with ||[D, a]|| <= 1 reaching
        ``value`` (for unbounded distances, a direction with [D, a] = 0).
    min_norm : float
        Minimum of ||[D, a]|| subject to a_i - a_j = 1.
    restart_values : list of float
        Minimum found by each restart.
    """

    value: float
    certificate: np.ndarray
    min_norm: Optional[float] = None
    restart_values: List[float] = field(default_factory=list)

    @property
    def is_unbounded(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self):
        return {
            "value": UNBOUNDED if self.is_unbounded else self.value,
            "certificate": [float(x) for x in self.certificate],
            "min_norm": self.min_norm,
            "restart_values": list(self.restart_values),
        }


def _commutator_generators(t: FiniteTriple) -> List[np.ndarray]:
    if not t.algebra.is_commutative:
        raise UnsupportedRepresentationError("distance needs a commutative algebra C^k")
    if not t.is_diagonal_rep():
        raise UnsupportedRepresentationError()
    d = t.dirac_or_zero
    return [commutator(d, b) for b in t.rep_basis]


def _objective(generators: np.ndarray, a: np.ndarray):
    """sigma_max(sum_r a_r C_r) and its gradient Re(u* C_r v)."""
    m = np.tensordot(a, generators, axes=1)
    u, s, vh = scipy.linalg.svd(m)
    top_u, top_v = u[:, 0], vh[0].conj()
    grad = np.array([np.vdot(top_u, c @ top_v).real for c in generators])
    return s[0], grad


def _subgradient_descent(generators, embed, project, x0, max_iter, stop_delta, patience):
    """
    Minimise sigma_max over the free coordinates with diminishing steps.

    ``embed`` maps free coordinates to the full point-value vector and
    ``project`` maps a full gradient back to the free coordinates.
    """
    x = x0.copy()
    best_x = x.copy()
    best, _ = _objective(generators, embed(x))
    step0 = max(best, 1.0) / max(1.0, np.sqrt(len(x)))
    stale = 0
    for it in range(max_iter):
        value, grad = _objective(generators, embed(x))
        if value < best - stop_delta:
            best, best_x = value, x.copy()
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
        g = project(grad)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            break
        x = x - step0 / np.sqrt(it + 1.0) * g / norm
    return best_x, best


def _polish(objective, x, value):
    """Brent on one free coordinate, Nelder-Mead on more."""
    if len(x) == 1:
        result = scipy.optimize.minimize_scalar(
            lambda z: objective(np.array([z])),
            bracket=(x[0], x[0] + 0.1),
            method="brent",
            options={"xtol": 1e-14, "maxiter": 1000},
        )
        candidate, candidate_value = np.array([result.x]), float(result.fun)
    else:
        result = scipy.optimize.minimize(
            objective,
            x,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000},
        )
        candidate, candidate_value = result.x, float(result.fun)
    if candidate_value < value:
        return candidate, candidate_value
    return x, value


def connes_distance(
    t: FiniteTriple,
    i: int,
    j: int,
    rng: Optional[np.random.Generator] = None,
    restarts: int = DISTANCE_RESTARTS_INT,
    max_iter: int = DISTANCE_MAX_ITER_INT,
    stop_delta: float = DISTANCE_STOP_DELTA,
    patience: int = DISTANCE_PATIENCE_INT,
    agreement: float = DISTANCE_RESTART_AGREEMENT,
) -> DistanceResult:
    """
    sup{|a(x_i) - a(x_j)| : ||[D, a]|| <= 1} over real diagonal a.

    Solved as 1 / min{||[D, a]|| : a_i - a_j = 1} by subgradient descent on
    the largest singular value from random restarts, each polished by
    Brent (one free point value) or Nelder-Mead.

    Parameters
    ----------
    t : FiniteTriple
        Triple over C^k acting diagonally.
    i, j : int
        Point indices (algebra basis indices).
    rng : np.random.Generator, optional
        Source of restart points.

    Returns
    -------
    DistanceResult
        ``value == math.inf`` when the minimum is below ``t.tol``.

    Raises
    ------
    UnsupportedRepresentationError
        For non-diagonal representations or noncommutative algebras.
    DistanceConvergenceError
        If restarts disagree by more than ``agreement``.
    """
    generators = np.stack(_commutator_generators(t))
    points = len(generators)
    if not (0 <= i < points and 0 <= j < points):
        raise InvalidInputError("point indices must be in 0..%d" % (points - 1))
    if i == j:
        return DistanceResult(0.0, np.zeros(points), 0.0)
    rng = rng if rng is not None else np.random.default_rng(DEFAULT_SEED_INT)

    # a -> a + c leaves [D, a] unchanged for a unital representation, so
    # a_i = 1, a_j = 0 can be fixed; otherwise only a_j = a_i - 1 is imposed
    unital = spectral_norm(generators.sum(axis=0)) < t.tol
    if unital:
        free = [r for r in range(points) if r not in (i, j)]
    else:
        free = [r for r in range(points) if r != j]

    def embed(x):
        a = np.zeros(points)
        a[free] = x
        if unital:
            a[i], a[j] = 1.0, 0.0
        else:
            a[j] = a[i] - 1.0
        return a

    def project(grad):
        g = grad[free].copy()
        if not unital:
            g[free.index(i)] += grad[j]
        return g

    def objective(x):
        return spectral_norm(np.tensordot(embed(np.atleast_1d(x)), generators, axes=1))

    restart_values = []
    best_x, best = np.zeros(len(free)), math.inf
    for _ in range(max(restarts, 1) if free else 1):
        if not free:
            x, value = np.zeros(0), objective(np.zeros(0))
        else:
            x0 = rng.normal(size=len(free))
            x, value = _subgradient_descent(generators, embed, project, x0, max_iter, stop_delta, patience)
            x, value = _polish(objective, x, value)
        restart_values.append(float(value))
        if value < best:
            best_x, best = x, value

    spread = max(restart_values) - min(restart_values)
    if spread > agreement * max(1.0, best):
        logger.critical("connes_distance: restarts disagree by %.3g", spread)
        raise DistanceConvergenceError("restarts disagree by %.3g" % spread)
    if spread > stop_delta:
        logger.debug("connes_distance: restart spread %.3g", spread)

    a_opt = embed(best_x)
    if best < t.tol:
        logger.info("connes_distance(%d, %d): UNBOUNDED", i, j)
        return DistanceResult(math.inf, a_opt, best, restart_values)
    value = 1.0 / best
    logger.info("connes_distance(%d, %d) = %.12g", i, j, value)
    return DistanceResult(value, a_opt / best, best, restart_values)


def two_point_closed_form(t_param: complex) -> DistanceResult:
    """1/|t| for the two-point space, unbounded at t = 0."""
    modulus = abs(complex(t_param))
    if modulus == 0.0:
        return DistanceResult(math.inf, np.array([1.0, 0.0]), 0.0)
    return DistanceResult(1.0 / modulus, np.array([1.0 / modulus, 0.0]), modulus)


def sampled_distance_bound(
    t: FiniteTriple,
    i: int,
    j: int,
    samples: int = 100000,
    rng: Optional[np.random.Generator] = None,
    batch: int = 10000,
) -> float:
    """
    Random-search lower bound on the distance over complex diagonal a.

    Each sample a is rescaled onto ||[D, a]|| = 1, giving the candidate
    |a_i - a_j| / ||[D, a]||; the maximum over all samples is returned.
    """
    generators = np.stack(_commutator_generators(t))
    rng = rng if rng is not None else np.random.default_rng(DEFAULT_SEED_INT)
    points = len(generators)
    best = 0.0
    remaining = samples
    while remaining > 0:
        size = min(batch, remaining)
        remaining -= size
        a = rng.normal(size=(size, points)) + 1j * rng.normal(size=(size, points))
        stack = np.tensordot(a, generators, axes=1)
        norms = np.linalg.svd(stack, compute_uv=False)[:, 0]
        gaps = np.abs(a[:, i] - a[:, j])
        ok = norms > t.tol
        if np.any(gaps[~ok] > t.tol):
            return math.inf
        if np.any(ok):
            best = max(best, float(np.max(gaps[ok] / norms[ok])))
    logger.debug("sampled_distance_bound(%d, %d) = %.6g", i, j, best)
    return best
