"""
Builders for the example triples: the two-point space, the electrodynamics
triple and random diagonal triples used by the property suites.
"""
import logging
from typing import Optional

import numpy as np

from spectriple.constants import DEFAULT_TOL
from spectriple.core.exceptions import InvalidInputError
from spectriple.core.linalg import spectral_norm
from spectriple.core.triple import (FiniteTriple, RealStructure,
                                    RealStructureSigns,
                                    canonical_real_structure,
                                    solve_dirac_space)

logger = logging.getLogger("spectriple")

# Basis of the electrodynamics Hilbert space: e_L, e_R, e_bar_L, e_bar_R
ELECTRODYNAMICS_LABELS = ("e_L", "e_R", "e_bar_L", "e_bar_R")


def _idempotents(n: int, blocks):
    rep = []
    for block in blocks:
        p = np.zeros((n, n), dtype=complex)
        for i in block:
            p[i, i] = 1.0
        rep.append(p)
    return rep


def two_point_dirac(t: complex) -> np.ndarray:
    return np.array([[0, t], [np.conj(t), 0]], dtype=complex)


def two_point_triple(
    t: Optional[complex] = None, ko: Optional[int] = 6, tol: float = DEFAULT_TOL
) -> FiniteTriple:
    """
    The two-point space: C^2 acting diagonally on C^2, grading diag(1, -1).

    Parameters
    ----------
    t : complex, optional
        Off-diagonal entry of D = ((0, t), (conj(t), 0)); ``None`` leaves the
        Dirac operator unset.
    ko : int, optional
        Even KO dimension of the canonical real structure, ``None`` for none.
        KO 4 raises ``RealStructureClassificationError``.
    """
    grading = np.diag([1.0, -1.0]).astype(complex)
    real = None if ko is None else canonical_real_structure(grading, ko, tol)
    return FiniteTriple(
        hilbert_dim=2,
        algebra_summands=[1, 1],
        rep_basis=_idempotents(2, [[0], [1]]),
        dirac=None if t is None else two_point_dirac(t),
        grading=grading,
        real=real,
        tol=tol,
    )


def electrodynamics_dirac(d: complex) -> np.ndarray:
    dirac = np.zeros((4, 4), dtype=complex)
    dirac[0, 1] = d
    dirac[1, 0] = np.conj(d)
    dirac[2, 3] = np.conj(d)
    dirac[3, 2] = d
    return dirac


def electrodynamics_triple(d: Optional[complex] = None, tol: float = DEFAULT_TOL) -> FiniteTriple:
    """
    The electrodynamics triple over C^2 on C^4 = span(e_L, e_R, e_bar_L, e_bar_R).

    The first summand acts on the particle states, the second on the
    antiparticle states; J swaps particles and antiparticles (KO 6).
    """
    swap = np.zeros((4, 4), dtype=complex)
    for i, j in ((0, 2), (1, 3)):
        swap[i, j] = swap[j, i] = 1.0
    return FiniteTriple(
        hilbert_dim=4,
        algebra_summands=[1, 1],
        rep_basis=_idempotents(4, [[0, 1], [2, 3]]),
        dirac=None if d is None else electrodynamics_dirac(d),
        grading=np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex),
        real=RealStructure(swap, RealStructureSigns.for_ko(6)),
        tol=tol,
    )


def matches_electrodynamics_pattern(dirac: np.ndarray) -> float:
    """
    Residual of ``dirac`` against the admissible electrodynamics pattern.

    The pattern has d at (0, 1) and (3, 2), conj(d) at (1, 0) and (2, 3),
    and zeros elsewhere.
    """
    dirac = np.asarray(dirac, dtype=complex)
    return spectral_norm(dirac - electrodynamics_dirac(dirac[0, 1]))


def random_involution(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random permutation sigma with sigma(sigma(c)) == c."""
    order = rng.permutation(n)
    sigma = np.arange(n)
    pairs = int(rng.integers(0, n // 2 + 1))
    for k in range(pairs):
        a, b = order[2 * k], order[2 * k + 1]
        sigma[a], sigma[b] = b, a
    return sigma


def random_diagonal_triple(
    rng: np.random.Generator,
    points: int,
    real: bool = True,
    tol: float = DEFAULT_TOL,
) -> FiniteTriple:
    """
    Random commutative triple over C^points acting diagonally on C^points.

    With ``real`` set, J = U C where U is an involutive permutation with
    phases constant on orbits (epsilon = epsilon' = 1, KO 7) and D is a random
    element of the admissible Dirac space. Without it, D is a random
    Hermitian matrix.
    """
    if points < 2:
        raise InvalidInputError("random_diagonal_triple needs at least two points")
    rep = _idempotents(points, [[c] for c in range(points)])
    if not real:
        m = rng.normal(size=(points, points)) + 1j * rng.normal(size=(points, points))
        return FiniteTriple(points, [1] * points, rep, dirac=(m + m.conj().T) / 2, tol=tol)

    sigma = random_involution(rng, points)
    phases = np.exp(2j * np.pi * rng.random(points))
    unitary = np.zeros((points, points), dtype=complex)
    for c in range(points):
        phase = phases[min(c, sigma[c])]
        unitary[sigma[c], c] = phase
    triple = FiniteTriple(
        points,
        [1] * points,
        rep,
        real=RealStructure(unitary, RealStructureSigns(1, 1, None)),
        tol=tol,
    )
    basis = solve_dirac_space(triple)
    dirac = sum((rng.normal() * b for b in basis), np.zeros((points, points), dtype=complex))
    logger.debug("random_diagonal_triple: %d points, sigma=%s, Dirac space %d", points, sigma, len(basis))
    return triple.with_dirac(dirac)
