import logging
from dataclasses import dataclass, field

import numpy as np

from spectriple.core.exceptions import (CliffordConstructionError,
                                        InvalidInputError)
from spectriple.core.linalg import (adjoint, anticommutator,
                                    full_matrix_parametrization, kron,
                                    real_null_space, spectral_norm)
from spectriple.core.triple import (FiniteTriple, RealStructure,
                                    RealStructureSigns)

logger = logging.getLogger("spectriple")

CLIFFORD_TOL = 1e-12

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass
class GammaSet:
    """
    Euclidean gamma matrices gamma^0..gamma^3 (standing for gamma^1..gamma^4)
    and the chirality gamma5 = phase * gamma^0 gamma^1 gamma^2 gamma^3.
    """

    gammas: np.ndarray
    gamma5: np.ndarray
    phase: complex = 1.0
    convention: str = "chiral"
    metric: np.ndarray = field(default_factory=lambda: np.eye(4))

    def slash(self, k) -> np.ndarray:
        """gamma^mu k_mu for a (possibly complex) 4-vector."""
        return np.tensordot(np.asarray(k, dtype=complex), self.gammas, axes=1)

    def residuals(self) -> dict:
        eye = np.eye(4)
        clifford = max(
            spectral_norm(anticommutator(self.gammas[m], self.gammas[n]) - 2 * self.metric[m, n] * eye)
            for m in range(4)
            for n in range(4)
        )
        return {
            "clifford": clifford,
            "gammas_self_adjoint": max(spectral_norm(g - adjoint(g)) for g in self.gammas),
            "gamma5_self_adjoint": spectral_norm(self.gamma5 - adjoint(self.gamma5)),
            "gamma5_involution": spectral_norm(self.gamma5 @ self.gamma5 - eye),
            "gamma5_anticommutes": max(spectral_norm(anticommutator(self.gamma5, g)) for g in self.gammas),
        }


def build_gammas(convention: str = "chiral") -> GammaSet:
    """
    Chiral-basis gamma matrices with gamma5 = diag(1, 1, -1, -1).

    Raises
    ------
    CliffordConstructionError
        If any Clifford relation fails at construction.
    """
    if convention != "chiral":
        raise InvalidInputError("unsupported gamma convention: %r" % (convention,))
    zero = np.zeros((2, 2), dtype=complex)
    eye2 = np.eye(2, dtype=complex)
    gammas = [np.block([[zero, -1j * s], [1j * s, zero]]) for s in PAULI]
    gammas.append(np.block([[zero, eye2], [eye2, zero]]))
    gammas = np.stack(gammas)

    product = gammas[0] @ gammas[1] @ gammas[2] @ gammas[3]
    # product^2 is a scalar; rescale to an involution
    square = (product @ product)[0, 0]
    phase = 1.0 / np.sqrt(square)
    gamma5 = phase * product
    if spectral_norm(gamma5 - adjoint(gamma5)) > CLIFFORD_TOL:
        phase = -phase
        gamma5 = -gamma5
    g = GammaSet(gammas=gammas, gamma5=gamma5, phase=complex(phase), convention=convention)
    residuals = g.residuals()
    if max(residuals.values()) > CLIFFORD_TOL:
        logger.critical("build_gammas: Clifford relations fail %s", residuals)
        raise CliffordConstructionError("gamma matrices violate Clifford relations: %s" % residuals)
    logger.debug("build_gammas: gamma5 phase %s", phase)
    return g


def trace_identity(mu: int, nu: int, rho: int, sigma: int) -> float:
    """delta^{mu nu} delta^{rho sigma} - delta^{mu rho} delta^{nu sigma} + delta^{mu sigma} delta^{nu rho}."""
    return float((mu == nu) * (rho == sigma) - (mu == rho) * (nu == sigma) + (mu == sigma) * (nu == rho))


def trace_quad(g: GammaSet, mu: int, nu: int, rho: int, sigma: int) -> float:
    """Tr(1/4 gamma^mu gamma^nu gamma^rho gamma^sigma), 0-based indices."""
    for index in (mu, nu, rho, sigma):
        if index not in range(4):
            raise InvalidInputError("gamma index must be in 0..3, got %r" % (index,))
    value = 0.25 * np.trace(g.gammas[mu] @ g.gammas[nu] @ g.gammas[rho] @ g.gammas[sigma])
    return float(value.real)


@dataclass
class ChargeConjugation:
    """J_M = U o conjugation on 4-component spinors (KO dimension 4)."""

    unitary: np.ndarray

    @property
    def signs(self) -> RealStructureSigns:
        return RealStructureSigns.for_ko(4)

    def apply(self, v) -> np.ndarray:
        return self.unitary @ np.conj(v)

    def as_real_structure(self) -> RealStructure:
        return RealStructure(self.unitary, self.signs)

    def bilinear_form(self, x: np.ndarray) -> np.ndarray:
        """Matrix B with <J_M chi, X psi> = chi^T B psi, i.e. B = U* X."""
        return adjoint(self.unitary) @ x


def charge_conjugation(g: GammaSet) -> ChargeConjugation:
    """
    Solve U conj(gamma^mu) = -gamma^mu U and U conj(gamma5) = gamma5 U over all
    complex 4x4 matrices, normalise to a unitary and check U conj(U) = -1.

    Raises
    ------
    CliffordConstructionError
        If no solution exists or the solution has the wrong square.
    """
    constraints = [lambda m, x=x: m @ np.conj(x) + x @ m for x in g.gammas]
    constraints.append(lambda m: m @ np.conj(g.gamma5) - g.gamma5 @ m)
    solutions = real_null_space(constraints, full_matrix_parametrization(4), CLIFFORD_TOL)
    if not solutions:
        logger.critical("charge_conjugation: no intertwiner in the %s basis", g.convention)
        raise CliffordConstructionError()
    u = solutions[0]
    u = u / np.sqrt(np.trace(u @ adjoint(u)).real / 4)
    eye = np.eye(4)
    residuals = {
        "unitary": spectral_norm(u @ adjoint(u) - eye),
        "square": spectral_norm(u @ np.conj(u) + eye),
        "gammas": max(spectral_norm(u @ np.conj(x) + x @ u) for x in g.gammas),
        "gamma5": spectral_norm(u @ np.conj(g.gamma5) - g.gamma5 @ u),
    }
    if max(residuals.values()) > 1e-10:
        logger.critical("charge_conjugation: residuals %s", residuals)
        raise CliffordConstructionError("charge conjugation signs fail: %s" % residuals)
    return ChargeConjugation(u)


def _measured_sign(left: np.ndarray, right: np.ndarray) -> int:
    """Sign s minimising |left - s * right|."""
    return 1 if spectral_norm(left - right) <= spectral_norm(left + right) else -1


def product_signs(jm: ChargeConjugation, g: GammaSet, finite: FiniteTriple) -> RealStructureSigns:
    """
    Signs of J_M (x) J_F on the pointwise product with D = gamma5 (x) D_F and
    grading gamma5 (x) gamma_F, measured numerically.

    When D_F vanishes, epsilon' cannot be measured and is taken from the
    factors.
    """
    if finite.real is None or finite.grading is None:
        raise InvalidInputError("product_signs needs a graded finite triple with J")
    u = kron(jm.unitary, finite.real.unitary)
    eye = np.eye(u.shape[0])
    epsilon = _measured_sign(u @ np.conj(u), eye)
    gamma = kron(g.gamma5, finite.grading)
    epsilon_double_prime = _measured_sign(u @ np.conj(gamma), gamma @ u)
    dirac = kron(g.gamma5, finite.dirac_or_zero)
    if spectral_norm(dirac) > finite.tol:
        epsilon_prime = _measured_sign(u @ np.conj(dirac), dirac @ u)
    else:
        epsilon_prime = finite.real.signs.epsilon_prime * jm.signs.epsilon_double_prime
    return RealStructureSigns(epsilon, epsilon_prime, epsilon_double_prime)
