import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from spectriple.core.clifford import ChargeConjugation, GammaSet, product_signs
from spectriple.core.exceptions import (GaugeCovarianceError, GaugeException,
                                        InvalidInputError, NotInAlgebraError,
                                        NotSelfAdjointError, NotUnitaryError,
                                        TripleStructureError)
from spectriple.core.linalg import (adjoint, as_cmatrix, commutator,
                                    complex_span_parametrization, kron,
                                    real_null_space, real_span_basis,
                                    spectral_norm)
from spectriple.core.triple import FiniteTriple, RealStructure

logger = logging.getLogger("spectriple")

A_J = "A_J"
A_TILDE_J = "A_tilde_J"


@dataclass
class SubalgebraBasis:
    """
    Real-linear basis of A_J = {a : aJ = Ja} or of Ã_J = {a : aJ = Ja*}
    inside the represented algebra.
    """

    kind: str
    basis: List[np.ndarray]

    @property
    def real_dim(self) -> int:
        return len(self.basis)

    @property
    def complex_dim(self) -> Optional[int]:
        # A_J is only a real algebra
        if self.kind != A_TILDE_J:
            return None
        return self.real_dim // 2


def _require_real(t: FiniteTriple) -> RealStructure:
    if t.real is None:
        raise TripleStructureError("gauge computations need a real structure")
    return t.real


def subalgebra(t: FiniteTriple, kind: str = A_TILDE_J) -> SubalgebraBasis:
    """
    Compute A_J or Ã_J as the real null space of its defining relation on the
    complex span of the represented algebra.

    Parameters
    ----------
    t : FiniteTriple
        A triple with a real structure.
    kind : {"A_J", "A_tilde_J"}
        Which subalgebra to compute.
    """
    u = _require_real(t).unitary
    if kind == A_J:
        # a J = J a  <=>  a U = U conj(a)
        relation = lambda a: a @ u - u @ np.conj(a)
    elif kind == A_TILDE_J:
        # a J = J a*  <=>  a U = U a^T
        relation = lambda a: a @ u - u @ a.T
    else:
        raise InvalidInputError("unknown subalgebra kind %r" % (kind,))
    basis = real_null_space([relation], complex_span_parametrization(t.rep_basis), t.tol)
    basis = real_span_basis(basis, t.tol)
    logger.info("subalgebra %s: real dimension %d", kind, len(basis))
    return SubalgebraBasis(kind=kind, basis=basis)


@dataclass
class GaugeGroupInfo:
    """
    Lie-algebra level description of 1 -> U(Ã_J) -> U(A) -> G(A) -> 1.

    Attributes
    ----------
    dim_u_A : int
        Real dimension of u(A), the sum of n_s^2.
    dim_u_tilde : int
        Real dimension of u(Ã_J).
    dim_gauge : int
        Real rank of X -> X + J X J^{-1} on u(A), computed independently.
    torus_rank : int or None
        Equal to ``dim_gauge`` for commutative algebras.
    dim_center : int
        Real dimension of the unitary part of the center.
    dim_inner : int
        ``dim_u_A - dim_center``.
    noncommutative : bool
        Set when some summand is a full matrix algebra of size > 1.
    """

    dim_u_A: int
    dim_u_tilde: int
    dim_gauge: int
    torus_rank: Optional[int]
    dim_center: int
    dim_inner: int
    noncommutative: bool

    @property
    def exact(self) -> bool:
        return self.dim_gauge == self.dim_u_A - self.dim_u_tilde

    def to_dict(self):
        return {
            "dim_u_A": self.dim_u_A,
            "dim_u_tilde": self.dim_u_tilde,
            "dim_gauge": self.dim_gauge,
            "torus_rank": self.torus_rank,
            "dim_center": self.dim_center,
            "dim_inner": self.dim_inner,
            "noncommutative": self.noncommutative,
            "exact": self.exact,
        }


def _anti_hermitian_part(t: FiniteTriple, extra=()) -> List[np.ndarray]:
    constraints = [lambda a: a + adjoint(a)] + list(extra)
    return real_null_space(constraints, complex_span_parametrization(t.rep_basis), t.tol)


def gauge_group(t: FiniteTriple) -> GaugeGroupInfo:
    """
    Dimensions of U(A), U(Ã_J) and G(A) = {u J u J^* : u in U(A)}.

    ``dim_gauge`` is the rank of the differential of u -> u J u J^*, so the
    exactness identity ``dim_gauge == dim_u_A - dim_u_tilde`` is a check,
    not a definition.
    """
    real = _require_real(t)
    u = real.unitary
    algebra = t.algebra
    dim_u_a = algebra.dim

    u_tilde = _anti_hermitian_part(t, [lambda a: a @ u - u @ a.T])
    dim_u_tilde = len(real_span_basis(u_tilde, t.tol))

    generators = _anti_hermitian_part(t)
    images = [x + real.conjugate_operator(x) for x in generators]
    dim_gauge = len(real_span_basis(images, t.tol))

    center_constraints = [lambda a, b=b: commutator(a, b) for b in t.rep_basis]
    dim_center = len(real_span_basis(_anti_hermitian_part(t, center_constraints), t.tol))

    info = GaugeGroupInfo(
        dim_u_A=dim_u_a,
        dim_u_tilde=dim_u_tilde,
        dim_gauge=dim_gauge,
        torus_rank=dim_gauge if algebra.is_commutative else None,
        dim_center=dim_center,
        dim_inner=dim_u_a - dim_center,
        noncommutative=not algebra.is_commutative,
    )
    if not info.exact:
        logger.warning(
            "gauge_group: dim_gauge=%d but dim_u_A - dim_u_tilde=%d",
            dim_gauge,
            dim_u_a - dim_u_tilde,
        )
    if info.noncommutative:
        logger.info("gauge_group: noncommutative algebra, Lie-algebra level only")
    logger.info("gauge_group: %s", info.to_dict())
    return info


@dataclass
class OneForm:
    """
    A = sum_{k,l} coefficients[k, l] pi(e_k) [D, pi(e_l)].

    Attributes
    ----------
    matrix : np.ndarray
        The operator A.
    coefficients : np.ndarray
        Complex generator weights indexed by algebra basis pairs.
    covariance_residual : float, optional
        Set by :func:`gauge_transform`.
    """

    matrix: np.ndarray
    coefficients: np.ndarray
    covariance_residual: Optional[float] = field(default=None, compare=False)

    @classmethod
    def from_coefficients(cls, t: FiniteTriple, coefficients) -> "OneForm":
        coefficients = np.asarray(coefficients, dtype=complex)
        d = t.dirac_or_zero
        matrix = np.zeros_like(d)
        for k, a in enumerate(t.rep_basis):
            for l, b in enumerate(t.rep_basis):
                if coefficients[k, l] != 0:
                    matrix = matrix + coefficients[k, l] * a @ commutator(d, b)
        return cls(matrix=matrix, coefficients=coefficients)

    @classmethod
    def zero(cls, t: FiniteTriple) -> "OneForm":
        dim = len(t.rep_basis)
        return cls.from_coefficients(t, np.zeros((dim, dim)))

    @property
    def generators(self):
        """Nonzero ``(k, l, coefficient)`` entries."""
        rows, cols = np.nonzero(np.abs(self.coefficients) > 0)
        return [(int(k), int(l), complex(self.coefficients[k, l])) for k, l in zip(rows, cols)]

    def residual(self, t: FiniteTriple) -> float:
        return spectral_norm(self.matrix - OneForm.from_coefficients(t, self.coefficients).matrix)


def omega1_basis(t: FiniteTriple) -> List[OneForm]:
    """
    Real basis of the self-adjoint one-forms sum_j a_j [D, b_j].

    The spanning set a_k [D, b_l] runs over all algebra basis pairs; the
    self-adjoint part of its complex span is reduced to an orthonormal real
    basis, keeping the generator weights of every element.
    """
    dim = len(t.rep_basis)
    d = t.dirac_or_zero
    spanning = [a @ commutator(d, b) for a in t.rep_basis for b in t.rep_basis]
    if max(spectral_norm(m) for m in spanning) < t.tol:
        logger.info("omega1_basis: all commutators vanish")
        return []
    matrices, coords = real_null_space(
        [lambda x: x - adjoint(x)],
        complex_span_parametrization(spanning),
        t.tol,
        return_coordinates=True,
    )
    basis, comb = real_span_basis(matrices, t.tol, return_coefficients=True)
    forms = []
    pairs = len(spanning)
    for matrix, weights in zip(basis, comb @ coords):
        coefficients = (weights[:pairs] + 1j * weights[pairs:]).reshape(dim, dim)
        forms.append(OneForm(matrix=matrix, coefficients=coefficients))
    logger.info("omega1_basis: real dimension %d", len(forms))
    return forms


def fluctuate(t: FiniteTriple, a) -> np.ndarray:
    """
    D_A = D + A + epsilon' J A J^{-1}.

    Raises
    ------
    NotSelfAdjointError
        If A is not self-adjoint within the triple's tolerance.
    """
    matrix = as_cmatrix(a.matrix if isinstance(a, OneForm) else a)
    if spectral_norm(matrix - adjoint(matrix)) >= t.tol:
        raise NotSelfAdjointError()
    fluctuated = t.dirac_or_zero + matrix
    if t.real is not None:
        fluctuated = fluctuated + t.real.signs.epsilon_prime * t.real.conjugate_operator(matrix)
    return fluctuated


def b_field(t: FiniteTriple, a_mu) -> np.ndarray:
    """A_mu - J_F A_mu J_F^{-1}, the finite part of a product-level fluctuation."""
    a_mu = as_cmatrix(a_mu)
    return a_mu - _require_real(t).conjugate_operator(a_mu)


def adjoint_action(t: FiniteTriple, u: np.ndarray) -> np.ndarray:
    """U = u J u J^* as a matrix."""
    return u @ _require_real(t).conjugate_operator(u)


def _check_algebra_unitary(t: FiniteTriple, u: np.ndarray) -> np.ndarray:
    u = as_cmatrix(u)
    if spectral_norm(u @ adjoint(u) - np.eye(t.hilbert_dim)) >= t.tol:
        raise NotUnitaryError()
    coeffs, residual = t.algebra_coefficients(u)
    if residual >= t.tol:
        raise NotInAlgebraError("element is %.3g away from the represented algebra" % residual)
    return coeffs


def gauge_transform(a: OneForm, u: np.ndarray, t: FiniteTriple) -> OneForm:
    """
    A^u = u A u* + u [D, u*], with generators kept exact.

    Uses u a [D, b] u* = (u a) [D, b u*] - (u a b) [D, u*] to rewrite every
    generator in the algebra basis, then checks
    fluctuate(A^u) == U fluctuate(A) U* for U = u J u J^*.

    Raises
    ------
    NotUnitaryError, NotInAlgebraError
        If ``u`` is not a unitary of the represented algebra.
    GaugeCovarianceError
        If the covariance identity fails.
    """
    u = as_cmatrix(u)
    u_coeffs = _check_algebra_unitary(t, u)
    algebra = t.algebra
    dim = algebra.dim
    u_star = algebra.star(u_coeffs)
    eye = np.eye(dim)

    coefficients = np.zeros((dim, dim), dtype=complex)
    # u [D, u*]
    coefficients += np.outer(u_coeffs, u_star)
    for k, l, c in a.generators:
        ua = algebra.multiply(u_coeffs, eye[k])
        bu = algebra.multiply(eye[l], u_star)
        uab = algebra.multiply(ua, eye[l])
        coefficients += c * np.outer(ua, bu)
        coefficients -= c * np.outer(uab, u_star)
    transformed = OneForm.from_coefficients(t, coefficients)

    direct = u @ a.matrix @ adjoint(u) + u @ commutator(t.dirac_or_zero, adjoint(u))
    scale = max(1.0, spectral_norm(t.dirac_or_zero), spectral_norm(a.matrix))
    if spectral_norm(direct - transformed.matrix) >= 10 * t.tol * scale:
        raise GaugeException("generator expansion of A^u disagrees with u A u* + u[D, u*]")

    w = adjoint_action(t, u)
    residual = spectral_norm(fluctuate(t, transformed) - w @ fluctuate(t, a) @ adjoint(w))
    transformed.covariance_residual = residual
    if residual >= 10 * t.tol * scale:
        logger.critical("gauge_transform: covariance residual %.3g", residual)
        raise GaugeCovarianceError("covariance residual %.3g" % residual)
    logger.debug("gauge_transform: covariance residual %.3g", residual)
    return transformed


def random_abelian_unitary(t: FiniteTriple, rng: np.random.Generator) -> np.ndarray:
    """pi(u) for u a random element of U(1)^k, k the number of summands."""
    if not t.algebra.is_commutative:
        raise InvalidInputError("random_abelian_unitary needs a commutative algebra")
    return t.represent(np.exp(2j * np.pi * rng.random(len(t.rep_basis))))


def almost_commutative_fiber(t: FiniteTriple, g: GammaSet, jm: ChargeConjugation) -> FiniteTriple:
    """
    The pointwise product triple (C^4 (x) H_F, gamma5 (x) D_F, gamma5 (x) gamma_F,
    J_M (x) J_F) with signs measured on the product.
    """
    if t.real is None or t.grading is None:
        raise TripleStructureError("almost_commutative_fiber needs a graded triple with J")
    eye4 = np.eye(4)
    signs = product_signs(jm, g, t)
    return FiniteTriple(
        hilbert_dim=4 * t.hilbert_dim,
        algebra_summands=list(t.algebra_summands),
        rep_basis=[kron(eye4, b) for b in t.rep_basis],
        dirac=kron(g.gamma5, t.dirac_or_zero),
        grading=kron(g.gamma5, t.grading),
        real=RealStructure(kron(jm.unitary, t.real.unitary), signs),
        tol=t.tol,
    )


@dataclass
class GaugeShift:
    y_before: np.ndarray
    y_after: np.ndarray
    q: np.ndarray
    residual: float

    @property
    def expected(self) -> np.ndarray:
        return self.y_before - self.q


def charge_operator(t: FiniteTriple) -> np.ndarray:
    """S = pi(e_0) - pi(e_0)^0, the U(1) charge of the first summand."""
    e0 = t.rep_basis[0]
    return e0 - _require_real(t).opposite(e0)


def one_mode_gauge_shift(t: FiniteTriple, g: GammaSet, kappa, q, y) -> GaugeShift:
    """
    Conjugate the one-mode fluctuated operator by the gauge element
    u = exp(i q.x) pi(e_0) + pi(e_1) and read off the new gauge field.

    On the plane wave exp(i k.x) the operator is
    D(k) = slash(k) (x) 1 + slash(Y) (x) S + gamma5 (x) D_F. The adjoint action
    U = u J u J^* = exp(i q.x S) moves charge s from mode k to k + s q, so
    U D U* restricted to mode ``kappa`` is D(kappa) with Y replaced by Y - q.

    Raises
    ------
    GaugeException
        If S does not commute with D_F.
    """
    kappa = np.asarray(kappa, dtype=float)
    q = np.asarray(q, dtype=float)
    y = np.asarray(y, dtype=float)
    charge = charge_operator(t)
    d_f = t.dirac_or_zero
    if spectral_norm(commutator(charge, d_f)) >= t.tol:
        raise GaugeException("charge operator does not commute with D_F")
    signs = np.real(np.diag(charge))
    if spectral_norm(charge - np.diag(signs)) >= t.tol or not np.all(np.isin(signs, (1.0, -1.0))):
        raise GaugeException("charge operator is not diagonal with eigenvalues +-1")
    n = t.hilbert_dim
    eye4 = np.eye(4)

    def block(k):
        return kron(g.slash(k), np.eye(n)) + kron(g.slash(y), charge) + kron(g.gamma5, d_f)

    # (U D U*)|_kappa: the sector of charge s comes from mode kappa - s q
    conjugated = np.zeros((4 * n, 4 * n), dtype=complex)
    for s in (1.0, -1.0):
        projector = kron(eye4, np.diag((signs == s).astype(float)))
        conjugated += projector @ block(kappa - s * q) @ projector
    # kinetic and mass parts are untouched
    gauge_part = conjugated - kron(g.slash(kappa), np.eye(n)) - kron(g.gamma5, d_f)
    generators = [kron(gm, charge) for gm in g.gammas]
    norms = [np.vdot(x, x).real for x in generators]
    y_after = np.array([np.vdot(x, gauge_part).real / nrm for x, nrm in zip(generators, norms)])
    residual = spectral_norm(gauge_part - kron(g.slash(y_after), charge))
    logger.debug("one_mode_gauge_shift: Y %s -> %s (residual %.3g)", y, y_after, residual)
    return GaugeShift(y_before=y, y_after=y_after, q=q, residual=residual)
