import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from spectriple.constants import DEFAULT_TOL
from spectriple.core.exceptions import (InvalidInputError,
                                        RealStructureClassificationError,
                                        TripleStructureError)
from spectriple.core.linalg import (adjoint, anticommutator, as_cmatrix,
                                    commutator, hermitian_eigh,
                                    hermitian_parametrization, is_unitary,
                                    real_null_space, real_span_basis,
                                    spectral_norm)

logger = logging.getLogger("spectriple")

INVALID_KO = "invalid"

# n mod 8 -> (epsilon, epsilon_prime, epsilon_double_prime); odd rows have no grading sign
KO_SIGN_TABLE = {
    0: (1, 1, 1),
    1: (1, -1, None),
    2: (-1, 1, -1),
    3: (-1, 1, None),
    4: (-1, 1, 1),
    5: (-1, -1, None),
    6: (1, 1, -1),
    7: (1, 1, None),
}


@dataclass(frozen=True)
class RealStructureSigns:
    epsilon: int
    epsilon_prime: int
    epsilon_double_prime: Optional[int] = None

    def __post_init__(self):
        for name in ("epsilon", "epsilon_prime"):
            if getattr(self, name) not in (1, -1):
                raise InvalidInputError("%s must be +1 or -1" % name)
        if self.epsilon_double_prime not in (1, -1, None):
            raise InvalidInputError("epsilon_double_prime must be +1, -1 or absent")

    @property
    def is_even(self) -> bool:
        return self.epsilon_double_prime is not None

    def as_tuple(self):
        return (self.epsilon, self.epsilon_prime, self.epsilon_double_prime)

    @classmethod
    def for_ko(cls, ko: int) -> "RealStructureSigns":
        if ko not in KO_SIGN_TABLE:
            raise InvalidInputError("KO dimension must be in 0..7, got %r" % (ko,))
        return cls(*KO_SIGN_TABLE[ko])


def classify_ko(signs: RealStructureSigns) -> Union[int, str]:
    """
    Look up the KO dimension (mod 8) of a sign triple.

    Returns
    -------
    int or str
        The KO dimension, or ``INVALID_KO`` when the triple is not in the table.
    """
    for ko, row in KO_SIGN_TABLE.items():
        if row == signs.as_tuple():
            return ko
    return INVALID_KO


@dataclass
class RealStructure:
    """
    Antiunitary ``J v = U conj(v)`` together with its sign triple.
    """

    unitary: np.ndarray
    signs: RealStructureSigns

    def __post_init__(self):
        self.unitary = as_cmatrix(self.unitary)

    @property
    def ko_dimension(self) -> Union[int, str]:
        return classify_ko(self.signs)

    def apply(self, v) -> np.ndarray:
        return self.unitary @ np.conj(v)

    def conjugate_operator(self, x: np.ndarray) -> np.ndarray:
        """J X J^{-1} with J^{-1} = epsilon J."""
        u = self.unitary
        return self.signs.epsilon * (u @ np.conj(x) @ np.conj(u))

    def opposite(self, b: np.ndarray) -> np.ndarray:
        """b^0 = J b* J^{-1}."""
        return self.conjugate_operator(adjoint(b))


@dataclass
class AlgebraStructure:
    """
    Abstract direct sum of full matrix algebras M_{n_1}(C) + ... + M_{n_k}(C).

    Basis elements are the matrix units E^s_ij in lexicographic order
    (summand, row, column); they are realised in the defining block-diagonal
    representation to read off products, the involution and the unit.
    """

    summands: List[int]

    def __post_init__(self):
        if not self.summands or any(int(n) < 1 for n in self.summands):
            raise TripleStructureError("algebra_summands must be positive integers")
        self.summands = [int(n) for n in self.summands]

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.summands)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.summands)

    @cached_property
    def labels(self):
        return [(s, i, j) for s, n in enumerate(self.summands) for i in range(n) for j in range(n)]

    @cached_property
    def defining_basis(self) -> List[np.ndarray]:
        size = sum(self.summands)
        offsets = np.cumsum([0] + self.summands[:-1])
        basis = []
        for s, i, j in self.labels:
            e = np.zeros((size, size), dtype=complex)
            e[offsets[s] + i, offsets[s] + j] = 1.0
            basis.append(e)
        return basis

    def coefficients(self, m: np.ndarray) -> np.ndarray:
        """Expand a block-diagonal matrix in the matrix-unit basis."""
        return np.array([np.vdot(e, m) for e in self.defining_basis])

    def element(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), np.stack(self.defining_basis), axes=1)

    def multiply(self, x, y) -> np.ndarray:
        return self.coefficients(self.element(x) @ self.element(y))

    def star(self, x) -> np.ndarray:
        return self.coefficients(adjoint(self.element(x)))

    def unit(self) -> np.ndarray:
        return self.coefficients(np.eye(sum(self.summands)))


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    residual: float

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "residual": self.residual}


@dataclass
class AxiomReport:
    """
    Per-axiom results of :func:`verify_axioms`.

    Attributes
    ----------
    checks : list of AxiomCheck
        In the order they were evaluated.
    ko_dimension : int or str
        Detected KO dimension, or ``"none"``.
    """

    checks: List[AxiomCheck]
    ko_dimension: Union[int, str] = "none"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Optional[str]:
        for c in self.checks:
            if not c.passed:
                return c.name
        return None

    def __getitem__(self, name) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "ko_dimension": self.ko_dimension,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass
class FiniteTriple:
    """
    Matrix data of a finite spectral triple (A, H, D, gamma, J).

    Parameters
    ----------
    hilbert_dim : int
        Dimension of H.
    algebra_summands : list of int
        Sizes n_s of A = M_{n_1}(C) + ... ; [1, 1] is C^2.
    rep_basis : list of np.ndarray
        Representation of each matrix unit of A, in lexicographic order.
    dirac : np.ndarray, optional
        The Dirac operator D.
    grading : np.ndarray, optional
        The grading gamma.
    real : RealStructure, optional
        The real structure J.
    tol : float
        Absolute tolerance for every residual.
    """

    hilbert_dim: int
    algebra_summands: List[int]
    rep_basis: List[np.ndarray]
    dirac: Optional[np.ndarray] = None
    grading: Optional[np.ndarray] = None
    real: Optional[RealStructure] = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        n = int(self.hilbert_dim)
        if n < 1:
            raise TripleStructureError("hilbert_dim must be positive")
        self.hilbert_dim = n
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")
        algebra = AlgebraStructure(list(self.algebra_summands))
        self.algebra_summands = algebra.summands
        if len(self.rep_basis) != algebra.dim:
            raise TripleStructureError(
                "rep_basis has %d matrices, algebra dimension is %d"
                % (len(self.rep_basis), algebra.dim)
            )
        self.rep_basis = [self._square(m, "rep_basis") for m in self.rep_basis]
        if self.dirac is not None:
            self.dirac = self._square(self.dirac, "dirac")
        if self.grading is not None:
            self.grading = self._square(self.grading, "grading")
        if self.real is not None:
            self._square(self.real.unitary, "real.unitary")

    def _square(self, m, name) -> np.ndarray:
        arr = as_cmatrix(m)
        if arr.shape != (self.hilbert_dim, self.hilbert_dim):
            raise TripleStructureError(
                "%s has shape %s, expected %dx%d"
                % (name, arr.shape, self.hilbert_dim, self.hilbert_dim)
            )
        return arr

    @property
    def algebra(self) -> AlgebraStructure:
        return AlgebraStructure(self.algebra_summands)

    @property
    def dirac_or_zero(self) -> np.ndarray:
        if self.dirac is None:
            return np.zeros((self.hilbert_dim, self.hilbert_dim), dtype=complex)
        return self.dirac

    @property
    def is_even(self) -> bool:
        return self.grading is not None

    def represent(self, coeffs) -> np.ndarray:
        """pi(a) for an algebra element given by matrix-unit coefficients."""
        return np.tensordot(np.asarray(coeffs, dtype=complex), np.stack(self.rep_basis), axes=1)

    def algebra_coefficients(self, m: np.ndarray) -> Tuple[np.ndarray, float]:
        """
        Least-squares expansion of ``m`` in the represented basis.

        Returns
        -------
        tuple
            ``(coefficients, residual)`` where the residual is the spectral
            norm of ``m - represent(coefficients)``.
        """
        stack = np.stack([b.ravel() for b in self.rep_basis], axis=1)
        coeffs, *_ = np.linalg.lstsq(stack, np.asarray(m, dtype=complex).ravel(), rcond=None)
        return coeffs, spectral_norm(self.represent(coeffs) - m)

    def is_diagonal_rep(self) -> bool:
        return all(spectral_norm(b - np.diag(np.diag(b))) < self.tol for b in self.rep_basis)

    def with_dirac(self, dirac: Optional[np.ndarray]) -> "FiniteTriple":
        return replace(self, dirac=dirac)

    def conjugated(self, w: np.ndarray) -> "FiniteTriple":
        """
        Unitarily equivalent triple: operators become W X W*, and the unitary
        part of J becomes W U W^T.
        """
        w = as_cmatrix(w)
        if not is_unitary(w, self.tol):
            raise InvalidInputError("conjugating matrix is not unitary")
        wd = adjoint(w)
        real = None
        if self.real is not None:
            real = RealStructure(w @ self.real.unitary @ w.T, self.real.signs)
        return FiniteTriple(
            hilbert_dim=self.hilbert_dim,
            algebra_summands=list(self.algebra_summands),
            rep_basis=[w @ b @ wd for b in self.rep_basis],
            dirac=None if self.dirac is None else w @ self.dirac @ wd,
            grading=None if self.grading is None else w @ self.grading @ wd,
            real=real,
            tol=self.tol,
        )


def _check(checks, name, residual, tol):
    residual = float(residual)
    checks.append(AxiomCheck(name=name, passed=residual < tol, residual=residual))


def _representation_residual(t: FiniteTriple) -> float:
    algebra = t.algebra
    dim = algebra.dim
    residual = spectral_norm(t.represent(algebra.unit()) - np.eye(t.hilbert_dim))
    for a in range(dim):
        ea = np.eye(dim)[a]
        residual = max(residual, spectral_norm(adjoint(t.rep_basis[a]) - t.represent(algebra.star(ea))))
        for b in range(dim):
            eb = np.eye(dim)[b]
            product = t.rep_basis[a] @ t.rep_basis[b]
            residual = max(residual, spectral_norm(product - t.represent(algebra.multiply(ea, eb))))
    return residual


def verify_axioms(t: FiniteTriple) -> AxiomReport:
    """
    Check every axiom of a (real, even) finite spectral triple.

    Absent operators skip the checks that need them; an absent Dirac operator
    is treated as zero. The KO dimension is reported only when all checks
    involving J pass.

    Parameters
    ----------
    t : FiniteTriple
        The triple to verify.

    Returns
    -------
    AxiomReport
        One entry per axiom with its residual norm.
    """
    checks: List[AxiomCheck] = []
    tol = t.tol
    d = t.dirac_or_zero
    n = t.hilbert_dim
    eye = np.eye(n)

    _check(checks, "representation", _representation_residual(t), tol)
    complex_span = t.rep_basis + [1j * b for b in t.rep_basis]
    if len(real_span_basis(complex_span, tol)) < 2 * len(t.rep_basis):
        logger.warning("representation is not faithful: rep_basis is linearly dependent")

    _check(checks, "dirac_self_adjoint", spectral_norm(d - adjoint(d)), tol)

    g = t.grading
    if g is not None:
        _check(
            checks,
            "grading_involution",
            max(spectral_norm(g @ g - eye), spectral_norm(g - adjoint(g))),
            tol,
        )
        _check(
            checks,
            "grading_commutes_with_algebra",
            max(spectral_norm(commutator(g, a)) for a in t.rep_basis),
            tol,
        )
        _check(checks, "dirac_odd", spectral_norm(anticommutator(d, g)), tol)

    j = t.real
    if j is not None:
        u = j.unitary
        signs = j.signs
        _check(checks, "j_unitary", spectral_norm(u @ adjoint(u) - eye), tol)
        _check(checks, "j_square", spectral_norm(u @ np.conj(u) - signs.epsilon * eye), tol)
        _check(
            checks,
            "j_dirac",
            spectral_norm(u @ np.conj(d) - signs.epsilon_prime * d @ u),
            tol,
        )
        if g is not None:
            if signs.epsilon_double_prime is None:
                raise TripleStructureError("graded triple needs epsilon_double_prime")
            _check(
                checks,
                "j_grading",
                spectral_norm(u @ np.conj(g) - signs.epsilon_double_prime * g @ u),
                tol,
            )
        opposites = [j.opposite(b) for b in t.rep_basis]
        commutators = [commutator(d, a) for a in t.rep_basis]
        _check(
            checks,
            "order_zero",
            max(spectral_norm(commutator(a, b0)) for a in t.rep_basis for b0 in opposites),
            tol,
        )
        _check(
            checks,
            "order_one",
            max(spectral_norm(commutator(c, b0)) for c in commutators for b0 in opposites),
            tol,
        )

    ko: Union[int, str] = "none"
    if j is not None and all(c.passed for c in checks if c.name.startswith("j_")):
        ko = classify_ko(j.signs)
    report = AxiomReport(checks=checks, ko_dimension=ko)
    if report.passed:
        logger.info("verify_axioms: all %d checks pass, KO=%s", len(checks), ko)
    else:
        logger.info("verify_axioms: first failure %s", report.first_failure)
    return report


@dataclass
class RealStructureForm:
    """
    J in the grading eigenbasis, split into the blocks of its KO case.

    For KO 0/4 ``blocks`` holds ``j_plus`` and ``j_minus``; for KO 2/6 it
    holds ``j`` (upper right block) and ``lower`` (the lower left block,
    ``-j^T`` or ``j^T``).
    """

    ko_dimension: int
    pattern: str
    blocks: Dict[str, np.ndarray]
    residuals: Dict[str, float]
    eigenbasis: np.ndarray = field(repr=False)

    @property
    def residual(self) -> float:
        return max(self.residuals.values())


def _grading_eigenbasis(grading: np.ndarray, tol: float):
    w, v = hermitian_eigh(grading)
    if np.max(np.abs(np.abs(w) - 1.0)) > tol:
        raise TripleStructureError("grading eigenvalues are not +-1")
    plus = int(np.sum(w > 0))
    return v, plus


def real_structure_form(t: FiniteTriple) -> RealStructureForm:
    """
    Decompose J_F = U C in the grading eigenbasis.

    KO 0 and 4 need a block-diagonal U' = diag(j_+, j_-) with unitary blocks,
    symmetric for KO 0 and antisymmetric for KO 4. KO 2 and 6 need
    U' = ((0, j), (lower, 0)) with lower = -j^T resp. j^T.

    Raises
    ------
    TripleStructureError
        If the triple has no grading or no real structure.
    RealStructureClassificationError
        If the signs are not an even KO dimension or no case matches.
    """
    if t.grading is None or t.real is None:
        raise TripleStructureError("real_structure_form needs a grading and a real structure")
    ko = classify_ko(t.real.signs)
    if ko not in (0, 2, 4, 6):
        raise RealStructureClassificationError("signs %s are not an even KO dimension" % (t.real.signs.as_tuple(),))
    v, plus = _grading_eigenbasis(t.grading, t.tol)
    minus = t.hilbert_dim - plus
    u = adjoint(v) @ t.real.unitary @ np.conj(v)
    upper_left, upper_right = u[:plus, :plus], u[:plus, plus:]
    lower_left, lower_right = u[plus:, :plus], u[plus:, plus:]

    residuals: Dict[str, float] = {}
    if ko in (0, 4):
        pattern = "diagonal"
        sign = 1 if ko == 0 else -1
        blocks = {"j_plus": upper_left, "j_minus": lower_right}
        residuals["off_diagonal"] = max(_norm(upper_right), _norm(lower_left))
        residuals["symmetry"] = max(_norm(b - sign * b.T) for b in blocks.values())
        residuals["block_unitary"] = max(_unitarity(b) for b in blocks.values())
    else:
        pattern = "off_diagonal"
        if plus != minus:
            raise RealStructureClassificationError(
                "KO %d needs equal grading eigenspaces, got %d and %d" % (ko, plus, minus)
            )
        sign = -1 if ko == 2 else 1
        blocks = {"j": upper_right, "lower": lower_left}
        residuals["diagonal"] = max(_norm(upper_left), _norm(lower_right))
        residuals["transpose"] = _norm(lower_left - sign * upper_right.T)
        residuals["block_unitary"] = _unitarity(upper_right)

    form = RealStructureForm(ko, pattern, blocks, residuals, v)
    if form.residual >= t.tol:
        logger.critical("real_structure_form: KO %d case fails, residuals %s", ko, residuals)
        raise RealStructureClassificationError(
            "J matches no KO-%d block pattern (residuals %s)" % (ko, residuals)
        )
    logger.info("real_structure_form: KO %d, %s pattern", ko, pattern)
    return form


def _norm(m: np.ndarray) -> float:
    return spectral_norm(m) if m.size else 0.0


def _unitarity(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return spectral_norm(m @ adjoint(m) - np.eye(m.shape[0]))


def canonical_real_structure(grading, ko: int, tol: float = DEFAULT_TOL) -> RealStructure:
    """
    Build the canonical J of the requested even KO dimension for a grading.

    Identity blocks for KO 0, symplectic blocks for KO 4, and the
    off-diagonal forms with j = 1 for KO 2 and 6.

    Raises
    ------
    RealStructureClassificationError
        When the grading eigenspace dimensions rule the KO dimension out.
    """
    grading = as_cmatrix(grading)
    if ko not in (0, 2, 4, 6):
        raise RealStructureClassificationError("KO %r is not an even KO dimension" % (ko,))
    v, plus = _grading_eigenbasis(grading, tol)
    minus = grading.shape[0] - plus
    if ko == 0:
        u_prime = np.eye(plus + minus)
    elif ko == 4:
        if plus % 2 or minus % 2:
            raise RealStructureClassificationError(
                "KO 4 needs even-dimensional grading eigenspaces, got %d and %d" % (plus, minus)
            )
        u_prime = np.zeros((plus + minus, plus + minus))
        for offset, size in ((0, plus), (plus, minus)):
            h = size // 2
            u_prime[offset : offset + h, offset + h : offset + size] = np.eye(h)
            u_prime[offset + h : offset + size, offset : offset + h] = -np.eye(h)
    else:
        if plus != minus:
            raise RealStructureClassificationError(
                "KO %d needs equal grading eigenspaces, got %d and %d" % (ko, plus, minus)
            )
        sign = -1 if ko == 2 else 1
        u_prime = np.zeros((2 * plus, 2 * plus))
        u_prime[:plus, plus:] = np.eye(plus)
        u_prime[plus:, :plus] = sign * np.eye(plus)
    unitary = v @ u_prime @ v.T
    return RealStructure(unitary, RealStructureSigns.for_ko(ko))


def solve_dirac_space(t: FiniteTriple) -> List[np.ndarray]:
    """
    Real basis of the admissible Dirac operators of a triple.

    Self-adjointness is built into the Hermitian parametrization; the
    constraints are D gamma = -gamma D, J D = epsilon' D J and the order-one
    condition on every pair of algebra basis elements. Missing grading or
    real structure drops the corresponding constraints.

    Parameters
    ----------
    t : FiniteTriple
        Triple whose ``dirac`` is ignored.

    Returns
    -------
    list of np.ndarray
        Orthonormal real basis of the solution space.
    """
    constraints = []
    if t.grading is not None:
        g = t.grading
        constraints.append(lambda m: anticommutator(m, g))
    if t.real is not None:
        u = t.real.unitary
        eps_prime = t.real.signs.epsilon_prime
        constraints.append(lambda m: u @ np.conj(m) - eps_prime * m @ u)
        opposites = [t.real.opposite(b) for b in t.rep_basis]
        for a in t.rep_basis:
            for b0 in opposites:
                constraints.append(lambda m, a=a, b0=b0: commutator(commutator(m, a), b0))
    else:
        logger.warning("solve_dirac_space: no real structure, order-one condition not imposed")
    basis = real_null_space(constraints, hermitian_parametrization(t.hilbert_dim), t.tol)
    logger.info("solve_dirac_space: dimension %d", len(basis))
    return basis
