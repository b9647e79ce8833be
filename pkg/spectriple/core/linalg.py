import logging
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np
import scipy.linalg

from spectriple.constants import DEFAULT_TOL, MAX_MATRIX_DIM_INT
from spectriple.core.exceptions import InvalidInputError, MatrixSizeError

logger = logging.getLogger("spectriple")

Constraint = Callable[[np.ndarray], np.ndarray]


def as_cmatrix(m) -> np.ndarray:
    """
    Convert ``m`` into a finite two-dimensional complex array.

    Raises
    ------
    InvalidInputError
        If ``m`` is not two-dimensional or has non-finite entries.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInputError("expected a matrix, got shape %s" % (arr.shape,))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix has non-finite entries")
    return arr


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def spectral_norm(m) -> float:
    """
    Operator norm of ``m``, i.e. its largest singular value.

    Parameters
    ----------
    m : array_like
        Complex matrix with finite entries.

    Returns
    -------
    float
        Largest singular value (0 for empty matrices).
    """
    arr = as_cmatrix(m)
    if arr.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(arr)[0])


def kron(a, b) -> np.ndarray:
    """
    Kronecker product with a guard on the resulting dimensions.

    Raises
    ------
    MatrixSizeError
        If either dimension of the product exceeds ``MAX_MATRIX_DIM_INT``.
    """
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > MAX_MATRIX_DIM_INT:
        logger.critical("kron result %dx%d exceeds %d", rows, cols, MAX_MATRIX_DIM_INT)
        raise MatrixSizeError(
            "kron result %dx%d exceeds MAX_MATRIX_DIM_INT=%d"
            % (rows, cols, MAX_MATRIX_DIM_INT)
        )
    return np.kron(a, b)


def hermitian_eigh(m):
    """
    Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Returns
    -------
    tuple of np.ndarray
        ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    """
    w, v = scipy.linalg.eigh(as_cmatrix(m))
    return w[::-1], v[:, ::-1]


def is_self_adjoint(m, tol: float = DEFAULT_TOL) -> bool:
    arr = as_cmatrix(m)
    return arr.shape[0] == arr.shape[1] and spectral_norm(arr - adjoint(arr)) < tol


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    arr = as_cmatrix(m)
    if arr.shape[0] != arr.shape[1]:
        return False
    return spectral_norm(arr @ adjoint(arr) - np.eye(arr.shape[0])) < tol


def _flatten_real(m: np.ndarray) -> np.ndarray:
    flat = np.asarray(m, dtype=complex).ravel()
    return np.concatenate([flat.real, flat.imag])


@dataclass
class RealParametrization:
    """
    A real coordinate system on a real vector space of complex matrices.

    A coordinate vector ``x`` stands for the matrix ``sum_k x[k] * basis[k]``.

    Attributes
    ----------
    basis : list of np.ndarray
        One matrix per real coordinate.
    name : str
        Label used in logs.
    """

    basis: List[np.ndarray]
    name: str = "custom"
    shape: tuple = field(init=False)

    def __post_init__(self):
        if not self.basis:
            raise InvalidInputError("parametrization needs at least one basis matrix")
        self.basis = [np.asarray(b, dtype=complex) for b in self.basis]
        self.shape = self.basis[0].shape

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_matrix(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        return np.tensordot(coords, np.stack(self.basis), axes=1)


def hermitian_parametrization(n: int) -> RealParametrization:
    """
    n diagonal reals followed by n(n-1)/2 complex upper-triangle pairs.

    Basis matrices are orthonormal for the real inner product Re Tr(A* B).
    """
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            re = np.zeros((n, n), dtype=complex)
            re[i, j] = re[j, i] = s
            im = np.zeros((n, n), dtype=complex)
            im[i, j] = 1j * s
            im[j, i] = -1j * s
            basis.extend([re, im])
    return RealParametrization(basis, name="hermitian(%d)" % n)


def full_matrix_parametrization(n: int) -> RealParametrization:
    """All complex n x n matrices, 2n^2 real coordinates."""
    basis = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            basis.extend([e, 1j * e])
    return RealParametrization(basis, name="full(%d)" % n)


def complex_span_parametrization(matrices: Sequence[np.ndarray]) -> RealParametrization:
    """Complex span of ``matrices``: coordinates (Re c_0..Re c_k, Im c_0..Im c_k)."""
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    return RealParametrization(mats + [1j * m for m in mats], name="span(%d)" % len(mats))


def real_null_space(
    constraints: Sequence[Constraint],
    parametrization: RealParametrization,
    tol: float = DEFAULT_TOL,
    return_coordinates: bool = False,
):
    """
    Orthonormal basis of the matrices satisfying every real-linear constraint.

    Each constraint maps a matrix of the parametrized space to a complex array
    that must vanish. The constraints are evaluated on every basis matrix,
    stacked into one real matrix, and the kernel is extracted with a relative
    singular-value threshold ``tol * sigma_max``.

    Parameters
    ----------
    constraints : sequence of callables
        Real-linear maps; an empty sequence returns the full space.
    parametrization : RealParametrization
        Real coordinates on the matrix space.
    tol : float
        Relative rank threshold.
    return_coordinates : bool
        Also return the kernel vectors as rows of a coordinate array.

    Returns
    -------
    list of np.ndarray or tuple
        Kernel matrices, and optionally their coordinates.
    """
    dim = parametrization.dim
    if not constraints:
        coords = np.eye(dim)
    else:
        columns = []
        for b in parametrization.basis:
            columns.append(np.concatenate([_flatten_real(c(b)) for c in constraints]))
        stacked = np.stack(columns, axis=1)
        coords = scipy.linalg.null_space(stacked, rcond=tol).T
    matrices = [parametrization.to_matrix(x) for x in coords]
    logger.debug(
        "real_null_space on %s: %d constraints, kernel dimension %d",
        parametrization.name,
        len(constraints),
        len(matrices),
    )
    if return_coordinates:
        return matrices, coords
    return matrices


def real_span_basis(
    matrices: Sequence[np.ndarray],
    tol: float = DEFAULT_TOL,
    return_coefficients: bool = False,
):
    """
    Orthonormal basis (for Re Tr(A* B)) of the real span of ``matrices``.

    If ``return_coefficients`` is set, also returns a real array ``comb`` with
    ``basis[r] == sum_m comb[r, m] * matrices[m]``.
    """
    if len(matrices) == 0:
        return ([], np.zeros((0, 0))) if return_coefficients else []
    rows = np.stack([_flatten_real(m) for m in matrices])
    u, s, vh = scipy.linalg.svd(rows, full_matrices=False)
    # absolute cutoff: a span made only of rounding noise has rank 0
    cutoff = tol * max(1.0, float(np.max(np.linalg.norm(rows, axis=1))))
    rank = int(np.sum(s > cutoff))
    if rank == 0:
        empty = np.zeros((0, len(matrices)))
        return ([], empty) if return_coefficients else []
    shape = np.asarray(matrices[0]).shape
    half = rows.shape[1] // 2
    basis = [(vh[r, :half] + 1j * vh[r, half:]).reshape(shape) for r in range(rank)]
    if not return_coefficients:
        return basis
    comb = (u[:, :rank] / s[:rank]).T
    return basis, comb


def to_pairs(m) -> list:
    """Matrix as a list of rows of ``[re, im]`` pairs."""
    arr = as_cmatrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def from_pairs(rows) -> np.ndarray:
    """
    Inverse of :func:`to_pairs`.

    Raises
    ------
    InvalidInputError
        On ragged rows, entries that are not ``[re, im]`` pairs, or
        non-finite values.
    """
    if not isinstance(rows, (list, tuple)) or len(rows) == 0:
        raise InvalidInputError("matrix must be a non-empty array of rows")
    width = None
    out = []
    for row in rows:
        if not isinstance(row, (list, tuple)):
            raise InvalidInputError("matrix row must be an array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InvalidInputError("ragged matrix rows")
        values = []
        for entry in row:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise InvalidInputError("matrix entry must be a [re, im] pair")
            try:
                values.append(complex(float(entry[0]), float(entry[1])))
            except (TypeError, ValueError) as e:
                raise InvalidInputError("matrix entry is not numeric: %r" % (entry,)) from e
        out.append(values)
    return as_cmatrix(np.array(out, dtype=complex))
