"""
Fermionic action of the electrodynamics almost-commutative triple on a
truncated flat 4-torus.

The Hilbert space is spanned by plane waves exp(i k.x) times C^4 spinors times
the four finite states; the vector index is ``mode * 16 + spin * 4 + f``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from spectriple.core.catalog import ELECTRODYNAMICS_LABELS, electrodynamics_triple
from spectriple.core.clifford import ChargeConjugation, GammaSet, build_gammas, charge_conjugation
from spectriple.core.exceptions import InvalidInputError, ModeSpaceError, NotSelfAdjointError
from spectriple.core.gauge import charge_operator
from spectriple.core.linalg import adjoint, kron, spectral_norm
from spectriple.core.triple import FiniteTriple

logger = logging.getLogger("spectriple")

SPINOR_DIM = 4
FINITE_DIM = 4
BLOCK_DIM = SPINOR_DIM * FINITE_DIM

CHI_L, CHI_R, PSI_R, PSI_L = "chi_L", "chi_R", "psi_R", "psi_L"
# (label, spin components, finite state) of the four H+ slots
SLOTS = (
    (CHI_L, (0, 1), 0),
    (CHI_R, (2, 3), 1),
    (PSI_R, (2, 3), 2),
    (PSI_L, (0, 1), 3),
)
CHI_LABELS = (CHI_L, CHI_R)

ModeKey = Tuple[int, int, int, int]


@dataclass
class ModeSpace:
    """
    Finite set of Fourier modes on the flat torus of side ``side_length``.

    The set must be closed under k -> -k so that J preserves it.
    """

    modes: np.ndarray
    side_length: float = 2 * math.pi
    spinor_dim: int = SPINOR_DIM
    finite_dim: int = FINITE_DIM

    def __post_init__(self):
        modes = np.asarray(self.modes)
        if modes.ndim != 2 or modes.shape[1] != 4 or len(modes) == 0:
            raise ModeSpaceError("modes must be a non-empty list of integer 4-vectors")
        if not np.all(modes == np.round(modes)):
            raise ModeSpaceError("modes must be integer vectors")
        self.modes = modes.astype(int)
        keys = [tuple(m) for m in self.modes]
        if len(set(keys)) != len(keys):
            raise ModeSpaceError("modes must be distinct")
        if any(tuple(-m) not in self._index for m in self.modes):
            raise ModeSpaceError("mode set must be closed under k -> -k")
        if not self.side_length > 0:
            raise ModeSpaceError("side_length must be positive")

    @property
    def _index(self) -> Dict[ModeKey, int]:
        return {tuple(m): n for n, m in enumerate(self.modes)}

    def index(self, mode) -> Optional[int]:
        return self._index.get(tuple(int(c) for c in mode))

    def __len__(self):
        return len(self.modes)

    @property
    def dim(self) -> int:
        return len(self.modes) * self.spinor_dim * self.finite_dim

    def momentum(self, n: int) -> np.ndarray:
        return 2 * math.pi * self.modes[n] / self.side_length

    @classmethod
    def symmetric(cls, count: int, side_length: float = 2 * math.pi) -> "ModeSpace":
        """
        {0}, {+-e1}, {0, +-e1}, {+-e1, +-e2}, ... up to nine modes.
        """
        if not 1 <= count <= 9:
            raise ModeSpaceError("symmetric mode sets hold 1 to 9 modes")
        eye = np.eye(4, dtype=int)
        modes = [np.zeros(4, dtype=int)] if count % 2 else []
        for axis in range(count // 2):
            modes.extend([eye[axis], -eye[axis]])
        return cls(np.array(modes), side_length)


def negation_permutation(ms: ModeSpace) -> np.ndarray:
    """P with P e_k = e_{-k}."""
    p = np.zeros((len(ms), len(ms)))
    for n, mode in enumerate(ms.modes):
        p[ms.index(-mode), n] = 1.0
    return p


def total_real_structure(ms: ModeSpace, jm: ChargeConjugation, finite: FiniteTriple) -> np.ndarray:
    """Unitary part of J = (k -> -k) (x) J_M (x) J_F."""
    if finite.real is None:
        raise InvalidInputError("total_real_structure needs a finite real structure")
    return kron(negation_permutation(ms), kron(jm.unitary, finite.real.unitary))


@dataclass
class HPlusBasis:
    """
    Standard basis of the +1 eigenspace of gamma5 (x) gamma_F.

    Attributes
    ----------
    mode_space : ModeSpace
    embedding : np.ndarray
        Columns are the basis vectors inside the full space.
    slots : list of (mode index, spin, finite state, label)
    real_unitary : np.ndarray
        Unitary part of the total real structure.
    charge_conjugation : ChargeConjugation
    """

    mode_space: ModeSpace
    embedding: np.ndarray
    slots: List[Tuple[int, int, int, str]]
    real_unitary: np.ndarray
    charge_conjugation: ChargeConjugation
    finite: FiniteTriple

    def __len__(self):
        return len(self.slots)

    def labels(self) -> List[str]:
        return [slot[3] for slot in self.slots]

    def indices(self, labels: Sequence[str]) -> List[int]:
        return [n for n, slot in enumerate(self.slots) if slot[3] in labels]

    @property
    def chi_indices(self) -> List[int]:
        return self.indices(CHI_LABELS)

    @property
    def psi_indices(self) -> List[int]:
        return self.indices((PSI_R, PSI_L))


def total_grading(ms: ModeSpace, g: GammaSet, finite: FiniteTriple) -> np.ndarray:
    return kron(np.eye(len(ms)), kron(g.gamma5, finite.grading))


def build_hplus(ms: ModeSpace, g: Optional[GammaSet] = None, finite: Optional[FiniteTriple] = None) -> HPlusBasis:
    """
    Basis chi_L (x) e_L + chi_R (x) e_R + psi_R (x) e_bar_L + psi_L (x) e_bar_R,
    two Weyl components per slot and mode.

    Raises
    ------
    InvalidInputError
        If a basis vector is not in the +1 eigenspace of the grading.
    """
    g = g if g is not None else build_gammas()
    finite = finite if finite is not None else electrodynamics_triple(0.0)
    jm = charge_conjugation(g)
    slots = []
    for n in range(len(ms)):
        for label, spins, f in SLOTS:
            for spin in spins:
                slots.append((n, spin, f, label))
    embedding = np.zeros((ms.dim, len(slots)))
    for col, (n, spin, f, _) in enumerate(slots):
        embedding[n * BLOCK_DIM + spin * FINITE_DIM + f, col] = 1.0
    grading = total_grading(ms, g, finite)
    residual = spectral_norm(grading @ embedding - embedding)
    if residual > 1e-12:
        logger.critical("build_hplus: basis leaves H+ (residual %.3g)", residual)
        raise InvalidInputError("basis vectors are not in H+")
    logger.debug("build_hplus: %d modes, dim H+ = %d", len(ms), len(slots))
    return HPlusBasis(
        mode_space=ms,
        embedding=embedding,
        slots=slots,
        real_unitary=total_real_structure(ms, jm, finite),
        charge_conjugation=jm,
        finite=finite,
    )


def expand_gauge_modes(ms: ModeSpace, gauge_modes: Optional[Dict] = None, tol: float = 1e-12) -> Dict[ModeKey, np.ndarray]:
    """
    Add the conjugate partner y_{-q} = conj(y_q) of every gauge mode.

    Raises
    ------
    ModeSpaceError
        If a mode couples no pair of fermion modes, a zero mode is not real,
        or a mode and its partner are both given inconsistently.
    """
    expanded: Dict[ModeKey, np.ndarray] = {}
    for q, y in (gauge_modes or {}).items():
        key = tuple(int(c) for c in q)
        y = np.asarray(y, dtype=complex)
        if len(key) != 4 or y.shape != (4,):
            raise ModeSpaceError("gauge modes map integer 4-vectors to 4-vectors")
        if not any(ms.index(np.add(mode, key)) is not None for mode in ms.modes):
            raise ModeSpaceError("gauge mode %s couples no pair of modes" % (key,))
        partner = tuple(-c for c in key)
        if key == partner and np.max(np.abs(y.imag)) > tol:
            raise ModeSpaceError("the zero gauge mode must be real")
        for k, value in ((key, y), (partner, np.conj(y))):
            if k in expanded and np.max(np.abs(expanded[k] - value)) > tol:
                raise ModeSpaceError("gauge mode %s conflicts with its conjugate partner" % (k,))
            expanded[k] = value
    return expanded


def default_gauge_mode(ms: ModeSpace) -> Optional[ModeKey]:
    """Shortest nonzero difference of two modes, ``None`` for a single mode."""
    differences = {tuple(a - b) for a in ms.modes for b in ms.modes if np.any(a != b)}
    if not differences:
        return None
    return min(differences, key=lambda q: (sum(c * c for c in q), q))


def fluctuated_dirac(
    ms: ModeSpace,
    g: Optional[GammaSet] = None,
    finite: Optional[FiniteTriple] = None,
    gauge_modes: Optional[Dict] = None,
) -> np.ndarray:
    """
    D_A = slash(D) (x) 1 + gamma^mu (x) B_mu + gamma5 (x) D_F on the mode space.

    B_mu = Y_mu S with S the U(1) charge of the finite triple; a gauge mode q
    couples fermion mode k to k + q when both are present.
    """
    g = g if g is not None else build_gammas()
    finite = finite if finite is not None else electrodynamics_triple(0.0)
    charge = charge_operator(finite)
    d_f = finite.dirac_or_zero
    eye_f = np.eye(FINITE_DIM)
    mass = kron(g.gamma5, d_f)
    d_a = np.zeros((ms.dim, ms.dim), dtype=complex)
    for n in range(len(ms)):
        block = slice(n * BLOCK_DIM, (n + 1) * BLOCK_DIM)
        d_a[block, block] = kron(g.slash(ms.momentum(n)), eye_f) + mass
    for q, y in expand_gauge_modes(ms, gauge_modes, finite.tol).items():
        coupling = kron(g.slash(y), charge)
        for n, mode in enumerate(ms.modes):
            target = ms.index(mode + np.array(q))
            if target is None:
                continue
            d_a[target * BLOCK_DIM:(target + 1) * BLOCK_DIM, n * BLOCK_DIM:(n + 1) * BLOCK_DIM] += coupling
    return d_a


@dataclass
class GrassmannQuadratic:
    """
    sum_{i<j} c_ij theta_i theta_j over the H+ basis, stored as antisymmetric c.
    """

    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=complex)
        self.coeff = (c - c.T) / 2

    @classmethod
    def from_bilinear(cls, m: np.ndarray, factor: float = 0.5) -> "GrassmannQuadratic":
        """factor * sum_ij M_ij theta_i theta_j, i.e. c = factor (M - M^T)."""
        m = np.asarray(m, dtype=complex)
        return cls(factor * (m - m.T))

    @classmethod
    def from_pairing(cls, w: np.ndarray) -> "GrassmannQuadratic":
        """sum_ij W_ij theta_i theta_j, c = W - W^T."""
        w = np.asarray(w, dtype=complex)
        return cls(w - w.T)

    def rotated(self, phases) -> "GrassmannQuadratic":
        """Coefficients after theta_i -> phases_i theta_i."""
        p = np.diag(np.asarray(phases, dtype=complex))
        return GrassmannQuadratic(p @ self.coeff @ p)

    def deviation(self, other: "GrassmannQuadratic") -> float:
        return float(np.max(np.abs(self.coeff - other.coeff), initial=0.0))

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.coeff), initial=0.0))

    def block_sparsity(self, basis: HPlusBasis) -> Dict[str, float]:
        """Largest |c_ij| for every pair of slot labels."""
        labels = [slot[0] for slot in SLOTS]
        out = {}
        for a, first in enumerate(labels):
            rows = basis.indices((first,))
            for second in labels[a:]:
                cols = basis.indices((second,))
                out["%s|%s" % (first, second)] = float(np.max(np.abs(self.coeff[np.ix_(rows, cols)]), initial=0.0))
        return out


def pairing_matrix(d_a: np.ndarray, basis: HPlusBasis) -> np.ndarray:
    """M_ij = <J e_i, D_A e_j> = e_i^T U* D_A e_j."""
    e = basis.embedding
    return e.T @ adjoint(basis.real_unitary) @ d_a @ e


def fermionic_action_grassmann(d_a: np.ndarray, basis: HPlusBasis, factor: float = 0.5) -> GrassmannQuadratic:
    """
    1/2 <J xi, D_A xi> as a Grassmann quadratic over the H+ basis.

    Raises
    ------
    NotSelfAdjointError
        If ``d_a`` is not self-adjoint.
    """
    d_a = np.asarray(d_a, dtype=complex)
    if spectral_norm(d_a - adjoint(d_a)) > 1e-10 * max(1.0, spectral_norm(d_a)):
        raise NotSelfAdjointError("D_A is not self-adjoint")
    return GrassmannQuadratic.from_bilinear(pairing_matrix(d_a, basis), factor)


def decomposed_action(
    basis: HPlusBasis,
    m: float = 0.0,
    gauge_modes: Optional[Dict] = None,
    g: Optional[GammaSet] = None,
) -> GrassmannQuadratic:
    """
    -i (J_M chi, (gamma^mu (nabla_mu - i Y_mu) - m) psi) over the same basis.

    nabla_mu acts as i k_mu on mode k. chi pairs with psi at mode -k through
    J_M, and a gauge mode q pairs chi at -(k + q) with psi at k.
    """
    g = g if g is not None else build_gammas()
    ms = basis.mode_space
    expanded = expand_gauge_modes(ms, gauge_modes)
    form = adjoint(basis.charge_conjugation.unitary)
    kinetic = [form @ (g.slash(ms.momentum(n)) + 1j * m * np.eye(SPINOR_DIM)) for n in range(len(ms))]
    couplings = {q: form @ g.slash(y) for q, y in expanded.items()}

    w = np.zeros((len(basis), len(basis)), dtype=complex)
    for a in basis.chi_indices:
        n_a, s_a, _, _ = basis.slots[a]
        for b in basis.psi_indices:
            n_b, s_b, _, _ = basis.slots[b]
            if np.all(ms.modes[n_a] == -ms.modes[n_b]):
                w[a, b] += kinetic[n_b][s_a, s_b]
            for q, coupling in couplings.items():
                if np.all(-ms.modes[n_a] == ms.modes[n_b] + np.array(q)):
                    w[a, b] -= coupling[s_a, s_b]
    return GrassmannQuadratic.from_pairing(w)


@dataclass
class DecompositionCertificate:
    """
    Comparison of 1/2 <J xi, D_A xi> with the kinetic, gauge and mass terms.

    ``symmetric_part`` is the largest |M + M^T| on H+, i.e. what
    antisymmetrising the pairing discards.
    """

    deviation: float
    action_norm: float
    symmetric_part: float
    block_sparsity: Dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        return {
            "deviation": self.deviation,
            "action_norm": self.action_norm,
            "symmetric_part": self.symmetric_part,
            "block_sparsity": dict(self.block_sparsity),
        }


def certify_decomposition(
    ms: ModeSpace,
    gauge_modes: Optional[Dict] = None,
    m: float = 0.0,
    g: Optional[GammaSet] = None,
    factor: float = 0.5,
) -> DecompositionCertificate:
    """
    Build D_A with d = -i m and compare both sides coefficient by coefficient.
    """
    g = g if g is not None else build_gammas()
    finite = electrodynamics_triple(-1j * m)
    basis = build_hplus(ms, g, finite)
    d_a = fluctuated_dirac(ms, g, finite, gauge_modes)
    pairing = pairing_matrix(d_a, basis)
    action = fermionic_action_grassmann(d_a, basis, factor)
    expected = decomposed_action(basis, m, gauge_modes, g)
    deviation = action.deviation(expected)
    logger.info("certify_decomposition: %d modes, m=%g, deviation %.3g", len(ms), m, deviation)
    return DecompositionCertificate(
        deviation=deviation,
        action_norm=action.norm,
        symmetric_part=float(np.max(np.abs(pairing + pairing.T), initial=0.0)),
        block_sparsity=action.block_sparsity(basis),
    )


def antisymmetry_residual(
    d_a: np.ndarray, basis: HPlusBasis, rng: np.random.Generator, pairs: int = 100
) -> float:
    """max |<J xi, D_A xi'> + <J xi', D_A xi>| over random unit xi, xi' in H+."""
    u = basis.real_unitary
    worst = 0.0
    for _ in range(pairs):
        x, x_prime = (
            basis.embedding @ (rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis)))
            for _ in range(2)
        )
        x, x_prime = x / np.linalg.norm(x), x_prime / np.linalg.norm(x_prime)
        forward = np.vdot(u @ np.conj(x), d_a @ x_prime)
        backward = np.vdot(u @ np.conj(x_prime), d_a @ x)
        worst = max(worst, abs(forward + backward))
    return worst


def mapping_residuals(basis: HPlusBasis, d_a: np.ndarray, g: Optional[GammaSet] = None) -> Dict:
    """
    How J and D_A act on H+: both should land in H-, and J sends every slot
    to the conjugate finite state.
    """
    g = g if g is not None else build_gammas()
    ms = basis.mode_space
    grading = total_grading(ms, g, basis.finite)
    eye = np.eye(ms.dim)
    e = basis.embedding
    images = {}
    u_f = basis.finite.real.unitary
    for label, _, f in SLOTS:
        images[label] = ELECTRODYNAMICS_LABELS[int(np.argmax(np.abs(u_f[:, f])))]
    return {
        "j_to_hminus": spectral_norm((grading + eye) @ basis.real_unitary @ e),
        "d_to_hminus": spectral_norm((grading + eye) @ d_a @ e),
        "j_to_hplus": spectral_norm((grading - eye) @ basis.real_unitary @ e),
        "slot_images": images,
    }


def zero_mode_gauge_phases(basis: HPlusBasis, alpha: float) -> np.ndarray:
    """Phases of the constant gauge element exp(i alpha): chi -> e^{i alpha}, psi -> e^{-i alpha}."""
    return np.array([np.exp(1j * alpha if label in CHI_LABELS else -1j * alpha) for label in basis.labels()])
