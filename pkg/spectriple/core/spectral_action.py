import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.integrate
import scipy.special

from spectriple.constants import HEAT_TRACE_TRUNCATION_TOL
from spectriple.core.catalog import electrodynamics_dirac
from spectriple.core.clifford import GammaSet, build_gammas
from spectriple.core.exceptions import InvalidInputError, TruncationError
from spectriple.core.linalg import adjoint, kron, spectral_norm

logger = logging.getLogger("spectriple")

CURVATURE_TOL = 1e-10

# U(1) charge pattern of the electrodynamics fibre: +1 on particles, -1 on antiparticles
CHARGE_PATTERN = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)

FOUR_PI_SQUARED = 16 * math.pi**2


@dataclass
class PointGeometry:
    """
    Curvature data at a point in an orthonormal frame.

    Attributes
    ----------
    s : float
        Scalar curvature, the trace of ``ricci``.
    ricci : np.ndarray
        Ricci tensor, ricci[b, d] = sum_a riemann[a, b, a, d].
    riemann : np.ndarray
        Riemann tensor with all algebraic symmetries, shape (4, 4, 4, 4).
    laplacian_s : float
        Laplacian of s; only enters when boundary terms are switched on.
    """

    s: float
    ricci: np.ndarray
    riemann: np.ndarray
    laplacian_s: float = 0.0

    def __post_init__(self):
        self.riemann = np.asarray(self.riemann, dtype=float)
        self.ricci = np.asarray(self.ricci, dtype=float)
        if self.riemann.shape != (4, 4, 4, 4) or self.ricci.shape != (4, 4):
            raise InvalidInputError("riemann must be 4x4x4x4 and ricci 4x4")
        residuals = self.residuals()
        scale = max(1.0, float(np.max(np.abs(self.riemann))))
        if max(residuals.values()) > CURVATURE_TOL * scale:
            raise InvalidInputError("curvature data violates its symmetries: %s" % residuals)

    @classmethod
    def from_riemann(cls, riemann, laplacian_s: float = 0.0) -> "PointGeometry":
        riemann = np.asarray(riemann, dtype=float)
        ricci = np.einsum("abad->bd", riemann)
        return cls(s=float(np.trace(ricci)), ricci=ricci, riemann=riemann, laplacian_s=laplacian_s)

    @classmethod
    def flat(cls) -> "PointGeometry":
        return cls.from_riemann(np.zeros((4, 4, 4, 4)))

    def residuals(self) -> Dict[str, float]:
        r = self.riemann
        return {
            "antisymmetry_first": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))),
            "antisymmetry_second": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))),
            "pair_exchange": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))),
            "bianchi": float(np.max(np.abs(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2)))),
            "ricci": float(np.max(np.abs(self.ricci - np.einsum("abad->bd", r)))),
            "scalar": abs(self.s - float(np.trace(self.ricci))),
        }

    @property
    def riemann_squared(self) -> float:
        return float(np.sum(self.riemann**2))

    @property
    def ricci_squared(self) -> float:
        return float(np.sum(self.ricci**2))


def project_to_curvature_tensor(t: np.ndarray) -> np.ndarray:
    """
    Project a rank-4 array onto tensors with the Riemann symmetries.

    Antisymmetrise both index pairs, symmetrise under pair exchange and
    subtract a third of the (then totally antisymmetric) cyclic sum.
    """
    t = np.asarray(t, dtype=float)
    t = (t - t.transpose(1, 0, 2, 3)) / 2
    t = (t - t.transpose(0, 1, 3, 2)) / 2
    t = (t + t.transpose(2, 3, 0, 1)) / 2
    cyclic = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
    return t - cyclic / 3


def random_geometry(rng: np.random.Generator, scale: float = 1.0) -> PointGeometry:
    """Random curvature with components of size ``scale`` and a random Laplacian of s."""
    riemann = project_to_curvature_tensor(rng.uniform(-scale, scale, size=(4, 4, 4, 4)))
    return PointGeometry.from_riemann(riemann, laplacian_s=float(rng.uniform(-scale, scale)))


def weyl_tensor(geom: PointGeometry) -> np.ndarray:
    """Trace-free part of the Riemann tensor in four dimensions."""
    g = np.eye(4)
    ric, s = geom.ricci, geom.s
    ricci_part = (
        np.einsum("ac,bd->abcd", g, ric)
        - np.einsum("ad,bc->abcd", g, ric)
        - np.einsum("bc,ad->abcd", g, ric)
        + np.einsum("bd,ac->abcd", g, ric)
    )
    scalar_part = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    return geom.riemann - ricci_part / 2 + s * scalar_part / 6


def weyl_squared(geom: PointGeometry) -> float:
    """C_{abcd} C^{abcd} = Riem^2 - 2 Ric^2 + s^2 / 3."""
    return geom.riemann_squared - 2 * geom.ricci_squared + geom.s**2 / 3


def euler_density(geom: PointGeometry) -> float:
    """R*R* = Riem^2 - 4 Ric^2 + s^2."""
    return geom.riemann_squared - 4 * geom.ricci_squared + geom.s**2


def levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        eps[perm] = np.linalg.det(np.eye(4)[list(perm)])
    return eps


def euler_density_direct(geom: PointGeometry) -> float:
    """1/4 eps^{abef} eps^{cdgh} R_{abcd} R_{efgh}."""
    eps = levi_civita()
    r = geom.riemann
    return float(np.einsum("abef,cdgh,abcd,efgh->", eps, eps, r, r) / 4)


@dataclass
class ModelPoint:
    """
    Finite Dirac parameter d and gauge curvature F_{mu nu} at a point.
    """

    d: complex = 0.0
    F: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    def __post_init__(self):
        self.d = complex(self.d)
        self.F = np.asarray(self.F, dtype=float)
        if self.F.shape != (4, 4):
            raise InvalidInputError("F must be 4x4")
        if np.any(self.F != -self.F.T):
            raise InvalidInputError("F must be antisymmetric")

    @property
    def field_squared(self) -> float:
        return float(np.sum(self.F**2))

    @classmethod
    def from_components(cls, d: complex = 0.0, components: Optional[Dict] = None) -> "ModelPoint":
        """Build F from its ``{(mu, nu): value}`` entries with mu < nu."""
        f = np.zeros((4, 4))
        for (mu, nu), value in (components or {}).items():
            f[mu, nu] = value
            f[nu, mu] = -value
        return cls(d=d, F=f)


def random_model_point(rng: np.random.Generator, max_d: float = 2.0, max_f: float = 2.0) -> ModelPoint:
    radius = max_d * math.sqrt(rng.random())
    d = radius * np.exp(2j * math.pi * rng.random())
    upper = np.triu(rng.uniform(-max_f, max_f, size=(4, 4)), 1)
    return ModelPoint(d=d, F=upper - upper.T)


@dataclass
class Moments:
    """
    f(0), f_2 = int f(v) v dv, f_4 = int f(v) v^3 dv and the cutoff Lambda.
    """

    f0: float
    f2: float
    f4: float
    Lambda: float

    def __post_init__(self):
        if not self.Lambda > 0:
            raise InvalidInputError("Lambda must be positive")

    @classmethod
    def gaussian(cls, Lambda: float = 1.0) -> "Moments":
        """Moments of f(v) = exp(-v^2)."""
        return cls(f0=1.0, f2=0.5, f4=0.5, Lambda=Lambda)


def moments_from_profile(f: Callable[[float], float], Lambda: float = 1.0) -> Moments:
    """Moments of a cutoff profile by numerical quadrature."""
    f2, _ = scipy.integrate.quad(lambda v: f(v) * v, 0, np.inf)
    f4, _ = scipy.integrate.quad(lambda v: f(v) * v**3, 0, np.inf)
    return Moments(f0=float(f(0.0)), f2=f2, f4=f4, Lambda=Lambda)


def random_moments(rng: np.random.Generator, upper: float = 10.0) -> Moments:
    low = upper * 1e-3
    f0, f2, f4, lam = rng.uniform(low, upper, size=4)
    return Moments(f0=f0, f2=f2, f4=f4, Lambda=lam)


@dataclass
class EndomorphismData:
    """
    Q and Omega^E_{mu nu} of the generalized Laplacian D_A^2.

    ``omega`` has shape (4, 4, n, n) and holds all mu, nu.
    """

    Q: np.ndarray
    omega: np.ndarray

    @property
    def pairs(self) -> Dict[tuple, np.ndarray]:
        return {(mu, nu): self.omega[mu, nu] for mu in range(4) for nu in range(mu + 1, 4)}

    def residuals(self) -> Dict[str, float]:
        return {
            "Q_self_adjoint": spectral_norm(self.Q - adjoint(self.Q)),
            "omega_anti_self_adjoint": max(
                spectral_norm(w + adjoint(w)) for w in self.omega.reshape(-1, *self.Q.shape)
            ),
        }


@dataclass
class SeeleyCoefficients:
    a0: float
    a2: float
    a4: float

    def as_dict(self):
        return {"a0": self.a0, "a2": self.a2, "a4": self.a4}


def spin_curvature(geom: PointGeometry, g: GammaSet) -> np.ndarray:
    """Omega^S_{mu nu} = 1/4 R_{mu nu a b} gamma^a gamma^b, shape (4, 4, 4, 4)."""
    products = np.einsum("aij,bjk->abik", g.gammas, g.gammas)
    return 0.25 * np.einsum("mnab,abik->mnik", geom.riemann, products)


def finite_field_strength(model: ModelPoint) -> np.ndarray:
    """F_{mu nu} (x) charge pattern, shape (4, 4, 4, 4)."""
    return np.einsum("mn,ij->mnij", model.F, CHARGE_PATTERN)


def assemble_Q(geom: PointGeometry, model: ModelPoint, g: Optional[GammaSet] = None) -> np.ndarray:
    """
    Q = -s/4 - 1 (x) D_F^2 + i/2 gamma^mu gamma^nu (x) F_{mu nu} on C^4 (x) C^4.
    """
    g = g if g is not None else build_gammas()
    d_f = electrodynamics_dirac(model.d)
    eye4 = np.eye(4)
    q = -0.25 * geom.s * np.eye(16) - kron(eye4, d_f @ d_f)
    f = finite_field_strength(model)
    for mu in range(4):
        for nu in range(4):
            if model.F[mu, nu] != 0:
                q = q + 0.5j * kron(g.gammas[mu] @ g.gammas[nu], f[mu, nu])
    return q


def assemble_omegaE(geom: PointGeometry, model: ModelPoint, g: Optional[GammaSet] = None) -> np.ndarray:
    """Omega^E_{mu nu} = Omega^S_{mu nu} (x) 1 + i 1 (x) F_{mu nu}, shape (4, 4, 16, 16)."""
    g = g if g is not None else build_gammas()
    omega_s = spin_curvature(geom, g)
    f = finite_field_strength(model)
    eye4 = np.eye(4)
    omega = np.zeros((4, 4, 16, 16), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            omega[mu, nu] = kron(omega_s[mu, nu], eye4) + 1j * kron(eye4, f[mu, nu])
    return omega


def assemble_endomorphisms(
    geom: PointGeometry, model: ModelPoint, g: Optional[GammaSet] = None
) -> EndomorphismData:
    g = g if g is not None else build_gammas()
    return EndomorphismData(Q=assemble_Q(geom, model, g), omega=assemble_omegaE(geom, model, g))


def canonical_endomorphisms(geom: PointGeometry, g: Optional[GammaSet] = None) -> EndomorphismData:
    """Spinor-bundle data of the canonical triple: Q = -s/4 (Lichnerowicz), Omega = Omega^S."""
    g = g if g is not None else build_gammas()
    return EndomorphismData(Q=-0.25 * geom.s * np.eye(4), omega=spin_curvature(geom, g).astype(complex))


def gilkey_a_k(
    endo: EndomorphismData,
    geom: PointGeometry,
    include_ds: bool = False,
    laplacian_q: Optional[np.ndarray] = None,
) -> SeeleyCoefficients:
    """
    a_0, a_2 and a_4 densities of a generalized Laplacian in four dimensions.

    Parameters
    ----------
    endo : EndomorphismData
        Q and the bundle curvature.
    geom : PointGeometry
        Curvature at the point.
    include_ds : bool
        Add the -12 Laplacian(s) boundary term.
    laplacian_q : np.ndarray, optional
        Laplacian of Q; its -60 Laplacian(Q) term is added when given.
    """
    q = endo.Q
    n = q.shape[0]
    s = geom.s
    a0 = n / FOUR_PI_SQUARED
    a2 = (n * s / 6 + np.trace(q).real) / FOUR_PI_SQUARED
    omega_squared = np.einsum("mnij,mnji->", endo.omega, endo.omega)
    total = (
        n * (5 * s**2 - 2 * geom.ricci_squared + 2 * geom.riemann_squared)
        + 60 * s * np.trace(q)
        + 180 * np.trace(q @ q)
        + 30 * omega_squared
    )
    if include_ds:
        total = total - 12 * n * geom.laplacian_s
    if laplacian_q is not None:
        total = total - 60 * np.trace(laplacian_q)
    a4 = total.real / (360 * FOUR_PI_SQUARED)
    return SeeleyCoefficients(a0=float(a0), a2=float(a2), a4=float(a4))


def expansion_value(coeffs: SeeleyCoefficients, moments: Moments) -> float:
    """2 f_4 Lambda^4 a_0 + 2 f_2 Lambda^2 a_2 + f(0) a_4."""
    lam = moments.Lambda
    return 2 * moments.f4 * lam**4 * coeffs.a0 + 2 * moments.f2 * lam**2 * coeffs.a2 + moments.f0 * coeffs.a4


def gravitational_lagrangian(geom: PointGeometry, moments: Moments, include_ds: bool = False) -> float:
    """L_M = 2 f_4 Lambda^4 - f_2 Lambda^2 s / 6 + f(0) (Laplacian(s)/120 - C^2/80 + 11 R*R*/1440)."""
    lam = moments.Lambda
    value = (
        2 * moments.f4 * lam**4
        - moments.f2 * lam**2 * geom.s / 6
        + moments.f0 * (-weyl_squared(geom) / 80 + 11 * euler_density(geom) / 1440)
    )
    if include_ds:
        value += moments.f0 * geom.laplacian_s / 120
    return value


def lagrangian_terms(
    geom: PointGeometry, model: ModelPoint, moments: Moments, include_ds: bool = False
) -> Dict[str, float]:
    """The three pieces 4 L_M, L_Y and L_H of the electrodynamics Lagrangian."""
    lam = moments.Lambda
    d2 = abs(model.d) ** 2
    return {
        "L_M": 4 * gravitational_lagrangian(geom, moments, include_ds),
        "L_Y": 2 * moments.f0 * model.field_squared / 3,
        "L_H": -8 * moments.f2 * lam**2 * d2 + 2 * moments.f0 * d2**2 + moments.f0 * geom.s * d2 / 3,
    }


def closed_form_lagrangian(
    geom: PointGeometry, model: ModelPoint, moments: Moments, include_ds: bool = False
) -> float:
    """L = 4 L_M + L_Y + L_H pointwise."""
    return sum(lagrangian_terms(geom, model, moments, include_ds).values())


def _expansion(geom, model, moments, g) -> float:
    return expansion_value(gilkey_a_k(assemble_endomorphisms(geom, model, g), geom), moments)


def compare_lagrangian(
    geom: PointGeometry, model: ModelPoint, moments: Moments, g: Optional[GammaSet] = None
) -> float:
    """
    Relative error between the heat-kernel expansion of Tr f(D_A / Lambda)
    and L / (4 pi^2), with boundary terms off on both sides.

    The scale is the largest absolute Lagrangian term, at least 1.
    """
    g = g if g is not None else build_gammas()
    terms = lagrangian_terms(geom, model, moments)
    target = sum(terms.values()) / (4 * math.pi**2)
    scale = max([abs(v) / (4 * math.pi**2) for v in terms.values()] + [1.0])
    error = abs(_expansion(geom, model, moments, g) - target) / scale
    logger.debug("compare_lagrangian: relative error %.3g", error)
    return error


def isolated_term_errors(
    geom: PointGeometry, model: ModelPoint, moments: Moments, g: Optional[GammaSet] = None
) -> Dict[str, float]:
    """
    Relative errors of the d-only and F-only slices against L_H and L_Y.

    Each slice is the difference between the expansion with only d (resp.
    only F) switched on and the expansion with both off.
    """
    g = g if g is not None else build_gammas()
    base = _expansion(geom, ModelPoint(), moments, g)
    d_only = ModelPoint(d=model.d)
    f_only = ModelPoint(F=model.F)
    out = {}
    for name, slice_model in (("L_H", d_only), ("L_Y", f_only)):
        expected = lagrangian_terms(geom, slice_model, moments)[name] / (4 * math.pi**2)
        got = _expansion(geom, slice_model, moments, g) - base
        out[name] = abs(got - expected) / max(abs(expected), 1.0)
    return out


@dataclass
class HeatTraceResult:
    """
    Heat traces of D_A^2 on the flat 4-torus with the small-t fit.

    ``a0_density`` and ``a2_density`` are per unit volume.
    """

    side_length: float
    mode_cut: int
    d: complex
    t_values: List[float]
    traces: List[float]
    truncation_bounds: List[float]
    a0_density: float
    a2_density: float

    @property
    def volume(self) -> float:
        return self.side_length**4

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"t": t, "trace": tr, "a0": self.a0_density, "a2": self.a2_density}
            for t, tr in zip(self.t_values, self.traces)
        ]


def _theta(t: float, k: float, cut: int) -> float:
    n = np.arange(-cut, cut + 1)
    return float(np.sum(np.exp(-t * (k * n) ** 2)))


def _theta_tail(t: float, k: float, cut: int) -> float:
    """Upper bound on sum_{|n| > cut} exp(-t k^2 n^2)."""
    return math.sqrt(math.pi / (t * k * k)) * float(scipy.special.erfc(cut * k * math.sqrt(t)))


def truncation_bound(t: float, side_length: float, cut: int) -> float:
    """Relative error bound of the truncated 4-D mode sum."""
    k = 2 * math.pi / side_length
    ratio = _theta_tail(t, k, cut) / _theta(t, k, cut)
    return (1 + ratio) ** 4 - 1


def required_mode_cut(t: float, side_length: float, tol: float = HEAT_TRACE_TRUNCATION_TOL) -> int:
    cut = 1
    while truncation_bound(t, side_length, cut) > tol:
        cut += 1
    return cut


DEFAULT_T_VALUES = tuple(np.linspace(0.05, 0.15, 11))


def heat_trace_torus(
    side_length: float = 2 * math.pi,
    mode_cut: int = 30,
    d: complex = 0.0,
    t_values: Sequence[float] = DEFAULT_T_VALUES,
    brute_force: bool = False,
    tol: float = HEAT_TRACE_TRUNCATION_TOL,
) -> HeatTraceResult:
    """
    Tr exp(-t D_A^2) on the flat 4-torus with zero gauge field.

    D_A^2 = (-Laplacian + |d|^2) (x) 1_16 is diagonal in Fourier modes, so
    the trace factorises into 16 exp(-t |d|^2) theta(t)^4 with
    theta(t) = sum_{|n| <= mode_cut} exp(-t (2 pi n / L)^2). The small-t fit
    of t^2 Tr / volume by a quadratic in t gives the a_0 and a_2 densities.

    Raises
    ------
    TruncationError
        If the truncation bound at the smallest t exceeds ``tol``; the error
        carries the required ``mode_cut``.
    """
    t_values = [float(t) for t in t_values]
    if side_length <= 0 or mode_cut < 0 or not t_values or min(t_values) <= 0:
        raise InvalidInputError("need side_length > 0, mode_cut >= 0 and positive t values")
    if len(t_values) < 3:
        raise InvalidInputError("the small-t fit needs at least three t values")
    t_min = min(t_values)
    if truncation_bound(t_min, side_length, mode_cut) > tol:
        needed = required_mode_cut(t_min, side_length, tol)
        logger.critical("heat_trace_torus: mode_cut %d too small, need %d", mode_cut, needed)
        raise TruncationError(
            "mode_cut %d too small at t=%g, need %d" % (mode_cut, t_min, needed),
            required_mode_cut=needed,
        )
    k = 2 * math.pi / side_length
    d2 = abs(complex(d)) ** 2
    traces = []
    for t in t_values:
        if brute_force:
            n = np.arange(-mode_cut, mode_cut + 1)
            grid = np.meshgrid(n, n, n, n, indexing="ij")
            momentum_squared = sum((k * axis) ** 2 for axis in grid)
            traces.append(float(16 * np.sum(np.exp(-t * (momentum_squared + d2)))))
        else:
            traces.append(16 * math.exp(-t * d2) * _theta(t, k, mode_cut) ** 4)
    volume = side_length**4
    ts = np.array(t_values)
    scaled = ts**2 * np.array(traces) / volume
    _, a2, a0 = np.polyfit(ts, scaled, 2)
    logger.info("heat_trace_torus: a0=%.6g a2=%.6g per unit volume", a0, a2)
    return HeatTraceResult(
        side_length=side_length,
        mode_cut=mode_cut,
        d=complex(d),
        t_values=t_values,
        traces=traces,
        truncation_bounds=[truncation_bound(t, side_length, mode_cut) for t in t_values],
        a0_density=float(a0),
        a2_density=float(a2),
    )
