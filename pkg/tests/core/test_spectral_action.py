import math

import numpy as np
import pytest

from spectriple.core.exceptions import InvalidInputError, TruncationError
from spectriple.core.spectral_action import (Moments, ModelPoint,
                                             PointGeometry,
                                             assemble_endomorphisms,
                                             assemble_omegaE, assemble_Q,
                                             canonical_endomorphisms,
                                             closed_form_lagrangian,
                                             compare_lagrangian,
                                             euler_density,
                                             euler_density_direct,
                                             expansion_value, gilkey_a_k,
                                             gravitational_lagrangian,
                                             heat_trace_torus,
                                             isolated_term_errors,
                                             lagrangian_terms,
                                             moments_from_profile,
                                             random_geometry,
                                             random_model_point,
                                             random_moments,
                                             required_mode_cut,
                                             spin_curvature, weyl_squared,
                                             weyl_tensor)

LAGRANGIAN_TOL = 1e-10
HEAT_TRACE_RELATIVE_TOL = 0.01
CHARGE_PATTERN = np.diag([1.0, 1.0, -1.0, -1.0])
PI2 = math.pi**2


def test_random_geometry_has_curvature_symmetries(rng):
    for _ in range(20):
        geom = random_geometry(rng)
        assert max(geom.residuals().values()) < 1e-12


def test_point_geometry_rejects_raw_tensors(rng):
    with pytest.raises(InvalidInputError):
        PointGeometry.from_riemann(rng.normal(size=(4, 4, 4, 4)))
    with pytest.raises(InvalidInputError):
        PointGeometry.from_riemann(np.zeros((3, 3, 3, 3)))


def test_weyl_and_euler_identities(rng):
    for _ in range(20):
        geom = random_geometry(rng)
        weyl = weyl_tensor(geom)
        assert np.max(np.abs(np.einsum("abad->bd", weyl))) < 1e-12
        assert weyl_squared(geom) == pytest.approx(float(np.sum(weyl**2)), rel=1e-10, abs=1e-12)
        assert euler_density(geom) == pytest.approx(euler_density_direct(geom), rel=1e-10, abs=1e-12)


def test_model_point_validation():
    with pytest.raises(InvalidInputError):
        ModelPoint(F=np.ones((4, 4)))
    with pytest.raises(InvalidInputError):
        ModelPoint(F=np.zeros((3, 3)))
    model = ModelPoint.from_components(components={(0, 1): 2.0})
    assert model.F[1, 0] == -2.0
    assert model.field_squared == 8.0


def test_moments():
    gaussian = moments_from_profile(lambda v: math.exp(-v * v), Lambda=2.0)
    expected = Moments.gaussian(Lambda=2.0)
    assert gaussian.f0 == pytest.approx(expected.f0)
    assert gaussian.f2 == pytest.approx(expected.f2, rel=1e-10)
    assert gaussian.f4 == pytest.approx(expected.f4, rel=1e-10)
    with pytest.raises(InvalidInputError):
        Moments(1.0, 1.0, 1.0, Lambda=0.0)


def test_q_vanishes_on_empty_configuration(gammas):
    q = assemble_Q(PointGeometry.flat(), ModelPoint(), gammas)
    assert np.max(np.abs(q)) == 0.0


def test_q_pure_mass(gammas):
    q = assemble_Q(PointGeometry.flat(), ModelPoint(d=-2j), gammas)
    assert np.allclose(q, -4.0 * np.eye(16), atol=1e-12)


def test_trace_of_q(rng, gammas):
    """Tr Q = -4 s - 16 |d|^2."""
    for _ in range(20):
        geom, model = random_geometry(rng), random_model_point(rng)
        q = assemble_Q(geom, model, gammas)
        assert np.trace(q).real == pytest.approx(-4 * geom.s - 16 * abs(model.d) ** 2, abs=1e-10)
        assert abs(np.trace(q).imag) < 1e-12


def test_endomorphisms_self_adjointness(rng, gammas):
    endo = assemble_endomorphisms(random_geometry(rng), random_model_point(rng), gammas)
    assert max(endo.residuals().values()) < 1e-12
    assert len(endo.pairs) == 6


def test_flat_field_strength(gammas):
    model = ModelPoint.from_components(components={(0, 1): 0.7})
    omega = assemble_omegaE(PointGeometry.flat(), model, gammas)
    expected = 0.7j * np.kron(np.eye(4), CHARGE_PATTERN)
    assert np.allclose(omega[0, 1], expected, atol=1e-14)
    assert np.allclose(omega[1, 0], -expected, atol=1e-14)
    assert np.max(np.abs(omega[2, 3])) == 0.0


def test_spin_curvature_square(rng, gammas):
    """Tr Omega^S_{mu nu} Omega^S_{mu nu} = -Riem^2 / 2."""
    geom = random_geometry(rng)
    omega = spin_curvature(geom, gammas)
    total = np.einsum("mnij,mnji->", omega, omega)
    assert total.real == pytest.approx(-geom.riemann_squared / 2, rel=1e-10)


def test_field_strength_quadratic_trace(rng, gammas):
    """sum Tr(-1/4 g^mu g^nu g^rho g^sigma (x) F_mn S F_rs S) = 8 F^2."""
    model = random_model_point(rng)
    total = 0.0
    for mu in range(4):
        for nu in range(4):
            for rho in range(4):
                for sigma in range(4):
                    spin = gammas.gammas[mu] @ gammas.gammas[nu] @ gammas.gammas[rho] @ gammas.gammas[sigma]
                    finite = model.F[mu, nu] * model.F[rho, sigma] * CHARGE_PATTERN @ CHARGE_PATTERN
                    total += -0.25 * np.trace(spin) * np.trace(finite)
    assert total.real == pytest.approx(8 * model.field_squared, rel=1e-12)


def test_trivial_bundle_coefficients(gammas):
    endo = assemble_endomorphisms(PointGeometry.flat(), ModelPoint(), gammas)
    coeffs = gilkey_a_k(endo, PointGeometry.flat())
    assert coeffs.a0 == pytest.approx(1 / PI2)
    assert coeffs.a2 == 0.0
    assert coeffs.a4 == 0.0


def test_canonical_triple_coefficients(rng, gammas):
    geom = random_geometry(rng)
    coeffs = gilkey_a_k(canonical_endomorphisms(geom, gammas), geom)
    four_pi2 = 16 * PI2
    assert coeffs.a0 == pytest.approx(4 / four_pi2)
    assert coeffs.a2 == pytest.approx(-geom.s / 3 / four_pi2, abs=1e-14)
    expected_a4 = (5 * geom.s**2 - 8 * geom.ricci_squared - 7 * geom.riemann_squared) / (360 * four_pi2)
    assert coeffs.a4 == pytest.approx(expected_a4, rel=1e-10, abs=1e-14)


def test_boundary_terms(rng, gammas):
    geom = random_geometry(rng)
    endo = canonical_endomorphisms(geom, gammas)
    plain = gilkey_a_k(endo, geom)
    with_ds = gilkey_a_k(endo, geom, include_ds=True)
    assert with_ds.a4 - plain.a4 == pytest.approx(-12 * 4 * geom.laplacian_s / (360 * 16 * PI2))
    moments = Moments.gaussian()
    assert gravitational_lagrangian(geom, moments, True) - gravitational_lagrangian(geom, moments) == pytest.approx(
        geom.laplacian_s / 120
    )


@pytest.mark.parametrize(
    "model,expected",
    [
        (ModelPoint(), 8.0),
        (ModelPoint.from_components(components={(0, 1): 1.0}), 8.0 + 4.0 / 3.0),
        (ModelPoint(d=-1j), 8.0 - 8.0 * 0.5 + 2.0),
    ],
)
def test_closed_form_flat_examples(model, expected):
    """Flat space, Lambda = 1."""
    moments = Moments(f0=1.0, f2=0.5, f4=1.0, Lambda=1.0)
    assert closed_form_lagrangian(PointGeometry.flat(), model, moments) == pytest.approx(expected)


def test_expansion_matches_closed_form(rng, gammas):
    for _ in range(100):
        geom, model, moments = random_geometry(rng), random_model_point(rng), random_moments(rng)
        assert compare_lagrangian(geom, model, moments, gammas) < LAGRANGIAN_TOL
        isolated = isolated_term_errors(geom, model, moments, gammas)
        assert isolated["L_H"] < LAGRANGIAN_TOL
        assert isolated["L_Y"] < LAGRANGIAN_TOL


def test_expansion_is_linear_in_moments(rng, gammas):
    geom, model = random_geometry(rng), random_model_point(rng)
    coeffs = gilkey_a_k(assemble_endomorphisms(geom, model, gammas), geom)
    m = Moments(1.0, 2.0, 3.0, Lambda=1.5)
    doubled = Moments(2.0, 4.0, 6.0, Lambda=1.5)
    assert expansion_value(coeffs, doubled) == pytest.approx(2 * expansion_value(coeffs, m))
    terms = lagrangian_terms(geom, model, m)
    assert set(terms) == {"L_M", "L_Y", "L_H"}


def test_heat_trace_densities():
    result = heat_trace_torus()
    assert abs(result.a0_density - 1 / PI2) / (1 / PI2) < HEAT_TRACE_RELATIVE_TOL
    assert abs(result.a2_density) * PI2 < HEAT_TRACE_RELATIVE_TOL
    assert max(result.truncation_bounds) < 1e-8
    assert len(result.rows()) == 11

    massive = heat_trace_torus(d=-1j)
    assert abs(massive.a2_density + 1 / PI2) / (1 / PI2) < HEAT_TRACE_RELATIVE_TOL


def test_heat_trace_mass_factorises():
    light = heat_trace_torus(d=0.0)
    heavy = heat_trace_torus(d=0.5)
    for t, a, b in zip(light.t_values, light.traces, heavy.traces):
        assert b == pytest.approx(math.exp(-0.25 * t) * a, rel=1e-12)


def test_heat_trace_brute_force_agrees():
    t_values = [1.0, 1.5, 2.0]
    fast = heat_trace_torus(mode_cut=8, t_values=t_values)
    slow = heat_trace_torus(mode_cut=8, t_values=t_values, brute_force=True)
    for a, b in zip(fast.traces, slow.traces):
        assert a == pytest.approx(b, rel=1e-12)


def test_heat_trace_truncation():
    with pytest.raises(TruncationError) as info:
        heat_trace_torus(mode_cut=2)
    assert info.value.required_mode_cut == required_mode_cut(0.05, 2 * math.pi)
    assert info.value.required_mode_cut > 2


def test_heat_trace_input_validation():
    with pytest.raises(InvalidInputError):
        heat_trace_torus(t_values=[0.1, 0.2])
    with pytest.raises(InvalidInputError):
        heat_trace_torus(side_length=-1.0)
