import numpy as np
import pytest

from spectriple.core.catalog import electrodynamics_triple
from spectriple.core.exceptions import ModeSpaceError, NotSelfAdjointError
from spectriple.core.fermionic import (CHI_L, CHI_R, PSI_L, PSI_R,
                                       ModeSpace, antisymmetry_residual,
                                       build_hplus, certify_decomposition,
                                       decomposed_action, default_gauge_mode,
                                       expand_gauge_modes,
                                       fermionic_action_grassmann,
                                       fluctuated_dirac, mapping_residuals,
                                       zero_mode_gauge_phases)
from spectriple.core.linalg import adjoint, spectral_norm

DECOMPOSITION_TOL = 1e-10
ANTISYMMETRY_TOL = 1e-12

CONSTANT_GAUGE = {(0, 0, 0, 0): [0.4, -0.3, 0.2, 0.1]}
MODE_GAUGE = {(1, 0, 0, 0): [0.3 + 0.2j, 0.0, 0.1j, -0.5]}


def test_mode_space_validation():
    with pytest.raises(ModeSpaceError):
        ModeSpace(np.array([[1, 0, 0, 0]]))
    with pytest.raises(ModeSpaceError):
        ModeSpace(np.array([[0, 0, 0, 0], [0, 0, 0, 0]]))
    with pytest.raises(ModeSpaceError):
        ModeSpace(np.array([[0.5, 0, 0, 0], [-0.5, 0, 0, 0]]))
    with pytest.raises(ModeSpaceError):
        ModeSpace(np.zeros((0, 4)))
    with pytest.raises(ModeSpaceError):
        ModeSpace(np.zeros((1, 4)), side_length=0.0)
    with pytest.raises(ModeSpaceError):
        ModeSpace.symmetric(10)


@pytest.mark.parametrize("count", range(1, 10))
def test_symmetric_mode_sets(count):
    ms = ModeSpace.symmetric(count)
    assert len(ms) == count
    assert ms.dim == 16 * count
    assert (ms.index(np.zeros(4)) is not None) == bool(count % 2)
    assert len(build_hplus(ms)) == 8 * count


def test_hplus_labels():
    basis = build_hplus(ModeSpace.symmetric(3))
    for label in (CHI_L, CHI_R, PSI_R, PSI_L):
        assert len(basis.indices((label,))) == 6
    assert len(basis.chi_indices) == len(basis.psi_indices) == 12


def test_default_gauge_mode():
    assert default_gauge_mode(ModeSpace.symmetric(1)) is None
    assert default_gauge_mode(ModeSpace.symmetric(3)) == (-1, 0, 0, 0)
    assert default_gauge_mode(ModeSpace.symmetric(2)) == (-2, 0, 0, 0)


def test_expand_gauge_modes():
    ms = ModeSpace.symmetric(3)
    expanded = expand_gauge_modes(ms, MODE_GAUGE)
    assert set(expanded) == {(1, 0, 0, 0), (-1, 0, 0, 0)}
    assert np.allclose(expanded[(-1, 0, 0, 0)], np.conj(MODE_GAUGE[(1, 0, 0, 0)]))

    with pytest.raises(ModeSpaceError):
        expand_gauge_modes(ModeSpace.symmetric(1), {(1, 0, 0, 0): [1, 0, 0, 0]})
    with pytest.raises(ModeSpaceError):
        expand_gauge_modes(ms, {(0, 0, 0, 0): [1j, 0, 0, 0]})
    with pytest.raises(ModeSpaceError):
        expand_gauge_modes(ms, {(1, 0, 0, 0): [1, 0, 0, 0], (-1, 0, 0, 0): [2, 0, 0, 0]})


@pytest.mark.parametrize("gauge", [None, CONSTANT_GAUGE, MODE_GAUGE])
def test_fluctuated_dirac_is_self_adjoint(gammas, gauge):
    d_a = fluctuated_dirac(ModeSpace.symmetric(3), gammas, electrodynamics_triple(-1j), gauge)
    assert spectral_norm(d_a - adjoint(d_a)) < 1e-12


@pytest.mark.parametrize("count", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("gauge,mass", [(None, 0.0), (None, 1.0), (CONSTANT_GAUGE, 1.0), (MODE_GAUGE, 1.0)])
def test_decomposition(gammas, count, gauge, mass):
    """A mode gauge sits on the shortest mode difference, which every set above one mode has."""
    ms = ModeSpace.symmetric(count)
    if gauge is MODE_GAUGE:
        q = default_gauge_mode(ms)
        if q is None:
            pytest.skip("a single mode carries no nonzero gauge mode")
        gauge = {q: MODE_GAUGE[(1, 0, 0, 0)]}
    certificate = certify_decomposition(ms, gauge, mass, gammas)
    assert certificate.deviation < DECOMPOSITION_TOL
    assert certificate.action_norm > 0 or (count == 1 and mass == 0.0 and gauge is None)


def test_zero_operator_gives_zero_action():
    basis = build_hplus(ModeSpace.symmetric(2))
    assert fermionic_action_grassmann(np.zeros((32, 32)), basis).norm == 0.0


def test_mass_term_sparsity(gammas):
    """On the zero mode only the mass term survives: chi_L pairs psi_L, chi_R pairs psi_R."""
    sparsity = certify_decomposition(ModeSpace.symmetric(1), None, 1.0, gammas).block_sparsity
    nonzero = {key for key, value in sparsity.items() if value > 1e-12}
    assert nonzero == {"chi_L|psi_L", "chi_R|psi_R"}


def test_gauge_term_sparsity(gammas):
    sparsity = certify_decomposition(ModeSpace.symmetric(1), CONSTANT_GAUGE, 0.0, gammas).block_sparsity
    nonzero = {key for key, value in sparsity.items() if value > 1e-12}
    assert nonzero == {"chi_L|psi_R", "chi_R|psi_L"}


def test_no_chi_chi_or_psi_psi_terms(gammas):
    sparsity = certify_decomposition(ModeSpace.symmetric(5), MODE_GAUGE, 1.0, gammas).block_sparsity
    for key, value in sparsity.items():
        first, second = key.split("|")
        if first[:3] == second[:3]:
            assert value < 1e-14, key


def test_factor_half(gammas):
    """Dropping the 1/2 doubles the action, so the mismatch is the whole action."""
    ms = ModeSpace.symmetric(3)
    half = certify_decomposition(ms, CONSTANT_GAUGE, 1.0, gammas)
    full = certify_decomposition(ms, CONSTANT_GAUGE, 1.0, gammas, factor=1.0)
    assert full.deviation == pytest.approx(half.action_norm, rel=1e-10)


def test_pairing_antisymmetry(rng, gammas):
    finite = electrodynamics_triple(-1j)
    for gauge in (None, CONSTANT_GAUGE, MODE_GAUGE):
        ms = ModeSpace.symmetric(3)
        basis = build_hplus(ms, gammas, finite)
        d_a = fluctuated_dirac(ms, gammas, finite, gauge)
        assert antisymmetry_residual(d_a, basis, rng, pairs=100) < ANTISYMMETRY_TOL


def test_mapping_residuals(gammas):
    ms = ModeSpace.symmetric(3)
    finite = electrodynamics_triple(-1j)
    basis = build_hplus(ms, gammas, finite)
    mapping = mapping_residuals(basis, fluctuated_dirac(ms, gammas, finite, MODE_GAUGE), gammas)
    assert mapping["j_to_hminus"] < 1e-12
    assert mapping["d_to_hminus"] < 1e-12
    assert mapping["j_to_hplus"] == pytest.approx(2.0)
    assert mapping["slot_images"] == {
        CHI_L: "e_bar_L",
        CHI_R: "e_bar_R",
        PSI_R: "e_L",
        PSI_L: "e_R",
    }


def test_constant_gauge_invariance(gammas):
    ms = ModeSpace.symmetric(3)
    finite = electrodynamics_triple(-1j)
    basis = build_hplus(ms, gammas, finite)
    action = fermionic_action_grassmann(fluctuated_dirac(ms, gammas, finite, CONSTANT_GAUGE), basis)
    phases = zero_mode_gauge_phases(basis, 0.9)
    assert action.rotated(phases).deviation(action) < 1e-12
    expected = decomposed_action(basis, 1.0, CONSTANT_GAUGE, gammas)
    assert action.rotated(phases).deviation(expected.rotated(phases)) < DECOMPOSITION_TOL


def test_rejects_non_self_adjoint_operator():
    basis = build_hplus(ModeSpace.symmetric(1))
    d_a = np.zeros((16, 16))
    d_a[0, 1] = 1.0
    with pytest.raises(NotSelfAdjointError):
        fermionic_action_grassmann(d_a, basis)
