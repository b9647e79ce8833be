import math

import numpy as np
import pytest

from spectriple.core.catalog import random_diagonal_triple, two_point_triple
from spectriple.core.distance import (UNBOUNDED, connes_distance,
                                      sampled_distance_bound,
                                      two_point_closed_form)
from spectriple.core.exceptions import (InvalidInputError,
                                        UnsupportedRepresentationError)
from spectriple.core.linalg import commutator, spectral_norm

DISTANCE_TOL = 1e-6


def test_two_point_distance():
    triple = two_point_triple(t=2.0, ko=None)
    result = connes_distance(triple, 0, 1)
    assert result.value == pytest.approx(0.5, abs=DISTANCE_TOL)
    assert np.allclose(result.certificate, [0.5, 0.0])
    a = np.diag(result.certificate)
    assert spectral_norm(commutator(triple.dirac, a)) == pytest.approx(1.0)


def test_two_point_closed_form(rng):
    for _ in range(100):
        t = complex(*rng.uniform(-5, 5, size=2))
        triple = two_point_triple(t=t, ko=None)
        value = connes_distance(triple, 0, 1, rng=rng).value
        assert value == pytest.approx(two_point_closed_form(t).value, abs=DISTANCE_TOL)


def test_unbounded_distances(fed):
    result = connes_distance(two_point_triple(t=0.0, ko=None), 0, 1)
    assert result.is_unbounded
    assert result.to_dict()["value"] == UNBOUNDED
    assert two_point_closed_form(0.0).is_unbounded

    # the two copies of the electrodynamics space are infinitely far apart
    assert connes_distance(fed, 0, 1).is_unbounded
    assert math.isinf(sampled_distance_bound(fed, 0, 1, samples=1000))


def test_distance_to_itself(fed):
    assert connes_distance(two_point_triple(t=3.0, ko=None), 1, 1).value == 0.0


def test_metric_axioms(rng):
    triple = random_diagonal_triple(rng, 3, real=False)
    d01 = connes_distance(triple, 0, 1, rng=rng).value
    d10 = connes_distance(triple, 1, 0, rng=rng).value
    d12 = connes_distance(triple, 1, 2, rng=rng).value
    d02 = connes_distance(triple, 0, 2, rng=rng).value
    assert d01 == pytest.approx(d10, rel=DISTANCE_TOL)
    assert d02 <= d01 + d12 + DISTANCE_TOL


def test_sampled_bound_below_distance(rng):
    triple = random_diagonal_triple(rng, 3, real=False)
    value = connes_distance(triple, 0, 2, rng=rng).value
    bound = sampled_distance_bound(triple, 0, 2, samples=20000, rng=rng)
    assert bound <= value * (1 + DISTANCE_TOL)
    assert bound > 0.5 * value


def test_sampled_bound_is_exact_on_two_points(rng):
    triple = two_point_triple(t=4.0, ko=None)
    assert sampled_distance_bound(triple, 0, 1, samples=100, rng=rng) == pytest.approx(0.25, rel=1e-12)


def test_distance_rejects_unsupported_triples(rng, fed):
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    rotated = two_point_triple(t=1.0, ko=None).conjugated(hadamard)
    with pytest.raises(UnsupportedRepresentationError):
        connes_distance(rotated, 0, 1)
    with pytest.raises(InvalidInputError):
        connes_distance(fed, 0, 7)


@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_distance_scales_inversely_with_dirac(scale):
    """d_{cD}(i, j) = d_D(i, j) / c."""
    triple = random_diagonal_triple(np.random.default_rng(11), 3, real=False)
    scaled = triple.with_dirac(scale * triple.dirac)
    for i, j in ((0, 1), (1, 2), (0, 2)):
        base = connes_distance(triple, i, j, rng=np.random.default_rng(5)).value
        value = connes_distance(scaled, i, j, rng=np.random.default_rng(5)).value
        assert value == pytest.approx(base / scale, rel=1e-8)
