import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsdaub.errors import GridMismatchError
from nsdaub.factory import FilterFamily
from nsdaub.nsdwt import (
    CoeffPyramid,
    analysis_stage,
    analyze,
    stage_matrix,
    synthesize,
    transform_filters,
)
from nsdaub.schemes import FrequencySet

CASES = [(1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)]


def _family(n, lam):
    return FilterFamily(FrequencySet([lam] * n))


def test_haar_stage_by_hand():
    f = FilterFamily.classical(1).filter(0)
    low, high = analysis_stage(np.array([1.0, 3.0, 5.0, 9.0]), f)
    r = 2 ** -0.5
    # low_i pairs x_{2i-1} and x_{2i}: mu_{-j} is nonzero for j = -1, 0
    assert np.allclose(low, r * np.array([1 + 9, 3 + 5]))
    # high_i = x_{2i+1} - x_{2i+2} (periodic)
    assert np.allclose(high, r * np.array([3 - 5, 9 - 1]))


@pytest.mark.parametrize("n,lam", CASES)
def test_stage_matrices_are_orthogonal(n, lam):
    for f in transform_filters(_family(n, lam), 0, 4):
        W = stage_matrix(f, 32)
        assert np.max(np.abs(W.T @ W - np.eye(32))) < 1e-12


@pytest.mark.parametrize("n,lam", CASES)
def test_perfect_reconstruction_and_energy(n, lam):
    x = np.random.default_rng(1).standard_normal(256)
    filters = transform_filters(_family(n, lam), 0, 4)
    pyr = analyze(x, filters, 4)
    assert [len(d) for d in pyr.details] == [16, 32, 64, 128]
    assert len(pyr.approx) == 16
    assert np.max(np.abs(synthesize(pyr, filters) - x)) <= 1e-10
    assert abs(pyr.energy() - np.sum(x ** 2)) <= 1e-9 * np.sum(x ** 2)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2])
def test_exponential_is_annihilated_in_the_interior(n, lam):
    # the high-pass rows vanish on samples of exp(-lambda t) at every level
    J, m = 4, 0
    N = 256
    t = np.arange(N) * 2.0 ** (-(m + J))
    x = np.exp(-lam * t)
    pyr = analyze(x, transform_filters(_family(n, lam), m, J), J)
    margin = 2 * n
    for d in pyr.details:
        assert np.max(np.abs(d[margin:-margin])) <= 1e-8 * np.max(np.abs(x))
    # without the matching frequency the details do not vanish
    other = analyze(x, transform_filters(_family(n, 0.0), m, J), J)
    assert np.max(np.abs(other.details[-1][margin:-margin])) > 1e-6


def test_zeroed_details_rebuild_exponential():
    n, lam, J = 2, 0.5, 3
    t = np.arange(256) * 2.0 ** -J
    x = np.exp(-lam * t)
    filters = transform_filters(_family(n, lam), 0, J)
    pyr = analyze(x, filters, J)
    pyr.details = [np.zeros_like(d) for d in pyr.details]
    y = synthesize(pyr, filters)
    inner = slice(2 * n * 2 ** J, -2 * n * 2 ** J)
    assert np.max(np.abs(y[inner] - x[inner])) < 1e-8


def test_argument_checks():
    filters = transform_filters(_family(2, 1.0), 0, 3)
    with pytest.raises(ValueError):
        analyze(np.ones(20), filters, 3)
    with pytest.raises(GridMismatchError):
        analyze(np.ones(64), filters[:2], 3)
    with pytest.raises(GridMismatchError):
        analyze(np.ones(64), filters[::-1], 3)
    pyr = analyze(np.ones(64), filters, 3)
    with pytest.raises(GridMismatchError):
        synthesize(pyr, transform_filters(_family(2, 1.0), 1, 3))


def test_pyramid_dict_round_trip():
    filters = transform_filters(_family(1, 1.0), 2, 2)
    pyr = analyze(np.arange(16.0), filters, 2)
    doc = pyr.as_dict()
    assert doc["m"] == 2 and doc["J"] == 2 and doc["lambdas"] == [1.0]
    back = CoeffPyramid.from_dict(doc)
    assert np.max(np.abs(synthesize(back, filters) - np.arange(16.0))) < 1e-12
    doc["details"] = doc["details"][:1]
    with pytest.raises(GridMismatchError):
        CoeffPyramid.from_dict(doc)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.floats(-2, 2), st.integers(0, 3), st.integers(1, 4))
def test_random_round_trips(n, lam, m, J):
    x = np.random.default_rng(abs(hash((n, lam, m, J))) % 2 ** 32).standard_normal(2 ** J * 8)
    filters = transform_filters(FilterFamily(FrequencySet([lam] * n)), m, J)
    pyr = analyze(x, filters, J)
    assert np.max(np.abs(synthesize(pyr, filters) - x)) <= 1e-10
