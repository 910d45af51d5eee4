import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsdaub.analysis import (
    _qmf_residual,
    filter_zero_residual,
    off_circle_values,
    orthonormality_residual,
    wavelet_orthogonality_residual,
)
from nsdaub.errors import FactorizationError, SelectionError, TrackingError
from nsdaub.factory import (
    FilterFamily,
    classical_roots,
    daubechies_filter,
    exp_filter,
    factor_symbol,
    filter_equivalence_gap,
    k0_detect,
    normalization_gap,
    root_tracking_report,
    spectral_select,
    wavelet_filter,
)
from nsdaub.laurent import evaluate, mul, reflect
from nsdaub.schemes import FrequencySet, dd_symbol, exp_interp_mask, q_polynomial

SQ2 = np.sqrt(2.0)
# Published orthonormal Daubechies filters, normalised to sum sqrt(2).
DB2 = np.array([0.48296291314469025, 0.836516303737469, 0.22414386804185735, -0.12940952255092145])
DB3 = np.array([0.3326705529509569, 0.8068915093133388, 0.4598775021193313,
                -0.1350110200103908, -0.0854412738822415, 0.0352262918821007])


def test_daubechies_matches_published_filters():
    assert np.max(np.abs(daubechies_filter(2).mu / SQ2 - DB2)) < 1e-10
    assert np.max(np.abs(daubechies_filter(3).mu / SQ2 - DB3)) < 1e-10
    assert np.max(np.abs(daubechies_filter(2, "inside").mu / SQ2 - DB2[::-1])) < 1e-10
    haar = daubechies_filter(1)
    assert np.allclose(haar.mu, [1.0, 1.0]) and np.allclose(haar.nu, [1.0, -1.0])


def _q_route_roots(n):
    """Classical b-part roots: zeros x of Q_{n-1}, then z + 1/z = 2 - 4x."""
    q = q_polynomial(n).coeffs
    out = []
    for x in np.roots(q[::-1]):
        s = 2 - 4 * x
        out.extend(np.roots([1.0, -s, 1.0]))
    return np.array(out)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_classical_roots_match_q_route(n):
    want = _q_route_roots(n)
    got = np.array(classical_roots(n).expanded())
    assert len(got) == len(want) == 2 * (n - 1)
    for w in want:
        assert np.min(np.abs(got - w)) < 1e-8


def test_factor_symbol_reconstructs_mask():
    f = FrequencySet([1.0, 0.5])
    for k in (0, 3, 8):
        a = exp_interp_mask(f, k)
        fact = factor_symbol(a, f, k)
        assert fact.residual < 1e-12
        assert (fact.b_part.lo, fact.b_part.hi) == (-3, -1)
    with pytest.raises(FactorizationError):
        factor_symbol(dd_symbol(2), FrequencySet([1.0, 1.0]), 0)


def test_spectral_select_sides_and_reference():
    fact = factor_symbol(dd_symbol(2), FrequencySet([0.0, 0.0]), 0)
    out = spectral_select(fact, "outside")
    ins = spectral_select(fact, "inside")
    assert abs(out[0] - (2 + np.sqrt(3))) < 1e-12 and abs(ins[0] - (2 - np.sqrt(3))) < 1e-12
    assert spectral_select(fact, "inside", reference=[0.3]) == ins
    with pytest.raises(SelectionError):
        spectral_select(fact, "outside", reference=[2.0])
    with pytest.raises(ValueError):
        spectral_select(fact, "left")


def test_exp_filter_n1_closed_form():
    for lam in (0.5, 1.0, 2.0):
        for k in range(5):
            h = 2.0 ** (-(k + 1))
            z0 = np.exp(-lam * h)
            s = np.sqrt(2 * (1 + 1 / np.cosh(lam * h))) / (1 + z0)
            f = exp_filter(FrequencySet([lam]), k)
            assert np.max(np.abs(f.mu - [s * z0, s])) < 1e-14
            assert f.mu_dict() == {0: f.mu[0], 1: f.mu[1]}
    f = exp_filter(FrequencySet([1.0]), 0)
    assert f.mu[0] == pytest.approx(0.733405, abs=1e-6)


def test_wavelet_filter_layout():
    d = daubechies_filter(2)
    assert d.nu_lo == 0 and d.mu_lo == -1
    nu = d.nu_dict()
    mu = d.mu_dict()
    for j, v in nu.items():
        assert v == pytest.approx((-1) ** (j + 1) * mu[j - 1])
    assert np.allclose(wavelet_filter(d.mu, -1), d.nu)


def test_filter_factors_symbol():
    for lams in ([1.0], [0.5, 1.0], [2.0, 2.0], [0.5, 1.0, 2.0]):
        f = FrequencySet(lams)
        for k in (0, 4, 9):
            try:
                pair = exp_filter(f, k, track=False)
            except FactorizationError:
                continue
            prod = mul(pair.mu_poly(), reflect(pair.mu_poly()))
            a = exp_interp_mask(f, k)
            lo, hi = a.lo, a.hi
            assert np.max(np.abs(0.5 * prod.dense(lo, hi) - a.dense(lo, hi))) < 1e-10


@pytest.mark.parametrize("lams", [[0.5], [1.0, 1.0], [0.5, 1.0], [2.0, 2.0], [1.0, 1.0, 1.0], [0.5, 1.0, 2.0]])
@pytest.mark.parametrize("side", ["outside", "inside"])
def test_filter_properties_on_grid(lams, side):
    f = FrequencySet(lams)
    k0 = k0_detect(f).k0
    for k in range(k0, 13):
        pair = exp_filter(f, k, side)
        a = exp_interp_mask(f, k)
        assert _qmf_residual(pair, a) <= 1e-9
        assert orthonormality_residual(pair.mu) <= 1e-10
        assert filter_zero_residual(pair, f, k) <= 1e-9
        worst, _ = off_circle_values(pair, f, k)
        assert worst <= 1e-9
        assert wavelet_orthogonality_residual(pair) <= 1e-10


def test_zero_frequencies_give_daubechies():
    for n in (1, 2, 3, 4):
        for side in ("outside", "inside"):
            got = exp_filter(FrequencySet([0.0] * n), 5, side).mu
            assert np.max(np.abs(got - daubechies_filter(n, side).mu)) < 1e-10


def test_k0_examples_and_tracking_error():
    table = {(2, 0.5): 0, (2, 1.0): 1, (3, 1.0): 3, (2, 2.0): 3, (3, 2.0): 5, (2, 8.0): 5}
    for (n, lam), k0 in table.items():
        assert k0_detect(FrequencySet([lam] * n)).k0 == k0
    assert k0_detect(FrequencySet([5.0])).k0 == 0
    with pytest.raises(TrackingError) as err:
        exp_filter(FrequencySet([8.0, 8.0]), 2)
    assert err.value.k0 == 5
    rep = k0_detect(FrequencySet([2.0, 2.0]))
    assert rep.conditions["circle"] and rep.conditions["disjoint"] and rep.conditions["real_axis"]
    assert rep.radius == pytest.approx(rep.C * 2.0 ** -rep.k0)


def test_root_tracking_converges_at_rate_four():
    rep = root_tracking_report(FrequencySet([1.0, 1.0, 1.0]), range(4, 12))
    assert len(rep["roots"]) == 4
    assert all(abs(s + 2.0) < 0.05 for s in rep["slopes"])


def test_normalization_gap_and_equivalence():
    f = FrequencySet([1.0])
    assert normalization_gap(f, 0) == pytest.approx(0.0287, abs=1e-4)
    gaps = [filter_equivalence_gap(f, k) for k in range(2, 10)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_filter_family_and_perturbation():
    fam = FilterFamily(FrequencySet([1.0, 1.0]))
    assert fam.N == 2 and not fam.interpolatory
    assert fam.shifted(3).filter(0).level == 3
    assert [p.level for p in fam.levels(2, 3)] == [2, 3, 4]
    assert np.array_equal(FilterFamily.classical(2).filter(9).mu, daubechies_filter(2).mu)
    p = fam.filter(4).perturbed(1, 1e-3)
    assert orthonormality_residual(p.mu) > 1e-4


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.1, 3.0).map(lambda v: round(v, 2)), min_size=2, max_size=3), st.integers(6, 12))
def test_random_filters_are_orthonormal(lams, k):
    f = FrequencySet(lams)
    pair = exp_filter(f, k, track=False)
    assert orthonormality_residual(pair.mu) <= 1e-9
    assert abs(evaluate(pair.mu_poly(), 1.0) - np.sqrt(2 * evaluate(exp_interp_mask(f, k), 1.0))) <= 1e-12
    assert filter_zero_residual(pair, f, k) <= 1e-8
