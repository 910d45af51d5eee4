import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsdaub.analysis import check_reproduction, equivalence_decay_fit
from nsdaub.errors import ConditioningError
from nsdaub.laurent import derivative, evaluate
from nsdaub.schemes import (
    FrequencySet,
    MaskFamily,
    circle_min,
    dd_symbol,
    divided_difference_power,
    equivalence_gap,
    exp_interp_mask,
    interpolatory_residual,
    q_identity_residual,
    q_polynomial,
    refine,
    symbol_conditions_residual,
)

DD4 = np.array([-1, 0, 9, 16, 9, 0, -1]) / 16
DD6 = np.array([3, 0, -25, 0, 150, 256, 150, 0, -25, 0, 3]) / 256


def test_frequency_set_basics():
    f = FrequencySet([1.0, 1.0, 2.0])
    assert f.n == 3
    assert f.multiplicities() == {1.0: 2, 2.0: 1, -1.0: 2, -2.0: 1}
    nodes = f.nodes(0)
    assert [m for _, m in nodes] == [1, 2, 2, 1]
    assert nodes[0][0] == pytest.approx(np.exp(-1.0))
    assert FrequencySet([0.0, 0.0]).nodes(3) == [(1.0, 4)]
    with pytest.raises(ValueError):
        FrequencySet([])
    with pytest.raises(ValueError):
        FrequencySet([np.nan])


def test_q_polynomial_and_identity():
    assert list(q_polynomial(3).coeffs) == [1.0, 3.0, 6.0]
    for n in range(1, 7):
        for x in np.linspace(0, 1, 7):
            assert q_identity_residual(n, x) < 1e-9


def test_dd_symbol_closed_form():
    assert np.max(np.abs(dd_symbol(2).dense(-3, 3) - DD4)) < 1e-12
    assert np.max(np.abs(dd_symbol(3).dense(-5, 5) - DD6)) < 1e-12
    assert dd_symbol(1) == exp_interp_mask(FrequencySet([0.0]), 0)


def test_dd_symbol_conditions_at_minus_one():
    for n in range(1, 6):
        a = dd_symbol(n)
        assert (a.lo, a.hi) == (-(2 * n - 1), 2 * n - 1)
        assert interpolatory_residual(a) < 1e-12
        assert abs(evaluate(a, 1.0) - 2.0) < 1e-12
        for r in range(2 * n):
            assert abs(evaluate(derivative(a, r), -1.0)) < 1e-10


def test_divided_difference_power_against_mpmath():
    nodes = [0.7, 0.9, 0.9, 1.3]
    mpmath.mp.dps = 40
    for p in (-5, -2, -1, 0, 1, 3, 6):
        got = divided_difference_power(nodes, p)
        for r in range(len(nodes)):
            # confluent differences via derivatives for the repeated node
            def g(t, p=p):
                return mpmath.mpf(t) ** p
            t = [mpmath.mpf(v) for v in nodes[: r + 1]]
            want = _mp_divided_difference(g, t)
            assert abs(got[r] - float(want)) < 1e-12 * max(1.0, abs(float(want)))


def _mp_divided_difference(g, t):
    if len(t) == 1:
        return g(t[0])
    if all(v == t[0] for v in t):
        return mpmath.diff(g, t[0], len(t) - 1) / mpmath.factorial(len(t) - 1)
    srt = sorted(t)
    if srt[0] == srt[-1]:
        return mpmath.diff(g, srt[0], len(t) - 1) / mpmath.factorial(len(t) - 1)
    return (_mp_divided_difference(g, srt[1:]) - _mp_divided_difference(g, srt[:-1])) / (srt[-1] - srt[0])


def test_exp_mask_n1_closed_form():
    for lam in (0.5, 1.0, 2.0, -3.0):
        for k in range(6):
            a = exp_interp_mask(FrequencySet([lam]), k)
            c = 0.5 / np.cosh(lam * 2.0 ** (-(k + 1)))
            assert np.max(np.abs(a.dense(-1, 1) - [c, 1.0, c])) < 1e-14


def _mp_mask_oracle(lams, k):
    """Odd coefficients from the plain derivative conditions, high precision."""
    mpmath.mp.dps = 50
    n = len(lams)
    h = mpmath.mpf(2) ** (-(k + 1))
    degs = list(range(-(2 * n - 1), 2 * n, 2))
    sym = [mpmath.mpf(v) for v in lams] + [-mpmath.mpf(v) for v in lams]
    groups: dict = {}
    for lam in sym:
        groups[lam] = groups.get(lam, 0) + 1
    rows, rhs = [], []
    for lam, mult in groups.items():
        z = mpmath.exp(-lam * h)
        for r in range(mult):
            # d^r/dz^r of sum_j c_j z^j at z, with a(-z) = 1 - g(z) for the odd part g
            rows.append([mpmath.ff(d, r) * z ** (d - r) for d in degs])
            rhs.append(1 if r == 0 else 0)
    sol = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
    return np.array([float(v) for v in sol]), degs


@pytest.mark.parametrize("lams", [(0.5, 1.0), (1.0, 1.0), (2.0, 0.0), (0.5, 1.0, 2.0), (1.0, 1.0, 1.0)])
def test_exp_mask_matches_high_precision_oracle(lams):
    for k in (0, 2, 5, 9):
        odd, degs = _mp_mask_oracle(lams, k)
        a = exp_interp_mask(FrequencySet(lams), k)
        got = np.array([a.coeff(d) for d in degs])
        assert np.max(np.abs(got - odd)) < 1e-10


def test_zero_frequencies_give_classical_masks():
    for n in (1, 2, 3):
        f = FrequencySet([0.0] * n)
        for k in (0, 4):
            assert exp_interp_mask(f, k) == dd_symbol(n)
    fam = MaskFamily.classical(2)
    assert fam.symbol(7) == dd_symbol(2) and fam.N == 3 and fam.interpolatory


def test_exp_mask_conditioning_guard():
    with pytest.raises(ConditioningError):
        exp_interp_mask(FrequencySet([40.0, 80.0]), 0)
    with pytest.raises(ValueError):
        exp_interp_mask(FrequencySet([1.0]), -1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_mask_grid_properties(n, lam):
    f = FrequencySet([lam] * n)
    for k in range(13):
        a = exp_interp_mask(f, k)
        assert interpolatory_residual(a) <= 1e-12
        assert max(symbol_conditions_residual(a, f, k).values()) <= 1e-9
        assert circle_min(a) >= -1e-10


def test_symbol_conditions_names():
    res = symbol_conditions_residual(exp_interp_mask(FrequencySet([1.0, 1.0]), 0), FrequencySet([1.0, 1.0]), 0)
    assert set(res) == {"a(-z[0])", "a(z[0])-2", "d1a(-z[0])", "d1a(z[0])",
                        "a(-z[1])", "a(z[1])-2", "d1a(-z[1])", "d1a(z[1])"}


def test_refine_examples():
    a = dd_symbol(2)
    vals, off = refine(np.array([1.0]), a, 0)
    assert off == -3 and np.allclose(vals, DD4)
    d = refine({0: 1.0}, a)
    assert d[1] == pytest.approx(9 / 16) and d[0] == 1.0
    vals, off = refine(np.arange(10, dtype=float), a, 0, mode="valid")
    assert off == 3 and np.allclose(vals, off / 2 + np.arange(len(vals)) / 2)
    with pytest.raises(ValueError):
        refine(np.ones(3), a, 0, mode="valid")
    with pytest.raises(ValueError):
        refine(np.ones(3), a, 0, mode="weird")


def test_reproduction_of_exponentials():
    for lams in ([1.0], [0.5, 2.0], [1.0, 1.0], [2.0, 2.0, 0.5]):
        fam = MaskFamily(FrequencySet(lams))
        f = fam.freqs
        for lam, mult in f.multiplicities().items():
            for r in range(mult):
                assert check_reproduction(fam, lam, r, k_from=0, passes=8) <= 1e-9
    # the classical scheme only reproduces polynomials
    assert check_reproduction(MaskFamily.classical(1), 1.0) > 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_equivalence_gap_decays(n, lam):
    f = FrequencySet([lam] * n)
    series = [(k, equivalence_gap(f, k)) for k in range(2, 13)]
    assert equivalence_decay_fit(series) <= -1.0


def test_equivalence_decay_fit_edge_cases():
    assert equivalence_decay_fit([(k, 2.0 ** -k) for k in range(5)]) == pytest.approx(-1.0)
    assert equivalence_decay_fit([(k, 0.0) for k in range(5)]) == float("-inf")
    with pytest.raises(ValueError):
        equivalence_decay_fit([(0, 1.0), (1, 0.5)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3).map(lambda v: round(v, 3)), min_size=1, max_size=3), st.integers(0, 10))
def test_random_masks_are_interpolatory_and_annihilate(lams, k):
    f = FrequencySet(lams)
    try:
        a = exp_interp_mask(f, k)
    except ConditioningError:
        return
    assert interpolatory_residual(a) <= 1e-12
    assert max(symbol_conditions_residual(a, f, k).values()) <= 1e-8
    assert np.allclose(a.coeffs, a.coeffs[::-1], atol=1e-14)
