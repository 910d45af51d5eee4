"""Numerical verification of the construction and a Fourier-decay regularity estimator.

Every check reports a nonnegative residual and a tolerance; a check passes when
``residual <= tolerance``. Decay-rate checks are recast in the same form with
residual ``max(0, slope + 1)`` and tolerance 0, so they pass exactly when the
fitted log2-slope is at most -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import (
    DyadicSamples,
    TAIL_DEPTH,
    autocorrelation,
    basic_limit_function,
    fourier_product,
    refinement_residual,
    scaling_function,
    wavelet_function,
)
from .factory import (
    FilterFamily,
    FilterPair,
    filter_equivalence_gap,
    normalization_gap,
)
from .laurent import derivative, evaluate, reflect
from .schemes import (
    FrequencySet,
    MaskFamily,
    circle_min,
    equivalence_gap,
    exp_interp_mask,
    interpolatory_residual,
    refine,
    symbol_conditions_residual,
)

HOLDER_MARGIN = 0.05
LOW_CONFIDENCE_RESIDUAL = 0.5
ROUNDING_FLOOR = 1e-14


# -------------------------------------------------------------- report


@dataclass
class CheckEntry:
    name: str
    residual: float
    tolerance: float
    context: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "context": self.context,
        }


@dataclass
class VerificationReport:
    entries: list = field(default_factory=list)

    def add(self, name, residual, tolerance, context="") -> None:
        self.entries.append(CheckEntry(name, float(residual), float(tolerance), context))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    def __getitem__(self, name) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"checks": [e.as_dict() for e in sorted(self.entries, key=lambda e: e.name)]}


# ---------------------------------------------------------- decay fits


def equivalence_decay_fit(series, floor: float = ROUNDING_FLOOR) -> float:
    """Least-squares slope of ``log2(gap)`` against ``k``.

    Gaps at or below ``floor`` are rounding noise (fast-decaying gaps reach
    it within the fitted range) and are left out of the fit. Returns
    ``-inf`` when fewer than two gaps remain, e.g. for identical schemes.
    """
    pts = [(float(k), float(g)) for k, g in series]
    if len(pts) < 4:
        raise ValueError("at least four (k, gap) points are needed")
    if any(g < 0.0 or not np.isfinite(g) for _, g in pts):
        raise ValueError("gaps must be finite and nonnegative")
    kept = [(k, g) for k, g in pts if g > floor]
    if len(kept) < 2:
        return float("-inf")
    ks = np.array([k for k, _ in kept])
    return float(np.polyfit(ks, np.log2([g for _, g in kept]), 1)[0])


def _slope_residual(slope: float) -> float:
    return max(0.0, slope + 1.0)


@dataclass
class SumCondition:
    value: float
    ratio: float
    diverging: bool
    terms: np.ndarray


def check_symbol_sum_condition(masks, m: int = 0, k_max: int = 40) -> SumCondition:
    """``sum_k |a^[m+k](1)/2 - 1|`` over ``k <= k_max`` plus a geometric tail.

    The tail ratio is fitted from the last ten terms above the rounding
    floor; a ratio of 1 or more raises the divergence flag and makes the
    value infinite. Terms that have already fallen to the floor leave no
    measurable tail.
    """
    terms = np.array([abs(0.5 * evaluate(masks.symbol(m + k), 1.0).real - 1.0) for k in range(k_max + 1)])
    partial = float(np.sum(terms))
    ks = np.flatnonzero(terms > ROUNDING_FLOOR)
    if len(ks) == 0:
        return SumCondition(partial, 0.0, False, terms)
    fit = ks[-10:]
    if len(fit) < 2:
        ratio = 0.0
    else:
        ratio = float(2.0 ** np.polyfit(fit, np.log2(terms[fit]), 1)[0])
    if ratio >= 1.0:
        return SumCondition(float("inf"), ratio, True, terms)
    last = ks[-1]
    tail = float(terms[last]) * ratio ** (k_max + 1 - last) / (1.0 - ratio) if last == k_max else 0.0
    return SumCondition(partial + tail, ratio, False, terms)


def check_reproduction(masks, lam: float, r: int = 0, k_from: int = 0, passes: int = 8) -> float:
    """Relative interior error of refining samples of ``x^r e^{lam x}``.

    Starts from samples on ``2^{-k_from} Z`` over a window wide enough that
    ``passes`` valid-mode refinements keep a neighbourhood of ``[-1, 1]``.
    The error is ``max |refined - exact| / max |exact|`` over the surviving
    window after the last pass.
    """
    def f(x):
        return x ** r * np.exp(lam * x)

    N = masks.N
    half = (N + 2) * 2 ** k_from
    idx = np.arange(-half, half + 1)
    vals, off = f(idx * 2.0 ** (-k_from)), -half
    for p in range(passes):
        vals, off = refine(vals, masks.symbol(k_from + p), off, mode="valid")
    x = (off + np.arange(len(vals))) * 2.0 ** (-(k_from + passes))
    exact = f(x)
    return float(np.max(np.abs(vals - exact)) / np.max(np.abs(exact)))


def vanishing_moment_residual(psi_m: DyadicSamples, lam: float, m: int) -> float:
    """``|sum_t psi_m(t) exp(-lam 2^{-m} t) 2^{-K}|`` (scale-matched exponential moment)."""
    return abs(psi_m.riemann(np.exp(-lam * 2.0 ** (-m) * psi_m.x)))


def vanishing_moment_literal(psi_m: DyadicSamples, lam: float) -> float:
    """``|sum_t psi_m(t) exp(lam t) 2^{-K}|`` without the level scaling (reported only)."""
    return abs(psi_m.riemann(np.exp(lam * psi_m.x)))


def continuous_orthonormality(phi_m: DyadicSamples, max_shift: int = 3) -> float:
    """``max_{|l| <= max_shift} |<phi_m, phi_m(. - l)> - delta_l|`` by the midpoint rule."""
    A = autocorrelation(phi_m, rule="midpoint")
    ls = np.arange(-max_shift, max_shift + 1)
    return float(np.max(np.abs(A.at(ls) - (ls == 0))))


# ---------------------------------------------------------- regularity


@dataclass
class RegularityEstimate:
    s: float
    holder: tuple
    fit_range: tuple
    fit_residual: float
    low_confidence: bool

    def as_dict(self) -> dict:
        return {
            "decay_exponent": self.s,
            "holder_order": {"l": int(self.holder[0]), "alpha": float(self.holder[1])},
            "fit_range": [float(self.fit_range[0]), float(self.fit_range[1])],
            "fit_residual": self.fit_residual,
            "low_confidence": self.low_confidence,
        }


def holder_from_decay(s: float, margin: float = HOLDER_MARGIN) -> tuple:
    """Map a decay exponent to ``(l, alpha)`` with ``l + alpha = s - 1 - margin``."""
    v = s - 1.0 - margin
    if v <= 0.0:
        return 0, 0.0
    ell = int(np.floor(v))
    return ell, float(v - ell)


def regularity_estimate(family, m: int = 0, omega_max_exp: int = 12, depth=None,
                        omega_min_exp: int = 4, per_octave: int = 64) -> RegularityEstimate:
    """Fit the envelope decay ``|F(omega)| ~ (1+|omega|)^{-s}`` of the Fourier product.

    Each octave ``[2^j, 2^{j+1})`` contributes the maximum of ``|F|`` over
    ``per_octave`` geometrically spaced samples; ``log`` of these maxima is
    regressed on ``log(1 + omega)`` at the octave centres.
    """
    if omega_max_exp > 20:
        raise ValueError("omega_max_exp must be at most 20")
    if omega_max_exp - omega_min_exp < 2:
        raise ValueError("need at least two octaves")
    js = np.arange(omega_min_exp, omega_max_exp)
    omegas = [np.geomspace(2.0 ** j, 2.0 ** (j + 1), per_octave, endpoint=False) for j in js]
    allw = np.concatenate(omegas)
    vals = np.abs(fourier_product(family, m, allw, depth))
    maxima = vals.reshape(len(js), per_octave).max(axis=1)
    centres = 2.0 ** (js + 0.5)
    X = np.log(1.0 + centres)
    Y = np.log(np.maximum(maxima, 1e-300))
    coeff = np.polyfit(X, Y, 1)
    fit_res = float(np.sqrt(np.mean((np.polyval(coeff, X) - Y) ** 2)))
    s = float(-coeff[0])
    return RegularityEstimate(
        s, holder_from_decay(s), (2.0 ** omega_min_exp, 2.0 ** omega_max_exp),
        fit_res, fit_res > LOW_CONFIDENCE_RESIDUAL,
    )


def smoothness_comparison(freqs: FrequencySet, n: int | None = None, omega_max_exp: int = 12,
                          root_side: str = "outside") -> tuple:
    """Compare decay of the exponential and classical scaling functions.

    Returns ``(s_exp, s_classical, passed)`` with ``passed`` meaning
    ``s_exp >= s_classical - 0.1``.
    """
    n = freqs.n if n is None else n
    s_exp = regularity_estimate(FilterFamily(freqs, root_side), 0, omega_max_exp).s
    s_cls = regularity_estimate(FilterFamily.classical(n, root_side), 0, omega_max_exp).s
    return s_exp, s_cls, bool(s_exp >= s_cls - 0.1)


# --------------------------------------------------------------- suite


def _qmf_residual(f: FilterPair, a, samples: int = 2048) -> float:
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    M = evaluate(f.mu_poly(), z)
    return float(np.max(np.abs(np.abs(M) ** 2 - 2.0 * evaluate(a, z).real)))


def orthonormality_residual(mu) -> float:
    """``max_l |sum_j mu_j mu_{j+2l} - 2 delta_l|``."""
    mu = np.asarray(mu, dtype=float)
    c = np.correlate(mu, mu, mode="full")
    centre = len(mu) - 1
    lags = np.arange(len(c)) - centre
    even = lags % 2 == 0
    return float(np.max(np.abs(c[even] - 2.0 * (lags[even] == 0))))


def wavelet_orthogonality_residual(f: FilterPair) -> float:
    """``max_r |sum_j mu_{-j} nu_{j+2r}|``."""
    mur = reflect(f.mu_poly())
    nu = f.nu_poly()
    worst = 0.0
    for s in range(nu.lo - mur.hi, nu.hi - mur.lo + 1):
        if s % 2:
            continue
        tot = sum(mur.coeff(j) * nu.coeff(j + s) for j in range(mur.lo, mur.hi + 1))
        worst = max(worst, abs(tot))
    return worst


def _base_multiplicities(freqs: FrequencySet) -> dict:
    out: dict = {}
    for lam in freqs.lambdas:
        out[lam] = out.get(lam, 0) + 1
    return out


def filter_zero_residual(f: FilterPair, freqs: FrequencySet, k: int) -> float:
    h = 2.0 ** (-(k + 1))
    M = f.mu_poly()
    worst = 0.0
    for lam, mult in _base_multiplicities(freqs).items():
        z = np.exp(-lam * h)
        for s in range(mult):
            worst = max(worst, abs(evaluate(derivative(M, s), -z)))
    return worst


def off_circle_values(f: FilterPair, freqs: FrequencySet, k: int) -> tuple:
    """``(max_j |M(z_j) M(1/z_j) - 4|, [M(z_j)])`` for the base nodes."""
    h = 2.0 ** (-(k + 1))
    M = f.mu_poly()
    worst, vals = 0.0, []
    for lam in freqs.lambdas:
        z = np.exp(-lam * h)
        mz = evaluate(M, z).real
        vals.append(mz)
        worst = max(worst, abs(mz * evaluate(M, 1.0 / z).real - 4.0))
    return worst, vals


def run_suite(freqs, n: int | None = None, k_max: int = 12, K: int = 10, perturb=None,
              root_side: str = "outside", m: int = 0, seed: int = 0) -> VerificationReport:
    """Run every check for one frequency set and return the report.

    ``perturb=(index, delta)`` adds ``delta`` to ``mu[index]`` of every
    filter level before the filter-based checks (fault injection).
    """
    if not isinstance(freqs, FrequencySet):
        freqs = FrequencySet(freqs)
    if n is not None and n != freqs.n:
        raise ValueError(f"n = {n} does not match {freqs.n} frequencies")
    masks = MaskFamily(freqs)
    family = FilterFamily(freqs, root_side)
    rep = VerificationReport()
    levels = range(0, k_max + 1)

    def filt(k):
        f = family.filter(k)
        return f.perturbed(*perturb) if perturb is not None else f

    # masks
    rep.add("mask.interpolatory", max(interpolatory_residual(masks.symbol(k)) for k in levels), 1e-12,
            f"levels 0..{k_max}")
    rep.add("mask.zero_conditions",
            max(max(symbol_conditions_residual(masks.symbol(k), freqs, k).values()) for k in levels), 1e-9,
            "a(-z_j)=0, a(z_j)=2 and derivatives up to multiplicity")
    cmin = min(circle_min(masks.symbol(k)) for k in levels)
    rep.add("mask.positivity", max(0.0, -cmin), 1e-10, f"min on circle {cmin:.17g}")
    gaps = [(k, equivalence_gap(freqs, k)) for k in range(2, k_max + 1)]
    slope = equivalence_decay_fit(gaps)
    rep.add("mask.equivalence_slope", _slope_residual(slope), 0.0, f"log2 slope {slope:.6g}")
    sc = check_symbol_sum_condition(masks, m)
    rep.add("mask.sum_condition", 1.0 if sc.diverging else 0.0, 0.0,
            f"sum {sc.value:.17g}, tail ratio {sc.ratio:.6g}")
    worst_rep, cases = 0.0, []
    for lam, mult in sorted(freqs.multiplicities().items()):
        for r in range(mult):
            worst_rep = max(worst_rep, check_reproduction(masks, lam, r, 0, 8))
            cases.append(f"x^{r} exp({lam:g}x)")
    rep.add("mask.reproduction", worst_rep, 1e-9, ", ".join(cases) + " over 8 levels")

    # filters
    fls = [filt(k) for k in levels]
    rep.add("filter.qmf", max(_qmf_residual(f, masks.symbol(k)) for k, f in zip(levels, fls)), 1e-9,
            "||M|^2 - 2a| on 2048 circle points")
    rep.add("filter.orthonormality", max(orthonormality_residual(f.mu) for f in fls), 1e-10,
            "sum mu_j mu_{j+2l} - 2 delta_l")
    rep.add("filter.zero_conditions", max(filter_zero_residual(f, freqs, k) for k, f in zip(levels, fls)),
            1e-9, "derivatives of M at -z_j")
    oc = [off_circle_values(f, freqs, k) for k, f in zip(levels, fls)]
    rep.add("filter.off_circle_product", max(w for w, _ in oc), 1e-9,
            f"M(z_j) at level 0 (not asserted to equal 2): {[round(v, 12) for v in oc[0][1]]}")
    rep.add("filter.wavelet_orthogonality", max(wavelet_orthogonality_residual(f) for f in fls), 1e-10,
            "sum mu_{-j} nu_{j+2r}")
    fg = [(k, filter_equivalence_gap(freqs, k, root_side)) for k in range(2, k_max + 1)]
    ng = [(k, normalization_gap(freqs, k)) for k in range(2, k_max + 1)]
    s1, s2 = equivalence_decay_fit(fg), equivalence_decay_fit(ng)
    rep.add("filter.equivalence_slope", _slope_residual(s1), 0.0, f"log2 slope {s1:.6g}")
    rep.add("filter.normalization_slope", _slope_residual(s2), 0.0, f"log2 slope {s2:.6g}")

    # cascade
    depth = K + TAIL_DEPTH + 1
    deep = [filt(m + i) for i in range(depth + 1)]
    phi0 = scaling_function(deep[:K], K, deep[K:K + TAIL_DEPTH])
    phi1 = scaling_function(deep[1:K + 1], K, deep[K + 1:K + 1 + TAIL_DEPTH])
    rep.add("cascade.refinement", refinement_residual(phi0, phi1, deep[0]), 1e-5, f"K={K}")
    blf = basic_limit_function(masks, m, K)
    ints = np.arange(-masks.N, masks.N + 1)
    rep.add("cascade.integer_delta", float(np.max(np.abs(blf.at(ints) - (ints == 0)))), 0.0,
            "basic limit function at integers")
    A = autocorrelation(phi0)
    blf_c = basic_limit_function(masks, m, A.K)
    idx = np.union1d(A.indices, blf_c.indices)
    rep.add("cascade.autocorrelation", float(np.max(np.abs(A.at_index(idx) - blf_c.at_index(idx)))), 1e-3,
            f"midpoint rule, grid {A.K}")
    rep.add("cascade.orthonormality", continuous_orthonormality(phi0, 2 * freqs.n), 1e-3,
            f"shifts up to {2 * freqs.n}")
    rng = np.random.default_rng(seed)
    w = rng.uniform(-64.0, 64.0, 100)
    fam_p = _ListFamily(deep, m, family) if perturb is not None else family.shifted(0)
    fp = fourier_product(fam_p, m, w)
    Fp = fourier_product(masks, m, w)
    rep.add("cascade.fourier_consistency", float(np.max(np.abs(np.abs(fp) ** 2 - np.abs(Fp)))), 1e-8,
            "100 random frequencies in [-64, 64]")

    # wavelets
    Kw = max(K, 12)
    deep_w = [filt(m + 1 + i) for i in range(Kw + TAIL_DEPTH)]
    phi1w = scaling_function(deep_w[:Kw], Kw, deep_w[Kw:])
    psi = wavelet_function(phi1w, deep[0])
    vm = max(vanishing_moment_residual(psi, lam, m) for lam in freqs.lambdas)
    lit = max(vanishing_moment_literal(psi, lam) for lam in freqs.lambdas)
    rep.add("wavelet.vanishing_moments", vm, 1e-6,
            f"exp(-lambda 2^-m t) moments at K={Kw}; unscaled exp(lambda t) form gives {lit:.3g}")
    return rep


class _ListFamily:
    """Symbol provider backed by an explicit list of (possibly perturbed) levels."""

    def __init__(self, filters, m, fallback):
        self._filters = filters
        self._m = m
        self._fallback = fallback

    def symbol(self, k):
        i = k - self._m
        if 0 <= i < len(self._filters):
            return self._filters[i].mu_poly()
        return self._fallback.symbol(k)
