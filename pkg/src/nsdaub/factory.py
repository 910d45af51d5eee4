"""Spectral factorization of interpolatory symbols into orthonormal low-pass filters.

Each level mask factors as ``a(z) = prod_j (z + z_j)/2 * b(z)`` over the 2n
nodes ``z_j``. The roots of ``b`` come in inverse pairs; keeping one member of
each pair together with the n linear factors ``z + z_j`` for the original
(non-negated) frequencies gives ``M`` with ``a(z) = M(z) M(1/z) / 2``.

Roots of the level-``k`` factor converge to the classical Daubechies roots as
``k`` grows. :func:`k0_detect` finds the level from which every tracked root
sits in a ball that is disjoint from the others, from the unit circle and,
for non-real roots, from the real axis, so that the choice of pair member is
unambiguous.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    ConditioningError,
    FactorizationError,
    PairingError,
    RootFindingError,
    SelectionError,
    TrackingError,
)
from .laurent import LaurentPoly, RootSet, evaluate, from_roots, inverse_pairs, roots
from .schemes import FrequencySet, dd_symbol, exp_interp_mask

DEFLATION_TOL = 1e-9
PAIR_TOL = 1e-7
SIDES = ("outside", "inside")
K0_PROBE_MAX = 40


@dataclass(frozen=True)
class SymbolFactorization:
    """``a = prod (z + z_j)/2 * bPart`` with the 2n linear roots ``-z_j``."""

    linear_roots: tuple
    b_part: LaurentPoly
    level: int
    residual: float

    @property
    def b_roots(self) -> RootSet:
        return roots(self.b_part)


@dataclass(frozen=True, eq=False)
class FilterPair:
    """Low-pass ``mu`` on degrees ``-n+1..n`` and wavelet ``nu`` on ``-n+2..n+1``."""

    mu: np.ndarray
    nu: np.ndarray
    level: int
    root_side: str
    chosen_roots: tuple
    n: int
    lambdas: tuple = field(default=())

    @property
    def mu_lo(self) -> int:
        return -self.n + 1

    @property
    def nu_lo(self) -> int:
        return -self.n + 2

    def mu_poly(self) -> LaurentPoly:
        return LaurentPoly(self.mu, self.mu_lo)

    def nu_poly(self) -> LaurentPoly:
        return LaurentPoly(self.nu, self.nu_lo)

    def mu_dict(self) -> dict:
        return {int(self.mu_lo + i): float(c) for i, c in enumerate(self.mu)}

    def nu_dict(self) -> dict:
        return {int(self.nu_lo + i): float(c) for i, c in enumerate(self.nu)}

    def perturbed(self, index: int, delta: float) -> "FilterPair":
        """Copy with ``mu[index] += delta`` and ``nu`` recomputed (fault injection)."""
        mu = np.array(self.mu)
        mu[index] += delta
        return FilterPair(mu, wavelet_filter(mu), self.level, self.root_side,
                          self.chosen_roots, self.n, self.lambdas)


# ----------------------------------------------------------- factoring


def _linear_factor(nodes) -> LaurentPoly:
    desc = np.array([1.0])
    for z in nodes:
        desc = np.convolve(desc, np.array([0.5, 0.5 * z]))
    return LaurentPoly(desc[::-1], 0)


def factor_symbol(a: LaurentPoly, freqs: FrequencySet, k: int) -> SymbolFactorization:
    """Deflate the 2n known roots ``-z_j`` from the level-``k`` mask.

    ``bPart`` is fitted by least squares on the convolution matrix of the
    linear factor and lives on degrees ``-(2n-1)..-1``.
    """
    n = freqs.n
    nodes = [z for z, m in freqs.nodes(k) for _ in range(m)]
    lin = _linear_factor(nodes)
    lo, hi = -(2 * n - 1), 2 * n - 1
    target = a.dense(lo, hi)
    nb = 2 * n - 1
    conv = np.zeros((len(target), nb))
    for col in range(nb):
        conv[col: col + len(lin.coeffs), col] = lin.coeffs
    b, *_ = np.linalg.lstsq(conv, target, rcond=None)
    residual = float(np.max(np.abs(conv @ b - target)))
    if residual > DEFLATION_TOL:
        raise FactorizationError(
            f"deflating the linear roots at level {k} leaves residual {residual:.3g}"
        )
    b_part = LaurentPoly(b, lo)
    if len(b_part.coeffs) > 1:
        pairing = inverse_pairs(roots(b_part), tol=PAIR_TOL)
        if pairing.unpaired or pairing.exceptional:
            raise FactorizationError(
                f"b-part roots at level {k} are not closed under inversion: "
                f"unpaired {pairing.unpaired}, on circle {pairing.exceptional}"
            )
    return SymbolFactorization(tuple(-z for z in nodes), b_part, int(k), residual)


def _pair_members(fact: SymbolFactorization):
    """Yield ``(inside_group, outside_group)`` for each inverse pair or quadruple."""
    if len(fact.b_part.coeffs) <= 1:
        return []
    pairing = inverse_pairs(fact.b_roots, tol=PAIR_TOL)
    groups = [((a,), (b,)) for a, b in pairing.pairs]
    groups += [((q[0], q[1]), (q[3], q[2])) for q in pairing.quadruples]
    return groups


def spectral_select(fact: SymbolFactorization, root_side: str = "outside", reference=None) -> list:
    """Choose one member (with its conjugate) of each inverse pair of b-roots.

    With ``reference`` roots the member nearer to a reference root wins, and
    each reference root may be claimed at most once. Otherwise the member on
    ``root_side`` of the unit circle is taken.
    """
    if root_side not in SIDES:
        raise ValueError(f"root side must be one of {SIDES}, got {root_side!r}")
    groups = _pair_members(fact)
    chosen: list = []
    if reference is None:
        for inside, outside in groups:
            chosen.extend(outside if root_side == "outside" else inside)
        return chosen

    refs = np.array(reference.expanded() if isinstance(reference, RootSet) else list(reference), dtype=complex)
    claimed: set = set()
    for inside, outside in groups:
        d_in = np.abs(refs - inside[0])
        d_out = np.abs(refs - outside[0])
        if abs(d_in.min() - d_out.min()) <= 1e-12 * max(1.0, d_in.min()):
            raise SelectionError(f"pair {inside[0]} / {outside[0]} is equidistant from the reference roots")
        group = inside if d_in.min() < d_out.min() else outside
        for member in group:
            idx = int(np.argmin(np.abs(refs - member)))
            if idx in claimed:
                raise SelectionError(f"reference root {refs[idx]} claimed twice")
            claimed.add(idx)
        chosen.extend(group)
    return chosen


def wavelet_filter(mu, mu_lo: int | None = None) -> np.ndarray:
    """``nu_j = (-1)^{j+1} mu_{j-1}``; returned on degrees ``mu_lo+1 .. mu_hi+1``.

    For the standard layout (``mu`` on ``-n+1..n``) ``mu_lo`` may be omitted.
    """
    mu = np.asarray(mu, dtype=float)
    if mu_lo is None:
        mu_lo = -(len(mu) // 2) + 1
    degrees = np.arange(mu_lo + 1, mu_lo + 1 + len(mu))
    signs = np.where((degrees + 1) % 2 == 0, 1.0, -1.0)
    return signs * mu


def _assemble(a: LaurentPoly, base_nodes, chosen, n: int, k: int, side: str, lambdas) -> FilterPair:
    all_roots = [complex(-z) for z in base_nodes] + [complex(c) for c in chosen]
    shape = from_roots(RootSet(tuple(all_roots), (1,) * len(all_roots), 1.0, 0))
    target = np.sqrt(2.0 * evaluate(a, 1.0).real)
    mu = shape.dense(0, 2 * n - 1) * (target / evaluate(shape, 1.0).real)
    return FilterPair(mu, wavelet_filter(mu), int(k), side, tuple(complex(c) for c in chosen), n, tuple(lambdas))


@lru_cache(maxsize=None)
def daubechies_filter(n: int, root_side: str = "outside") -> FilterPair:
    """Classical orthonormal filter from the 2n-point Deslauriers-Dubuc symbol, ``M(1) = 2``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    a = dd_symbol(n)
    freqs = FrequencySet([0.0] * n)
    fact = factor_symbol(a, freqs, 0)
    chosen = spectral_select(fact, root_side)
    return _assemble(a, [1.0] * n, chosen, n, 0, root_side, freqs.lambdas)


def classical_roots(n: int) -> RootSet:
    """All roots of the classical b-part (the limits of the tracked roots)."""
    fact = factor_symbol(dd_symbol(n), FrequencySet([0.0] * n), 0)
    if len(fact.b_part.coeffs) <= 1:
        return RootSet((), (), 1.0)
    return fact.b_roots


def exp_filter(freqs: FrequencySet, k: int, root_side: str = "outside", track: bool = True) -> FilterPair:
    """Level-``k`` low-pass/wavelet pair for the exponential family.

    With ``track=True`` the roots are selected by proximity to the classical
    Daubechies roots on ``root_side``, and levels below :func:`k0_detect`
    are refused with :class:`TrackingError`.
    """
    if root_side not in SIDES:
        raise ValueError(f"root side must be one of {SIDES}, got {root_side!r}")
    return _exp_filter(freqs, int(k), root_side, bool(track))


@lru_cache(maxsize=4096)
def _exp_filter(freqs: FrequencySet, k: int, root_side: str, track: bool) -> FilterPair:
    n = freqs.n
    if k < 0:
        raise ValueError("level k must be nonnegative")
    reference = None
    if track:
        report = k0_detect(freqs)
        if k < report.k0:
            raise TrackingError(
                f"level {k} is below k0 = {report.k0}; root tracking is only guaranteed from k0 on",
                k0=report.k0,
            )
        if n > 1 and not freqs.is_zero:
            reference = spectral_select(
                factor_symbol(dd_symbol(n), FrequencySet([0.0] * n), 0), root_side
            )
    a = exp_interp_mask(freqs, k)
    fact = factor_symbol(a, freqs, k)
    chosen = spectral_select(fact, root_side, reference)
    h = 2.0 ** (-(k + 1))
    base = [float(np.exp(-lam * h)) for lam in freqs.lambdas]
    return _assemble(a, base, chosen, n, k, root_side, freqs.lambdas)


def filter_equivalence_gap(freqs: FrequencySet, k: int, root_side: str = "outside") -> float:
    """``max_j |mu_j^[k] - mu_j^D|`` against the classical filter on the same side."""
    f = exp_filter(freqs, k, root_side, track=False)
    d = daubechies_filter(freqs.n, root_side)
    return float(np.max(np.abs(f.mu - d.mu)))


def normalization_gap(freqs: FrequencySet, k: int) -> float:
    """``|M^[k](1)/2 - 1|``; only the symbol value at 1 is needed."""
    a = exp_interp_mask(freqs, k)
    return abs(0.5 * np.sqrt(2.0 * evaluate(a, 1.0).real) - 1.0)


# ------------------------------------------------------------ tracking


def _level_roots(freqs: FrequencySet, k: int) -> np.ndarray:
    fact = factor_symbol(exp_interp_mask(freqs, k), freqs, k)
    return np.array(fact.b_roots.expanded(), dtype=complex)


def _match(reference: np.ndarray, found: np.ndarray, k: int) -> np.ndarray:
    """Distance from each reference root to its nearest found root (one-to-one)."""
    if len(found) != len(reference):
        raise TrackingError(f"level {k}: expected {len(reference)} roots, found {len(found)}")
    idx = [int(np.argmin(np.abs(found - r))) for r in reference]
    if len(set(idx)) != len(idx):
        raise TrackingError(f"level {k}: two classical roots map to the same root")
    return np.abs(found[idx] - reference)


@dataclass
class K0Report:
    """Outcome of :func:`k0_detect` with the logged ball conditions."""

    k0: int
    C: float
    radius: float
    conditions: dict
    distances: dict
    skipped_levels: list


def k0_detect(freqs: FrequencySet) -> K0Report:
    """Smallest level from which root balls of radius ``C 2^{-k}`` separate.

    ``C = 2 max_k 2^k d(k)`` over probe levels ``0..40``, with ``d(k)`` the
    largest distance between a classical root and its tracked counterpart.
    The three conditions are: every ball misses the unit circle, balls are
    pairwise disjoint, and balls around non-real roots miss the real axis.
    """
    return _k0_detect(freqs)


@lru_cache(maxsize=256)
def _k0_detect(freqs: FrequencySet) -> K0Report:
    n = freqs.n
    if n == 1 or freqs.is_zero:
        conds = {"circle": True, "disjoint": True, "real_axis": True}
        return K0Report(0, 0.0, 0.0, conds, {}, [])
    ref = np.array(classical_roots(n).expanded(), dtype=complex)
    distances: dict = {}
    skipped: list = []
    for k in range(K0_PROBE_MAX + 1):
        try:
            distances[k] = float(np.max(_match(ref, _level_roots(freqs, k), k)))
        except (ConditioningError, FactorizationError, RootFindingError, PairingError, TrackingError) as exc:
            skipped.append((k, str(exc)))
    if not distances:
        raise TrackingError("no probe level produced trackable roots")
    C = 2.0 * max(2.0 ** k * d for k, d in distances.items())

    circle_gap = float(np.min(np.abs(np.abs(ref) - 1.0)))
    pair_gap = min(
        (abs(ref[i] - ref[j]) for i in range(len(ref)) for j in range(i + 1, len(ref))),
        default=np.inf,
    )
    nonreal = [abs(r.imag) for r in ref if abs(r.imag) > 1e-12]
    axis_gap = min(nonreal) if nonreal else np.inf
    last_skip = max((k for k, _ in skipped), default=-1)
    for k in range(last_skip + 1, K0_PROBE_MAX + 1):
        r = C * 2.0 ** (-k)
        conds = {
            "circle": bool(circle_gap > r),
            "disjoint": bool(pair_gap > 2 * r),
            "real_axis": bool(axis_gap > r),
        }
        if all(conds.values()):
            conds.update(circle_margin=circle_gap - r, disjoint_margin=pair_gap - 2 * r,
                         real_axis_margin=axis_gap - r)
            return K0Report(k, C, r, conds, distances, skipped)
    raise TrackingError(f"root balls do not separate for any level up to {K0_PROBE_MAX}")


def root_tracking_report(freqs: FrequencySet, k_range) -> dict:
    """Distances ``|alpha_j^[k] - alpha_j|`` per classical root and level, with fitted log2 slopes."""
    ks = list(k_range)
    n = freqs.n
    ref = np.array(classical_roots(n).expanded(), dtype=complex)
    table = np.array([_match(ref, _level_roots(freqs, k), k) for k in ks]) if len(ref) else np.zeros((len(ks), 0))
    slopes = []
    for j in range(len(ref)):
        col = table[:, j]
        if np.all(col > 0) and len(ks) >= 2:
            slopes.append(float(np.polyfit(ks, np.log2(col), 1)[0]))
        else:
            slopes.append(float("-inf"))
    return {"k": ks, "roots": [complex(r) for r in ref], "distances": table, "slopes": slopes}


@dataclass(frozen=True)
class FilterFamily:
    """Per-level low-pass symbols ``M^[shift+k]`` of the orthonormal family.

    Levels are built with ``track=False`` (selection by ``root_side``); from
    ``k0`` on this coincides with the tracked selection, and it keeps the
    coarse levels available for tabulation and Fourier products.
    """

    freqs: FrequencySet
    root_side: str = "outside"
    shift: int = 0
    stationary: bool = False

    @classmethod
    def classical(cls, n: int, root_side: str = "outside") -> "FilterFamily":
        return cls(FrequencySet([0.0] * n), root_side, 0, True)

    @property
    def n(self) -> int:
        return self.freqs.n

    @property
    def N(self) -> int:
        return self.n

    @property
    def interpolatory(self) -> bool:
        return False

    def filter(self, k: int) -> FilterPair:
        if self.stationary:
            return daubechies_filter(self.n, self.root_side)
        return exp_filter(self.freqs, self.shift + k, self.root_side, track=False)

    def symbol(self, k: int) -> LaurentPoly:
        return self.filter(k).mu_poly()

    def shifted(self, m: int) -> "FilterFamily":
        return FilterFamily(self.freqs, self.root_side, self.shift + m, self.stationary)

    def levels(self, m: int, count: int) -> list:
        return [self.filter(m + i) for i in range(count)]
