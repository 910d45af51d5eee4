"""Dyadic tabulation of limit functions, scaling functions and wavelets.

Grid convention: sample ``i`` of a :class:`DyadicSamples` on grid ``K`` sits
at ``x = (offset + i) / 2**K``.

Scaling functions obey ``phi_m(t) = sum_j mu_j phi_{m+1}(2t + j)``, i.e. they
are limits of subdivision run with the reflected masks ``mu_{-j}``. With
``c`` the subdivision output after ``K`` passes from a delta at level ``m``,

    phi_m(i / 2^K) = sum_l c_l phi_{m+K}(i - l),

so exact dyadic values follow once ``phi_{m+K}`` is known at the integers.
Those integer values are obtained by running the level operators
``T_k[l, l'] = mu^[k]_{l' - 2l}`` backwards from the eigenvector of the
classical (stationary) operator, ``tail`` levels deeper. Interpolatory
families need no tail: their limit functions equal ``delta`` at integers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .factory import FilterFamily, FilterPair, daubechies_filter
from .laurent import LaurentPoly, evaluate, reflect

TAIL_DEPTH = 24


@dataclass(frozen=True, eq=False)
class DyadicSamples:
    """Samples of a compactly supported function on ``2^{-K} Z``."""

    K: int
    values: np.ndarray
    offset: int
    support_lo: float
    support_hi: float

    @property
    def h(self) -> float:
        return 2.0 ** (-self.K)

    @property
    def x(self) -> np.ndarray:
        return (self.offset + np.arange(len(self.values))) * self.h

    @property
    def indices(self) -> np.ndarray:
        return self.offset + np.arange(len(self.values))

    def at_index(self, idx) -> np.ndarray:
        """Values at grid indices ``idx`` (zero outside the stored window)."""
        idx = np.asarray(idx)
        pos = idx - self.offset
        ok = (pos >= 0) & (pos < len(self.values))
        out = np.zeros(idx.shape)
        out[ok] = self.values[pos[ok]]
        return out

    def at(self, x) -> np.ndarray:
        """Values at dyadic points ``x`` lying on the grid."""
        scaled = np.asarray(x, dtype=float) * 2.0 ** self.K
        idx = np.rint(scaled).astype(int)
        if np.any(np.abs(scaled - idx) > 1e-9):
            raise GridMismatchError(f"points are not on the grid 2^-{self.K}")
        return self.at_index(idx)

    def coarsen(self, K: int) -> "DyadicSamples":
        """Restrict to the coarser grid ``2^{-K} Z`` (``K <= self.K``)."""
        if K > self.K:
            raise GridMismatchError("cannot coarsen to a finer grid")
        step = 2 ** (self.K - K)
        first = -(-self.offset // step)
        last = (self.offset + len(self.values) - 1) // step
        idx = np.arange(first, last + 1) * step
        return DyadicSamples(K, self.at_index(idx), first, self.support_lo, self.support_hi)

    def riemann(self, weights=None) -> float:
        vals = self.values if weights is None else self.values * weights
        return float(np.sum(vals) * self.h)


def _wrap(values, offset, K, lo, hi) -> DyadicSamples:
    return DyadicSamples(int(K), np.asarray(values, dtype=float), int(offset), float(lo), float(hi))


def _delta_cascade(symbols) -> tuple:
    """Subdivision of a delta through the given masks; returns ``(values, offset)``."""
    vals, off = np.array([1.0]), 0
    for a in symbols:
        up = np.zeros(2 * len(vals) - 1)
        up[::2] = vals
        vals = np.convolve(up, a.coeffs)
        off = 2 * off + a.lo
    return vals, off


def basic_limit_function(masks, m: int, K: int) -> DyadicSamples:
    """Limit function of the interpolatory scheme started at level ``m``, on grid ``K``.

    ``masks`` provides ``symbol(k)``; passes use ``symbol(m), ..., symbol(m+K-1)``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    vals, off = _delta_cascade([masks.symbol(m + k) for k in range(K)])
    return _wrap(vals, off, K, -masks.N, masks.N)


def _level_operator(mu: LaurentPoly, n: int) -> np.ndarray:
    """``T[l, l'] = mu_{l' - 2l}`` on the integer window ``-n..n-1``."""
    idx = np.arange(-n, n)
    T = np.zeros((2 * n, 2 * n))
    for r, l in enumerate(idx):
        for c, lp in enumerate(idx):
            T[r, c] = mu.coeff(int(lp - 2 * l))
    return T


def _stationary_integer_values(mu: LaurentPoly, n: int) -> np.ndarray:
    """Projection of ``delta_0`` onto the eigenvalue-1 eigenspace of the stationary operator."""
    T = _level_operator(mu, n)
    w, V = np.linalg.eig(T)
    sel = np.abs(w - 1.0) < 1e-8
    if not np.any(sel):
        raise ValueError("stationary operator has no eigenvalue 1")
    Vinv = np.linalg.inv(V)
    P = (V[:, sel] @ Vinv[sel, :]).real
    e0 = np.zeros(2 * n)
    e0[n] = 1.0
    return P @ e0


def integer_values(filters, n: int, root_side: str = "outside") -> np.ndarray:
    """``phi_k`` at the integers ``-n..n-1`` for ``k`` the level of ``filters[0]``.

    ``filters`` are consecutive levels ``k, k+1, ...``; the values at the
    deepest level are taken from the classical stationary operator.
    """
    v = _stationary_integer_values(daubechies_filter(n, root_side).mu_poly(), n)
    for f in reversed(list(filters)):
        v = _level_operator(f.mu_poly(), n) @ v
    return v


def scaling_function(filters, K: int, tail=(), method: str = "exact") -> DyadicSamples:
    """Tabulate ``phi_m`` on grid ``K`` from consecutive filter levels ``m..m+K-1``.

    ``method="exact"`` combines the cascade coefficients with ``phi_{m+K}``
    at the integers. ``tail`` holds further levels ``m+K, m+K+1, ...`` used
    only for those integer values; the error is of order
    ``2^{-(m+K+len(tail))}``.

    ``method="cascade"`` returns the plain subdivision output of a delta,
    whose error only decays like the Hoelder order of ``phi`` times ``K``.
    """
    filters = list(filters)
    if len(filters) != K:
        raise ValueError(f"expected {K} filter levels, got {len(filters)}")
    ref = filters[0]
    n = ref.n
    vals, off = _delta_cascade([reflect(f.mu_poly()) for f in filters])
    if method == "cascade":
        return _wrap(vals, off, K, -n, n - 1)
    if method != "exact":
        raise ValueError(f"unknown tabulation method {method!r}")
    v = integer_values(list(tail), n, ref.root_side)
    full = np.convolve(vals, v)
    return _wrap(full, off - n, K, -n, n - 1)


def tabulate_scaling(family: FilterFamily, m: int, K: int, tail_depth: int = TAIL_DEPTH,
                     method: str = "exact") -> DyadicSamples:
    """Convenience wrapper: ``phi_m`` of ``family`` on grid ``K``."""
    lv = family.levels(m, K + (tail_depth if method == "exact" else 0))
    return scaling_function(lv[:K], K, lv[K:], method)


def refinement_residual(phi_m: DyadicSamples, phi_m1: DyadicSamples, mu, mu_lo: int | None = None) -> float:
    """``max_t |phi_m(t) - sum_j mu_j phi_{m+1}(2t + j)|`` over grid points ``t``."""
    if phi_m.K != phi_m1.K:
        raise GridMismatchError(f"grids differ: K={phi_m.K} vs K={phi_m1.K}")
    if isinstance(mu, FilterPair):
        mu, mu_lo = mu.mu, mu.mu_lo
    elif isinstance(mu, LaurentPoly):
        mu, mu_lo = mu.coeffs, mu.lo
    mu = np.asarray(mu, dtype=float)
    if mu_lo is None:
        mu_lo = -(len(mu) // 2) + 1
    K = phi_m.K
    scale = 2 ** K
    lo1, hi1 = phi_m1.offset, phi_m1.offset + len(phi_m1.values) - 1
    mu_hi = mu_lo + len(mu) - 1
    i_lo = min(phi_m.offset, (lo1 - mu_hi * scale) // 2)
    i_hi = max(phi_m.offset + len(phi_m.values) - 1, -(-(hi1 - mu_lo * scale) // 2))
    i = np.arange(i_lo, i_hi + 1)
    rhs = np.zeros(len(i))
    for j, c in enumerate(mu):
        rhs += c * phi_m1.at_index(2 * i + (mu_lo + j) * scale)
    return float(np.max(np.abs(phi_m.at_index(i) - rhs)))


def wavelet_function(phi_m1: DyadicSamples, nu, nu_lo: int | None = None) -> DyadicSamples:
    """``psi_m(t) = sum_j nu_j phi_{m+1}(2t - j)`` on the grid of ``phi_m1``."""
    if isinstance(nu, FilterPair):
        nu, nu_lo = nu.nu, nu.nu_lo
    nu = np.asarray(nu, dtype=float)
    if nu_lo is None:
        nu_lo = -(len(nu) // 2) + 2
    K = phi_m1.K
    scale = 2 ** K
    lo1, hi1 = phi_m1.offset, phi_m1.offset + len(phi_m1.values) - 1
    nu_hi = nu_lo + len(nu) - 1
    i_lo = -(-(lo1 + nu_lo * scale) // 2)
    i_hi = (hi1 + nu_hi * scale) // 2
    i = np.arange(i_lo, i_hi + 1)
    vals = np.zeros(len(i))
    for j, c in enumerate(nu):
        vals += c * phi_m1.at_index(2 * i - (nu_lo + j) * scale)
    lo = (phi_m1.support_lo + nu_lo) / 2
    hi = (phi_m1.support_hi + nu_hi) / 2
    return _wrap(vals, i_lo, K, lo, hi)


def default_depth(omega) -> int:
    w = float(np.max(np.abs(np.atleast_1d(omega))))
    return max(30, int(np.ceil(np.log2(1.0 + w))) + 25)


def fourier_product(masks, m: int, omega, depth: int | None = None, return_tail: bool = False):
    """Truncated product ``prod_{k=1}^{P} symbol^[m+k-1](e^{i omega 2^{-k}}) / 2``.

    ``omega`` may be an array. With ``return_tail`` the estimate
    ``sum_{k>P} |symbol^[m+k-1](1)/2 - 1|`` of the neglected factors'
    deviation from 1 is returned as well (40 further levels).
    """
    om = np.asarray(omega, dtype=float)
    P = default_depth(om) if depth is None else int(depth)
    prod = np.ones(om.shape, dtype=complex)
    for k in range(1, P + 1):
        prod *= 0.5 * evaluate(masks.symbol(m + k - 1), np.exp(1j * om * 2.0 ** (-k)))
    out = complex(prod) if om.ndim == 0 else prod
    if not return_tail:
        return out
    tail = sum(abs(0.5 * evaluate(masks.symbol(m + k - 1), 1.0).real - 1.0) for k in range(P + 1, P + 41))
    return out, float(tail)


def autocorrelation(phi: DyadicSamples, rule: str = "midpoint") -> DyadicSamples:
    """Autocorrelation ``A(x) = int phi(t) phi(t - x) dt`` at dyadic ``x``.

    ``rule="midpoint"`` uses the odd samples of ``phi`` (grid ``K``) as
    midpoints of the cells of grid ``K-1`` and returns ``A`` on grid ``K-1``.
    Jumps of ``phi`` can only sit at points of the coarser grid here, so the
    rule stays second order for the piecewise smooth order-0 case.
    ``rule="riemann"`` is the plain sum ``sum_t phi(t) phi(t - x) 2^{-K}`` on
    grid ``K``, first order at jumps.
    """
    width = phi.support_hi - phi.support_lo
    if rule == "riemann":
        L = len(phi.values)
        vals = np.correlate(phi.values, phi.values, mode="full") * phi.h
        return _wrap(vals, -(L - 1), phi.K, -width, width)
    if rule != "midpoint":
        raise ValueError(f"unknown quadrature rule {rule!r}")
    if phi.K < 1:
        raise GridMismatchError("midpoint rule needs K >= 1")
    first = phi.offset if phi.offset % 2 else phi.offset - 1
    last = phi.offset + len(phi.values) - 1
    odd = phi.at_index(np.arange(first, last + 2, 2))
    L = len(odd)
    vals = np.correlate(odd, odd, mode="full") * (2.0 * phi.h)
    return _wrap(vals, -(L - 1), phi.K - 1, -width, width)
