"""Deslauriers-Dubuc symbols and level-dependent exponential interpolatory masks.

The level-``k`` mask of the exponential family has even coefficients
``a_{2j} = delta_{0,j}`` and odd coefficients on degrees ``-(2n-1)..2n-1``. Writing
``g`` for its odd part, ``a(-z) = 1 - g(z)``, so the zero conditions of ``a`` at
``-z_j`` (with multiplicity) are Hermite conditions on ``g - 1`` at the nodes
``z_j = exp(-lambda_j 2^{-(k+1)})``. They are imposed here as divided-difference
conditions ``[t_0..t_r] g = delta_{r,0}``, which stay well conditioned as the
nodes coalesce towards 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import ConditioningError
from .laurent import LaurentPoly, add, derivative, evaluate, mul, power

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FrequencySet:
    """Real frequencies ``lambda_0..lambda_{n-1}``; repeats encode multiplicity."""

    lambdas: tuple

    def __init__(self, lambdas):
        vals = tuple(float(x) for x in np.atleast_1d(np.asarray(lambdas, dtype=float)))
        if len(vals) == 0:
            raise ValueError("at least one frequency is required")
        if not all(np.isfinite(vals)):
            raise ValueError("frequencies must be finite reals")
        object.__setattr__(self, "lambdas", vals)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def symmetrized(self) -> tuple:
        """The 2n-list ``(lambda_0..lambda_{n-1}, -lambda_0..-lambda_{n-1})``."""
        return self.lambdas + tuple(-x for x in self.lambdas)

    def multiplicities(self) -> dict:
        """Multiplicity of each distinct entry of the symmetrized list."""
        out: dict = {}
        for lam in self.symmetrized:
            out[lam] = out.get(lam, 0) + 1
        return out

    @property
    def is_zero(self) -> bool:
        return all(x == 0.0 for x in self.lambdas)

    def nodes(self, k: int) -> list:
        """Distinct nodes ``exp(-lambda 2^{-(k+1)})`` with their multiplicities."""
        h = 2.0 ** (-(k + 1))
        grouped: dict = {}
        for lam, mult in self.multiplicities().items():
            z = float(np.exp(-lam * h))
            grouped[z] = grouped.get(z, 0) + mult
        return sorted(grouped.items())


# ------------------------------------------------------------ classical


def q_polynomial(n: int) -> LaurentPoly:
    """``Q_{n-1}(x) = sum_j C(n+j-1, j) x^j`` as a polynomial in ``x``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return LaurentPoly(np.array([comb(n + j - 1, j) for j in range(n)], dtype=float), 0)


def q_identity_residual(n: int, x: float) -> float:
    """Residual of ``n Q(x) + (x - 1) Q'(x) = (2n-1)!/((n-1)!)^2 x^{n-1}``."""
    q = q_polynomial(n)
    lhs = n * evaluate(q, x).real + (x - 1.0) * evaluate(derivative(q), x).real
    rhs = factorial(2 * n - 1) / factorial(n - 1) ** 2 * x ** (n - 1)
    return abs(lhs - rhs)


@lru_cache(maxsize=None)
def dd_symbol(n: int) -> LaurentPoly:
    """Symbol of the 2n-point Deslauriers-Dubuc scheme (degrees ``-(2n-1)..2n-1``)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    hat = LaurentPoly(np.array([1.0, 2.0, 1.0]), -1)  # (1+z)(1+1/z)
    phi = LaurentPoly(np.array([-0.25, 0.5, -0.25]), -1)
    qc = q_polynomial(n).coeffs
    q_of_phi = LaurentPoly.monomial(0, qc[-1])
    for c in qc[-2::-1]:
        q_of_phi = add(mul(q_of_phi, phi), LaurentPoly.monomial(0, c))
    out = mul(power(hat, n), q_of_phi)
    return LaurentPoly(out.coeffs * (2.0 / 4.0 ** n), out.lo)


# --------------------------------------------------------- exponential


def _complete_homogeneous(x, dmax: int) -> np.ndarray:
    """Table ``H[i, d] = h_d(x_0..x_i)`` of complete homogeneous symmetric polynomials."""
    x = np.asarray(x, dtype=float)
    H = np.zeros((len(x), dmax + 1))
    H[0] = x[0] ** np.arange(dmax + 1)
    for i in range(1, len(x)):
        H[i, 0] = 1.0
        for d in range(1, dmax + 1):
            H[i, d] = H[i - 1, d] + x[i] * H[i, d - 1]
    return H


def divided_difference_power(nodes, p: int) -> np.ndarray:
    """Divided differences ``[t_0..t_r] z^p`` for every prefix ``r`` of ``nodes``.

    Repeated nodes are allowed (confluent differences). Uses
    ``[t_0..t_r] z^p = h_{p-r}(t)`` for ``p >= 0`` and
    ``[t_0..t_r] z^{-q} = (-1)^r h_{q-1}(1/t) / prod(t)`` for ``q > 0``.
    """
    t = np.asarray(nodes, dtype=float)
    R = len(t)
    out = np.zeros(R)
    if p >= 0:
        H = _complete_homogeneous(t, max(p, 0))
        for r in range(R):
            if p - r >= 0:
                out[r] = H[r, p - r]
    else:
        q = -p
        H = _complete_homogeneous(1.0 / t, q - 1)
        prods = np.cumprod(t)
        for r in range(R):
            out[r] = (-1.0) ** r * H[r, q - 1] / prods[r]
    return out


def _odd_degrees(n: int) -> np.ndarray:
    return np.arange(-(2 * n - 1), 2 * n, 2)


def exp_interp_mask(freqs: FrequencySet, k: int) -> LaurentPoly:
    """Level-``k`` interpolatory mask reproducing ``E(Lambda_2n)`` stepwise."""
    if k < 0:
        raise ValueError("level k must be nonnegative")
    return _exp_interp_mask(freqs, int(k))


@lru_cache(maxsize=4096)
def _exp_interp_mask(freqs: FrequencySet, k: int) -> LaurentPoly:
    n = freqs.n
    node_list = [z for z, m in freqs.nodes(k) for _ in range(m)]
    if all(z == 1.0 for z in node_list):
        return dd_symbol(n)
    degs = _odd_degrees(n)
    A = np.column_stack([divided_difference_power(node_list, int(p)) for p in degs])
    rhs = np.zeros(2 * n)
    rhs[0] = 1.0
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ConditioningError(f"mask system at level {k} has condition number {cond:.3g}")
    odd = np.linalg.solve(A, rhs)
    odd = 0.5 * (odd + odd[::-1])  # the symmetric node set forces a_j = a_{-j}
    coeffs = np.zeros(4 * n - 1)
    coeffs[degs + 2 * n - 1] = odd
    coeffs[2 * n - 1] = 1.0
    return LaurentPoly(coeffs, -(2 * n - 1))


def symbol_conditions_residual(a: LaurentPoly, freqs: FrequencySet, k: int) -> dict:
    """Named residuals of the zero, value and derivative conditions at ``+-z_j``."""
    out = {}
    for idx, (z, mult) in enumerate(freqs.nodes(k)):
        out[f"a(-z[{idx}])"] = abs(evaluate(a, -z))
        out[f"a(z[{idx}])-2"] = abs(evaluate(a, z) - 2.0)
        for r in range(1, mult):
            d = derivative(a, r)
            out[f"d{r}a(-z[{idx}])"] = abs(evaluate(d, -z))
            out[f"d{r}a(z[{idx}])"] = abs(evaluate(d, z))
    return out


def interpolatory_residual(a: LaurentPoly) -> float:
    """Max coefficient deviation of ``a(z) + a(-z)`` from the constant 2."""
    worst = 0.0
    for d, c in zip(a.degrees, a.coeffs):
        if d % 2 == 0:
            worst = max(worst, abs(2.0 * c - (2.0 if d == 0 else 0.0)))
    if a.coeff(0) == 0.0:
        worst = max(worst, 2.0)
    return worst


def circle_min(a: LaurentPoly, samples: int = 4096) -> float:
    """Minimum of the (real) symbol over equispaced points of the unit circle."""
    w = 2 * np.pi * np.arange(samples) / samples
    return float(np.min(evaluate(a, np.exp(1j * w)).real))


def equivalence_gap(freqs: FrequencySet, k: int) -> float:
    """l1 distance between the level-``k`` mask and the classical symbol."""
    a = exp_interp_mask(freqs, k)
    p = dd_symbol(freqs.n)
    lo, hi = -(2 * freqs.n - 1), 2 * freqs.n - 1
    return float(np.sum(np.abs(a.dense(lo, hi) - p.dense(lo, hi))))


@dataclass(frozen=True)
class MaskFamily:
    """Level masks ``a^[shift+k]`` of a (possibly stationary) scheme."""

    freqs: FrequencySet
    shift: int = 0
    stationary: bool = False

    @classmethod
    def classical(cls, n: int) -> "MaskFamily":
        return cls(FrequencySet([0.0] * n), 0, True)

    @property
    def n(self) -> int:
        return self.freqs.n

    @property
    def N(self) -> int:
        """Support bound: every mask lives on degrees ``-N..N``."""
        return 2 * self.n - 1

    def symbol(self, k: int) -> LaurentPoly:
        if self.stationary:
            return dd_symbol(self.n)
        return exp_interp_mask(self.freqs, self.shift + k)

    def shifted(self, m: int) -> "MaskFamily":
        return MaskFamily(self.freqs, self.shift + m, self.stationary)

    @property
    def interpolatory(self) -> bool:
        return True


# ------------------------------------------------------------- refine


def refine(values, mask: LaurentPoly, offset: int = 0, mode: str = "full"):
    """One subdivision step ``f_j^{k+1} = sum_l a_{j-2l} f_l^k``.

    ``values`` is either an array of samples with index ``offset`` for its
    first entry, or a mapping ``{index: value}``. The result uses the same
    representation: ``(array, new_offset)`` or a dict.

    ``mode="full"`` treats samples outside the window as zero.
    ``mode="valid"`` keeps only outputs whose whole stencil lies inside the
    window; a window of length ``L`` then loses about ``(hi - lo)/2`` samples
    per side, i.e. ``N`` samples for a mask on ``-N..N``. A ``ValueError`` is
    raised when nothing valid remains.
    """
    if isinstance(values, dict):
        if not values:
            return {}
        lo_idx = min(values)
        arr = np.zeros(max(values) - lo_idx + 1)
        for key, val in values.items():
            arr[key - lo_idx] = val
        out, off = refine(arr, mask, lo_idx, mode)
        return {int(off + i): float(v) for i, v in enumerate(out)}

    f = np.asarray(values, dtype=float)
    L = len(f)
    up = np.zeros(2 * L - 1)
    up[::2] = f
    full = np.convolve(up, mask.coeffs)
    full_off = 2 * offset + mask.lo
    if mode == "full":
        return full, full_off
    if mode != "valid":
        raise ValueError(f"unknown refine mode {mode!r}")
    j_lo = 2 * offset + mask.hi
    j_hi = 2 * (offset + L - 1) + mask.lo
    if j_hi < j_lo:
        raise ValueError(
            f"window of {L} samples is too short for a mask on degrees {mask.lo}..{mask.hi}"
        )
    return full[j_lo - full_off: j_hi - full_off + 1], j_lo
